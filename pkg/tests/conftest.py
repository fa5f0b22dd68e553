import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def _criterion(item):
    mark = item.get_closest_marker("criterion")
    return None if mark is None else (int(mark.args[0]), str(mark.args[1]))


def pytest_collection_modifyitems(items):
    for item in items:
        crit = _criterion(item)
        if crit:
            _results.setdefault(crit[0], {"title": crit[1], "outcomes": [], "notes": []})


def pytest_runtest_makereport(item, call):
    crit = _criterion(item)
    if crit is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _results[crit[0]]["outcomes"].append(call.excinfo is None)


@pytest.fixture
def note(request):
    """Attach a free-form observation to the criterion line of the current test."""
    crit = _criterion(request.node)

    def add(text: str) -> None:
        if crit is not None:
            _results[crit[0]]["notes"].append(text)

    return add


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        outcomes = entry["outcomes"]
        if not outcomes:
            verdict = "NOT RUN"
        else:
            verdict = "PASS" if all(outcomes) else "FAIL"
        tr.write_line(f"[{verdict}] criterion {number:2d}: {entry['title']}")
        for text in entry["notes"]:
            tr.write_line(f"           {text}")
