import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppsc.instance import make_instance
from ppsc.oracle import (
    coverage_vector,
    is_feasible,
    monte_carlo_estimate,
    oracle_table,
    probability,
    tail_probability,
    update_coverage,
)

from .helpers import random_instance, ref_coverage, ref_coverage_by_arcs, ref_tail

TWO_BY_TWO = [[0.9, 0.9], [0.5, 0.5]]


def test_lt_coverage_is_additive():
    inst = make_instance([[0.3], [0.4]], [1, 1], 1, 0.1, "linear_threshold")
    assert coverage_vector(inst, [1, 1]).p[0] == pytest.approx(0.7)


def test_ic_coverage_two_arcs():
    inst = make_instance([[0.9], [0.5]], [1, 1], 1, 0.1)
    assert coverage_vector(inst, [1, 1]).p[0] == pytest.approx(0.95, abs=1e-15)
    assert ref_coverage_by_arcs(inst.a.tolist(), [1, 1])[0] == pytest.approx(0.95, abs=1e-15)


def test_empty_selection_covers_nothing():
    inst = make_instance(TWO_BY_TWO, [1, 1], 1, 0.1)
    assert not coverage_vector(inst, [0, 0]).p.any()


def test_update_ic_matches_recompute():
    inst = make_instance([[0.9], [0.5]], [1, 1], 1, 0.1)
    cv = update_coverage(coverage_vector(inst, [1, 0]), 1)
    assert cv.p[0] == pytest.approx(0.95, abs=1e-15)
    assert cv.x == (1, 1)


def test_update_lt_additive():
    inst = make_instance([[0.3], [0.4]], [1, 1], 1, 0.1, "linear_threshold")
    assert update_coverage(coverage_vector(inst, [1, 0]), 1).p[0] == pytest.approx(0.7)


def test_update_with_zero_row_is_identity():
    inst = make_instance([[0.3, 0.2], [0.0, 0.0]], [1, 1], 1, 0.1)
    cv = coverage_vector(inst, [1, 0])
    assert np.array_equal(update_coverage(cv, 1).p, cv.p)


def test_update_rejects_selected_index():
    inst = make_instance(TWO_BY_TWO, [1, 1], 1, 0.1)
    with pytest.raises(ValueError):
        update_coverage(coverage_vector(inst, [1, 0]), 0)


def test_tail_small_cases():
    assert tail_probability(np.array([0.9, 0.9]), 0) == 1.0
    assert tail_probability(np.array([0.9, 0.9]), 2) == pytest.approx(0.81, abs=1e-15)
    assert tail_probability(np.array([0.9, 0.9]), 1) == pytest.approx(0.99, abs=1e-15)
    assert tail_probability(np.array([0.5, 0.5]), 1) == pytest.approx(0.75, abs=1e-15)


def test_tail_rejects_out_of_range_target():
    with pytest.raises(ValueError):
        tail_probability(np.array([0.5]), 2)
    with pytest.raises(ValueError):
        tail_probability(np.array([0.5]), -1)


def test_is_feasible_cases():
    inst = make_instance(TWO_BY_TWO, [2, 1], 2, 0.25)
    ok, prob = is_feasible(inst, [1, 0])
    assert ok and prob == pytest.approx(0.81)
    ok, prob = is_feasible(inst, [0, 0])
    assert not ok and prob == 0.0
    sure = make_instance(np.ones((2, 3)), [1, 1], 3, 0.0)
    assert is_feasible(sure, [1, 1]) == (True, 1.0)


def test_monte_carlo_deterministic_instance():
    inst = make_instance([[1.0, 0.0], [0.0, 1.0]], [1, 1], 2, 0.1)
    assert monte_carlo_estimate(inst, [1, 1], 2, 1000, 0) == (1.0, 0.0)
    assert monte_carlo_estimate(inst, [1, 0], 2, 1000, 0) == (0.0, 0.0)


def test_monte_carlo_matches_dp():
    inst = make_instance(TWO_BY_TWO, [1, 1], 2, 0.1)
    est, se = monte_carlo_estimate(inst, [1, 0], 2, 10**6, 42)
    assert abs(est - 0.81) <= 3 * se


def test_monte_carlo_single_sample():
    inst = make_instance(TWO_BY_TWO, [1, 1], 1, 0.1)
    est, _ = monte_carlo_estimate(inst, [1, 1], 1, 1, 7)
    assert est in (0.0, 1.0)
    with pytest.raises(ValueError):
        monte_carlo_estimate(inst, [1, 1], 1, 0, 7)


def test_item_order_invariance():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = rng.random(9)
        tau = int(rng.integers(0, 10))
        perm = rng.permutation(9)
        assert tail_probability(p, tau) == pytest.approx(tail_probability(p[perm], tau), abs=1e-12)


probs = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10)


@settings(max_examples=150, deadline=None)
@given(probs)
def test_table_rows_normalised(p):
    A = oracle_table(p)
    assert np.all(A >= 0.0) and np.all(A <= 1.0 + 1e-15)
    assert np.allclose(A.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(np.triu(A, 1) == 0.0)


@settings(max_examples=150, deadline=None)
@given(probs, st.integers(0, 10))
def test_tail_matches_enumeration(p, tau):
    tau = min(tau, len(p))
    assert tail_probability(np.array(p), tau) == pytest.approx(ref_tail(p, tau), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(probs)
def test_tail_nonincreasing_in_target(p):
    values = [tail_probability(np.array(p), t) for t in range(len(p) + 1)]
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=80, deadline=None)
@given(seeds, st.booleans())
def test_monotone_in_selection(seed, lt):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 7)), int(rng.integers(1, 7)), lt)
    x = rng.integers(0, 2, inst.n)
    base = probability(inst, x)
    for j in np.flatnonzero(x == 0):
        y = x.copy()
        y[j] = 1
        assert probability(inst, y) >= base - 1e-12


@settings(max_examples=80, deadline=None)
@given(seeds, st.booleans())
def test_incremental_equals_recompute(seed, lt):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 7)), int(rng.integers(1, 7)), lt)
    x = rng.integers(0, 2, inst.n)
    zeros = np.flatnonzero(x == 0)
    if not zeros.size:
        return
    j = int(rng.choice(zeros))
    y = x.copy()
    y[j] = 1
    inc = update_coverage(coverage_vector(inst, x), j)
    full = coverage_vector(inst, y)
    assert np.allclose(inc.p, full.p, atol=1e-12)
    assert tail_probability(inc, inst.tau) == pytest.approx(tail_probability(full, inst.tau), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seeds, st.booleans())
def test_coverage_matches_loops(seed, lt):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)), lt)
    x = rng.integers(0, 2, inst.n)
    ref = ref_coverage(inst.a.tolist(), x.tolist(), lt)
    assert np.allclose(coverage_vector(inst, x).p, ref, atol=1e-14)
    if not lt:
        assert np.allclose(ref, ref_coverage_by_arcs(inst.a.tolist(), x.tolist()), atol=1e-12)
