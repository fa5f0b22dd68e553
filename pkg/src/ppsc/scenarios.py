"""Live-arc scenario sampling and the coverage kernels used by the cuts."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .instance import PpscInstance


@dataclass(frozen=True, eq=False)
class LiveArcScenario:
    """One realisation of the coverage graph; ``t[i, j]`` is True for a live arc."""

    t: np.ndarray
    p_omega: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.t, dtype=bool)
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_arcs(cls, n: int, m: int, arcs: Iterable[tuple[int, int]], p_omega: float = 1.0):
        t = np.zeros((n, m), dtype=bool)
        for i, j in arcs:
            t[i, j] = True
        return cls(t, p_omega)

    @property
    def n(self) -> int:
        return self.t.shape[0]

    @property
    def m(self) -> int:
        return self.t.shape[1]

    @property
    def arcs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.t))]

    @cached_property
    def out_neighbors(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(np.flatnonzero(row).tolist()) for row in self.t)

    @cached_property
    def in_neighbors(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(np.flatnonzero(col).tolist()) for col in self.t.T)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return self.t.sum(axis=0)

    @cached_property
    def singleton_sigma(self) -> np.ndarray:
        """``sigma({i})`` for every set ``i``."""
        return self.t.sum(axis=1)

    def __eq__(self, other):
        return (
            isinstance(other, LiveArcScenario)
            and self.p_omega == other.p_omega
            and np.array_equal(self.t, other.t)
        )

    __hash__ = None


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[LiveArcScenario, ...]

    def __post_init__(self):
        total = sum(s.p_omega for s in self.scenarios)
        if self.scenarios and abs(total - 1.0) > 1e-9:
            raise ValueError(f"scenario weights sum to {total}, not 1")

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, k):
        return self.scenarios[k]

    @property
    def weights(self) -> np.ndarray:
        return np.array([s.p_omega for s in self.scenarios])

    @property
    def is_linear_threshold(self) -> bool:
        return all(int(s.in_degree.max(initial=0)) <= 1 for s in self.scenarios)

    @classmethod
    def equiprobable(cls, graphs: Sequence[np.ndarray]) -> "ScenarioSet":
        k = len(graphs)
        return cls(tuple(LiveArcScenario(t, 1.0 / k) for t in graphs))


def scenario_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for scenario ``index``; reproducible for any count."""
    return np.random.default_rng([int(seed), int(index)])


def sample_one(instance: PpscInstance, rng: np.random.Generator) -> np.ndarray:
    a = instance.a
    if not instance.is_lt:
        return rng.random(a.shape) < a
    # each item keeps at most one incoming arc, chosen with probability a[i, j]
    n, m = a.shape
    t = np.zeros((n, m), dtype=bool)
    u = rng.random(m)
    cum = np.cumsum(a, axis=0)
    for j in range(m):
        i = int(np.searchsorted(cum[:, j], u[j], side="right"))
        if i < n:
            t[i, j] = True
    return t


def sample_scenarios(instance: PpscInstance, count: int, seed: int) -> ScenarioSet:
    if count < 1:
        raise ValueError("need at least one scenario")
    graphs = [sample_one(instance, scenario_rng(seed, k)) for k in range(count)]
    return ScenarioSet.equiprobable(graphs)


# -- kernels -------------------------------------------------------------

def _as_set(X) -> list[int]:
    # support sets, not 0/1 vectors; see sigma_x for the latter
    return sorted({int(i) for i in X})


def sigma(scenario: LiveArcScenario, X) -> int:
    """Number of items covered by the sets in ``X`` under ``scenario``."""
    idx = _as_set(X)
    if not idx:
        return 0
    return int(np.count_nonzero(scenario.t[idx].any(axis=0)))


def sigma_x(scenario: LiveArcScenario, x) -> int:
    """``sigma`` for a 0/1 selection vector."""
    mask = np.asarray(x).astype(bool)
    if not mask.any():
        return 0
    return int(np.count_nonzero(scenario.t[mask].any(axis=0)))


def marginal_gain(scenario: LiveArcScenario, X, j: int) -> int:
    X = set(_as_set(X))
    if j in X:
        raise ValueError(f"set {j} already in X")
    return sigma(scenario, X | {j}) - sigma(scenario, X)


def marginal_gains(scenario: LiveArcScenario, X) -> np.ndarray:
    """``rho_j(X)`` for every ``j`` (zero for members of ``X``)."""
    idx = _as_set(X)
    covered = scenario.t[idx].any(axis=0) if idx else np.zeros(scenario.m, dtype=bool)
    gains = (scenario.t & ~covered).sum(axis=1)
    gains[idx] = 0
    return gains


def common_reach(scenario: LiveArcScenario, B, N) -> frozenset[int]:
    """Items reachable from every set in ``B`` and from no set in ``N``."""
    B = _as_set(B)
    N = _as_set(N)
    if set(B) & set(N):
        raise ValueError("B and N overlap")
    mask = np.ones(scenario.m, dtype=bool)
    if B:
        mask &= scenario.t[B].all(axis=0)
    if N:
        mask &= ~scenario.t[N].any(axis=0)
    return frozenset(np.flatnonzero(mask).tolist())


def eta(scenario: LiveArcScenario, k: int) -> int:
    """Items reachable from ``k`` alone."""
    others = [i for i in range(scenario.n) if i != k]
    return len(common_reach(scenario, [k], others))


def empirical_prob(scenarios: ScenarioSet, x, tau: int) -> float:
    mask = np.asarray(x).astype(bool)
    total = 0.0
    for s in scenarios:
        if sigma_x(s, mask) >= tau:
            total += s.p_omega
    return total


# -- persistence ------------------------------------------------------------

def to_document(scenarios: ScenarioSet) -> dict:
    first = scenarios[0]
    return {
        "count": len(scenarios),
        "n": first.n,
        "m": first.m,
        "weights": [s.p_omega for s in scenarios],
        "arcs": [[list(a) for a in s.arcs] for s in scenarios],
    }


def from_document(doc: dict) -> ScenarioSet:
    for key in ("count", "n", "m", "weights", "arcs"):
        if key not in doc:
            raise ValueError(f"scenario document missing {key!r}")
    if not (doc["count"] == len(doc["weights"]) == len(doc["arcs"])):
        raise ValueError("scenario document has inconsistent counts")
    n, m = int(doc["n"]), int(doc["m"])
    return ScenarioSet(tuple(
        LiveArcScenario.from_arcs(n, m, [tuple(a) for a in arcs], float(w))
        for w, arcs in zip(doc["weights"], doc["arcs"])
    ))


def save(scenarios: ScenarioSet, path) -> None:
    Path(path).write_text(json.dumps(to_document(scenarios)))


def load(path) -> ScenarioSet:
    return from_document(json.loads(Path(path).read_text()))
