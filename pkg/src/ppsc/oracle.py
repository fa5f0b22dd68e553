"""Exact evaluation of P(sigma(x) >= tau) by the Poisson-binomial recursion.

``A[i, j]`` is the probability that exactly ``j`` of the first ``i`` items are
covered.  Each item is covered independently with probability ``p_i`` (given
the selection), under both coverage models, so one pass over the items fills
the table in O(m^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import CoverageModel, PpscInstance, selection

FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class CoverageVector:
    """Per-item coverage probabilities for one selection."""

    instance: PpscInstance
    x: tuple[int, ...]
    p: np.ndarray

    @property
    def model(self) -> CoverageModel:
        return self.instance.model


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def coverage_vector(instance: PpscInstance, x) -> CoverageVector:
    x = selection(x, instance.n)
    a = instance.a[x.astype(bool)]
    if instance.is_lt:
        p = a.sum(axis=0)
        p = np.minimum(p, 1.0)
    else:
        p = 1.0 - np.prod(1.0 - a, axis=0)
    return CoverageVector(instance, tuple(int(v) for v in x), _freeze(np.asarray(p, dtype=float)))


def update_coverage(cv: CoverageVector, j: int) -> CoverageVector:
    """Coverage vector of ``x + e_j`` in O(m), from that of ``x``."""
    if cv.x[j]:
        raise ValueError(f"set {j} is already selected")
    row = cv.instance.a[j]
    if cv.instance.is_lt:
        p = np.minimum(cv.p + row, 1.0)
    else:
        p = 1.0 - (1.0 - cv.p) * (1.0 - row)
    x = list(cv.x)
    x[j] = 1
    return CoverageVector(cv.instance, tuple(x), _freeze(p))


def oracle_table(p) -> np.ndarray:
    """Fill the triangular table ``A[i, j]`` for ``0 <= j <= i <= m``.

    Entries above the diagonal are zero.  Items are processed in index order.
    """
    p = np.asarray(p, dtype=float)
    m = p.size
    A = np.zeros((m + 1, m + 1))
    A[0, 0] = 1.0
    for i in range(1, m + 1):
        pi = p[i - 1]
        prev = A[i - 1, :i]
        A[i, :i] = prev * (1.0 - pi)
        A[i, 1 : i + 1] += prev * pi
    return A


def tail_from_table(A: np.ndarray, tau: int) -> float:
    m = A.shape[0] - 1
    if not 0 <= tau <= m:
        raise ValueError(f"target {tau} outside [0, {m}]")
    if tau == 0:
        return 1.0
    return float(min(1.0, A[m, tau:].sum()))


def tail_probability(cv, tau: int) -> float:
    """Exact P(sigma(x) >= tau).  Accepts a CoverageVector or a raw vector."""
    p = cv.p if isinstance(cv, CoverageVector) else cv
    return tail_from_table(oracle_table(p), tau)


def probability(instance: PpscInstance, x) -> float:
    """The oracle value for selection ``x`` at the instance's own target."""
    return tail_probability(coverage_vector(instance, x), instance.tau)


def is_feasible(instance: PpscInstance, x, tol: float = FEASIBILITY_TOL) -> tuple[bool, float]:
    prob = probability(instance, x)
    return prob >= 1.0 - instance.epsilon - tol, prob


def monte_carlo_estimate(
    instance: PpscInstance, x, tau: int, samples: int, seed: int, chunk: int = 100_000
) -> tuple[float, float]:
    """Simulated P(sigma(x) >= tau) and its standard error."""
    if samples < 1:
        raise ValueError("need at least one sample")
    p = coverage_vector(instance, x).p
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = samples
    while remaining:
        k = min(chunk, remaining)
        covered = (rng.random((k, p.size)) < p).sum(axis=1)
        hits += int(np.count_nonzero(covered >= tau))
        remaining -= k
    est = hits / samples
    return est, float(np.sqrt(est * (1.0 - est) / samples))
