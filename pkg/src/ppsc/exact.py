"""Exact delayed constraint generation driven by the probability oracle.

The master problem is ``min b^T x`` over binaries subject to the feasibility
cuts found so far.  Each master optimum is checked by the DP oracle; an
infeasible ``x_bar`` is cut off by a (strengthened) no-good inequality.  Since
the oracle is monotone in ``x``, the strengthened cut only needs the zero
coordinates ``J0`` of ``x_bar``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .instance import PpscInstance, selection
from .mip import BINARY, GE, LinearCut, LinearModel, solve_bnb
from .oracle import FEASIBILITY_TOL, coverage_vector, is_feasible, tail_probability, update_coverage
from .report import SolveReport


def xname(i: int) -> str:
    return f"x[{i}]"


def x_from_values(values: Mapping[str, float], n: int) -> np.ndarray:
    return np.array([round(values[xname(i)]) for i in range(n)], dtype=np.int8)


@dataclass(frozen=True)
class ExactConfig:
    kappa: int = 2
    time_limit: float | None = None
    node_limit: int | None = None
    tol: float = FEASIBILITY_TOL
    # False falls back to plain no-good cuts, valid without monotonicity
    monotone: bool = True
    # "lazy": one search tree, cuts added from a callback;
    # "iterative": re-solve the master from scratch after every cut
    strategy: str = "lazy"

    def __post_init__(self):
        if self.kappa not in (1, 2):
            raise ValueError("kappa must be 1 or 2")
        if self.strategy not in ("iterative", "lazy"):
            raise ValueError(f"unknown strategy {self.strategy!r}")


def build_no_good_cut(x_bar, tag: str = "no_good") -> LinearCut:
    """``sum_{J1} (1 - x_i) + sum_{J0} x_j >= 1``."""
    x_bar = selection(x_bar)
    coefs = {xname(i): (-1.0 if v else 1.0) for i, v in enumerate(x_bar)}
    return LinearCut(coefs, GE, 1.0 - float(x_bar.sum()), tag)


def kappa_value(instance: PpscInstance, x_bar, kappa: int = 2, tol: float = FEASIBILITY_TOL) -> int:
    """Right-hand side for the strengthened cut at an infeasible ``x_bar``.

    Probes ``x_bar + e_j`` for ``j`` in ``J0`` in ascending order with O(m)
    coverage updates; the first feasible probe settles the value at 1.
    """
    if kappa == 1:
        return 1
    cv = coverage_vector(instance, x_bar)
    target = 1.0 - instance.epsilon - tol
    for j in np.flatnonzero(np.asarray(cv.x) == 0):
        if tail_probability(update_coverage(cv, int(j)), instance.tau) >= target:
            return 1
    return 2


def build_strengthened_cut(
    instance: PpscInstance, x_bar, kappa: int = 2, tol: float = FEASIBILITY_TOL,
    tag: str = "strengthened_no_good",
) -> LinearCut:
    """``sum_{J0} x_j >= kappa(J0)`` for an oracle-infeasible ``x_bar``."""
    x_bar = selection(x_bar, instance.n)
    zeros = np.flatnonzero(x_bar == 0)
    if zeros.size == 0:
        raise ValueError("x_bar selects every set; no cut can separate it")
    rhs = kappa_value(instance, x_bar, kappa, tol)
    return LinearCut({xname(int(j)): 1.0 for j in zeros}, GE, float(rhs), tag)


def feasibility_cut(instance: PpscInstance, x_bar, config: ExactConfig, tag: str | None = None) -> LinearCut:
    if config.monotone:
        return build_strengthened_cut(instance, x_bar, config.kappa, config.tol,
                                      tag or "strengthened_no_good")
    return build_no_good_cut(x_bar, tag or "no_good")


def build_exact_master(instance: PpscInstance) -> LinearModel:
    model = LinearModel("exact-master")
    for i in range(instance.n):
        model.add_var(xname(i), BINARY)
    model.set_objective({xname(i): c for i, c in enumerate(instance.costs)})
    return model


def _remaining(start: float, limit: float | None) -> float | None:
    if limit is None:
        return None
    return max(0.0, limit - (time.perf_counter() - start))


def solve_exact(instance: PpscInstance, config: ExactConfig | None = None) -> SolveReport:
    config = config or ExactConfig()
    start = time.perf_counter()
    report = SolveReport(method="exact")
    n = instance.n

    t0 = time.perf_counter()
    ok, _ = is_feasible(instance, np.ones(n, dtype=np.int8), config.tol)
    report.time_oracle_s += time.perf_counter() - t0
    if not ok:
        report.status = "infeasible"
        return report

    master = build_exact_master(instance)
    if instance.tau >= 1 and instance.epsilon < 1 and n:
        seed = LinearCut({xname(i): 1.0 for i in range(n)}, GE, 1.0, "user")
        master.add_cut(seed)

    if config.strategy == "lazy":
        return _solve_lazy(instance, config, master, report, start)

    while True:
        t0 = time.perf_counter()
        out = solve_bnb(master, node_limit=config.node_limit,
                        time_limit=_remaining(start, config.time_limit))
        report.time_master_s += time.perf_counter() - t0
        report.nodes += out.nodes
        report.iterations += 1
        if out.status == "limit":
            report.status = "limit"
            report.bound = out.bound
            return report
        if out.status != "optimal":
            # all-ones passed the oracle, so valid cuts cannot empty the master
            report.status = "infeasible"
            return report
        x_bar = x_from_values(out.values, n)
        report.master_trace.append(out.objective)
        report.bound = out.objective
        t0 = time.perf_counter()
        ok, prob = is_feasible(instance, x_bar, config.tol)
        if ok:
            report.time_oracle_s += time.perf_counter() - t0
            report.status = "optimal"
            report.x = x_bar
            report.objective = out.objective
            report.master_objective = out.objective
            report.probability = prob
            report.feasible_true = True
            return report
        cut = feasibility_cut(instance, x_bar, config)
        report.time_oracle_s += time.perf_counter() - t0
        master.add_cut(cut)
        report.record_cut(cut)
        if _remaining(start, config.time_limit) == 0.0:
            report.status = "limit"
            return report


def _solve_lazy(instance, config, master, report, start) -> SolveReport:
    n = instance.n
    oracle_time = 0.0

    def callback(values):
        nonlocal oracle_time
        t0 = time.perf_counter()
        x_bar = x_from_values(values, n)
        ok, _ = is_feasible(instance, x_bar, config.tol)
        cuts = [] if ok else [feasibility_cut(instance, x_bar, config)]
        oracle_time += time.perf_counter() - t0
        for cut in cuts:
            report.record_cut(cut)
        return cuts

    t0 = time.perf_counter()
    out = solve_bnb(master, callback, node_limit=config.node_limit,
                    time_limit=_remaining(start, config.time_limit))
    report.time_oracle_s = oracle_time
    report.time_master_s = time.perf_counter() - t0 - oracle_time
    report.nodes = out.nodes
    report.iterations = out.callback_calls
    report.bound = out.bound
    report.status = out.status
    if out.values:
        x_bar = x_from_values(out.values, n)
        report.x = x_bar
        report.objective = out.objective
        report.master_objective = out.objective
        ok, prob = is_feasible(instance, x_bar, config.tol)
        report.probability = prob
        report.feasible_true = bool(ok)
    return report
