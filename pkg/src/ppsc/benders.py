"""Sampling-based delayed constraint generation over live-arc scenarios.

The master problem carries, per scenario ``w``, a coverage variable
``theta[w] in [0, m]`` and an indicator ``z[w]``:

    min b^T x   s.t.  theta[w] >= tau * z[w],   sum_w p_w z[w] >= 1 - eps,

and the cut pool bounds each ``theta[w]`` from above by a linear function of
``x`` that is exact at integer points once enough cuts are present.  Two cut
families are available: the submodular linearisation of ``sigma_w`` and the
common-coverage inequality built from families of sets sharing items.

After the sampled problem is solved, an oracle phase repairs solutions that
fail the true chance constraint with oracle-certified feasibility cuts.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .exact import ExactConfig, feasibility_cut, x_from_values, xname
from .instance import PpscInstance
from .mip import BINARY, CONTINUOUS, GE, LE, LinearCut, LinearModel, solve_bnb
from .oracle import FEASIBILITY_TOL, is_feasible
from .report import SolveReport
from .scenarios import (
    LiveArcScenario,
    ScenarioSet,
    common_reach,
    empirical_prob,
    eta,
    marginal_gains,
    sigma,
    sigma_x,
)

VIOLATION_TOL = 1e-6
CUT_FAMILIES = ("submodular", "new_valid")


def zname(w: int) -> str:
    return f"z[{w}]"


def thname(w: int) -> str:
    return f"theta[{w}]"


def yname(i: int, w: int) -> str:
    return f"y[{i},{w}]"


@dataclass(frozen=True)
class ThetaCut:
    """``theta <= constant + coefs @ x`` for one scenario."""

    constant: float
    coefs: np.ndarray
    family: str

    def bound(self, x) -> float:
        return float(self.constant + self.coefs @ np.asarray(x, dtype=float))

    def as_cut(self, w: int) -> LinearCut:
        coefs = {thname(w): 1.0}
        for j, c in enumerate(self.coefs):
            if c:
                coefs[xname(j)] = -float(c)
        return LinearCut(coefs, LE, float(self.constant), self.family)

    def terms(self) -> dict[int, float]:
        return {j: float(c) for j, c in enumerate(self.coefs) if c}

    def __str__(self):
        rhs = " + ".join([f"{self.constant:g}"] + [f"{c:g}*x{j}" for j, c in self.terms().items()])
        return f"theta <= {rhs}"


# -- master -----------------------------------------------------------------

@dataclass
class BendersMaster:
    model: LinearModel
    instance: PpscInstance
    scenarios: ScenarioSet

    @property
    def omega(self) -> int:
        return len(self.scenarios)


def _add_chance_block(model: LinearModel, scenarios: ScenarioSet, epsilon: float) -> None:
    for w in range(len(scenarios)):
        model.add_var(zname(w), BINARY)
    model.add_constraint({zname(w): s.p_omega for w, s in enumerate(scenarios)}, GE,
                         1.0 - epsilon, "chance")


def _x_block(model: LinearModel, instance: PpscInstance) -> None:
    for i in range(instance.n):
        model.add_var(xname(i), BINARY)
    model.set_objective({xname(i): c for i, c in enumerate(instance.costs)})


def build_master(instance: PpscInstance, scenarios: ScenarioSet) -> BendersMaster:
    model = LinearModel("benders-master")
    _x_block(model, instance)
    _add_chance_block(model, scenarios, instance.epsilon)
    for w in range(len(scenarios)):
        model.add_var(thname(w), CONTINUOUS, 0.0, float(instance.m))
        model.add_constraint({thname(w): 1.0, zname(w): -float(instance.tau)}, GE, 0.0, f"target[{w}]")
    return BendersMaster(model, instance, scenarios)


# -- cut families -------------------------------------------------------------

def separate_submodular(scenario: LiveArcScenario, x_bar) -> ThetaCut:
    X = np.flatnonzero(np.asarray(x_bar))
    return ThetaCut(float(sigma(scenario, X)), marginal_gains(scenario, X).astype(float), "submodular")


@dataclass(frozen=True)
class NewValidInequalitySpec:
    """Families ``(C1, C2, count)`` of sets sharing items, plus the set ``D``."""

    families: tuple[tuple[frozenset[int], frozenset[int], int], ...]
    D: frozenset[int] = frozenset()

    @classmethod
    def of(cls, families, D=()) -> "NewValidInequalitySpec":
        fams = tuple((frozenset(c1), frozenset(c2), int(k)) for c1, c2, k in families)
        return cls(fams, frozenset(D))


class SpecError(ValueError):
    """A family violates the pairwise common-coverage hypothesis."""


def check_spec(scenario: LiveArcScenario, spec: NewValidInequalitySpec) -> None:
    everyone = set(range(scenario.n))
    seen_items: set[int] = set()
    for k, (c1, c2, count) in enumerate(spec.families):
        if len(c1) < 2:
            raise SpecError(f"family {k}: needs at least two sets")
        if c2 & seen_items:
            raise SpecError(f"family {k}: item sets overlap an earlier family")
        seen_items |= c2
        outside = everyone - c1
        for i, j in itertools.combinations(sorted(c1), 2):
            shared = len(common_reach(scenario, (i, j), outside) & c2)
            if shared != count:
                raise SpecError(
                    f"family {k}: pair ({i}, {j}) shares {shared} items, expected {count}"
                )


def evaluate_new_valid(
    scenario: LiveArcScenario, spec: NewValidInequalitySpec, include_d: bool = True, check: bool = True
) -> ThetaCut:
    """``theta <= sum_k n_k (1 - x(C1^k)) + sum_{k in D} eta_k (1 - x_k) + sum_j sigma({j}) x_j``."""
    if check:
        check_spec(scenario, spec)
    constant = 0.0
    coefs = scenario.singleton_sigma.astype(float).copy()
    for c1, _, count in spec.families:
        constant += count
        for j in c1:
            coefs[j] -= count
    if include_d:
        for k in spec.D:
            e = eta(scenario, k)
            constant += e
            coefs[k] -= e
    return ThetaCut(constant, coefs, "new_valid")


def shared_items(scenario: LiveArcScenario, x_bar) -> list[int]:
    """Items reached by at least two sets, at least one of them selected."""
    mask = np.asarray(x_bar).astype(bool)
    if not mask.any():
        return []
    hit = scenario.t[mask].any(axis=0)
    return [int(k) for k in np.flatnonzero(hit & (scenario.in_degree >= 2))]


def separation_spec(scenario: LiveArcScenario, x_bar, with_d: bool = False) -> NewValidInequalitySpec:
    """Singleton item families over the shared items; ``with_d`` sets ``D`` to the support."""
    fams = [(scenario.in_neighbors[k], frozenset([k]), 1) for k in shared_items(scenario, x_bar)]
    D = np.flatnonzero(np.asarray(x_bar)) if with_d else ()
    return NewValidInequalitySpec.of(fams, D)


def separate_new_valid(scenario: LiveArcScenario, x_bar) -> ThetaCut:
    # the singleton families satisfy the hypothesis by construction
    return evaluate_new_valid(scenario, separation_spec(scenario, x_bar), include_d=False, check=False)


def separate(scenario: LiveArcScenario, x_bar, family: str) -> ThetaCut:
    if family == "submodular":
        return separate_submodular(scenario, x_bar)
    if family == "new_valid":
        return separate_new_valid(scenario, x_bar)
    raise ValueError(f"unknown cut family {family!r}")


# -- algorithm ----------------------------------------------------------------

@dataclass
class SamplingConfig:
    family: str = "new_valid"
    kappa: int = 2
    time_limit: float | None = None
    node_limit: int | None = None
    tol: float = FEASIBILITY_TOL
    repair: bool = True
    violation_tol: float = VIOLATION_TOL

    def __post_init__(self):
        if self.family not in CUT_FAMILIES:
            raise ValueError(f"unknown cut family {self.family!r}")
        if self.kappa not in (1, 2):
            raise ValueError("kappa must be 1 or 2")


def solve_sampling(
    instance: PpscInstance, scenarios: ScenarioSet, config: SamplingConfig | None = None
) -> SolveReport:
    config = config or SamplingConfig()
    method = "benders-sub" if config.family == "submodular" else "benders-nv"
    report = SolveReport(method=method)
    master = build_master(instance, scenarios)
    model = master.model
    n, tau = instance.n, instance.tau
    target = 1.0 - instance.epsilon
    start = time.perf_counter()

    def callback(values):
        x_bar = x_from_values(values, n)
        if empirical_prob(scenarios, x_bar, tau) >= target - 1e-12:
            return []
        cuts = []
        for w, s in enumerate(scenarios):
            cover = sigma_x(s, x_bar)
            th = values[thname(w)]
            if tau > cover and th > cover:
                tc = separate(s, x_bar, config.family)
                if th - tc.bound(x_bar) > config.violation_tol:
                    cut = tc.as_cut(w)
                    cuts.append(cut)
                    report.record_cut(cut)
        return cuts

    def remaining():
        if config.time_limit is None:
            return None
        return max(0.0, config.time_limit - (time.perf_counter() - start))

    exact_cfg = ExactConfig(kappa=config.kappa, tol=config.tol)
    first = True
    while True:
        t0 = time.perf_counter()
        out = solve_bnb(model, callback, node_limit=config.node_limit, time_limit=remaining())
        report.time_master_s += time.perf_counter() - t0
        report.nodes += out.nodes
        report.iterations += 1
        if out.status != "optimal":
            report.status = out.status
            report.bound = out.bound if first else report.bound
            return report
        x_bar = x_from_values(out.values, n)
        report.master_trace.append(out.objective)
        if first:
            report.master_objective = out.objective
            report.bound = out.objective
            first = False
        t0 = time.perf_counter()
        ok, prob = is_feasible(instance, x_bar, config.tol)
        report.x = x_bar
        report.objective = out.objective
        report.probability = prob
        report.feasible_true = bool(ok)
        if ok or not config.repair:
            report.time_oracle_s += time.perf_counter() - t0
            report.status = "optimal"
            return report
        if x_bar.all():
            # monotone oracle: nothing larger exists, the true problem is infeasible
            report.time_oracle_s += time.perf_counter() - t0
            report.status = "infeasible"
            return report
        cut = feasibility_cut(instance, x_bar, exact_cfg, tag="oracle_phase")
        report.time_oracle_s += time.perf_counter() - t0
        model.add_cut(cut)
        report.record_cut(cut, oracle=True)
        if remaining() == 0.0:
            report.status = "limit"
            return report


# -- monolithic formulations --------------------------------------------------

def build_dep(instance: PpscInstance, scenarios: ScenarioSet, binary_y: bool = False) -> LinearModel:
    """Deterministic equivalent with per-scenario item indicators ``y``.

    ``y`` is kept continuous by default.  It has no cost, and once ``x`` and
    ``z`` are integral every feasible ``y`` can be rounded up on covered
    items, so the optimum is unchanged while the search tree branches only on
    ``x`` and ``z``.
    """
    model = LinearModel("dep")
    _x_block(model, instance)
    _add_chance_block(model, scenarios, instance.epsilon)
    kind = BINARY if binary_y else CONTINUOUS
    for w, s in enumerate(scenarios):
        for i in range(instance.m):
            model.add_var(yname(i, w), kind)
    for w, s in enumerate(scenarios):
        for i in range(instance.m):
            row = {xname(j): 1.0 for j in s.in_neighbors[i]}
            row[yname(i, w)] = -1.0
            model.add_constraint(row, GE, 0.0, f"link[{i},{w}]")
        row = {yname(i, w): 1.0 for i in range(instance.m)}
        row[zname(w)] = -float(instance.tau)
        model.add_constraint(row, GE, 0.0, f"target[{w}]")
    return model


def build_dep_lt(instance: PpscInstance, scenarios: ScenarioSet) -> LinearModel:
    """Reduced formulation for scenario sets where every item has one parent at most."""
    if not scenarios.is_linear_threshold:
        raise ValueError("scenario set has an item with more than one live incoming arc")
    model = LinearModel("dep-lt")
    _x_block(model, instance)
    _add_chance_block(model, scenarios, instance.epsilon)
    for w, s in enumerate(scenarios):
        row = {xname(i): float(v) for i, v in enumerate(s.singleton_sigma) if v}
        row[zname(w)] = -float(instance.tau)
        model.add_constraint(row, GE, 0.0, f"target[{w}]")
    return model


def solve_monolithic(
    instance: PpscInstance, scenarios: ScenarioSet, lt: bool = False,
    time_limit: float | None = None, node_limit: int | None = None, repair_check: bool = True,
) -> SolveReport:
    """Solve the DEP (or its LT reduction) and grade the answer with the oracle."""
    model = build_dep_lt(instance, scenarios) if lt else build_dep(instance, scenarios)
    report = SolveReport(method="dep-lt" if lt else "dep")
    t0 = time.perf_counter()
    out = solve_bnb(model, node_limit=node_limit, time_limit=time_limit)
    report.time_master_s = time.perf_counter() - t0
    report.nodes = out.nodes
    report.status = out.status
    report.bound = out.bound
    report.iterations = 1
    if out.values:
        x = x_from_values(out.values, instance.n)
        report.x = x
        report.objective = out.objective
        report.master_objective = out.objective
        if repair_check:
            t0 = time.perf_counter()
            ok, prob = is_feasible(instance, x)
            report.time_oracle_s = time.perf_counter() - t0
            report.feasible_true = bool(ok)
            report.probability = prob
    return report
