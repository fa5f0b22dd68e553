"""Experiment protocol: method dispatch, replications and the sampling gap."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import instance as inst_io
from . import scenarios as scen_io
from .benders import SamplingConfig, solve_monolithic, solve_sampling
from .compact import solve_ltmip
from .exact import ExactConfig, solve_exact
from .instance import CoverageModel, PpscInstance, generate_paper_instance
from .report import SolveReport

METHODS = ("exact", "benders-sub", "benders-nv", "dep", "dep-lt", "ltmip")
SAMPLING_METHODS = ("benders-sub", "benders-nv", "dep", "dep-lt")
LT_ONLY = ("dep-lt", "ltmip")

COLUMNS = (
    "method", "v", "bbar", "epsilon", "omega", "rep", "status", "objective",
    "feasible_true", "time_master_s", "time_oracle_s", "master_cuts",
    "oracle_cuts", "nodes", "master_objective",
)


class ConfigError(ValueError):
    """The run configuration is inconsistent or refers to unusable files."""


@dataclass
class RunConfig:
    method: str
    instance_path: str | None = None
    generate: tuple[int, float, float, int] | None = None
    model: str = CoverageModel.INDEPENDENT.value
    kappa: int = 2
    omega: int = 50
    reps: int = 1
    scenario_seed: int = 0
    time_limit: float | None = None
    node_limit: int | None = None
    save_scenarios: str | None = None
    load_scenarios: str | None = None
    out: str | None = None

    def check(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if (self.instance_path is None) == (self.generate is None):
            raise ConfigError("give exactly one of an instance path or generator parameters")
        if self.kappa not in (1, 2):
            raise ConfigError("kappa must be 1 or 2")
        if self.reps < 1 or self.omega < 1:
            raise ConfigError("reps and omega must be positive")
        if self.load_scenarios and self.reps != 1:
            raise ConfigError("a loaded scenario set supports a single replication")
        if (self.load_scenarios or self.save_scenarios) and self.method not in SAMPLING_METHODS:
            raise ConfigError(f"method {self.method} does not use scenarios")


@dataclass
class GapEstimate:
    master: list[float]
    feasible: list[float]
    lb: float
    ub: float
    egap: float
    confidence: float
    normal_ok: bool

    @property
    def label(self) -> str:
        """Gap in percent; a trailing ``*`` marks a suppressed confidence statement."""
        return f"{100 * self.egap:.2f}" + ("" if self.normal_ok else "*")


def estimate_gap(master_values, feasible_values, omega: int, epsilon: float) -> GapEstimate:
    master = [float(v) for v in master_values]
    feasible = [float(v) for v in feasible_values]
    if not master or not feasible:
        raise ValueError("need at least one replication")
    # an infeasible sampled problem reports +inf and can never be the minimum
    if any(math.isnan(v) or v == -math.inf for v in master) or math.isinf(min(master)):
        raise ValueError("need a finite master value")
    if not all(math.isfinite(v) for v in feasible):
        raise ValueError("feasible values must be finite")
    lb, ub = min(master), min(feasible)
    egap = (ub - lb) / ub if ub else 0.0
    return GapEstimate(
        master, feasible, lb, ub, egap,
        confidence=1.0 - 0.5 ** len(master),
        normal_ok=omega * epsilon >= 5,
    )


@dataclass
class RunResult:
    rows: list[dict] = field(default_factory=list)
    reports: list[SolveReport] = field(default_factory=list)
    gap: GapEstimate | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows)
        return buf.getvalue()


def load_instance(config: RunConfig) -> tuple[PpscInstance, int, float | str]:
    if config.generate is not None:
        v, bbar, eps, seed = config.generate
        try:
            inst = generate_paper_instance(int(v), float(bbar), float(eps), int(seed), config.model)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return inst, int(v), float(bbar)
    try:
        inst = inst_io.load(config.instance_path)
    except OSError as exc:
        raise ConfigError(f"cannot read instance: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"bad instance file: {exc}") from None
    return inst, inst.n + inst.m, ""


def _scenario_path(path: str, rep: int, reps: int) -> Path:
    p = Path(path)
    return p if reps == 1 else p.with_name(f"{p.stem}.r{rep}{p.suffix}")


def _fmt(v: float) -> str:
    return "" if not math.isfinite(v) else f"{v:.10g}"


def _row(config, inst, v, bbar, rep, omega, rep_obj: SolveReport) -> dict:
    feas = "" if rep_obj.feasible_true is None else int(rep_obj.feasible_true)
    return {
        "method": config.method, "v": v, "bbar": bbar, "epsilon": inst.epsilon,
        "omega": omega, "rep": rep, "status": rep_obj.status,
        "objective": _fmt(rep_obj.objective), "feasible_true": feas,
        "time_master_s": f"{rep_obj.time_master_s:.4f}",
        "time_oracle_s": f"{rep_obj.time_oracle_s:.4f}",
        "master_cuts": rep_obj.master_cuts, "oracle_cuts": rep_obj.oracle_cuts,
        "nodes": rep_obj.nodes, "master_objective": _fmt(rep_obj.master_objective),
    }


def run(config: RunConfig) -> RunResult:
    config.check()
    inst, v, bbar = load_instance(config)
    if config.method in LT_ONLY and not inst.is_lt:
        raise ConfigError(f"method {config.method} requires a linear-threshold instance")
    result = RunResult()

    if config.method == "exact":
        rep = solve_exact(inst, ExactConfig(kappa=config.kappa, time_limit=config.time_limit,
                                            node_limit=config.node_limit))
        result.reports.append(rep)
        result.rows.append(_row(config, inst, v, bbar, 0, "", rep))
        return result
    if config.method == "ltmip":
        rep = solve_ltmip(inst, config.time_limit, config.node_limit)
        result.reports.append(rep)
        result.rows.append(_row(config, inst, v, bbar, 0, "", rep))
        return result

    # scenario sets are built up front so IO problems surface before any solve
    sets = []
    for r in range(config.reps):
        if config.load_scenarios:
            try:
                scen = scen_io.load(config.load_scenarios)
            except (OSError, ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"cannot load scenarios: {exc}") from None
            if scen[0].n != inst.n or scen[0].m != inst.m:
                raise ConfigError("scenario set does not match the instance dimensions")
        else:
            scen = scen_io.sample_scenarios(inst, config.omega, config.scenario_seed + r)
        if config.save_scenarios:
            try:
                scen_io.save(scen, _scenario_path(config.save_scenarios, r, config.reps))
            except OSError as exc:
                raise ConfigError(f"cannot save scenarios: {exc}") from None
        sets.append(scen)
    if config.method == "dep-lt":
        for scen in sets:
            if not scen.is_linear_threshold:
                raise ConfigError("dep-lt needs scenarios with at most one live arc per item")

    for r, scen in enumerate(sets):
        if config.method in ("benders-sub", "benders-nv"):
            family = "submodular" if config.method == "benders-sub" else "new_valid"
            rep = solve_sampling(inst, scen, SamplingConfig(
                family=family, kappa=config.kappa, time_limit=config.time_limit,
                node_limit=config.node_limit))
        else:
            rep = solve_monolithic(inst, scen, lt=config.method == "dep-lt",
                                   time_limit=config.time_limit, node_limit=config.node_limit)
        result.reports.append(rep)
        result.rows.append(_row(config, inst, v, bbar, r, len(scen), rep))

    masters = [math.inf if rep.status == "infeasible" and math.isnan(rep.master_objective)
               else rep.master_objective for rep in result.reports]
    feas = [rep.objective for rep in result.reports if rep.feasible_true]
    # a replication stopped by a limit has no valid master value
    if feas and not any(math.isnan(x) for x in masters) and any(math.isfinite(x) for x in masters):
        result.gap = estimate_gap(masters, feas, len(sets[0]), inst.epsilon)
    return result
