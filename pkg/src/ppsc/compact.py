"""Compact MIP for the linear-threshold model.

The Poisson-binomial recursion is written as linear constraints.  Under LT
the coverage probability of item ``i`` is linear in ``x``, so the only
nonlinear terms are ``Abar[i-1, j] * x_u``; each gets a variable
``g[u, i-1, j]`` tied to the product by McCormick inequalities, which are
exact when ``x_u`` is binary.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .exact import x_from_values, xname
from .instance import PpscInstance
from .mip import BINARY, CONTINUOUS, EQ, GE, LE, LinearModel, solve_bnb
from .oracle import is_feasible, oracle_table, coverage_vector
from .report import SolveReport


def tri(i: int, j: int) -> int:
    """Row-major offset of ``(i, j)``, ``0 <= j <= i``, in a triangular table."""
    return i * (i + 1) // 2 + j


def tri_size(m: int) -> int:
    return (m + 1) * (m + 2) // 2


def aname(i: int, j: int) -> str:
    return f"A[{i},{j}]"


def gname(u: int, i: int, j: int) -> str:
    return f"g[{u},{i},{j}]"


@dataclass
class LtmipModel:
    model: LinearModel
    instance: PpscInstance

    @property
    def goal(self) -> dict[str, float]:
        m, tau = self.instance.m, self.instance.tau
        return {aname(m, j): 1.0 for j in range(tau, m + 1)}

    def goal_value(self, values) -> float:
        return sum(values[k] for k in self.goal)


def build_ltmip(instance: PpscInstance) -> LtmipModel:
    if not instance.is_lt:
        raise ValueError("the compact formulation requires the linear-threshold model")
    n, m = instance.n, instance.m
    a = instance.a
    model = LinearModel("ltmip")
    for u in range(n):
        model.add_var(xname(u), BINARY)
    cells = [(i, j) for i in range(m + 1) for j in range(i + 1)]
    for i, j in cells:
        model.add_var(aname(i, j), CONTINUOUS, 0.0, 1.0)
    for u in range(n):
        for i, j in cells:
            model.add_var(gname(u, i, j), CONTINUOUS, 0.0, 1.0)
    model.set_objective({xname(u): c for u, c in enumerate(instance.costs)})

    model.add_constraint({aname(0, 0): 1.0}, EQ, 1.0, "boundary")
    # item i (1-based row) has weights a[:, i-1]
    for i in range(1, m + 1):
        col = a[:, i - 1]
        parents = [u for u in range(n) if col[u]]
        for j in range(i + 1):
            row: dict[str, float] = {aname(i, j): 1.0}
            if j < i:
                row[aname(i - 1, j)] = row.get(aname(i - 1, j), 0.0) - 1.0
                for u in parents:
                    row[gname(u, i - 1, j)] = col[u]
            if j > 0:
                for u in parents:
                    key = gname(u, i - 1, j - 1)
                    row[key] = row.get(key, 0.0) - col[u]
            model.add_constraint(row, EQ, 0.0, f"dp[{i},{j}]")
    for u in range(n):
        for i, j in cells:
            g, A, x = gname(u, i, j), aname(i, j), xname(u)
            model.add_constraint({g: 1.0, x: -1.0}, LE, 0.0)
            model.add_constraint({g: 1.0, A: -1.0}, LE, 0.0)
            model.add_constraint({g: 1.0, A: -1.0, x: -1.0}, GE, -1.0)
    ltm = LtmipModel(model, instance)
    model.add_constraint(ltm.goal, GE, 1.0 - instance.epsilon, "goal")
    return ltm


def propagate(instance: PpscInstance, x) -> dict[str, float]:
    """The unique assignment of the recursion variables at a binary ``x``."""
    x = np.asarray(x, dtype=float)
    table = oracle_table(coverage_vector(instance, x).p)
    values = {xname(u): float(x[u]) for u in range(instance.n)}
    for i in range(instance.m + 1):
        for j in range(i + 1):
            values[aname(i, j)] = float(table[i, j])
            for u in range(instance.n):
                values[gname(u, i, j)] = float(table[i, j] * x[u])
    return values


def solve_ltmip(
    instance: PpscInstance, time_limit: float | None = None, node_limit: int | None = None
) -> SolveReport:
    report = SolveReport(method="ltmip")
    ltm = build_ltmip(instance)
    t0 = time.perf_counter()
    out = solve_bnb(ltm.model, node_limit=node_limit, time_limit=time_limit)
    report.time_master_s = time.perf_counter() - t0
    report.status = out.status
    report.nodes = out.nodes
    report.bound = out.bound
    report.iterations = 1
    if out.values:
        x = x_from_values(out.values, instance.n)
        report.x = x
        report.objective = out.objective
        report.master_objective = out.objective
        ok, prob = is_feasible(instance, x)
        report.feasible_true = bool(ok)
        report.probability = prob
    return report
