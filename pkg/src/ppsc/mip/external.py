"""Optional adapter delegating a model to SciPy's HiGHS MILP solver.

Same model in, same outcome out as :func:`solve_bnb`, minus lazy callbacks:
the cut pool is solved as it stands.  The in-house kernel stays the
reference; this exists for larger runs and for cross-checking.
"""

from __future__ import annotations

import math

import numpy as np

from .model import EQ, GE, LE, LinearModel, SolveOutcome


def solve_highs(model: LinearModel, time_limit: float | None = None) -> SolveOutcome:
    try:
        from scipy.optimize import Bounds, LinearConstraint, milp
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("the HiGHS adapter needs scipy (pip install artifact[highs])") from exc

    A, senses, b = model.dense()
    lb, ub = model.bounds()
    constraints = []
    if len(b):
        lo = np.where((senses == GE) | (senses == EQ), b, -np.inf)
        hi = np.where((senses == LE) | (senses == EQ), b, np.inf)
        constraints.append(LinearConstraint(A, lo, hi))
    options = {} if time_limit is None else {"time_limit": float(time_limit)}
    res = milp(
        model.objective_vector(),
        integrality=model.binary_mask().astype(int),
        bounds=Bounds(lb, ub),
        constraints=constraints,
        options=options,
    )
    out = SolveOutcome(status="limit")
    if res.status == 0:
        out.status = "optimal"
    elif res.status == 2:
        out.status = "infeasible"
    elif res.status == 3:
        out.status = "unbounded"
    if res.x is not None:
        x = np.where(model.binary_mask(), np.round(res.x), res.x)
        out.values = model.as_dict(x)
        out.objective = model.objective_value(out.values)
    bound = getattr(res, "mip_dual_bound", None)
    if bound is not None and math.isfinite(bound):
        out.bound = float(bound) + model.objective_constant
    elif out.optimal:
        out.bound = out.objective
    return out
