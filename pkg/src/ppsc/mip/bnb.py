"""Best-bound branch-and-bound with a lazy-constraint callback.

The callback sees every integer-feasible candidate before it can become the
incumbent.  Returning cuts rejects the candidate: the cuts go into the
model's global pool and the same node is solved again.
"""

from __future__ import annotations

import heapq
import math
import time
from typing import Callable, Iterable, Mapping

import numpy as np

from .model import LinearCut, LinearModel, SolveOutcome
from .simplex import Basis, solve_arrays

INT_TOL = 1e-6
PRUNE_TOL = 1e-9

LazyCallback = Callable[[Mapping[str, float]], Iterable[LinearCut]]


class CallbackError(RuntimeError):
    """The callback rejected a candidate without cutting it off."""


def solve_bnb(
    model: LinearModel,
    lazy_callback: LazyCallback | None = None,
    node_limit: int | None = None,
    time_limit: float | None = None,
    int_tol: float = INT_TOL,
) -> SolveOutcome:
    """Solve ``model`` to optimality over its binaries, honouring lazy cuts."""
    start = time.perf_counter()
    binary = np.flatnonzero(model.binary_mask())
    c = model.objective_vector()
    root_lb, root_ub = model.bounds()
    out = SolveOutcome(status="infeasible")
    incumbent: np.ndarray | None = None
    inc_obj = math.inf

    # (bound, sequence, lb, ub, parent basis); sequence keeps ties deterministic (FIFO)
    heap: list[tuple[float, int, np.ndarray, np.ndarray, Basis | None]] = [
        (-math.inf, 0, root_lb, root_ub, None)
    ]
    seq = 1
    limited = False

    while heap:
        if node_limit is not None and out.nodes >= node_limit:
            limited = True
            break
        if time_limit is not None and time.perf_counter() - start > time_limit:
            limited = True
            break
        bound, _, lb, ub, warm = heapq.heappop(heap)
        if bound >= inc_obj - PRUNE_TOL:
            continue
        out.nodes += 1
        while True:
            A, senses, b = model.dense()
            res = solve_arrays(A, senses, b, c, lb, ub, warm=warm)
            out.lp_iterations += res.iterations
            warm = res.basis
            if res.status != "optimal":
                break
            obj = res.objective + model.objective_constant
            if obj >= inc_obj - PRUNE_TOL:
                break
            x = res.x
            vals = x[binary]
            frac = np.abs(vals - np.round(vals))
            if binary.size and frac.max() > int_tol:
                # most fractional; argmax returns the lowest index on ties
                score = np.round(np.abs(vals - np.floor(vals) - 0.5), 12)
                k = int(binary[np.argmin(score)])
                down_ub = ub.copy()
                down_ub[k] = math.floor(x[k])
                up_lb = lb.copy()
                up_lb[k] = math.ceil(x[k])
                heapq.heappush(heap, (obj, seq, lb, down_ub, warm))
                heapq.heappush(heap, (obj, seq + 1, up_lb, ub, warm))
                seq += 2
                break
            x = x.copy()
            x[binary] = np.round(x[binary])
            values = model.as_dict(x)
            if lazy_callback is not None:
                out.callback_calls += 1
                cuts = list(lazy_callback(values) or ())
                if cuts:
                    added = 0
                    violated = False
                    for cut in cuts:
                        if model.add_cut(cut):
                            added += 1
                        if cut.violation(values) > int_tol:
                            violated = True
                    if not violated:
                        raise CallbackError("callback returned cuts that do not cut off the candidate")
                    out.cuts_added += added
                    out.rejections += 1
                    continue
            cand_obj = float(c @ x) + model.objective_constant
            if cand_obj < inc_obj:
                inc_obj = cand_obj
                incumbent = x
            break

    out.objective = inc_obj
    if incumbent is not None:
        out.values = model.as_dict(incumbent)
    if limited:
        out.status = "limit"
        open_bounds = [h[0] for h in heap] + [inc_obj]
        out.bound = min(open_bounds)
    elif incumbent is None:
        out.status = "infeasible"
    else:
        out.status = "optimal"
        out.bound = inc_obj
    return out
