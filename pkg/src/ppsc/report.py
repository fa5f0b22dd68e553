"""Result record shared by all solvers."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .mip import LinearCut


@dataclass
class SolveReport:
    method: str
    status: str = "unknown"  # optimal | infeasible | limit
    x: np.ndarray | None = None
    objective: float = math.inf
    bound: float = -math.inf
    # value of the sampled master before any oracle repair (sampling methods)
    master_objective: float = math.nan
    probability: float = math.nan
    feasible_true: bool | None = None
    iterations: int = 0
    nodes: int = 0
    master_cuts: int = 0
    oracle_cuts: int = 0
    cuts_by_tag: Counter = field(default_factory=Counter)
    time_master_s: float = 0.0
    time_oracle_s: float = 0.0
    master_trace: list[float] = field(default_factory=list)
    cut_log: list[LinearCut] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    @property
    def support(self) -> list[int]:
        if self.x is None:
            return []
        return [int(i) for i in np.flatnonzero(self.x)]

    def record_cut(self, cut: LinearCut, oracle: bool = False) -> None:
        self.cut_log.append(cut)
        self.cuts_by_tag[cut.tag] += 1
        if oracle:
            self.oracle_cuts += 1
        else:
            self.master_cuts += 1

    def summary(self) -> str:
        obj = f"{self.objective:.6g}" if math.isfinite(self.objective) else "-"
        return (
            f"{self.method}: {self.status} objective={obj} support={self.support} "
            f"iters={self.iterations} nodes={self.nodes} "
            f"cuts={self.master_cuts}+{self.oracle_cuts}"
        )
