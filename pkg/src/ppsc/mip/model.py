"""Linear model container shared by every formulation in the package.

Variables are addressed by name.  Constraints and cuts are stored sparsely
as ``{column index: coefficient}`` rows; the dense matrix handed to the LP
solver is grown incrementally as rows are appended, so installing lazy cuts
during a branch-and-bound search costs one row copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

BINARY = "binary"
CONTINUOUS = "continuous"

LE, GE, EQ = "<=", ">=", "="
_SENSES = (LE, GE, EQ)

CUT_TAGS = (
    "no_good",
    "strengthened_no_good",
    "submodular",
    "new_valid",
    "oracle_phase",
    "user",
)


class ModelError(ValueError):
    """Raised for malformed models, cuts or unknown variable names."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lb: float
    ub: float


@dataclass(frozen=True)
class LinearCut:
    """A linear inequality over named variables, tagged with where it came from."""

    coefs: Mapping[str, float]
    sense: str
    rhs: float
    tag: str = "user"

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise ModelError(f"unknown relation {self.sense!r}")
        if not any(v != 0.0 for v in self.coefs.values()):
            raise ModelError("cut has no nonzero coefficient")
        object.__setattr__(self, "coefs", dict(self.coefs))

    def lhs(self, values: Mapping[str, float]) -> float:
        return sum(c * values[name] for name, c in self.coefs.items())

    def violation(self, values: Mapping[str, float]) -> float:
        """Amount by which ``values`` violate the cut (0 when satisfied)."""
        lhs = self.lhs(values)
        if self.sense == LE:
            return max(0.0, lhs - self.rhs)
        if self.sense == GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)

    def is_satisfied(self, values: Mapping[str, float], tol: float = 1e-6) -> bool:
        return self.violation(values) <= tol

    def key(self) -> tuple:
        items = tuple(sorted((k, round(v, 12)) for k, v in self.coefs.items() if v != 0.0))
        return (items, self.sense, round(self.rhs, 12))

    def __str__(self):
        terms = " ".join(f"{c:+g} {name}" for name, c in self.coefs.items() if c != 0.0)
        return f"{terms} {self.sense} {self.rhs:g}"


@dataclass
class _Row:
    coefs: dict[int, float]
    sense: str
    rhs: float
    name: str
    tag: str | None = None


class LinearModel:
    """Minimization model with binary and bounded continuous variables."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self._index: dict[str, int] = {}
        self._objective: dict[int, float] = {}
        self.objective_constant = 0.0
        self.rows: list[_Row] = []
        self.n_base_rows = 0
        self._cut_keys: set[tuple] = set()
        self.cuts: list[LinearCut] = []
        self._dense: np.ndarray | None = None
        self._dense_rows = 0
        self._senses = np.empty(0, dtype="<U2")
        self._rhs = np.empty(0)

    # -- construction -------------------------------------------------
    def add_var(self, name: str, kind: str = CONTINUOUS, lb: float = 0.0, ub: float = 1.0) -> int:
        if name in self._index:
            raise ModelError(f"duplicate variable name {name!r}")
        if kind == BINARY:
            lb, ub = 0.0, 1.0
        elif kind != CONTINUOUS:
            raise ModelError(f"unknown variable kind {kind!r}")
        if not (math.isfinite(lb) and math.isfinite(ub)):
            raise ModelError(f"variable {name!r} needs finite bounds")
        if lb > ub:
            raise ModelError(f"variable {name!r} has lb > ub")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, kind, float(lb), float(ub)))
        self._dense = None
        return self._index[name]

    def add_vars(self, names: Iterable[str], kind: str = CONTINUOUS, lb: float = 0.0, ub: float = 1.0):
        return [self.add_var(n, kind, lb, ub) for n in names]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def has_var(self, name: str) -> bool:
        return name in self._index

    def set_objective(self, coefs: Mapping[str, float], constant: float = 0.0):
        self._objective = {self.index(k): float(v) for k, v in coefs.items() if v != 0.0}
        self.objective_constant = float(constant)

    def _to_row(self, coefs: Mapping[str, float], sense: str, rhs: float, name: str, tag=None) -> _Row:
        if sense not in _SENSES:
            raise ModelError(f"unknown relation {sense!r}")
        row: dict[int, float] = {}
        for k, v in coefs.items():
            if v == 0.0:
                continue
            j = self.index(k)
            row[j] = row.get(j, 0.0) + float(v)
        return _Row(row, sense, float(rhs), name, tag)

    def add_constraint(self, coefs: Mapping[str, float], sense: str, rhs: float, name: str = ""):
        if self.cuts:
            raise ModelError("structural constraints must precede cuts")
        self.rows.append(self._to_row(coefs, sense, rhs, name or f"c{len(self.rows)}"))
        self.n_base_rows = len(self.rows)

    def add_cut(self, cut: LinearCut) -> bool:
        """Append ``cut`` to the pool.  Returns False for a duplicate."""
        for name in cut.coefs:
            self.index(name)
        key = cut.key()
        if key in self._cut_keys:
            return False
        self._cut_keys.add(key)
        self.cuts.append(cut)
        self.rows.append(self._to_row(cut.coefs, cut.sense, cut.rhs, f"cut{len(self.cuts)}", cut.tag))
        return True

    # -- views ----------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def binary_mask(self) -> np.ndarray:
        return np.array([v.kind == BINARY for v in self.variables], dtype=bool)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return lb, ub

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for j, v in self._objective.items():
            c[j] = v
        return c

    def dense(self) -> tuple[np.ndarray, list[str], np.ndarray]:
        """Return ``(A, senses, rhs)`` covering base rows and all cuts."""
        n = self.n_vars
        if self._dense is None or self._dense.shape[1] != n:
            self._dense = np.zeros((max(len(self.rows), 8), n))
            self._dense_rows = 0
        if len(self.rows) > self._dense.shape[0]:
            grown = np.zeros((2 * len(self.rows), n))
            grown[: self._dense_rows] = self._dense[: self._dense_rows]
            self._dense = grown
        for r in range(self._dense_rows, len(self.rows)):
            for j, v in self.rows[r].coefs.items():
                self._dense[r, j] = v
        if len(self._senses) != len(self.rows):
            new = self.rows[len(self._senses):]
            self._senses = np.concatenate([self._senses, [r.sense for r in new]])
            self._rhs = np.concatenate([self._rhs, [r.rhs for r in new]])
        self._dense_rows = len(self.rows)
        return self._dense[: len(self.rows)], self._senses, self._rhs

    def as_dict(self, x: np.ndarray) -> dict[str, float]:
        return {v.name: float(x[j]) for j, v in enumerate(self.variables)}

    def objective_value(self, values: Mapping[str, float]) -> float:
        return self.objective_constant + sum(
            c * values[self.variables[j].name] for j, c in self._objective.items()
        )

    def max_violation(self, values: Mapping[str, float]) -> float:
        """Largest violation of any row or bound at ``values``."""
        x = np.array([values[v.name] for v in self.variables])
        worst = 0.0
        lb, ub = self.bounds()
        if len(x):
            worst = max(worst, float(np.max(lb - x, initial=0.0)), float(np.max(x - ub, initial=0.0)))
        for row in self.rows:
            lhs = sum(c * x[j] for j, c in row.coefs.items())
            if row.sense == LE:
                worst = max(worst, lhs - row.rhs)
            elif row.sense == GE:
                worst = max(worst, row.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - row.rhs))
        return worst

    def copy(self) -> "LinearModel":
        other = LinearModel(self.name)
        other.variables = list(self.variables)
        other._index = dict(self._index)
        other._objective = dict(self._objective)
        other.objective_constant = self.objective_constant
        other.rows = [_Row(dict(r.coefs), r.sense, r.rhs, r.name, r.tag) for r in self.rows]
        other.n_base_rows = self.n_base_rows
        other._cut_keys = set(self._cut_keys)
        other.cuts = list(self.cuts)
        return other

    def dump(self) -> str:
        """Human-readable equation listing, for debugging."""
        names = self.names

        def expr(coefs: Mapping[int, float]) -> str:
            if not coefs:
                return "0"
            return " ".join(f"{v:+g} {names[j]}" for j, v in sorted(coefs.items()))

        lines = [f"\\ {self.name}", "minimize", f"  obj: {expr(self._objective)}"]
        if self.objective_constant:
            lines[-1] += f" {self.objective_constant:+g}"
        lines.append("subject to")
        for row in self.rows:
            tag = f" [{row.tag}]" if row.tag else ""
            lines.append(f"  {row.name}{tag}: {expr(row.coefs)} {row.sense} {row.rhs:g}")
        lines.append("bounds")
        for v in self.variables:
            lines.append(f"  {v.lb:g} <= {v.name} <= {v.ub:g}")
        bins = [v.name for v in self.variables if v.kind == BINARY]
        if bins:
            lines.append("binary")
            lines.append("  " + " ".join(bins))
        lines.append("end")
        return "\n".join(lines)


@dataclass
class SolveOutcome:
    status: str
    values: dict[str, float] = field(default_factory=dict)
    objective: float = math.inf
    bound: float = -math.inf
    nodes: int = 0
    lp_iterations: int = 0
    cuts_added: int = 0
    callback_calls: int = 0
    rejections: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"
