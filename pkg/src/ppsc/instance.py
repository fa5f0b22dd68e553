"""PPSC instances: bipartite coverage graph, costs, target and risk level.

Sets are indexed ``0..n-1`` and items ``0..m-1`` throughout.  Two coverage
models are supported:

* independent coverage: arc ``(i, j)`` covers item ``j`` independently with
  probability ``a[i, j]``;
* linear threshold: item ``j`` is covered when the summed weight of selected
  neighbours reaches a uniform threshold, so ``sum_i a[i, j] <= 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class CoverageModel(str, Enum):
    INDEPENDENT = "independent_coverage"
    LINEAR_THRESHOLD = "linear_threshold"


class InstanceError(ValueError):
    """An instance (or instance document) violates an invariant."""


@dataclass(frozen=True)
class PpscInstance:
    n: int
    m: int
    model: CoverageModel
    weights: tuple[tuple[int, int, float], ...]
    costs: tuple[float, ...]
    tau: int
    epsilon: float

    @cached_property
    def a(self) -> np.ndarray:
        """Dense ``(n, m)`` weight matrix (zero where no arc)."""
        mat = np.zeros((self.n, self.m))
        for i, j, w in self.weights:
            mat[i, j] = w
        mat.setflags(write=False)
        return mat

    @cached_property
    def cost_vector(self) -> np.ndarray:
        c = np.array(self.costs, dtype=float)
        c.setflags(write=False)
        return c

    @property
    def is_lt(self) -> bool:
        return self.model is CoverageModel.LINEAR_THRESHOLD

    def with_params(self, **changes) -> "PpscInstance":
        fields = dict(
            n=self.n, m=self.m, model=self.model, weights=self.weights,
            costs=self.costs, tau=self.tau, epsilon=self.epsilon,
        )
        fields.update(changes)
        return validate(PpscInstance(**fields))


def make_instance(a, costs, tau: int, epsilon: float, model="independent_coverage") -> PpscInstance:
    """Build and validate an instance from a dense weight matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise InstanceError("weight matrix must be two-dimensional")
    n, m = a.shape
    weights = tuple(
        (int(i), int(j), float(a[i, j])) for i in range(n) for j in range(m) if a[i, j] != 0.0
    )
    inst = PpscInstance(
        n=n, m=m, model=CoverageModel(model), weights=weights,
        costs=tuple(float(c) for c in costs), tau=int(tau), epsilon=float(epsilon),
    )
    return validate(inst)


def validate(instance: PpscInstance) -> PpscInstance:
    """Return ``instance`` unchanged if every invariant holds, else raise."""
    n, m = instance.n, instance.m
    if n < 0 or m < 0:
        raise InstanceError("negative dimension")
    if len(instance.costs) != n:
        raise InstanceError(f"expected {n} costs, got {len(instance.costs)}")
    for i, b in enumerate(instance.costs):
        if not (math.isfinite(b) and b >= 0):
            raise InstanceError(f"cost of set {i} must be finite and nonnegative")
    seen = set()
    for i, j, w in instance.weights:
        if not (0 <= i < n and 0 <= j < m):
            raise InstanceError(f"arc ({i}, {j}) out of range")
        if (i, j) in seen:
            raise InstanceError(f"duplicate arc ({i}, {j})")
        seen.add((i, j))
        if not (0.0 <= w <= 1.0):
            raise InstanceError(f"weight out of range on arc ({i}, {j}): {w}")
    if not (0 <= instance.tau):
        raise InstanceError("target must be nonnegative")
    if instance.tau > m:
        raise InstanceError("target exceeds item count")
    if not (0.0 <= instance.epsilon <= 1.0):
        raise InstanceError("risk level must lie in [0, 1]")
    if instance.is_lt:
        sums = [0.0] * m
        for _, j, w in instance.weights:
            sums[j] += w
        for j, s in enumerate(sums):
            if s > 1.0:
                raise InstanceError(f"LT row-sum exceeds 1 at item {j}")
    return instance


def selection(x: Sequence[int] | np.ndarray, n: int | None = None) -> np.ndarray:
    """Normalize a 0/1 selection vector, checking its length and entries."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError("selection must be a vector")
    if n is not None and arr.size != n:
        raise ValueError(f"selection has length {arr.size}, expected {n}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("selection entries must be 0 or 1")
    return arr.astype(np.int8)


def support(x: Iterable[int]) -> frozenset[int]:
    return frozenset(int(i) for i, v in enumerate(x) if v)


def characteristic(X: Iterable[int], n: int) -> np.ndarray:
    x = np.zeros(n, dtype=np.int8)
    for i in X:
        x[i] = 1
    return x


# -- generator --------------------------------------------------------------

def generate_paper_instance(
    v: int,
    bbar: float = 1.0,
    epsilon: float = 0.05,
    seed: int = 0,
    model: str | CoverageModel = CoverageModel.INDEPENDENT,
    high_group: int = 10,
) -> PpscInstance:
    """Complete bipartite benchmark with ``n = m = v / 2``.

    The first ``min(high_group, n)`` sets form the high-coverage group, the
    rest the low-coverage group.  The scheme is deterministic; ``seed`` is
    accepted for interface symmetry and recorded nowhere.
    """
    if v < 2:
        raise InstanceError("node count must be at least 2")
    if v % 2:
        raise InstanceError("node count must be even")
    model = CoverageModel(model)
    n = m = v // 2
    k1 = min(high_group, n)
    k2 = n - k1
    a = np.zeros((n, m))
    if model is CoverageModel.INDEPENDENT:
        for pos in range(1, k1 + 1):
            a[pos - 1, :] = 0.18 + pos * 0.04 / k1
        for pos in range(k1 + 1, n + 1):
            a[pos - 1, :] = (pos - k1) * 0.04 / k2
    else:
        for pos in range(1, k1 + 1):
            a[pos - 1, :] = 0.9 / k1 - pos / (100 * k1)
        if k2:
            # mass shaved off the high group, spread evenly over the low group
            residual = sum(pos / (100 * k1) for pos in range(1, k1 + 1))
            a[k1:, :] = residual / k2
    if bbar == 1:
        costs = [1.0] * n
    else:
        costs = [pos * bbar / k1 for pos in range(1, k1 + 1)]
        costs += [(n - j - 1) * bbar / (2 * k2) for j in range(k1, n)]
    tau = (3 * m + 4) // 5  # ceil(0.6 m) in integer arithmetic
    return make_instance(a, costs, tau, epsilon, model)


# -- persistence ------------------------------------------------------------

_REQUIRED = ("model", "n", "m", "costs", "weights", "tau", "epsilon")


def to_document(instance: PpscInstance) -> dict:
    return {
        "model": instance.model.value,
        "n": instance.n,
        "m": instance.m,
        "costs": list(instance.costs),
        "weights": [[i, j, w] for i, j, w in instance.weights],
        "tau": instance.tau,
        "epsilon": instance.epsilon,
    }


def from_document(doc: dict) -> PpscInstance:
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise InstanceError(f"missing field(s): {', '.join(missing)}")
    try:
        model = CoverageModel(doc["model"])
    except ValueError:
        raise InstanceError(f"unknown model {doc['model']!r}") from None
    try:
        weights = tuple((int(i), int(j), float(w)) for i, j, w in doc["weights"])
        inst = PpscInstance(
            n=int(doc["n"]), m=int(doc["m"]), model=model, weights=weights,
            costs=tuple(float(c) for c in doc["costs"]),
            tau=int(doc["tau"]), epsilon=float(doc["epsilon"]),
        )
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"malformed instance document: {exc}") from None
    return validate(inst)


def save(instance: PpscInstance, path) -> None:
    Path(path).write_text(json.dumps(to_document(instance), indent=1))


def load(path) -> PpscInstance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from None
    return from_document(doc)
