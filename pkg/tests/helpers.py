"""Independent reference implementations and random generators for tests.

Nothing here calls into the package's oracle or scenario kernels: these are
the second route every solver result is checked against.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ppsc.instance import make_instance
from ppsc.scenarios import LiveArcScenario, ScenarioSet

# Four sets, six items (0-based): the worked example graph used across tests.
EXAMPLE_ARCS = [(0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 3), (2, 5), (3, 3), (3, 4)]


def example_scenario(p: float = 1.0) -> LiveArcScenario:
    return LiveArcScenario.from_arcs(4, 6, EXAMPLE_ARCS, p)


# -- coverage probabilities ---------------------------------------------------

def ref_coverage(a, x, lt: bool) -> list[float]:
    """Per-item coverage probability by direct loops."""
    n, m = len(a), len(a[0])
    out = []
    for i in range(m):
        if lt:
            out.append(min(1.0, sum(a[j][i] for j in range(n) if x[j])))
        else:
            miss = 1.0
            for j in range(n):
                if x[j]:
                    miss *= 1.0 - a[j][i]
            out.append(1.0 - miss)
    return out


def ref_coverage_by_arcs(a, x) -> list[float]:
    """IC coverage by enumerating the live/dead outcome of every relevant arc."""
    n, m = len(a), len(a[0])
    out = []
    for i in range(m):
        arcs = [a[j][i] for j in range(n) if x[j] and a[j][i] > 0]
        total = 0.0
        for live in itertools.product([0, 1], repeat=len(arcs)):
            w = math.prod(q if s else 1 - q for q, s in zip(arcs, live))
            if any(live):
                total += w
        out.append(total)
    return out


def ref_tail(p, tau: int) -> float:
    """P(at least tau successes) by enumerating all 2^m outcome profiles."""
    p = np.asarray(p, dtype=float)
    m = p.size
    if m == 0:
        return 1.0 if tau <= 0 else 0.0
    outcomes = np.array(list(itertools.product([0, 1], repeat=m)), dtype=bool)
    weights = np.prod(np.where(outcomes, p, 1.0 - p), axis=1)
    return float(math.fsum(weights[outcomes.sum(axis=1) >= tau]))


def all_probabilities(instance) -> tuple[np.ndarray, np.ndarray]:
    """Every selection of the instance with its exact chance-constraint value.

    Runs the coverage recursion for all 2^n selections at once.
    """
    n, m = instance.n, instance.m
    X = np.array(list(itertools.product([0, 1], repeat=n)), dtype=float).reshape(-1, n)
    a = instance.a
    if instance.is_lt:
        P = np.minimum(X @ a, 1.0)
    else:
        P = 1.0 - np.prod(1.0 - X[:, :, None] * a[None, :, :], axis=1)
    dist = np.zeros((X.shape[0], m + 1))
    dist[:, 0] = 1.0
    for i in range(m):
        q = P[:, i : i + 1]
        shifted = np.zeros_like(dist)
        shifted[:, 1:] = dist[:, :-1]
        dist = dist * (1.0 - q) + shifted * q
    tail = dist[:, instance.tau :].sum(axis=1)
    return X.astype(np.int8), tail


def brute_optimum(instance, tol: float = 1e-9) -> tuple[float, list[np.ndarray]]:
    """Optimal cost and the list of truly feasible selections."""
    X, tail = all_probabilities(instance)
    ok = tail >= 1.0 - instance.epsilon - tol
    feasible = X[ok]
    if not len(feasible):
        return math.inf, []
    costs = feasible @ instance.cost_vector
    return float(costs.min()), list(feasible)


def ref_sigma(arcs_out: list[set[int]], X) -> int:
    covered: set[int] = set()
    for j in X:
        covered |= arcs_out[j]
    return len(covered)


def scenario_out_sets(s: LiveArcScenario) -> list[set[int]]:
    return [set(int(k) for k in np.flatnonzero(row)) for row in s.t]


def brute_sampled_optimum(instance, scenarios: ScenarioSet) -> float:
    outs = [scenario_out_sets(s) for s in scenarios]
    best = math.inf
    for bits in itertools.product([0, 1], repeat=instance.n):
        X = [j for j in range(instance.n) if bits[j]]
        prob = sum(s.p_omega for s, o in zip(scenarios, outs) if ref_sigma(o, X) >= instance.tau)
        if prob >= 1.0 - instance.epsilon - 1e-12:
            best = min(best, float(np.dot(bits, instance.cost_vector)))
    return best


# -- generators ---------------------------------------------------------------

def random_weights(rng, n, m, lt: bool, density: float = 0.6) -> np.ndarray:
    a = rng.random((n, m)) * (rng.random((n, m)) < density)
    if lt:
        sums = a.sum(axis=0)
        scale = rng.uniform(0.5, 1.0, m) / np.where(sums > 0, sums, 1.0)
        a = np.minimum(a * scale, 1.0)
        # guard the row-sum bound against roundoff
        over = a.sum(axis=0) > 1.0
        a[:, over] /= a[:, over].sum(axis=0) * (1 + 1e-12)
    return a


def random_instance(rng, n, m, lt=False, integer_costs=True, tau=None, epsilon=None, density=0.6):
    a = random_weights(rng, n, m, lt, density)
    costs = rng.integers(1, 10, n) if integer_costs else rng.uniform(0.5, 5.0, n)
    tau = int(rng.integers(0, m + 1)) if tau is None else tau
    epsilon = float(rng.choice([0.05, 0.1, 0.2, 0.3])) if epsilon is None else epsilon
    model = "linear_threshold" if lt else "independent_coverage"
    return make_instance(a, costs, tau, epsilon, model)


# -- random binary models -----------------------------------------------------

def random_binary_rows(rng, n, rows, with_eq=False):
    """Integer constraint data ``(A, senses, b)`` usually admitting some binary point."""
    A = rng.integers(-5, 6, (rows, n))
    A[A == 0] = rng.integers(1, 4, (A == 0).sum()) * (rng.random((A == 0).sum()) < 0.3)
    for r in np.flatnonzero(~A.any(axis=1)):
        A[r, rng.integers(0, n)] = 1
    anchor = rng.integers(0, 2, n)
    senses, b = [], []
    for r in range(rows):
        lhs = int(A[r] @ anchor)
        kind = rng.choice(["<=", ">=", "="] if with_eq else ["<=", ">="])
        if kind == "<=":
            b.append(lhs + int(rng.integers(-2, 4)))
        elif kind == ">=":
            b.append(lhs - int(rng.integers(-2, 4)))
        else:
            b.append(lhs)
        senses.append(str(kind))
    return A, senses, np.array(b)


def satisfied(A, senses, b, X, tol=1e-9):
    """Row-wise feasibility of every point in ``X`` (shape (k, n))."""
    ok = np.ones(len(X), dtype=bool)
    lhs = X @ np.asarray(A, dtype=float).T
    for r, s in enumerate(senses):
        if s == "<=":
            ok &= lhs[:, r] <= b[r] + tol
        elif s == ">=":
            ok &= lhs[:, r] >= b[r] - tol
        else:
            ok &= np.abs(lhs[:, r] - b[r]) <= tol
    return ok


def cube(n):
    return np.array(list(itertools.product([0, 1], repeat=n)), dtype=float).reshape(-1, n)


def enumerate_min(c, A, senses, b, extra=None):
    """Brute-force minimum of ``c @ x`` over binary ``x`` satisfying both row sets."""
    X = cube(len(c))
    ok = satisfied(A, senses, b, X)
    if extra is not None:
        ok &= satisfied(*extra, X)
    if not ok.any():
        return math.inf
    return float((X[ok] @ c).min())


def build_model(c, A, senses, b):
    from ppsc.mip import BINARY, LinearModel

    model = LinearModel("random")
    names = [f"v{j}" for j in range(len(c))]
    for name in names:
        model.add_var(name, BINARY)
    model.set_objective({names[j]: float(c[j]) for j in range(len(c))})
    for r in range(len(senses)):
        coefs = {names[j]: float(A[r][j]) for j in range(len(c)) if A[r][j]}
        if coefs:
            model.add_constraint(coefs, senses[r], float(b[r]))
    return model, names


def hidden_row_callback(names, A, senses, b, log):
    """Callback revealing a hidden constraint only when a candidate violates it."""
    from ppsc.mip import LinearCut

    def callback(values):
        x = np.array([values[nm] for nm in names])
        out = []
        for r in range(len(senses)):
            if not satisfied(A[r : r + 1], senses[r : r + 1], b[r : r + 1], x[None, :])[0]:
                coefs = {names[j]: float(A[r][j]) for j in range(len(names)) if A[r][j]}
                if coefs:
                    cut = LinearCut(coefs, senses[r], float(b[r]))
                    out.append(cut)
                    log.append(cut)
        return out

    return callback


# -- cut checks ---------------------------------------------------------------

def x_cut_holds(cut, points, tol=1e-9) -> np.ndarray:
    """Evaluate a cut over ``x[i]`` variables at every row of ``points``."""
    points = np.asarray(points, dtype=float)
    n = points.shape[1]
    coefs = np.zeros(n)
    for name, v in cut.coefs.items():
        assert name.startswith("x["), name
        coefs[int(name[2:-1])] = v
    lhs = points @ coefs
    if cut.sense == ">=":
        return lhs >= cut.rhs - tol
    if cut.sense == "<=":
        return lhs <= cut.rhs + tol
    return np.abs(lhs - cut.rhs) <= tol


def theta_cut_violations(cut, scenarios, n, tol=1e-9) -> int:
    """Subsets S whose point ``(sigma_w(S), chi_S)`` violates a theta cut."""
    (w,) = [int(k[6:-1]) for k in cut.coefs if k.startswith("theta[")]
    outs = scenario_out_sets(scenarios[w])
    coefs = np.zeros(n)
    for name, v in cut.coefs.items():
        if name.startswith("x["):
            coefs[int(name[2:-1])] = v
    th = cut.coefs[f"theta[{w}]"]
    bad = 0
    for bits in itertools.product([0, 1], repeat=n):
        S = [j for j in range(n) if bits[j]]
        lhs = th * ref_sigma(outs, S) + float(np.dot(coefs, bits))
        if cut.sense == "<=" and lhs > cut.rhs + tol:
            bad += 1
    return bad


def ltmip_goal_range(ltm, x) -> tuple[float, float]:
    """LP min and max of the goal expression with ``x`` fixed through its bounds."""
    from ppsc.mip import solve_lp

    model = ltm.model.copy()
    lb, ub = model.bounds()
    for u, v in enumerate(x):
        k = model.index(f"x[{u}]")
        lb[k] = ub[k] = float(v)
    out = []
    for sign in (1.0, -1.0):
        model.set_objective({k: sign * c for k, c in ltm.goal.items()})
        res = solve_lp(model, lb, ub)
        assert res.status == "optimal", res.status
        out.append(sign * res.objective)
    return out[0], out[1]
