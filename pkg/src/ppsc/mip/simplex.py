"""Dense bounded-variable dual simplex on a full tableau.

Every row ``a_r x (sense) b_r`` gets a logical variable ``s_r`` with
``a_r x + s_r = b_r``; its bounds encode the sense (``<=``: ``s >= 0``,
``>=``: ``s <= 0``, ``=``: ``s = 0``).  Structural variables all carry finite
bounds, so the all-logical basis with each structural at the bound favoured
by its cost is dual feasible for any objective.  No phase one is needed, and
a basis returned by an earlier solve restarts the method after bounds are
tightened or rows are appended, which is what branch-and-bound does.

Leaving row: largest bound violation (Dantzig).  After a run of degenerate
pivots the method switches to Bland's rule (lowest index) for the remainder
of the solve, which rules out cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import EQ, GE, LE, LinearModel

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_LIMIT = 50
REFACTOR_EVERY = 100
# row/column ratio above which the revised method replaces the full tableau
TALL_RATIO = 4


class NumericalError(RuntimeError):
    """The simplex could not reach a trustworthy answer."""


@dataclass(frozen=True)
class Basis:
    """Basic column per row, plus the upper-bound flags of nonbasic columns.

    Columns ``0..n-1`` are structural, ``n + r`` is the logical of row ``r``.
    """

    n: int
    basic: np.ndarray
    at_upper: np.ndarray  # boolean mask over all columns


@dataclass
class LPResult:
    status: str  # optimal | infeasible
    x: np.ndarray | None
    objective: float
    iterations: int
    basis: Basis | None = None


def _logical_bounds(senses):
    s = np.asarray(senses)
    lo = np.where(s == GE, -np.inf, 0.0)
    hi = np.where(s == LE, np.inf, 0.0)
    return lo, hi


class _DualSimplex:
    """Bounded dual simplex loop; subclasses supply the basis linear algebra.

    Columns ``0..n-1`` are structural, ``n..n+m-1`` logical.  ``beta`` holds
    the basic values and ``d`` the reduced costs; both are updated from the
    pivot row and column at each step and recomputed on refactorisation.
    """

    def __init__(self, A, b, c, lower, upper, basic, at_upper):
        m, n = A.shape
        self.m, self.n = m, n
        self.A = A
        self.b = b
        self.cost = np.concatenate([c, np.zeros(m)])
        self.lower = lower
        self.upper = upper
        self.basic = np.array(basic, dtype=int)
        self.at_upper = np.zeros(n + m, dtype=bool)
        self.at_upper[: at_upper.size] = at_upper
        self.is_basic = np.zeros(n + m, dtype=bool)
        self.is_basic[self.basic] = True
        self.at_upper[self.is_basic] = False
        self.iterations = 0
        self.factor()

    # -- linear algebra hooks ------------------------------------------------
    def factor(self):
        raise NotImplementedError

    def row(self, r):
        """Row ``r`` of ``B^{-1} [A I]``."""
        raise NotImplementedError

    def column(self, j):
        """``B^{-1}`` times column ``j`` of ``[A I]``."""
        raise NotImplementedError

    def swap(self, r, j, alpha_r, alpha_j):
        """Column ``j`` replaces the basic of row ``r``."""
        self.basic[r] = j

    def basic_values(self):
        raise NotImplementedError

    # -- shared ----------------------------------------------------------------
    def nonbasic_values(self):
        v = np.where(self.at_upper, self.upper, self.lower)
        v[self.is_basic] = 0.0
        return v

    def rhs_residual(self):
        """``b - [A I] x_N`` for the current nonbasic values."""
        xn = self.nonbasic_values()
        return self.b - self.A @ xn[: self.n] - xn[self.n:]

    def make_dual_feasible(self) -> bool:
        """Move nonbasics to the bound their reduced cost prefers, if finite."""
        nb = ~self.is_basic
        want_upper = nb & (self.d < -FEAS_TOL)
        want_lower = nb & (self.d > FEAS_TOL)
        if np.any(want_upper & ~np.isfinite(self.upper)) or np.any(want_lower & ~np.isfinite(self.lower)):
            return False
        changed = (want_upper & ~self.at_upper) | (want_lower & self.at_upper)
        if changed.any():
            self.at_upper[want_upper] = True
            self.at_upper[want_lower] = False
            self.beta = self.basic_values()
        return True

    def _infeasibility(self):
        lo = self.lower[self.basic]
        hi = self.upper[self.basic]
        below = lo - self.beta
        above = self.beta - hi
        return np.maximum(below, above), below > above

    def _entering(self, alpha, increase, bland):
        nb = ~self.is_basic & (self.upper > self.lower)
        at_up = self.at_upper
        # x_B[r] = beta_r - sum alpha_j (x_j - x_j0)
        if increase:
            ok = nb & (((~at_up) & (alpha < -PIVOT_TOL)) | (at_up & (alpha > PIVOT_TOL)))
        else:
            ok = nb & (((~at_up) & (alpha > PIVOT_TOL)) | (at_up & (alpha < -PIVOT_TOL)))
        cand = np.flatnonzero(ok)
        if cand.size == 0:
            return -1
        ratios = np.abs(self.d[cand]) / np.abs(alpha[cand])
        best = ratios.min()
        ties = cand[ratios <= best + 1e-12]
        if bland or ties.size == 1:
            return int(ties[0])
        return int(ties[np.argmax(np.abs(alpha[ties]))])

    def pivot(self, r, j, target, alpha_r):
        """Basic of row ``r`` leaves at value ``target``; column ``j`` enters."""
        alpha_j = self.column(j)
        piv = alpha_r[j]
        x_j0 = self.upper[j] if self.at_upper[j] else self.lower[j]
        step = (self.beta[r] - target) / piv
        self.beta -= step * alpha_j
        self.beta[r] = x_j0 + step
        self.d -= (self.d[j] / piv) * alpha_r
        self.d[j] = 0.0
        leaving = self.basic[r]
        self.is_basic[leaving] = False
        self.is_basic[j] = True
        self.at_upper[j] = False
        self.at_upper[leaving] = target == self.upper[leaving] and self.upper[leaving] != self.lower[leaving]
        self.swap(r, j, alpha_r, alpha_j)

    def run(self, max_iter):
        bland = False
        degenerate = 0
        since_factor = 0
        while True:
            infeas, below = self._infeasibility()
            viol = np.flatnonzero(infeas > FEAS_TOL)
            if viol.size == 0:
                return "optimal"
            if self.iterations >= max_iter:
                raise NumericalError("simplex iteration limit reached")
            if bland:
                r = int(viol[np.argmin(self.basic[viol])])
            else:
                r = int(viol[np.argmax(infeas[viol])])
            increase = bool(below[r])
            alpha_r = self.row(r)
            j = self._entering(alpha_r, increase, bland)
            if j < 0:
                if since_factor:
                    # confirm on a fresh factorisation before declaring infeasible
                    self.factor()
                    since_factor = 0
                    continue
                return "infeasible"
            leaving = self.basic[r]
            target = self.lower[leaving] if increase else self.upper[leaving]
            if abs(self.d[j]) <= FEAS_TOL:
                degenerate += 1
                if degenerate > DEGENERATE_LIMIT:
                    bland = True
            else:
                degenerate = 0
            self.pivot(r, j, target, alpha_r)
            self.iterations += 1
            since_factor += 1
            if since_factor >= REFACTOR_EVERY:
                self.factor()
                since_factor = 0

    def solution(self):
        v = self.nonbasic_values()
        v[self.basic] = self.beta
        return v


class _Tableau(_DualSimplex):
    """Full tableau ``B^{-1} [A I]``, updated by elimination at each pivot."""

    def _binv(self, V):
        return _structured_solve(self.A, self.basic, self.n, V)

    def factor(self):
        m = self.m
        M = np.hstack([self.A, np.eye(m)])
        self.T = self._binv(M)
        self.beta = self._binv(self.rhs_residual())
        self.d = self.cost - self.cost[self.basic] @ self.T
        self.d[self.basic] = 0.0

    def basic_values(self):
        return self._binv(self.rhs_residual())

    def row(self, r):
        return self.T[r].copy()

    def column(self, j):
        return self.T[:, j].copy()

    def swap(self, r, j, alpha_r, alpha_j):
        T = self.T
        T[r] /= alpha_r[j]
        alpha_j = alpha_j.copy()
        alpha_j[r] = 0.0
        T -= np.outer(alpha_j, T[r])
        self.basic[r] = j


class _Revised(_DualSimplex):
    """Revised method for tall problems (many rows, few columns).

    At most ``n`` structural columns are basic.  With structural basics
    ``J`` and basic logicals on rows ``L``, ``B`` is block triangular after
    permutation, so every solve reduces to the square block ``A[F, J]`` on
    the remaining rows ``F``.
    """

    def factor(self):
        n, m = self.n, self.m
        self.pos_s = np.flatnonzero(self.basic < n)
        self.pos_l = np.flatnonzero(self.basic >= n)
        self.J = self.basic[self.pos_s]
        self.L = self.basic[self.pos_l] - n
        self.F = np.setdiff1d(np.arange(m), self.L, assume_unique=True)
        if self.J.size:
            self.K_inv = np.linalg.inv(self.A[np.ix_(self.F, self.J)])
        else:
            self.K_inv = np.zeros((0, 0))
        self.beta = self.basic_values()
        y = self.duals()
        self.d = self.cost - np.concatenate([self.A.T @ y, y])
        self.d[self.basic] = 0.0

    def basic_values(self):
        return self.binv(self.rhs_residual())

    def binv(self, v):
        out = np.empty(self.m)
        yJ = self.K_inv @ v[self.F]
        out[self.pos_s] = yJ
        out[self.pos_l] = v[self.L] - self.A[np.ix_(self.L, self.J)] @ yJ
        return out

    def _left(self, e_struct):
        """``u`` with ``B^T u = e``, where ``e`` vanishes on logical positions."""
        u = np.zeros(self.m)
        u[self.F] = self.K_inv.T @ e_struct
        return u

    def duals(self):
        return self._left(self.cost[self.J])

    def row(self, r):
        if self.basic[r] >= self.n:
            # logical position: u_L = e, then A[F,J]^T u_F = -A[L,J]^T u_L
            u = np.zeros(self.m)
            row_l = self.basic[r] - self.n
            u[row_l] = 1.0
            if self.J.size:
                u[self.F] = -self.K_inv.T @ self.A[row_l, self.J]
        else:
            e = (self.pos_s == r).astype(float)
            u = self._left(e)
        return np.concatenate([u @ self.A, u])

    def column(self, j):
        if j < self.n:
            return self.binv(self.A[:, j])
        e = np.zeros(self.m)
        e[j - self.n] = 1.0
        return self.binv(e)

    def swap(self, r, j, alpha_r, alpha_j):
        self.basic[r] = j
        # refresh the small factor; beta and d were updated by the pivot
        n = self.n
        self.pos_s = np.flatnonzero(self.basic < n)
        self.pos_l = np.flatnonzero(self.basic >= n)
        self.J = self.basic[self.pos_s]
        self.L = self.basic[self.pos_l] - n
        self.F = np.setdiff1d(np.arange(self.m), self.L, assume_unique=True)
        if self.J.size:
            self.K_inv = np.linalg.inv(self.A[np.ix_(self.F, self.J)])
        else:
            self.K_inv = np.zeros((0, 0))


def _structured_solve(A, basic, n, V):
    """``B^{-1} V`` for the basis ``[A I][:, basic]``."""
    m = A.shape[0]
    pos_s = np.flatnonzero(basic < n)
    pos_l = np.flatnonzero(basic >= n)
    J = basic[pos_s]
    L = basic[pos_l] - n
    F = np.setdiff1d(np.arange(m), L, assume_unique=True)
    out = np.empty((m,) + V.shape[1:])
    if J.size:
        yJ = np.linalg.solve(A[np.ix_(F, J)], V[F])
        out[pos_s] = yJ
        out[pos_l] = V[L] - A[np.ix_(L, J)] @ yJ
    else:
        out[pos_l] = V[L]
    return out


def _start(n, m, c, warm: Basis | None):
    if warm is not None and warm.n == n and warm.basic.size <= m:
        basic = np.concatenate([warm.basic, np.arange(n + warm.basic.size, n + m)])
        return basic, warm.at_upper
    return np.arange(n, n + m), c < 0


def solve_arrays(A, senses, b, c, lb, ub, max_iter: int | None = None,
                 warm: Basis | None = None) -> LPResult:
    """Minimize ``c @ x`` subject to ``A x (senses) b`` and ``lb <= x <= ub``.

    ``warm`` may be the basis of an earlier solve of the same columns; rows
    appended since then start with their logical basic.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    n = c.size
    m = b.size
    if not (np.all(np.isfinite(lb)) and np.all(np.isfinite(ub))):
        raise ValueError("every variable needs finite bounds")
    if np.any(lb > ub + FEAS_TOL):
        return LPResult("infeasible", None, np.inf, 0)
    ub = np.maximum(ub, lb)
    A = A.reshape(m, n)
    if max_iter is None:
        max_iter = 50 * (n + m) + 1000

    llo, lhi = _logical_bounds(senses)
    lower = np.concatenate([lb, llo])
    upper = np.concatenate([ub, lhi])
    engine = _Revised if m > TALL_RATIO * n else _Tableau
    tab = None
    for attempt in (warm, None):
        basic, at_upper = _start(n, m, c, attempt)
        try:
            tab = engine(A, b, c, lower, upper, basic, at_upper)
        except np.linalg.LinAlgError:
            continue
        if tab.make_dual_feasible():
            break
        tab = None
    if tab is None:
        raise NumericalError("could not build a dual feasible starting basis")

    status = tab.run(max_iter)
    basis = Basis(n, tab.basic.copy(), tab.at_upper.copy())
    if status == "infeasible":
        return LPResult("infeasible", None, np.inf, tab.iterations, basis)
    x = np.clip(tab.solution()[:n], lb, ub)
    # the tableau accumulates roundoff; reject answers that drift
    resid = _max_residual(A, senses, b, x)
    if resid > 1e-6:
        raise NumericalError(f"primal residual {resid:.2e}")
    return LPResult("optimal", x, float(c @ x), tab.iterations, basis)


def _max_residual(A, senses, b, x):
    if b.size == 0:
        return 0.0
    lhs = A @ x
    s = np.asarray(senses)
    gap = np.where(s == LE, lhs - b, np.where(s == GE, b - lhs, np.abs(lhs - b)))
    return float(max(gap.max(), 0.0))


def solve_lp(model: LinearModel, lb=None, ub=None) -> LPResult:
    """Solve the continuous relaxation of ``model`` (integrality dropped)."""
    A, senses, b = model.dense()
    mlb, mub = model.bounds()
    lb = mlb if lb is None else lb
    ub = mub if ub is None else ub
    res = solve_arrays(A, senses, b, model.objective_vector(), lb, ub)
    if res.status == "optimal":
        res.objective += model.objective_constant
    return res
