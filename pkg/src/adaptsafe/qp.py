"""Small dense convex quadratic programs over v = [u, delta].

Minimize 0.5 v'Hv + F'v subject to a_i . v <= b_i.  Problems here are tiny
(a handful of variables, at most 16 rows), so the solver favours robustness
and exact certificates over asymptotics: a working-set iteration on a
Cholesky-factored H, cross-checked by exhaustive active-set enumeration
(`enumerate_solve`), with Farkas certificates on infeasible systems.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

MAX_ROWS = 16


class QpError(Exception):
    pass


class QpSolverError(QpError):
    """The working-set iteration failed to converge (not an infeasibility)."""


class QpInfeasibleError(QpError):
    """No point satisfies every row.

    ``rows`` is an irreducible infeasible subset: dropping any one of its
    rows makes the remaining system feasible.
    """

    def __init__(self, rows):
        self.rows = tuple(sorted(rows))
        super().__init__(f"infeasible constraint rows {self.rows}")


@dataclass(frozen=True)
class QpInstance:
    H: np.ndarray
    F: np.ndarray
    rows: tuple

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        F = np.asarray(self.F, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("H must be square")
        if F.shape != (H.shape[0],):
            raise ValueError("F must match H")
        scale = max(1.0, float(np.abs(H).max()))
        if np.abs(H - H.T).max() > 1e-12 * scale:
            raise ValueError("H must be symmetric")
        if np.linalg.eigvalsh(H).min() <= 0.0:
            raise ValueError("H must be positive definite")
        rows = tuple((np.asarray(a, dtype=float), float(b)) for a, b in self.rows)
        if len(rows) > MAX_ROWS:
            raise ValueError(f"at most {MAX_ROWS} rows supported")
        for a, _ in rows:
            if a.shape != (H.shape[0],):
                raise ValueError("row coefficient dimension mismatch")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def row_matrix(self):
        """Stacked (A, b) with A of shape (n_rows, dim)."""
        if not self.rows:
            return np.zeros((0, self.dim)), np.zeros(0)
        A = np.vstack([a for a, _ in self.rows])
        b = np.array([b for _, b in self.rows])
        return A, b

    def objective(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(0.5 * v @ self.H @ v + self.F @ v)


@dataclass(frozen=True)
class QpSolution:
    v: np.ndarray
    active_set: tuple
    multipliers: np.ndarray
    objective: float


@dataclass(frozen=True)
class KktReport:
    stationarity: float
    primal: float
    dual: float
    complementarity: float

    def accepted(self, tol: float = 1e-8) -> bool:
        return max(self.stationarity, self.primal, self.dual, self.complementarity) <= tol


def check_kkt(qp: QpInstance, sol: QpSolution) -> KktReport:
    """Max-norm KKT residuals of ``sol`` for ``qp``."""
    A, b = qp.row_matrix()
    mu = np.asarray(sol.multipliers, dtype=float)
    grad = qp.H @ sol.v + qp.F
    if qp.n_rows:
        grad = grad + A.T @ mu
        slack = A @ sol.v - b
        primal = float(max(0.0, slack.max()))
        dual = float(max(0.0, -mu.min()))
        comp = float(np.abs(mu * slack).max())
    else:
        primal = dual = comp = 0.0
    return KktReport(float(np.abs(grad).max()), primal, dual, comp)


def _chol_solve(L, x):
    return np.linalg.solve(L.T, np.linalg.solve(L, x))


def _equality_kkt(H, F, A_w, b_w):
    """Solve min 0.5 v'Hv + F'v s.t. A_w v = b_w.

    Returns (v, mu, consistent).  Rank-deficient working sets are solved by
    least squares; ``consistent`` is False when the equalities conflict.
    """
    d = H.shape[0]
    k = A_w.shape[0]
    K = np.zeros((d + k, d + k))
    K[:d, :d] = H
    K[:d, d:] = A_w.T
    K[d:, :d] = A_w
    rhs = np.concatenate([-F, b_w])
    try:
        sol = np.linalg.solve(K, rhs)
        resid = 0.0
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
        resid = float(np.abs(K @ sol - rhs).max())
    scale = 1.0 + float(np.abs(rhs).max())
    return sol[:d], sol[d:], resid <= 1e-8 * scale


def solve_qp(qp: QpInstance, feas_tol: float = 1e-9, dual_tol: float = 1e-10) -> QpSolution:
    """Working-set solver; raises QpInfeasibleError on infeasible systems.

    Ties (which row to add or drop) are broken by most-violated /
    most-negative first, falling back to lowest-index (Bland) selection if a
    working set repeats.
    """
    H, F = qp.H, qp.F
    A, b = qp.row_matrix()
    c = qp.n_rows
    L = np.linalg.cholesky(H)
    v = -_chol_solve(L, F)

    work: list = []
    mu_w = np.zeros(0)
    visited = set()
    bland = False
    max_iter = 50 + 12 * (c + 1)
    for _ in range(max_iter):
        if work:
            v, mu_w, consistent = _equality_kkt(H, F, A[work], b[work])
            if not consistent:
                _raise_infeasible(A, b, feas_tol)
                raise QpSolverError("inconsistent working set on a feasible system")
        if len(mu_w) and mu_w.min() < -dual_tol:
            neg = [i for i, m in enumerate(mu_w) if m < -dual_tol]
            drop = neg[0] if bland else int(np.argmin(mu_w))
            work.pop(drop)
            continue
        if c:
            slack = A @ v - b
            viol = slack - feas_tol * (1.0 + np.abs(b))
            candidates = [i for i in range(c) if viol[i] > 0.0 and i not in work]
        else:
            candidates = []
        if not candidates:
            multipliers = np.zeros(c)
            for idx, m in zip(work, mu_w):
                multipliers[idx] = max(m, 0.0)
            return QpSolution(v, tuple(sorted(work)), multipliers, qp.objective(v))
        add = candidates[0] if bland else max(candidates, key=lambda i: (slack[i], -i))
        work.append(add)
        work.sort()
        key = frozenset(work)
        if key in visited:
            if bland:
                _raise_infeasible(A, b, feas_tol)
                raise QpSolverError("working-set cycle on a feasible system")
            bland = True
            visited.clear()
        visited.add(key)
    _raise_infeasible(A, b, feas_tol)
    raise QpSolverError("iteration limit exceeded on a feasible system")


def enumerate_solve(qp: QpInstance, feas_tol: float = 1e-9, dual_tol: float = 1e-9) -> QpSolution:
    """Exhaustive active-set enumeration (test oracle).

    Every subset of rows is solved as an equality-constrained QP; feasible
    KKT points are ranked by (objective, lexicographic active set).
    """
    H, F = qp.H, qp.F
    A, b = qp.row_matrix()
    c = qp.n_rows
    best = None
    for size in range(c + 1):
        for subset in combinations(range(c), size):
            idx = list(subset)
            v, mu, consistent = _equality_kkt(H, F, A[idx], b[idx])
            if not consistent:
                continue
            if len(mu) and mu.min() < -dual_tol:
                continue
            if c and np.any(A @ v - b > feas_tol * (1.0 + np.abs(b))):
                continue
            obj = qp.objective(v)
            cand = (obj, subset, v, mu)
            if best is None:
                best = cand
            else:
                tol = 1e-9 * (1.0 + abs(best[0]))
                if obj < best[0] - tol or (obj <= best[0] + tol and subset < best[1]):
                    best = cand
    if best is None:
        _raise_infeasible(A, b, feas_tol)
        raise QpSolverError("no KKT point found on a feasible system")
    obj, subset, v, mu = best
    multipliers = np.zeros(c)
    for i, m in zip(subset, mu):
        multipliers[i] = max(m, 0.0)
    return QpSolution(v, subset, multipliers, obj)


def _feasible_point_exists(A, b, feas_tol):
    """Check feasibility of {v : Av <= b} for small systems.

    Search for a Farkas certificate: lam >= 0 with A'lam = 0 and b'lam < 0.
    Returns (feasible, certificate_rows).
    """
    c, d = A.shape
    scale = feas_tol * (1.0 + np.abs(b).max(initial=0.0))
    for size in range(1, min(c, d + 1) + 1):
        for subset in combinations(range(c), size):
            sub = np.vstack([A[i] for i in subset])
            _, s, vt = np.linalg.svd(sub.T, full_matrices=True)
            null_dim = d if size > d else 0  # columns beyond rank
            rank = int(np.sum(s > 1e-12 * (1.0 + s.max(initial=0.0))))
            if rank >= size:
                continue
            for j in range(rank, size):
                lam = vt[j]
                for sign in (1.0, -1.0):
                    cand = sign * lam
                    if cand.min() < -1e-12 * (1.0 + np.abs(cand).max()):
                        continue
                    cand = np.clip(cand, 0.0, None)
                    if np.abs(sub.T @ cand).max() > 1e-9 * (1.0 + np.abs(sub).max()):
                        continue
                    if sum(b[i] * w for i, w in zip(subset, cand)) < -scale:
                        support = tuple(i for i, w in zip(subset, cand) if w > 1e-12)
                        return False, support
    return True, ()


def _raise_infeasible(A, b, feas_tol):
    if A.shape[0] == 0:
        return
    feasible, support = _feasible_point_exists(A, b, feas_tol)
    if not feasible:
        raise QpInfeasibleError(support)
