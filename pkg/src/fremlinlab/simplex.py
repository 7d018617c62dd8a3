"""Dense bounded-variable simplex for the small linear programs of the lab.

Solves::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lb <= x <= ub

with a two-phase revised simplex.  Nonbasic variables sit at either bound,
pivoting follows Bland's rule so degenerate problems cannot cycle.  The
problems solved here have at most a few hundred columns, so the basis is
refactored with a dense solve at every iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "linprog", "LPError"]

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-7


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    x: np.ndarray | None
    fun: float
    status: int  # 0 optimal, 1 iteration limit, 2 infeasible, 3 unbounded
    message: str
    nit: int
    ineqlin: np.ndarray  # d fun / d b_ub
    eqlin: np.ndarray  # d fun / d b_eq

    @property
    def success(self) -> bool:
        return self.status == 0


def _standardize(c, A_ub, b_ub, A_eq, b_eq, bounds):
    n = len(c)
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if A_ub.shape != (len(b_ub), n) or A_eq.shape != (len(b_eq), n):
        raise ValueError("constraint shapes do not match")
    if bounds is None:
        bounds = [(0.0, None)] * n
    elif len(bounds) == 2 and not np.iterable(bounds[0]):
        bounds = [tuple(bounds)] * n
    lb = np.array([-np.inf if b[0] is None else b[0] for b in bounds], dtype=float)
    ub = np.array([np.inf if b[1] is None else b[1] for b in bounds], dtype=float)
    if np.any(lb > ub):
        raise ValueError("lower bound above upper bound")

    # x = offset + T @ z with z >= 0, z <= zub
    cols, zub, offset = [], [], np.zeros(n)
    for j in range(n):
        if np.isfinite(lb[j]):
            offset[j] = lb[j]
            cols.append((j, 1.0))
            zub.append(ub[j] - lb[j])
        elif np.isfinite(ub[j]):
            offset[j] = ub[j]
            cols.append((j, -1.0))
            zub.append(np.inf)
        else:
            cols.append((j, 1.0))
            zub.append(np.inf)
            cols.append((j, -1.0))
            zub.append(np.inf)
    T = np.zeros((n, len(cols)))
    for k, (j, s) in enumerate(cols):
        T[j, k] = s
    return A_ub, b_ub, A_eq, b_eq, T, np.array(zub), offset


class _Tableau:
    """Revised simplex state over ``A z = b``, ``0 <= z <= u``."""

    def __init__(self, A, b, u, basis, at_upper):
        self.A, self.b, self.u = A, b, u
        self.basis = list(basis)
        self.at_upper = at_upper  # bool per column, meaningful for nonbasic
        self.nit = 0

    def values(self):
        z = np.where(self.at_upper, self.u, 0.0)
        z[self.basis] = 0.0
        B = self.A[:, self.basis]
        rhs = self.b - self.A @ z
        z[self.basis] = np.linalg.solve(B, rhs)
        return z

    def run(self, cost, allowed, max_iter, tol=FEAS_TOL):
        m, ncol = self.A.shape
        while self.nit < max_iter:
            B = self.A[:, self.basis]
            y = np.linalg.solve(B.T, cost[self.basis])
            d = cost - self.A.T @ y
            in_basis = np.zeros(ncol, dtype=bool)
            in_basis[self.basis] = True
            cand = ~in_basis & allowed & (
                ((~self.at_upper) & (d < -tol)) | (self.at_upper & (d > tol))
            )
            if not cand.any():
                return 0, y
            j = int(np.flatnonzero(cand)[0])
            sigma = -1.0 if self.at_upper[j] else 1.0
            alpha = np.linalg.solve(B, self.A[:, j])
            zB = self.values()[self.basis]
            uB = self.u[self.basis]
            move = sigma * alpha
            # tiny pivots leave the basis nearly singular
            piv = PIVOT_TOL * max(1.0, np.abs(move).max())
            t_best, leave, leave_to_upper = self.u[j], None, False
            for r in range(m):
                if move[r] > piv:
                    t = max(zB[r], 0.0) / move[r]
                    to_upper = False
                elif move[r] < -piv and np.isfinite(uB[r]):
                    t = max(uB[r] - zB[r], 0.0) / -move[r]
                    to_upper = True
                else:
                    continue
                eps = 1e-12 * (1.0 + t)
                if t < t_best - eps:
                    t_best, leave, leave_to_upper = t, r, to_upper
                elif leave is not None and t <= t_best + eps and self.basis[r] < self.basis[leave]:
                    t_best, leave, leave_to_upper = min(t, t_best), r, to_upper
            self.nit += 1
            if not np.isfinite(t_best):
                return 3, y
            if leave is None:
                self.at_upper[j] = not self.at_upper[j]
                continue
            out = self.basis[leave]
            self.basis[leave] = j
            self.at_upper[out] = leave_to_upper
            self.at_upper[j] = False
        return 1, None


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None, *, max_iter=5000, perturb=0.0):
    """Solve a small dense LP; the interface follows ``scipy.optimize.linprog``.

    ``ineqlin``/``eqlin`` hold the sensitivities of the optimum with respect
    to the right-hand sides, so for a minimization the entries of
    ``ineqlin`` are nonpositive.

    ``perturb > 0`` tightens every inequality by a seeded random amount of
    relative size at most ``perturb`` to break degeneracy.  The returned
    point is then feasible for the original problem, the duals stay dual
    feasible, and ``fun`` overshoots the optimum by O(perturb).
    """
    c = np.asarray(c, dtype=float).ravel()
    A_ub, b_ub, A_eq, b_eq, T, zub, offset = _standardize(c, A_ub, b_ub, A_eq, b_eq, bounds)
    if perturb > 0 and len(b_ub):
        jitter = np.random.default_rng(0).uniform(0.5, 1.0, len(b_ub))
        b_ub = b_ub - perturb * jitter * (1.0 + np.abs(b_ub))
    m_ub, m_eq = len(b_ub), len(b_eq)
    m = m_ub + m_eq
    nz = T.shape[1]
    cz = c @ T

    rows = np.vstack([A_ub, A_eq]) if m else np.zeros((0, len(c)))
    rhs = np.concatenate([b_ub, b_eq]) - rows @ offset
    Az = rows @ T
    # slack columns for inequality rows
    S = np.zeros((m, m_ub))
    S[:m_ub, :m_ub] = np.eye(m_ub)
    flip = rhs < 0
    sign = np.where(flip, -1.0, 1.0)
    Az = Az * sign[:, None]
    S = S * sign[:, None]
    rhs = rhs * sign

    # rows that can start from their slack need no artificial
    need_art = [r for r in range(m) if r >= m_ub or flip[r]]
    Art = np.zeros((m, len(need_art)))
    for k, r in enumerate(need_art):
        Art[r, k] = 1.0
    A = np.hstack([Az, S, Art])
    u = np.concatenate([zub, np.full(m_ub, np.inf), np.zeros(len(need_art))])
    ncol = A.shape[1]
    n_art0 = nz + m_ub
    basis = []
    art_iter = iter(range(len(need_art)))
    for r in range(m):
        if r in need_art:
            basis.append(n_art0 + next(art_iter))
        else:
            basis.append(nz + r)
    at_upper = np.zeros(ncol, dtype=bool)

    if m == 0:
        # only bounds: pick the cheaper bound per variable
        if np.any((cz < 0) & ~np.isfinite(zub)):
            return LPResult(None, -np.inf, 3, "unbounded", 0, np.zeros(0), np.zeros(0))
        z = np.where(cz < 0, zub, 0.0)
        x = offset + T @ z
        return LPResult(x, float(c @ x), 0, "optimal", 0, np.zeros(0), np.zeros(0))

    tab = _Tableau(A, rhs, np.where(np.arange(ncol) >= n_art0, np.inf, u), basis, at_upper)
    allowed = np.ones(ncol, dtype=bool)
    if need_art:
        c1 = np.zeros(ncol)
        c1[n_art0:] = 1.0
        status, _ = tab.run(c1, allowed, max_iter)
        if status == 1:
            return LPResult(None, np.nan, 1, "iteration limit in phase 1", tab.nit, np.zeros(m_ub), np.zeros(m_eq))
        z = tab.values()
        if z[n_art0:].sum() > FEAS_TOL * max(1.0, np.abs(rhs).max()):
            return LPResult(None, np.nan, 2, "infeasible", tab.nit, np.zeros(m_ub), np.zeros(m_eq))
    # artificials are frozen at zero from here on
    tab.u = u
    allowed[n_art0:] = False
    tab.at_upper[n_art0:] = False
    c2 = np.concatenate([cz, np.zeros(m_ub + len(need_art))])
    status, y = tab.run(c2, allowed, max_iter)
    if status == 3:
        return LPResult(None, -np.inf, 3, "unbounded", tab.nit, np.zeros(m_ub), np.zeros(m_eq))
    if status == 1:
        return LPResult(None, np.nan, 1, "iteration limit", tab.nit, np.zeros(m_ub), np.zeros(m_eq))
    z = tab.values()
    x = offset + T @ z[:nz]
    duals = y * sign
    return LPResult(
        x=x,
        fun=float(c @ x),
        status=0,
        message="optimal",
        nit=tab.nit,
        ineqlin=duals[:m_ub],
        eqlin=duals[m_ub:],
    )
