"""Fremlin projective tensor norm of two lattices with bases.

An element ``u = sum u[i, j] e_i (x) f_j`` pairs with an operator
``T: E -> F*`` (stored as ``T[j, i] = <T e_i, f_j>``) through
``<u, T> = sum u[i, j] T[j, i]``, and

    ||u||_|pi| = sup { <u, T> : ||T||_r <= 1 },

where ``||T||_r`` is the operator norm of the entrywise modulus ``|T|``.
Because the constraint only sees ``|T|``, the supremum is attained with the
sign pattern of ``u`` and becomes the semi-infinite linear program

    max <|u|, A>  s.t.  y^T A x <= 1  for all x in B_E+, y in B_F+,  A >= 0.

It is solved by generating (x, y) cuts.  The LP dual of the master problem
is a family of positive elementary tensors majorizing ``|u|``, which gives
the upper end of the bracket by the cross-norm property.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import DimensionError, NormedLatticeSpace
from .simplex import linprog

__all__ = [
    "TensorElement",
    "RegularOperator",
    "NormBracket",
    "pairing",
    "operator_modulus",
    "regular_norm",
    "bilinear_search",
    "fremlin_norm",
    "tensor_meet_eval",
    "tensor_meet_closed_form",
    "tensor_meet_lp",
    "CutPool",
]

SEARCH_STARTS = 32
VIOLATION_TOL = 1e-8
MAX_ROUNDS = 300


@dataclass(frozen=True)
class TensorElement:
    """Coefficient matrix ``coeffs[i, j]`` over the basis ``e_i (x) f_j``."""

    left: NormedLatticeSpace
    right: NormedLatticeSpace
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.left.dim, self.right.dim):
            raise DimensionError(f"coefficients of shape {c.shape} do not fit {self.left.dim}x{self.right.dim}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def elementary(cls, left, right, x, y) -> "TensorElement":
        return cls(left, right, np.outer(left.check(x), right.check(y)))

    @classmethod
    def zero(cls, left, right) -> "TensorElement":
        return cls(left, right, np.zeros((left.dim, right.dim)))

    def __add__(self, other: "TensorElement") -> "TensorElement":
        return TensorElement(self.left, self.right, self.coeffs + other.coeffs)

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        return TensorElement(self.left, self.right, self.coeffs - other.coeffs)

    def __mul__(self, a: float) -> "TensorElement":
        return TensorElement(self.left, self.right, a * self.coeffs)

    __rmul__ = __mul__

    def modulus(self) -> "TensorElement":
        return TensorElement(self.left, self.right, np.abs(self.coeffs))

    def to_dict(self) -> dict:
        return {"left": self.left.to_dict(), "right": self.right.to_dict(), "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TensorElement":
        return cls(
            NormedLatticeSpace.from_dict(d["left"]),
            NormedLatticeSpace.from_dict(d["right"]),
            np.asarray(d["coeffs"], dtype=float),
        )


@dataclass(frozen=True)
class RegularOperator:
    """Matrix of an operator ``E -> F*`` with ``matrix[j, i] = <T e_i, f_j>``."""

    matrix: np.ndarray
    domain: NormedLatticeSpace
    target: NormedLatticeSpace

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.target.dim, self.domain.dim):
            raise DimensionError(f"operator of shape {m.shape} does not map {self.domain.dim} -> {self.target.dim}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, x) -> np.ndarray:
        return self.matrix @ self.domain.check(x)

    def to_dict(self) -> dict:
        return {"domain": self.domain.to_dict(), "target": self.target.to_dict(), "matrix": self.matrix.tolist()}


@dataclass
class NormBracket:
    """Two-sided bound on ``||u||_|pi|``.

    ``certificate_T`` has regular norm at most one (up to the search
    tolerance) and pairs with ``u`` to ``lower``.  The pairs in
    ``certificate_decomp`` satisfy ``sum x_k (x) y_k >= |u|`` entrywise and
    ``sum ||x_k|| ||y_k|| = upper``.
    """

    lower: float
    upper: float
    certificate_T: RegularOperator | None
    certificate_decomp: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    iterations: int = 0
    converged: bool = True

    @property
    def gap(self) -> float:
        return max(self.upper - self.lower, 0.0)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "iterations": self.iterations,
            "converged": self.converged,
            "certificate_T": None if self.certificate_T is None else self.certificate_T.matrix.tolist(),
            "certificate_decomp": [[x.tolist(), y.tolist()] for x, y in self.certificate_decomp],
        }


def pairing(u: TensorElement, T: RegularOperator) -> float:
    """<u, T> = sum_ij u[i, j] T[j, i]."""
    if T.matrix.shape != u.coeffs.T.shape:
        raise DimensionError("tensor and operator dimensions differ")
    return float(np.sum(u.coeffs * T.matrix.T))


def operator_modulus(T: RegularOperator) -> RegularOperator:
    return RegularOperator(np.abs(T.matrix), T.domain, T.target)


# ---------------------------------------------------------------------------
# regular norm


def _unit(space: NormedLatticeSpace, X: np.ndarray) -> np.ndarray:
    n = np.asarray(space.norm(X), dtype=float)
    return X / np.where(n > 0, n, 1.0)[..., None]


def _alternate(A, E, F, X, *, max_iter, tol, patience):
    """Alternating exact LMOs from every row of X; returns (val, X)."""
    Y = F.lmo(X @ A.T)
    val = np.einsum("kj,ji,ki->k", Y, A, X)
    active = np.ones(len(val), dtype=bool)
    best, stale = val.max(), 0
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0 or stale >= patience:
            break
        Y = F.lmo(X[idx] @ A.T)
        X_new = E.lmo(Y @ A)
        new = np.einsum("kj,ji,ki->k", Y, A, X_new)
        up = new > val[idx]
        active[idx[new <= val[idx] * (1.0 + tol)]] = False
        X[idx[up]], val[idx[up]] = X_new[up], new[up]
        # slow starts stop once the incumbent has been stable for a while
        if val.max() > best * (1.0 + 1e-13):
            best, stale = val.max(), 0
        else:
            stale += 1
    return val, X


def bilinear_search(A, E, F, *, starts=SEARCH_STARTS, seed=0, max_iter=2000, tol=1e-13, patience=100, hops=4):
    """Maximize ``y^T A x`` over positive unit vectors x of E and y of F.

    ``A >= 0`` has shape (dim F, dim E).  Each start alternates exact
    linear maximizations over the two unit balls, which never decreases
    the objective.  Alternation can stall at a fixed point that is not a
    maximum (the objective is convex in x), so the incumbent is then
    perturbed and re-alternated for up to ``hops`` rounds.  Returns values
    and the final (x, y) of every start.
    """
    A = np.asarray(A, dtype=float)
    nF, nE = A.shape
    rng = np.random.default_rng(seed)
    seeds = [np.eye(nE), np.ones((1, nE))]
    # starts induced from the target basis
    seeds.append(E.lmo(np.eye(nF) @ A) if nF else np.zeros((0, nE)))
    X = np.vstack(seeds)
    extra = starts - X.shape[0]
    if extra > 0:
        X = np.vstack([X, rng.dirichlet(np.full(nE, 0.7), size=extra)])
    X = _unit(E, np.maximum(X, 0.0))
    opts = dict(max_iter=max_iter, tol=tol, patience=patience)
    val, X = _alternate(A, E, F, X, **opts)
    for _ in range(hops):
        k = int(np.argmax(val))
        sig = np.repeat([0.3, 0.03, 0.003], 4)[:, None]
        P = X[k] * np.exp(sig * rng.normal(size=(len(sig), nE))) + 1e-3 * sig * rng.uniform(size=(len(sig), nE))
        pv, P = _alternate(A, E, F, _unit(E, P), **opts)
        j = int(np.argmax(pv))
        if pv[j] <= val[k] * (1.0 + 1e-12):
            break
        X[k], val[k] = P[j], pv[j]
    Y = F.lmo(X @ A.T)
    val = np.einsum("kj,ji,ki->k", Y, A, X)
    return val, X, Y


def regular_norm(T: RegularOperator, *, starts: int = SEARCH_STARTS, seed: int = 0) -> float:
    """Operator norm of ``|T|`` from E into F*.

    ``|T|`` is positive and both norms are lattice norms, so the supremum
    of ``<|T| x, y>`` can be taken over positive x and y.
    """
    A = np.abs(T.matrix)
    if not A.any():
        return 0.0
    val, _, _ = bilinear_search(A, T.domain, T.target, starts=starts, seed=seed)
    return float(val.max())


# ---------------------------------------------------------------------------
# the tensor norm


class CutPool:
    """Generated (x, y) pairs for one pair of spaces; shareable across tensors.

    Cuts do not depend on the tensor being measured, so a pool can warm
    start later solves.
    """

    def __init__(self, E: NormedLatticeSpace, F: NormedLatticeSpace):
        self.E, self.F = E, F
        xs = np.eye(E.dim) / E.basis_norms()[:, None]
        ys = np.eye(F.dim) / F.basis_norms()[:, None]
        self.X = [x for x in xs for _ in range(F.dim)]
        self.Y = [y for _ in range(E.dim) for y in ys]

    def __len__(self):
        return len(self.X)

    def add(self, x, y) -> bool:
        x = x / self.E.norm(x)
        y = y / self.F.norm(y)
        for a, b in zip(self.X, self.Y):
            if np.abs(a - x).max() < 1e-7 and np.abs(b - y).max() < 1e-7:
                return False
        self.X.append(x)
        self.Y.append(y)
        return True

    def master(self, U: np.ndarray):
        """Solve the master LP restricted to the current cuts.

        Returns (A, mu, value): the operator candidate, the weights of the
        majorizing decomposition, and the common optimal value.
        """
        rows = np.flatnonzero(U.ravel() > 0)
        X, Y = np.array(self.X), np.array(self.Y)
        # C[(i, j), k] = x_k[i] y_k[j]
        C = np.einsum("ki,kj->ijk", X, Y).reshape(-1, len(self.X))[rows]
        res = linprog(np.ones(len(self.X)), A_ub=-C, b_ub=-U.ravel()[rows], perturb=1e-10)
        if not res.success:
            raise RuntimeError(f"master LP failed: {res.message}")
        a = np.zeros(U.size)
        a[rows] = np.maximum(-res.ineqlin, 0.0)
        A = a.reshape(U.shape).T
        return A, np.maximum(res.x, 0.0), res.fun


def _simple_upper(U, E, F):
    """Row-by-row and column-by-column decompositions of |u|."""
    eb, fb = E.basis_norms(), F.basis_norms()
    rows = float(np.sum(eb * np.asarray(F.norm(U))))
    cols = float(np.sum(fb * np.asarray(E.norm(U.T))))
    if rows <= cols:
        pairs = [(eb[i] * np.eye(E.dim)[i] / eb[i], U[i].copy()) for i in range(E.dim) if U[i].any()]
        return rows, pairs
    pairs = [(U[:, j].copy(), np.eye(F.dim)[j]) for j in range(F.dim) if U[:, j].any()]
    return cols, pairs


def fremlin_norm(
    u: TensorElement,
    *,
    tol: float = 1e-3,
    max_rounds: int = MAX_ROUNDS,
    starts: int = SEARCH_STARTS,
    seed: int = 0,
    pool: CutPool | None = None,
) -> NormBracket:
    """Bracket ``||u||_|pi|`` between a dual operator and a decomposition.

    Stops once ``upper - lower <= tol * lower`` or no cut is
    violated by more than 1e-8; ``converged`` reports whether the gap
    target was met.
    """
    E, F = u.left, u.right
    U = np.abs(u.coeffs)
    if not U.any():
        return NormBracket(0.0, 0.0, RegularOperator(np.zeros((F.dim, E.dim)), E, F), [], 0, True)
    if pool is None:
        pool = CutPool(E, F)
    # Perron-type seed cut from the leading singular pair of |u|
    left, _, right = np.linalg.svd(U)
    pool.add(np.abs(left[:, 0]), np.abs(right[0]))

    sign = np.sign(u.coeffs).T
    best_lower, best_T = -np.inf, None
    best_upper, best_pairs = _simple_upper(U, E, F)
    rounds, converged = 0, False
    for rounds in range(1, max_rounds + 1):
        A, mu, _ = pool.master(U)
        active = np.flatnonzero(mu > 0)
        pairs = [(mu[k] * pool.X[k], pool.Y[k].copy()) for k in active]
        cover = sum(np.outer(x, y) for x, y in pairs) if pairs else np.zeros_like(U)
        deficit = np.maximum(U - cover, 0.0)
        upper = float(sum(E.norm(x) * F.norm(y) for x, y in pairs))
        if deficit.any():
            eb, fb = E.basis_norms(), F.basis_norms()
            upper += float(np.sum(deficit * np.outer(eb, fb)))
            for i, j in zip(*np.nonzero(deficit)):
                pairs.append((deficit[i, j] * np.eye(E.dim)[i], np.eye(F.dim)[j]))
        if upper < best_upper:
            best_upper, best_pairs = upper, pairs

        vals, Xs, Ys = bilinear_search(A, E, F, starts=starts, seed=seed + rounds)
        r = float(vals.max())
        scale = max(r, 1.0)
        lower = float(np.sum(U * A.T)) / scale
        if lower > best_lower:
            best_lower = lower
            best_T = RegularOperator(sign * A / scale, E, F)
        if best_upper - best_lower <= tol * best_lower:
            converged = True
            break
        if r <= 1.0 + VIOLATION_TOL:
            break
        added = 0
        for k in np.argsort(-vals):
            if vals[k] <= 1.0 + 1e-10 or added >= 4:
                break
            added += pool.add(Xs[k], Ys[k])
        if not added:
            break
    converged = converged or best_upper - best_lower <= tol * best_lower
    best_lower = min(best_lower, best_upper)  # both are bounds; only rounding can cross them
    return NormBracket(best_lower, best_upper, best_T, best_pairs, rounds, converged)


# ---------------------------------------------------------------------------
# meets of positive tensors


def _check_meet_args(u, v, T):
    if u.coeffs.shape != v.coeffs.shape or T.matrix.shape != u.coeffs.T.shape:
        raise DimensionError("tensor/operator dimensions differ")
    if (u.coeffs < 0).any() or (v.coeffs < 0).any() or (T.matrix < 0).any():
        raise ValueError("meet evaluation needs positive tensors and a positive operator")


def tensor_meet_closed_form(u: TensorElement, v: TensorElement, T: RegularOperator) -> float:
    _check_meet_args(u, v, T)
    return float(np.sum(T.matrix.T * np.minimum(u.coeffs, v.coeffs)))


def tensor_meet_lp(u: TensorElement, v: TensorElement, T: RegularOperator) -> float:
    """inf over 0 <= S <= T of <u, S> + <v, T - S>, as a dense LP."""
    _check_meet_args(u, v, T)
    t = T.matrix.T.ravel()  # indexed like coeffs
    c = (u.coeffs - v.coeffs).ravel()
    n = t.size
    res = linprog(c, A_ub=np.eye(n), b_ub=t, bounds=(0.0, None))
    if not res.success:
        raise RuntimeError(f"meet LP failed: {res.message}")
    return float(res.fun + v.coeffs.ravel() @ t)


def tensor_meet_eval(u: TensorElement, v: TensorElement, T: RegularOperator, method: str = "closed") -> float:
    """<u meet v, T> for positive u, v and T >= 0.

    The objective of the defining infimum separates over the basis tensors,
    so the value is ``sum T[j, i] min(u[i, j], v[i, j])``; ``method="lp"``
    solves the same infimum with the simplex routine instead.
    """
    if method == "closed":
        return tensor_meet_closed_form(u, v, T)
    if method == "lp":
        return tensor_meet_lp(u, v, T)
    raise ValueError(f"unknown method {method!r}")
