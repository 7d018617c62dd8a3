"""The diagonal of the tensor square ``E (x) E`` and its quotient norm.

For a space with a 1-unconditional basis the off-diagonal ideal is spanned
by ``e_i (x) e_j`` with ``i != j``.  It and the diagonal are complementary
bands, so a class modulo the ideal is fixed by the diagonal coefficients.
The quotient norm is computed twice:

* dually, as the largest pairing with a diagonal operator of regular norm
  at most one (operators vanishing on the ideal are exactly the diagonal
  ones), and
* primally, by minimizing the tensor norm of ``diag(d) + v`` over
  off-diagonal ``v``.

``verify_main_isometry`` compares both with the 2-concavification seminorm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .concavification import concavification_seminorm
from .fremlin import CutPool, NormBracket, TensorElement, fremlin_norm
from .lattice import DimensionError, NormedLatticeSpace, signed_power

__all__ = [
    "DiagonalElement",
    "QuotientValue",
    "IsometryReport",
    "split_offdiagonal",
    "diagonal_map",
    "quotient_norm_dual",
    "quotient_norm_primal",
    "verify_main_isometry",
    "ioc_residual",
    "ISOMETRY_RTOL",
]

PRIMAL_MAX_DIM = 6
DUAL_MAX_DIM = 8
ISOMETRY_RTOL = 1e-2


@dataclass(frozen=True)
class DiagonalElement:
    """``sum_i diag[i] e_i (x) e_i`` as a class modulo the off-diagonal ideal."""

    space: NormedLatticeSpace
    diag: np.ndarray

    def __post_init__(self):
        d = np.array(self.space.check(self.diag), dtype=float)
        if d.ndim != 1:
            raise DimensionError("a diagonal element has one coefficient per basis vector")
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)

    def embed(self) -> TensorElement:
        return TensorElement(self.space, self.space, np.diag(self.diag))

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(), "diag": self.diag.tolist()}


@dataclass
class QuotientValue:
    """A quotient norm value with its error budget.

    ``lower <= ||class|| <= upper`` holds up to the solvers' search
    tolerances; ``tol`` adds the bracket gap and, for the primal method,
    the last accepted descent step.
    """

    value: float
    lower: float
    upper: float
    tol: float
    converged: bool
    evaluations: int = 0

    def __float__(self) -> float:
        return float(self.value)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "tol": self.tol,
            "converged": self.converged,
            "evaluations": self.evaluations,
        }


@dataclass
class IsometryReport:
    space: NormedLatticeSpace
    x: np.ndarray
    seminorm_value: float
    quotient_primal: float
    quotient_dual: float
    max_discrepancy: float
    tolerance: float
    converged: bool

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= ISOMETRY_RTOL * max(1.0, self.seminorm_value)

    def to_dict(self) -> dict:
        return {
            "space": self.space.label(),
            "dim": self.space.dim,
            "x": [float(t) for t in self.x],
            "seminorm": self.seminorm_value,
            "quotient_primal": self.quotient_primal,
            "quotient_dual": self.quotient_dual,
            "discrepancy": self.max_discrepancy,
            "tolerance": self.tolerance,
            "converged": self.converged,
            "passed": self.passed,
        }


def _square(u: TensorElement) -> NormedLatticeSpace:
    if u.left != u.right:
        raise DimensionError("the tensor is not in the square of one space")
    return u.left


def split_offdiagonal(u: TensorElement) -> tuple[DiagonalElement, TensorElement]:
    """Diagonal part and off-diagonal remainder; they sum back to ``u``."""
    E = _square(u)
    d = np.diag(u.coeffs).copy()
    rest = u.coeffs.copy()
    np.fill_diagonal(rest, 0.0)
    return DiagonalElement(E, d), TensorElement(E, E, rest)


def diagonal_map(space: NormedLatticeSpace, x) -> TensorElement:
    """x (x) |x|."""
    x = np.asarray(space.check(x), dtype=float)
    return TensorElement.elementary(space, space, x, np.abs(x))


def _zero_value() -> QuotientValue:
    return QuotientValue(0.0, 0.0, 0.0, 0.0, True)


def quotient_norm_dual(d: DiagonalElement, *, tol: float = 1e-4, seed: int = 0) -> QuotientValue:
    """max sum_i |d_i| a_i over a >= 0 with ||diag(a)||_r <= 1.

    The cut-generation master problem only carries rows where ``d`` is
    nonzero, so its operator is diagonal throughout; the reported value is
    the certified lower end.
    """
    if d.space.dim > DUAL_MAX_DIM:
        raise DimensionError(f"dual quotient computation is limited to dim <= {DUAL_MAX_DIM}")
    if not d.diag.any():
        return _zero_value()
    E = d.space
    b = fremlin_norm(TensorElement(E, E, np.diag(np.abs(d.diag))), tol=tol, seed=seed)
    return QuotientValue(b.lower, b.lower, b.upper, b.gap, b.converged, b.iterations)


def _natural_completion(d: np.ndarray) -> np.ndarray:
    # off-diagonal part of z (x) |z| with z the signed square root of d
    z = signed_power(d, 0.5)
    V = np.outer(z, np.abs(z))
    np.fill_diagonal(V, 0.0)
    return V


def quotient_norm_primal(
    d: DiagonalElement,
    *,
    starts: int = 8,
    max_iter: int = 500,
    tol: float = 1e-4,
    seed: int = 0,
) -> QuotientValue:
    """inf over off-diagonal v of ||diag(d) + v||_|pi|.

    Multi-start coordinate descent on the entries of v.  Trial points are
    scored by the decomposition bound of a shared cut pool, which is a
    valid upper bound for every tensor; the best point of each start is
    then bracketed in full, which also enriches the pool.  ``max_iter``
    caps the trial evaluations per start.
    """
    E = d.space
    n = E.dim
    if n > PRIMAL_MAX_DIM:
        raise DimensionError(f"primal quotient computation is limited to dim <= {PRIMAL_MAX_DIM}")
    if not d.diag.any():
        return _zero_value()
    D = np.diag(d.diag)
    scale = float(np.abs(d.diag).max())
    pool = CutPool(E, E)

    def bracket(V) -> NormBracket:
        return fremlin_norm(TensorElement(E, E, D + V), tol=tol, seed=seed, pool=pool)

    def score(V) -> float:
        return float(pool.master(np.abs(D + V))[2])

    bracket(np.zeros((n, n)))  # warm the pool
    rng = np.random.default_rng(seed)
    nat = _natural_completion(d.diag)
    inits = [np.zeros((n, n)), nat, -nat]
    while len(inits) < starts:
        V = rng.normal(size=(n, n)) * scale * rng.uniform(0.1, 1.0)
        np.fill_diagonal(V, 0.0)
        inits.append(V)
    inits = inits[:starts]
    coords = [(i, j) for i in range(n) for j in range(n) if i != j]

    results = []
    evaluations = 0
    for V in inits:
        V = V.copy()
        f = score(V)
        h, last_gain, used = 0.5 * scale, 0.0, 1
        while h > 1e-2 * scale and used < max_iter:
            moved = False
            for i, j in coords:
                for step in (h, -h):
                    W = V.copy()
                    W[i, j] += step
                    g = score(W)
                    used += 1
                    if g < f - 1e-12 * max(1.0, f):
                        V, last_gain, f, moved = W, f - g, g, True
                        break
                if used >= max_iter:
                    break
            if not moved:
                h *= 0.25
        evaluations += used
        results.append((f, last_gain, V))

    # full brackets for the two most promising starts
    results.sort(key=lambda r: r[0])
    best = None
    for f, last_gain, V in results[:2]:
        b = bracket(V)
        if best is None or b.upper < best[0].upper:
            best = (b, last_gain)
    b, last_gain = best
    return QuotientValue(b.upper, b.lower, b.upper, b.gap + last_gain, b.converged, evaluations)


def verify_main_isometry(space: NormedLatticeSpace, x, *, seed: int = 0) -> IsometryReport:
    """Compare ||x||_(2) with both quotient norms of the class of x (x) |x|."""
    if space.dim > PRIMAL_MAX_DIM:
        raise DimensionError(f"verification is limited to dim <= {PRIMAL_MAX_DIM}")
    x = np.asarray(space.check(x), dtype=float)
    semi = concavification_seminorm(space, x, 2.0, seed=seed)
    d, _ = split_offdiagonal(diagonal_map(space, x))
    primal = quotient_norm_primal(d, seed=seed)
    dual = quotient_norm_dual(d, seed=seed)
    vals = [semi.value, primal.value, dual.value]
    disc = max(vals) - min(vals)
    return IsometryReport(
        space=space,
        x=x,
        seminorm_value=semi.value,
        quotient_primal=primal.value,
        quotient_dual=dual.value,
        max_discrepancy=disc,
        tolerance=semi.gap + primal.tol + dual.tol,
        converged=bool(semi.converged and primal.converged and dual.converged),
    )


def ioc_residual(u: TensorElement, *, seed: int = 0) -> float:
    """Quotient seminorm of ``u`` modulo the off-diagonal ideal."""
    E = _square(u)
    if E.dim > PRIMAL_MAX_DIM:
        raise DimensionError(f"residual computation is limited to dim <= {PRIMAL_MAX_DIM}")
    d, _ = split_offdiagonal(u)
    return float(quotient_norm_dual(d, seed=seed))
