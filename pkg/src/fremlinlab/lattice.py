"""Finite-dimensional Banach lattices with a 1-unconditional basis.

The order is coordinatewise, so every lattice operation and the whole
homogeneous functional calculus act coordinate by coordinate.  Vectors are
plain 1-D ``float64`` numpy arrays; the space only supplies the norm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


__all__ = [
    "FAMILIES",
    "NormedLatticeSpace",
    "HomogeneousFunction",
    "DimensionError",
    "eval_norm",
    "eval_dual_norm",
    "signed_power",
    "apply_homogeneous",
    "half_power_product",
    "is_disjoint",
    "modulus",
    "meet",
    "join",
    "basis_vector",
]

FAMILIES = ("lp", "weighted_lp", "interlace")

class DimensionError(ValueError):
    """Raised when vectors or operators do not fit the space."""


def _conjugate(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _lp_norm(a: np.ndarray, p: float) -> np.ndarray:
    """l_p norm along the last axis of a nonnegative array."""
    if math.isinf(p):
        return a.max(axis=-1)
    if p == 1.0:
        return a.sum(axis=-1)
    scale = a.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return safe[..., 0] * ((a / safe) ** p).sum(axis=-1) ** (1.0 / p)


def _lp_grad(a: np.ndarray, p: float) -> np.ndarray:
    """A gradient (supergradient-free subgradient) of the l_p norm at a >= 0."""
    if p == 1.0:
        return np.ones_like(a)
    if math.isinf(p):
        g = np.zeros_like(a)
        idx = a.argmax(axis=-1)
        np.put_along_axis(g, idx[..., None], 1.0, axis=-1)
        return g
    nrm = _lp_norm(a, p)[..., None]
    safe = np.where(nrm > 0, nrm, 1.0)
    return np.where(nrm > 0, (a / safe) ** (p - 1.0), 0.0)


def _lp_lmo(y: np.ndarray, p: float) -> np.ndarray:
    """argmax of <x, y> over the positive part of the l_p unit ball, y >= 0."""
    n = y.shape[-1]
    if math.isinf(p):
        return np.ones_like(y)
    if p == 1.0:
        x = np.zeros_like(y)
        idx = y.argmax(axis=-1)
        np.put_along_axis(x, idx[..., None], 1.0, axis=-1)
        return x
    r = _conjugate(p)
    nrm = _lp_norm(y, r)[..., None]
    zero = nrm <= 0
    safe = np.where(zero, 1.0, nrm)
    x = (y / safe) ** (r - 1.0)
    return np.where(zero, n ** (-1.0 / p), x)


def _box_ball(Y, b, s, R):
    """max <x,y> over 0 <= x <= b, sum x^s <= R^s (rows of Y >= 0)."""
    if s == 1.0:
        order = np.argsort(-Y, axis=1)
        X = np.zeros_like(Y)
        room = np.full(Y.shape[0], float(R))
        for j in range(Y.shape[1]):
            take = np.minimum(b, room)
            np.put_along_axis(X, order[:, j : j + 1], take[:, None], axis=1)
            room = room - take
        return np.where(Y > 0, X, 0.0)
    e = 1.0 / (s - 1.0)
    lo = np.full(Y.shape[0], -60.0)
    hi = np.full(Y.shape[0], 60.0)
    ymax = Y.max(axis=1, keepdims=True)
    Yn = Y / ymax
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        X = np.minimum(b, (Yn / np.exp(mid)[:, None]) ** e)
        big = (X**s).sum(axis=1) > R**s
        lo = np.where(big, mid, lo)
        hi = np.where(big, hi, mid)
    return np.minimum(b, (Yn / np.exp(hi)[:, None]) ** e)


def _coord_argmax(Y, lam, mu, a, b):
    """argmax over x >= 0 of y x - lam x^a - mu x^b, per entry (a < b, b > 1)."""
    lam = lam[:, None]
    mu = mu[:, None]
    pos = Y > 0
    if a == 1.0:
        return np.where(pos, (np.maximum(Y - lam, 0.0) / (mu * b)) ** (1.0 / (b - 1.0)), 0.0)
    # root of lam a x^(a-1) + mu b x^(b-1) = y in t = log x: convex increasing
    Ys = np.where(pos, Y, 1.0)
    t = np.minimum(np.log(Ys / (lam * a)) / (a - 1.0), np.log(Ys / (mu * b)) / (b - 1.0))
    for _ in range(100):
        u = lam * a * np.exp((a - 1.0) * t)
        v = mu * b * np.exp((b - 1.0) * t)
        step = (u + v - Ys) / ((a - 1.0) * u + (b - 1.0) * v)
        t = t - step
        if np.all(np.abs(step) < 1e-15):
            break
    return np.where(pos, np.exp(t), 0.0)


def _threshold_ball(Y, b, A, B):
    # x = s (y - lam)_+^(1/(b-1)) scaled to sum x^b = B; bisect lam for sum x = A.
    # lam = max(y) - delta keeps y - lam free of cancellation.
    e = 1.0 / (b - 1.0)
    top = Y.max(axis=1)
    gap = Y - top[:, None]

    def point(delta):
        Z = np.maximum(gap + delta[:, None], 0.0) ** e
        # delta = 0: even spread over the tied top coordinates
        Z = np.where(delta[:, None] > 0, Z, gap == 0)
        return Z * ((B / (Z**b).sum(axis=1)) ** (1.0 / b))[:, None]

    lo = np.zeros(Y.shape[0])
    hi = top.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        over = point(mid).sum(axis=1) > A
        hi = np.where(over, mid, hi)
        lo = np.where(over, lo, mid)
    return point(lo)


def _two_ball_lmo(Y, p, q, r):
    """max <x,y> over x >= 0 with ||x||_p <= 1 and ||x||_q <= r, rows of Y >= 0."""
    if math.isinf(p):
        return _box_ball(Y, 1.0, q, r)
    if math.isinf(q):
        return _box_ball(Y, r, p, 1.0)
    # order exponents so a < b; budgets sum x^a <= A, sum x^b <= B
    (a, A), (b, B) = sorted([(p, 1.0), (q, r**q)])
    Yn = Y / Y.max(axis=1, keepdims=True)
    k = Y.shape[0]
    if a == 1.0:
        return _threshold_ball(Yn, b, A, B)

    def dual(u, v):
        l, m = np.exp(u), np.exp(v)
        X = _coord_argmax(Yn, l, m, a, b)
        D = l * A + m * B + (Yn * X - l[:, None] * X**a - m[:, None] * X**b).sum(axis=1)
        return D, X

    # damped Newton on the convex dual in log-multipliers; stationary = optimal
    u = v = np.full(k, math.log(0.25))
    D, X = dual(u, v)
    for _ in range(200):
        lam, mu = np.exp(u), np.exp(v)
        ga = A - (X**a).sum(axis=1)
        gb = B - (X**b).sum(axis=1)
        gu, gv = lam * ga, mu * gb
        if np.all(np.abs(ga) / A + np.abs(gb) / B < 1e-14):
            break
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            hp = lam[:, None] * a * (a - 1.0) * X ** (a - 2.0) + mu[:, None] * b * (b - 1.0) * X ** (b - 2.0)
            w = np.where(X > 0, 1.0 / hp, 0.0)
        Huu = lam**2 * (a * a * X ** (2 * a - 2) * w).sum(axis=1) + gu
        Huv = lam * mu * (a * b * X ** (a + b - 2) * w).sum(axis=1)
        Hvv = mu**2 * (b * b * X ** (2 * b - 2) * w).sum(axis=1) + gv
        # Levenberg shift to positive definiteness
        tr = 0.5 * (Huu + Hvv)
        disc = np.sqrt(0.25 * (Huu - Hvv) ** 2 + Huv**2)
        shift = np.maximum(0.0, disc - tr) + 1e-12 * (np.abs(Huu) + np.abs(Hvv)) + 1e-300
        Huu, Hvv = Huu + shift, Hvv + shift
        det = Huu * Hvv - Huv**2
        du = -(Hvv * gu - Huv * gv) / det
        dv = -(Huu * gv - Huv * gu) / det
        # cap the log step
        big = np.maximum(np.abs(du), np.abs(dv))
        cap = np.minimum(1.0, 2.0 / np.maximum(big, 1e-300))
        du, dv = du * cap, dv * cap
        step = np.ones(k)
        slope = gu * du + gv * dv
        for _ in range(60):
            nD, nX = dual(u + step * du, v + step * dv)
            worse = nD > D + 1e-4 * step * slope + 1e-15 * np.abs(D)
            if not worse.any():
                break
            step = np.where(worse, 0.5 * step, step)
        u, v, D, X = u + step * du, v + step * dv, nD, nX
    return X


@dataclass(frozen=True)
class NormedLatticeSpace:
    """R^dim with a lattice norm from a closed list of families.

    ``lp``           (sum |x_i|^p)^(1/p), p in [1, inf]
    ``weighted_lp``  (sum w_i |x_i|^p)^(1/p); for p = inf, max w_i |x_i|
    ``interlace``    max(||x||_p, c ||x||_q)
    """

    dim: int
    family: str = "lp"
    p: float = 2.0
    q: float | None = None
    c: float | None = None
    weights: tuple[float, ...] | None = field(default=None)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}")
        object.__setattr__(self, "p", float(self.p))
        if not self.p >= 1.0:
            raise ValueError(f"p must lie in [1, inf], got {self.p}")
        if self.family == "weighted_lp":
            if self.weights is None or len(self.weights) != self.dim:
                raise ValueError("weighted_lp needs one weight per coordinate")
            w = tuple(float(v) for v in self.weights)
            if min(w) <= 0 or not all(math.isfinite(v) for v in w):
                raise ValueError("weights must be positive and finite")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise ValueError(f"{self.family} takes no weights")
        if self.family == "interlace":
            if self.q is None or self.c is None:
                raise ValueError("interlace needs q and c")
            object.__setattr__(self, "q", float(self.q))
            object.__setattr__(self, "c", float(self.c))
            if not self.q >= 1.0:
                raise ValueError(f"q must lie in [1, inf], got {self.q}")
            if not (self.c > 0 and math.isfinite(self.c)):
                raise ValueError(f"c must be positive, got {self.c}")

    # constructors -------------------------------------------------------

    @classmethod
    def lp(cls, dim: int, p: float) -> "NormedLatticeSpace":
        return cls(dim=dim, family="lp", p=p)

    @classmethod
    def weighted_lp(cls, p: float, weights: Sequence[float]) -> "NormedLatticeSpace":
        return cls(dim=len(weights), family="weighted_lp", p=p, weights=tuple(weights))

    @classmethod
    def interlace(cls, dim: int, p: float, q: float, c: float) -> "NormedLatticeSpace":
        return cls(dim=dim, family="interlace", p=p, q=q, c=c)

    # serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        d = {"family": self.family, "dim": self.dim, "p": _enc(self.p)}
        if self.family == "interlace":
            d.update(q=_enc(self.q), c=self.c)
        if self.family == "weighted_lp":
            d["weights"] = list(self.weights)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NormedLatticeSpace":
        family = d["family"]
        weights = d.get("weights")
        dim = d.get("dim", len(weights) if weights is not None else None)
        return cls(
            dim=dim,
            family=family,
            p=_dec(d["p"]),
            q=_dec(d["q"]) if d.get("q") is not None else None,
            c=d.get("c"),
            weights=tuple(weights) if weights is not None else None,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "NormedLatticeSpace":
        return cls.from_dict(json.loads(s))

    def label(self) -> str:
        if self.family == "lp":
            return f"l{_fmt(self.p)}^{self.dim}"
        if self.family == "weighted_lp":
            w = ",".join(_fmt(v) for v in self.weights)
            return f"l{_fmt(self.p)}[{w}]"
        return f"interlace({_fmt(self.p)},{_fmt(self.q)},{_fmt(self.c)})^{self.dim}"

    # norms ----------------------------------------------------------------

    def check(self, x) -> np.ndarray:
        a = np.asarray(x, dtype=float)
        if a.shape[-1:] != (self.dim,):
            raise DimensionError(f"expected last axis of length {self.dim}, got shape {a.shape}")
        return a

    def norm(self, x) -> np.ndarray | float:
        """Norm along the last axis; accepts batches."""
        a = np.abs(self.check(x))
        if self.family == "lp":
            out = _lp_norm(a, self.p)
        elif self.family == "weighted_lp":
            w = np.asarray(self.weights)
            if math.isinf(self.p):
                out = (w * a).max(axis=-1)
            else:
                out = _lp_norm(w ** (1.0 / self.p) * a, self.p)
        else:
            out = np.maximum(_lp_norm(a, self.p), self.c * _lp_norm(a, self.q))
        return float(out) if np.ndim(out) == 0 else out

    def norm_grad(self, a: np.ndarray) -> np.ndarray:
        """A subgradient of the norm at nonnegative points (batched)."""
        if self.family == "lp":
            return _lp_grad(a, self.p)
        if self.family == "weighted_lp":
            w = np.asarray(self.weights)
            if math.isinf(self.p):
                return w * _lp_grad(w * a, math.inf)
            s = w ** (1.0 / self.p)
            return s * _lp_grad(s * a, self.p)
        first = _lp_norm(a, self.p) >= self.c * _lp_norm(a, self.q)
        return np.where(first[..., None], _lp_grad(a, self.p), self.c * _lp_grad(a, self.q))

    def basis_norms(self) -> np.ndarray:
        return np.asarray(self.norm(np.eye(self.dim)), dtype=float)

    def lmo(self, y) -> np.ndarray:
        """Maximize <x, y> over x >= 0 in the unit ball, for y >= 0 (batched).

        Closed form for lp and weighted_lp.  The interlace ball is the
        intersection of two balls; when neither single-ball maximizer is
        feasible for the other constraint, both are active and the
        two-multiplier dual is solved.
        """
        y = np.asarray(y, dtype=float)
        if self.family == "lp":
            return _lp_lmo(y, self.p)
        if self.family == "weighted_lp":
            w = np.asarray(self.weights)
            if math.isinf(self.p):
                return np.broadcast_to(1.0 / w, y.shape).copy()
            s = w ** (-1.0 / self.p)
            return s * _lp_lmo(s * y, self.p)
        return self._interlace_lmo(y)

    def _interlace_lmo(self, y: np.ndarray) -> np.ndarray:
        Y = y.reshape(-1, self.dim)
        out = np.empty_like(Y)
        zero = ~np.any(Y > 0, axis=1)
        out[zero] = 1.0 / self.norm(np.ones(self.dim))
        c1 = _lp_lmo(Y, self.p)
        c2 = _lp_lmo(Y, self.q) / self.c
        todo = ~zero
        for cand in (c1, c2):
            ok = todo & (self.norm(cand) <= 1.0 + 1e-13)
            out[ok] = cand[ok] / np.maximum(self.norm(cand[ok]), 1.0)[:, None]
            todo &= ~ok
        rows = np.flatnonzero(todo)
        if rows.size:
            X = _two_ball_lmo(Y[rows], self.p, self.q, 1.0 / self.c)
            out[rows] = X / self.norm(X)[:, None]
        return out.reshape(y.shape)

    def dual_norm(self, y) -> np.ndarray | float:
        """sup{<x, y> : ||x|| <= 1}, along the last axis."""
        b = np.abs(self.check(y))
        if self.family == "lp":
            out = _lp_norm(b, _conjugate(self.p))
        elif self.family == "weighted_lp":
            w = np.asarray(self.weights)
            if math.isinf(self.p):
                out = (b / w).sum(axis=-1)
            else:
                out = _lp_norm(b * w ** (-1.0 / self.p), _conjugate(self.p))
        else:
            x = self.lmo(b)
            out = (x * b).sum(axis=-1)
        return float(out) if np.ndim(out) == 0 else out


def _enc(v):
    return "inf" if v is not None and math.isinf(v) else v


def _dec(v):
    return math.inf if v in ("inf", "Infinity") else float(v)


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:g}"


def basis_vector(dim: int, i: int) -> np.ndarray:
    e = np.zeros(dim)
    e[i] = 1.0
    return e


# ---------------------------------------------------------------------------
# norm evaluation


def eval_norm(space: NormedLatticeSpace, x) -> float:
    a = space.check(x)
    if a.ndim != 1:
        raise DimensionError("eval_norm takes a single vector")
    return float(space.norm(a))


def eval_dual_norm(space: NormedLatticeSpace, y) -> float:
    b = space.check(y)
    if b.ndim != 1:
        raise DimensionError("eval_dual_norm takes a single vector")
    return float(space.dual_norm(b))


# ---------------------------------------------------------------------------
# functional calculus


def signed_power(t, p: float):
    """|t|^p sign(t), so that t^2 = t|t| and (t^2)^(1/2) = t."""
    if not p > 0:
        raise ValueError(f"exponent must be positive, got {p}")
    t = np.asarray(t, dtype=float)
    out = np.sign(t) * np.abs(t) ** p
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HomogeneousFunction:
    """A positively homogeneous function of ``arity`` real arguments.

    ``func`` receives ``arity`` equally shaped arrays and must act
    elementwise.
    """

    arity: int
    func: Callable[..., np.ndarray]
    name: str = ""

    def __call__(self, *ts):
        if len(ts) != self.arity:
            raise ValueError(f"{self.name or 'function'} takes {self.arity} arguments, got {len(ts)}")
        return self.func(*ts)

    def check_homogeneous(self, samples: int = 64, seed: int = 0, rtol: float = 1e-12) -> bool:
        rng = np.random.default_rng(seed)
        ts = rng.normal(size=(self.arity, samples))
        lam = rng.uniform(0.0, 10.0, size=samples)
        lhs = np.asarray(self(*(lam * t for t in ts)), dtype=float)
        rhs = lam * np.asarray(self(*ts), dtype=float)
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
        return bool(np.all(np.abs(lhs - rhs) <= rtol * np.maximum(scale, 1e-300)))

    @classmethod
    def coordinate(cls, arity: int, i: int) -> "HomogeneousFunction":
        return cls(arity, lambda *ts: np.asarray(ts[i], dtype=float), name=f"t{i}")

    @classmethod
    def p_sum(cls, p: float, arity: int = 2) -> "HomogeneousFunction":
        """(t_1^p + ... + t_n^p)^(1/p) with the signed-power convention."""

        def f(*ts):
            # rescale by the largest magnitude so t^p neither under- nor overflows
            m = np.max(np.abs(np.broadcast_arrays(*ts)), axis=0)
            safe = np.where(m > 0, m, 1.0)
            s = sum(signed_power(np.asarray(t) / safe, p) for t in ts)
            return m * signed_power(s, 1.0 / p)

        return cls(arity, f, name=f"{p:g}-sum")


def apply_homogeneous(f: HomogeneousFunction, xs: Sequence) -> np.ndarray:
    """Evaluate f(x_1, ..., x_n) in the lattice, i.e. coordinatewise."""
    xs = [np.asarray(x, dtype=float) for x in xs]
    if len(xs) != f.arity:
        raise ValueError(f"arity {f.arity} does not match {len(xs)} vectors")
    if len({x.shape for x in xs}) > 1:
        raise DimensionError("all vectors must live in the same space")
    return np.asarray(f(*xs), dtype=float)


def _same_shape(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionError(f"shapes {x.shape} and {y.shape} differ")
    return x, y


def half_power_product(x, y) -> np.ndarray:
    """x^(1/2) y^(1/2), coordinatewise with signed square roots."""
    x, y = _same_shape(x, y)
    return signed_power(x, 0.5) * signed_power(y, 0.5)


def is_disjoint(x, y) -> bool:
    x, y = _same_shape(x, y)
    return bool(np.all(np.minimum(np.abs(x), np.abs(y)) == 0))


def modulus(x) -> np.ndarray:
    return np.abs(np.asarray(x, dtype=float))


def meet(x, y) -> np.ndarray:
    x, y = _same_shape(x, y)
    return np.minimum(x, y)


def join(x, y) -> np.ndarray:
    x, y = _same_shape(x, y)
    return np.maximum(x, y)
