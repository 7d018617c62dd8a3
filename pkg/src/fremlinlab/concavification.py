"""The p-concavification of a lattice with a basis.

New vector operations ``x (+) y = (x^p + y^p)^(1/p)`` and
``a (.) x = a^(1/p) x`` make the same ordered set into another vector
lattice, carrying the seminorm

    ||x||_(p) = inf { sum ||v_i||^p : |x| = (sum v_i^p)^(1/p), v_i >= 0 }.

Substituting ``w_i = v_i^p`` turns the seminorm into the convex envelope
of the 1-homogeneous monotone function ``N(w) = ||w^(1/p)||^p`` at
``|x|^p``.  :func:`concavification_seminorm` computes that envelope by
dual cutting planes and returns both a feasible dual functional and an
explicit decomposition, so the answer is bracketed.
:func:`seminorm_bruteforce_oracle` is an independent grid search used to
cross-check it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._optim import maximize_on_simplex
from .lattice import NormedLatticeSpace, is_disjoint, signed_power
from .simplex import linprog

__all__ = [
    "ConcaveSeminormResult",
    "EstimateConstantReport",
    "EstimateTransferReport",
    "oplus",
    "odot",
    "concavification_seminorm",
    "seminorm_bruteforce_oracle",
    "lower_estimate_constant",
    "upper_estimate_constant",
    "al_trinorm",
    "verify_estimate_transfer",
    "set_partitions",
]

SEP_STARTS = 32
VIOLATION_TOL = 1e-8
MAX_ROUNDS = 200


def _check_p(p):
    if not (1.0 <= p < math.inf):
        raise ValueError(f"concavification needs 1 <= p < inf, got {p}")


def oplus(x, y, p: float) -> np.ndarray:
    _check_p(p)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("vectors live in different spaces")
    return signed_power(signed_power(x, p) + signed_power(y, p), 1.0 / p)


def odot(alpha: float, x, p: float) -> np.ndarray:
    _check_p(p)
    return signed_power(alpha, 1.0 / p) * np.asarray(x, dtype=float)


@dataclass
class ConcaveSeminormResult:
    """Bracketed value of ``||x||_(p)``.

    ``value`` is the dual objective <dual_certificate, |x|^p>; the primal
    certificate is a decomposition of ``|x|`` whose cost is ``upper``.
    """

    value: float
    upper: float
    dual_certificate: np.ndarray
    primal_certificate: list[np.ndarray]
    gap: float
    p: float
    iterations: int
    converged: bool
    max_violation: float = 1.0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "upper": self.upper,
            "gap": self.gap,
            "p": self.p,
            "iterations": self.iterations,
            "converged": self.converged,
            "dual_certificate": self.dual_certificate.tolist(),
            "primal_certificate": [v.tolist() for v in self.primal_certificate],
        }


def _envelope_fn(space: NormedLatticeSpace, p: float, support: np.ndarray):
    """N(u) = ||u^(1/p)||^p on the coordinates in ``support`` (batched)."""
    n = space.dim

    def N(U):
        U = np.atleast_2d(U)
        full = np.zeros((U.shape[0], n))
        full[:, support] = np.maximum(U, 0.0) ** (1.0 / p)
        return np.asarray(space.norm(full)) ** p

    return N


def _separation(space, p, support, phi, cut_dirs, rng, starts):
    """Maximize sum phi_i v_i^p / ||v||^p over v >= 0 supported on ``support``."""
    n, k = space.dim, len(support)

    def embed(V):
        full = np.zeros((V.shape[0], n))
        full[:, support] = V
        return full

    def f(V):
        return (V**p @ phi) / space.norm(embed(V)) ** p

    def g(V):
        full = embed(V)
        nrm = space.norm(full)[:, None]
        num = (V**p @ phi)[:, None]
        dnum = p * phi * V ** (p - 1.0)
        dn = space.norm_grad(full)[:, support]
        return dnum / nrm**p - p * num * dn / nrm ** (p + 1.0)

    seeds = [np.eye(k), np.full((1, k), 1.0 / k)]
    if len(cut_dirs):
        seeds.append(np.asarray(cut_dirs)[-8:])
    V0 = np.vstack(seeds)
    extra = max(starts - len(V0), 0)
    if extra:
        V0 = np.vstack([V0, rng.dirichlet(np.full(k, 0.5), size=extra)])
    V, vals = maximize_on_simplex(f, g, V0, tol=1e-14, max_iter=500)
    return V, vals


def concavification_seminorm(
    space: NormedLatticeSpace,
    x,
    p: float,
    *,
    tol: float = 1e-6,
    max_rounds: int = MAX_ROUNDS,
    starts: int = SEP_STARTS,
    seed: int = 0,
) -> ConcaveSeminormResult:
    """Compute ``||x||_(p)`` by cutting planes on the convex envelope of N.

    The master problem over the generated points u_k (normalized so that
    N(u_k) = 1) is the LP ``min sum lam_k s.t. sum lam_k u_k >= |x|^p``;
    its dual multipliers are the candidate functional phi.  Each round the
    point of the N-sphere most violating ``<phi, u> <= N(u)`` is added.
    """
    _check_p(p)
    x = space.check(x)
    n = space.dim
    # solve for x / max|x| so |x|^p cannot underflow; rescale at the end
    m = float(np.abs(x).max())
    if m == 0.0:
        return ConcaveSeminormResult(0.0, 0.0, np.zeros(n), [], 0.0, p, 0, True)
    mp = m**p
    w_full = np.abs(x / m) ** p
    support = np.flatnonzero(w_full > 0)
    w = w_full[support]
    k = support.size
    N = _envelope_fn(space, p, support)
    rng = np.random.default_rng(seed)

    basis_vals = N(np.eye(k))
    cuts = [np.eye(k)[j] / basis_vals[j] for j in range(k)]
    cut_dirs: list[np.ndarray] = []

    best_lower, best_phi = -np.inf, np.zeros(k)
    best_upper, best_terms = np.inf, []
    rounds, max_viol = 0, np.inf
    for rounds in range(1, max_rounds + 1):
        U = np.array(cuts).T
        res = linprog(np.ones(U.shape[1]), A_ub=-U, b_ub=-w, perturb=1e-10)
        if not res.success:
            raise RuntimeError(f"master LP failed: {res.message}")
        lam, phi = res.x, np.maximum(-res.ineqlin, 0.0)

        # primal certificate: shrink the cover sum lam_k u_k >= w to equality
        cover = U @ lam
        ratio = np.where(cover > 0, w / np.where(cover > 0, cover, 1.0), 0.0)
        terms = [lam[j] * U[:, j] * ratio for j in np.flatnonzero(lam > 0)]
        upper = float(np.sum(N(np.array(terms)))) if terms else np.inf
        if upper < best_upper:
            best_upper, best_terms = upper, terms

        V, vals = _separation(space, p, support, phi, cut_dirs, rng, starts)
        max_viol = float(vals.max())
        lower = float(phi @ w) / max(max_viol, 1.0)
        if lower > best_lower:
            best_lower, best_phi = lower, phi / max(max_viol, 1.0)
        # relative stop: small values keep their significant digits
        if max_viol <= 1.0 + VIOLATION_TOL or best_upper - best_lower <= tol * best_lower:
            break
        new: list[np.ndarray] = []
        for j in np.argsort(-vals):
            if vals[j] <= 1.0 + 1e-10 or len(new) >= 4:
                break
            u = V[j] ** p / N(V[j] ** p)[0]
            if any(np.abs(u - c).max() < 1e-9 for c in new):
                continue
            new.append(u)
            cut_dirs.append(V[j])
        cuts.extend(new)

    gap = max(best_upper - best_lower, 0.0)
    phi_full = np.zeros(n)
    phi_full[support] = best_phi
    primal = []
    for t in best_terms:
        v = np.zeros(n)
        v[support] = m * t ** (1.0 / p)
        primal.append(v)
    if best_lower <= 0:
        raise RuntimeError("seminorm solver returned zero for a nonzero vector")
    return ConcaveSeminormResult(
        value=mp * best_lower,
        upper=mp * best_upper,
        dual_certificate=phi_full,
        primal_certificate=primal,
        gap=mp * gap,
        p=p,
        iterations=rounds,
        converged=mp * gap <= tol * max(1.0, mp * best_lower),
        max_violation=max_viol,
    )


def seminorm_bruteforce_oracle(space: NormedLatticeSpace, x, p: float, grid_resolution: int = 64) -> float:
    """Grid upper bound for ``||x||_(p)``.

    Every coordinate of ``w = |x|^p`` is split into dim+1 nonnegative parts
    on the grid ``{0, 1/res, ..., 1}``; the cheapest split is found by a
    min-plus dynamic program over the parts.  Exact for grid decompositions
    and decreasing toward the seminorm as the resolution grows.
    """
    _check_p(p)
    if space.dim > 3:
        raise ValueError("brute-force oracle is limited to dim <= 3")
    x = space.check(x)
    w_full = np.abs(x) ** p
    support = np.flatnonzero(w_full > 0)
    if support.size == 0:
        return 0.0
    res = int(grid_resolution)
    d = support.size
    axes = np.meshgrid(*[np.arange(res + 1) / res] * d, indexing="ij")
    grid = np.stack(axes, axis=-1).reshape(-1, d) * w_full[support]
    full = np.zeros((grid.shape[0], space.dim))
    full[:, support] = grid ** (1.0 / p)
    G = (np.asarray(space.norm(full)) ** p).reshape((res + 1,) * d)

    def split_min(A, B, R):
        lo = tuple(slice(0, r + 1) for r in R)
        flip = tuple(slice(r, None, -1) if r > 0 else slice(0, 1) for r in R)
        return float(np.min(A[lo] + B[flip]))

    table = G
    for _ in range(space.dim - 1):
        nxt = np.empty_like(G)
        for R in itertools.product(range(res + 1), repeat=d):
            nxt[R] = split_min(G, table, R)
        table = nxt
    return split_min(G, table, (res,) * d)


# ---------------------------------------------------------------------------
# p-estimate constants


@dataclass
class EstimateConstantReport:
    p: float
    best_constant_lower_bound: float
    witness: list[np.ndarray]
    trials: int
    kind: str = "lower"
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "kind": self.kind,
            "best_constant_lower_bound": self.best_constant_lower_bound,
            "witness": [w.tolist() for w in self.witness],
            "trials": self.trials,
            "seed": self.seed,
        }


def _estimate_ratio(space, X, p, kind):
    norms = np.asarray(space.norm(X), dtype=float)
    s = float(np.sum(norms**p) ** (1.0 / p))
    t = float(space.norm(X.sum(axis=0)))
    if s == 0 or t == 0:
        return 0.0
    return s / t if kind == "lower" else t / s


def _family(n, blocks, mags):
    X = np.zeros((len(blocks), n))
    for k, b in enumerate(blocks):
        X[k, b] = mags[b]
    return X


def _estimate_constant(space, p, budget, seed, kind):
    if not (1.0 <= p < math.inf):
        raise ValueError(f"estimate exponent must lie in [1, inf), got {p}")
    n = space.dim
    rng = np.random.default_rng(seed)
    ones = np.ones(n)
    inv = 1.0 / space.basis_norms()
    candidates = [
        ([[i] for i in range(n)], ones),
        ([[i] for i in range(n)], inv),
        ([list(range(n))], ones),
    ]
    scored = []
    for blocks, mags in candidates:
        scored.append((_estimate_ratio(space, _family(n, blocks, mags), p, kind), blocks, mags))
    for _ in range(max(budget - len(candidates), 0)):
        m = int(rng.integers(1, n + 1))
        coords = rng.permutation(n)[:m]
        nb = int(rng.integers(1, m + 1))
        labels = np.concatenate([np.arange(nb), rng.integers(0, nb, size=m - nb)])
        rng.shuffle(labels)
        blocks = [sorted(coords[labels == b].tolist()) for b in range(nb)]
        mags = np.exp(rng.normal(size=n))
        scored.append((_estimate_ratio(space, _family(n, blocks, mags), p, kind), blocks, mags))
    scored.sort(key=lambda t: -t[0])

    # local polish of the best few on log-magnitudes
    best = scored[0]
    for r0, blocks, mags in scored[:5]:
        cur, logm = r0, np.log(mags)
        step = 0.5
        for _ in range(200):
            moved = False
            for i in itertools.chain.from_iterable(blocks):
                for s in (step, -step):
                    trial = logm.copy()
                    trial[i] += s
                    r = _estimate_ratio(space, _family(n, blocks, np.exp(trial)), p, kind)
                    if r > cur:
                        cur, logm, moved = r, trial, True
            if not moved:
                step *= 0.5
                if step < 1e-6:
                    break
        if cur > best[0]:
            best = (cur, blocks, np.exp(logm))
    _, blocks, mags = best
    X = _family(n, blocks, mags)
    witness = [row for row in X]
    return EstimateConstantReport(
        p=p,
        best_constant_lower_bound=_estimate_ratio(space, X, p, kind),
        witness=witness,
        trials=max(budget, len(candidates)),
        kind=kind,
        seed=seed,
    )


def lower_estimate_constant(space: NormedLatticeSpace, p: float, budget: int = 2000, seed: int = 0):
    """Best ratio (sum ||x_k||^p)^(1/p) / ||sum x_k|| found over disjoint families.

    Any witness ratio is a lower bound for the optimal lower p-estimate
    constant M.
    """
    return _estimate_constant(space, p, budget, seed, "lower")


def upper_estimate_constant(space: NormedLatticeSpace, p: float, budget: int = 2000, seed: int = 0):
    """Mirror of :func:`lower_estimate_constant` for the upper p-estimate."""
    return _estimate_constant(space, p, budget, seed, "upper")


# ---------------------------------------------------------------------------
# AL renorming


def set_partitions(items):
    """Yield every partition of ``items`` as a list of blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def al_trinorm(space: NormedLatticeSpace, x) -> float:
    """sup of sum ||x_k|| over disjoint positive x_k adding up to |x|.

    Disjoint decompositions of |x| are exactly the partitions of its
    support, so the supremum is a maximum over finitely many partitions.
    """
    a = np.abs(space.check(x))
    support = np.flatnonzero(a)
    if support.size == 0:
        return 0.0
    best = -np.inf
    for part in set_partitions(support.tolist()):
        X = np.zeros((len(part), space.dim))
        for k, b in enumerate(part):
            X[k, b] = a[b]
        best = max(best, math.fsum(np.asarray(space.norm(X)).tolist()))
    return best


@dataclass
class EstimateTransferReport:
    left: float
    right: float
    slack: float
    M: float
    tolerance: float
    holds: bool
    parts: list[float] = field(default_factory=list)


def verify_estimate_transfer(space: NormedLatticeSpace, p: float, family, M: float | None = None, seed: int = 0):
    """Check ``||sum x_k||_(p) >= M^-p sum ||x_k||_(p)`` for a disjoint family."""
    family = [space.check(v) for v in family]
    for a, b in itertools.combinations(family, 2):
        if not is_disjoint(a, b):
            raise ValueError("family is not pairwise disjoint")
    if M is None:
        M = lower_estimate_constant(space, p, seed=seed).best_constant_lower_bound
    total = concavification_seminorm(space, np.sum(family, axis=0), p, seed=seed)
    parts = [concavification_seminorm(space, v, p, seed=seed) for v in family]
    right = math.fsum(r.upper if r.upper < np.inf else r.value for r in parts) / M**p
    slack = total.value - right
    tolerance = total.gap + sum(r.gap for r in parts) + 1e-12 * max(1.0, abs(right))
    return EstimateTransferReport(
        left=total.value,
        right=right,
        slack=slack,
        M=M,
        tolerance=tolerance,
        holds=slack >= -tolerance,
        parts=[r.value for r in parts],
    )
