"""Small batched first-order routines shared by the solvers."""

from __future__ import annotations

import numpy as np


def project_simplex(V: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    V = np.atleast_2d(V)
    n = V.shape[1]
    U = -np.sort(-V, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(1, n + 1)
    cond = U - css / ind > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(V.shape[0]), rho] / (rho + 1)
    return np.maximum(V - theta[:, None], 0.0)


def maximize_on_simplex(f, grad, V0, *, tol=1e-12, max_iter=1000, step0=1.0, indexed=False):
    """Projected gradient ascent with per-row Armijo backtracking.

    ``f`` maps a (k, n) batch to k values and ``grad`` to a (k, n) batch of
    gradients.  Rows are independent starts.  Iteration stops once no row
    improves by more than ``tol`` (relative) in a step.
    Returns the final points and their values.
    """
    V = project_simplex(np.asarray(V0, dtype=float))
    if indexed:
        f_, grad_ = f, grad
    else:
        def f_(W, idx):
            return f(W)

        def grad_(W, idx):
            return grad(W)

    val = f_(V, np.arange(V.shape[0]))
    step = np.full(V.shape[0], step0)
    active = np.ones(V.shape[0], dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        Va, fa, sa = V[idx], val[idx], step[idx]
        G = grad_(Va, idx)
        # scale-free step: normalize by gradient size
        gn = np.linalg.norm(G, axis=1)
        gn = np.where(gn > 0, gn, 1.0)
        improved = np.zeros(len(idx), dtype=bool)
        for _ in range(40):
            W = project_simplex(Va + (sa / gn)[:, None] * G)
            fw = f_(W, idx)
            ok = fw >= fa + 1e-4 * np.einsum("ij,ij->i", G, W - Va) - 1e-300
            ok &= ~improved
            gain = fw - fa
            if ok.any():
                Va = np.where(ok[:, None], W, Va)
                newly = ok & (gain > tol * np.maximum(np.abs(fa), 1e-300))
                fa = np.where(ok, np.maximum(fw, fa), fa)
                improved |= ok
                done_rows = ok & ~newly
                active[idx[done_rows]] = False
            if improved.all():
                break
            sa = np.where(improved, sa, sa * 0.5)
        active[idx[~improved]] = False
        V[idx], val[idx] = Va, fa
        step[idx] = np.where(improved, np.minimum(sa * 2.0, 1e3), sa)
    return V, val
