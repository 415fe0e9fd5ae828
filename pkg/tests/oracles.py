"""Independent reference implementations used only by the tests."""

import itertools

import numpy as np


def project_simplex_enum(v):
    """Projection onto the simplex by enumerating every candidate support.

    For a support S the equality-constrained least-squares solution is
    ``v_S - (sum v_S - 1)/|S|``; the projection is the closest candidate
    that is nonnegative.
    """
    v = np.asarray(v, dtype=float)
    N = v.size
    best, best_d = None, np.inf
    for r in range(1, N + 1):
        for S in itertools.combinations(range(N), r):
            S = list(S)
            y = np.zeros(N)
            y[S] = v[S] - (v[S].sum() - 1.0) / r
            if y.min() < -1e-14:
                continue
            d = np.sum((y - v) ** 2)
            if d < best_d:
                best, best_d = y, d
    return best


def project_simplex_naive(v):
    """O(N^2) thresholding: try each sorted prefix until the threshold fits."""
    v = np.asarray(v, dtype=float)
    u = sorted(v, reverse=True)
    for j in range(len(u), 0, -1):
        tau = (sum(u[:j]) - 1.0) / j
        if u[j - 1] - tau > 0:
            return np.maximum(v - tau, 0.0)
    raise AssertionError("unreachable")


def fd_jacobian(values, x, h=1e-6):
    """Central-difference Jacobian of a vector-valued function."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((values(x + e) - values(x - e)) / (2 * h))
    return np.array(cols).T


def grid_min_pl(alphas, betas, lo=-3.0, hi=3.0, m=601):
    """Brute-force min of max_i <alpha_i, x> + beta_i over a box grid (n <= 2)."""
    alphas = np.atleast_2d(alphas)
    n = alphas.shape[1]
    axis = np.linspace(lo, hi, m)
    if n == 1:
        X = axis[:, None]
    else:
        X = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    f = (X @ alphas.T + betas).max(axis=1)
    i = int(np.argmin(f))
    return X[i], float(f[i]), (hi - lo) / (m - 1)


def grid_argmin_1d(f, lo=-1.0, hi=1.0, m=20001):
    xs = np.linspace(lo, hi, m)
    vals = np.array([f(np.array([x])) for x in xs])
    return float(xs[np.argmin(vals)])
