"""Pure-NumPy accumulation kernels.

Fallback used when the compiled extension ``gals._kernels`` is not built.
Both backends must satisfy the same contracts; see ``gals._backend``.
"""

import numpy as np


def chebyshev_basis(x, degree):
    """Evaluate T_1..T_degree (first kind) at each entry of x, shape (n, degree)."""
    n = x.shape[0]
    out = np.empty((n, degree))
    out[:, 0] = x
    if degree >= 2:
        out[:, 1] = 2.0 * x * x - 1.0
    for k in range(2, degree):
        out[:, k] = 2.0 * x * out[:, k - 1] - out[:, k - 2]
    return out


def weighted_gram(X, w):
    """Sum_i w_i x_i x_i', returned exactly symmetric."""
    G = (X * w[:, None]).T @ X
    return 0.5 * (G + G.T)


def weighted_xty(X, w, y):
    """Sum_i w_i y_i x_i."""
    return X.T @ (w * y)


def moment_blocks(X, y, resid, inv_sigma2):
    """All per-observation moment averages in one call.

    Returns (G1, G2, m1, m2, O11, O12, O22), each divided by n:
      G1  = mean x x'              G2  = mean x x' / s2
      m1  = mean y x               m2  = mean y x / s2
      O11 = mean e2 x x'           O12 = mean (e2/s2) x x'
      O22 = mean (e2/s2^2) x x'
    """
    n = X.shape[0]
    e2 = resid * resid
    ones = np.ones(n)
    G1 = weighted_gram(X, ones) / n
    G2 = weighted_gram(X, inv_sigma2) / n
    m1 = weighted_xty(X, ones, y) / n
    m2 = weighted_xty(X, inv_sigma2, y) / n
    O11 = weighted_gram(X, e2) / n
    O12 = weighted_gram(X, e2 * inv_sigma2) / n
    O22 = weighted_gram(X, e2 * inv_sigma2 * inv_sigma2) / n
    return G1, G2, m1, m2, O11, O12, O22
