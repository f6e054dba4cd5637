# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled accumulation kernels for the estimator hot path.

Same contracts as gals._kernels_py; selected at import by gals._backend.
The moment-block kernel fuses all seven per-observation averages into a
single pass over the rows.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def chebyshev_basis(double[::1] x, int degree):
    """Evaluate T_1..T_degree (first kind) at each entry of x, shape (n, degree)."""
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.empty((n, degree))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i
    cdef int k
    cdef double xi, tprev, tcur, tnext
    for i in range(n):
        xi = x[i]
        tprev = 1.0
        tcur = xi
        out[i, 0] = xi
        for k in range(1, degree):
            tnext = 2.0 * xi * tcur - tprev
            out[i, k] = tnext
            tprev = tcur
            tcur = tnext
    return out_arr


def weighted_gram(double[:, ::1] X, double[::1] w):
    """Sum_i w_i x_i x_i', returned exactly symmetric."""
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1]
    out_arr = np.zeros((p, p))
    cdef double[:, ::1] G = out_arr
    cdef Py_ssize_t i, j, k
    cdef double wx
    for i in range(n):
        for j in range(p):
            wx = w[i] * X[i, j]
            for k in range(j, p):
                G[j, k] += wx * X[i, k]
    for j in range(p):
        for k in range(j + 1, p):
            G[k, j] = G[j, k]
    return out_arr


def weighted_xty(double[:, ::1] X, double[::1] w, double[::1] y):
    """Sum_i w_i y_i x_i."""
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1]
    out_arr = np.zeros(p)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double wy
    for i in range(n):
        wy = w[i] * y[i]
        for j in range(p):
            out[j] += wy * X[i, j]
    return out_arr


def moment_blocks(double[:, ::1] X, double[::1] y, double[::1] resid,
                  double[::1] inv_sigma2):
    """All per-observation moment averages in one fused pass.

    Returns (G1, G2, m1, m2, O11, O12, O22); see gals._kernels_py for the
    definitions. Matrices come back exactly symmetric.
    """
    cdef Py_ssize_t n = X.shape[0], p = X.shape[1]
    G1_arr = np.zeros((p, p))
    G2_arr = np.zeros((p, p))
    m1_arr = np.zeros(p)
    m2_arr = np.zeros(p)
    O11_arr = np.zeros((p, p))
    O12_arr = np.zeros((p, p))
    O22_arr = np.zeros((p, p))
    cdef double[:, ::1] G1 = G1_arr, G2 = G2_arr
    cdef double[:, ::1] O11 = O11_arr, O12 = O12_arr, O22 = O22_arr
    cdef double[::1] m1 = m1_arr, m2 = m2_arr
    cdef Py_ssize_t i, j, k
    cdef double iv, e2, e2iv, e2iv2, xj, yi, xx
    for i in range(n):
        iv = inv_sigma2[i]
        e2 = resid[i] * resid[i]
        e2iv = e2 * iv
        e2iv2 = e2iv * iv
        yi = y[i]
        for j in range(p):
            xj = X[i, j]
            m1[j] += yi * xj
            m2[j] += yi * xj * iv
            for k in range(j, p):
                xx = xj * X[i, k]
                G1[j, k] += xx
                G2[j, k] += xx * iv
                O11[j, k] += xx * e2
                O12[j, k] += xx * e2iv
                O22[j, k] += xx * e2iv2
    cdef double inv_n = 1.0 / n
    for j in range(p):
        m1[j] *= inv_n
        m2[j] *= inv_n
        for k in range(j, p):
            G1[j, k] *= inv_n
            G2[j, k] *= inv_n
            O11[j, k] *= inv_n
            O12[j, k] *= inv_n
            O22[j, k] *= inv_n
        for k in range(0, j):
            G1[j, k] = G1[k, j]
            G2[j, k] = G2[k, j]
            O11[j, k] = O11[k, j]
            O12[j, k] = O12[k, j]
            O22[j, k] = O22[k, j]
    return G1_arr, G2_arr, m1_arr, m2_arr, O11_arr, O12_arr, O22_arr
