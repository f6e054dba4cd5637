"""Kernel backend selection.

Prefers the compiled extension ``gals._kernels`` and falls back to the
pure-NumPy implementation in ``gals._kernels_py``. Set ``GALS_BACKEND`` to
``python`` or ``compiled`` to force a choice; forcing ``compiled`` raises
if the extension was not built.

All entry points normalize inputs to C-contiguous float64 so the two
backends see identical data.
"""

import os

import numpy as np

_requested = os.environ.get("GALS_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
elif _requested in ("", "compiled"):
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "GALS_BACKEND=compiled but the gals._kernels extension is not built"
            ) from None
        from . import _kernels_py as _impl

        BACKEND = "python"
else:
    raise ValueError(f"unrecognized GALS_BACKEND value: {_requested!r}")

HAVE_COMPILED = BACKEND == "compiled"


def _vec(a):
    return np.ascontiguousarray(a, dtype=np.float64).reshape(-1)


def _mat(a):
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError("expected a 2-d array")
    return out


def chebyshev_basis(x, degree):
    """Columns T_1(x)..T_degree(x) of Chebyshev polynomials of the first kind."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    return _impl.chebyshev_basis(_vec(x), int(degree))


def weighted_gram(X, w):
    """Sum_i w_i x_i x_i' (p x p, exactly symmetric)."""
    X = _mat(X)
    w = _vec(w)
    if w.shape[0] != X.shape[0]:
        raise ValueError("weight length does not match row count")
    return _impl.weighted_gram(X, w)


def weighted_xty(X, w, y):
    """Sum_i w_i y_i x_i (length p)."""
    X = _mat(X)
    w = _vec(w)
    y = _vec(y)
    if not (w.shape[0] == y.shape[0] == X.shape[0]):
        raise ValueError("weight/response length does not match row count")
    return _impl.weighted_xty(X, w, y)


def moment_blocks(X, y, resid, inv_sigma2):
    """Fused per-observation moment averages (G1, G2, m1, m2, O11, O12, O22)."""
    X = _mat(X)
    y = _vec(y)
    resid = _vec(resid)
    inv_sigma2 = _vec(inv_sigma2)
    n = X.shape[0]
    if not (y.shape[0] == resid.shape[0] == inv_sigma2.shape[0] == n):
        raise ValueError("vector lengths do not match row count")
    return _impl.moment_blocks(X, y, resid, inv_sigma2)
