"""Covariance estimators, standard errors, and confidence intervals.

OLS and WLS get the usual heteroscedasticity-robust sandwich (HC0/HC1);
the combined-moments estimator gets the optimal-weight GMM covariance
(G'WG)^{-1}/n, or the full GMM sandwich when the weight used is not the
exact inverse of the moment covariance (ridge-regularized runs).
Critical values are standard normal throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import _backend
from .design import Dataset
from .errors import NumericalError
from .gmm import RCOND_FLOOR, MomentSystem, _rcond, _sym

HC_VARIANTS = ("hc0", "hc1")


@dataclass
class CovarianceEstimate:
    """A p x p sampling covariance of the coefficient estimates."""

    matrix: np.ndarray
    method: str
    dof_adjustment: float


def hc_covariance(d: Dataset, residuals, weights=None, variant: str = "hc1") -> CovarianceEstimate:
    """White-type sandwich for OLS (weights=None) or WLS (weights=1/s2).

    With row weights w: bread B = mean w x x', meat M = mean w^2 e^2 x x',
    covariance B^{-1} M B^{-1} / n; hc1 multiplies by n/(n-p).
    """
    if variant not in HC_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {HC_VARIANTS}")
    residuals = np.asarray(residuals, dtype=np.float64).reshape(-1)
    n, p = d.n, d.p
    if residuals.shape[0] != n:
        raise ValueError("residual length does not match the dataset")
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != n:
            raise ValueError("weight length does not match the dataset")
        if not (w > 0).all():
            raise ValueError("weights must be strictly positive")

    B = _backend.weighted_gram(d.X, w) / n
    M = _backend.weighted_gram(d.X, w * w * residuals * residuals) / n
    if _rcond(B) < RCOND_FLOOR:
        raise NumericalError("singular bread matrix in the sandwich covariance")
    Binv = np.linalg.inv(B)
    cov = _sym(Binv @ M @ Binv) / n
    dof = 1.0
    if variant == "hc1":
        dof = n / (n - p)
        cov = cov * dof
    return CovarianceEstimate(matrix=cov, method=variant, dof_adjustment=dof)


def gals_covariance(ms: MomentSystem) -> CovarianceEstimate:
    """Optimal-weight covariance (G'WG)^{-1} / n."""
    if ms.degenerate or ms.W is None:
        raise NumericalError("degenerate moment system has no optimal-weight covariance")
    A = _sym(ms.G_hat.T @ ms.W @ ms.G_hat)
    if _rcond(A) < RCOND_FLOOR:
        raise NumericalError("weighted normal matrix is numerically singular")
    cov = _sym(np.linalg.inv(A)) / ms.n
    return CovarianceEstimate(matrix=cov, method="gmm_optimal", dof_adjustment=1.0)


def gmm_sandwich(ms: MomentSystem, W_used: np.ndarray) -> CovarianceEstimate:
    """GMM sandwich valid for any weight matrix:
    (G'WG)^{-1} G'W Omega W G (G'WG)^{-1} / n."""
    W_used = np.asarray(W_used, dtype=np.float64)
    G = ms.G_hat
    A = _sym(G.T @ W_used @ G)
    if _rcond(A) < RCOND_FLOOR:
        raise NumericalError("weighted normal matrix is numerically singular")
    Ainv = np.linalg.inv(A)
    meat = G.T @ W_used @ ms.Omega_hat @ W_used @ G
    cov = _sym(Ainv @ meat @ Ainv) / ms.n
    return CovarianceEstimate(matrix=cov, method="gmm_sandwich", dof_adjustment=1.0)


def confidence_interval(fr, level: float) -> np.ndarray:
    """Per-coefficient normal-approximation (lo, hi) pairs, shape (p, 2)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    z = norm.ppf(0.5 * (1.0 + level))
    beta = fr.beta_hat
    se = fr.std_errors
    return np.column_stack([beta - z * se, beta + z * se])
