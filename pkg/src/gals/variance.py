"""Heteroscedasticity model fitted from squared regression residuals.

The working model is log-linear in the basis: regress log(residual^2) on
the basis columns by least squares, then exponentiate the fitted values to
get per-observation variances. The model may be misspecified; downstream
estimation only requires it to be positive and finite.

Two guards keep the exponentials tame:

* squared residuals are floored at ``FLOOR_REL * mean(resid^2)`` before the
  log, so exact zeros cannot produce -inf;
* fitted variances are clamped to ``[g / CLAMP_SPAN, g * CLAMP_SPAN]``
  around their in-sample geometric mean g, so a few extreme fits cannot
  blow up the inverse-variance weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .basis import BasisMatrix
from .errors import DataError, NumericalError

FLOOR_REL = 1e-12
CLAMP_SPAN = 1e4
# Rank tolerance for the basis regression, relative to the largest R diagonal.
BASIS_RANK_RTOL = 1e-10
# Homoscedasticity detection: all non-constant coefficients below DELTA_TOL
# and the fitted log-variances essentially constant.
HOMOSCEDASTIC_DELTA_TOL = 1e-8
HOMOSCEDASTIC_LOGVAR_TOL = 1e-12


@dataclass
class VarianceModel:
    """Fitted log-linear variance model and its per-observation weights."""

    delta: np.ndarray
    sigma2: np.ndarray
    inv_sigma2: np.ndarray
    floor_applied: int
    clamp_applied: int
    homoscedastic_flag: bool
    clamp_bounds: tuple[float, float]
    basis_labels: list[str]


def _check_full_rank(P: BasisMatrix) -> None:
    _, R, piv = scipy.linalg.qr(P.values, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size and diag[0] > 0.0:
        rank = int(np.sum(diag > BASIS_RANK_RTOL * diag[0]))
    else:
        rank = 0
    if rank < P.m:
        bad = [P.labels[j] for j in piv[rank:]]
        raise NumericalError(
            "collinear basis in the variance regression; offending columns: "
            + ", ".join(bad)
        )


def fit_variance_model(residuals, P: BasisMatrix) -> VarianceModel:
    """Least-squares fit of log(residual^2) on the basis columns.

    Raises DataError when every residual is exactly zero (the variance
    model is undefined for a perfect fit) and NumericalError when the
    basis columns are collinear.
    """
    residuals = np.asarray(residuals, dtype=np.float64).reshape(-1)
    n = residuals.shape[0]
    if P.n != n:
        raise DataError(f"basis has {P.n} rows but there are {n} residuals")

    e2 = residuals * residuals
    if not e2.any():
        raise DataError("perfect fit, variance model undefined")

    _check_full_rank(P)

    floor = FLOOR_REL * e2.mean()
    floor_applied = int((e2 < floor).sum())
    target = np.log(np.maximum(e2, floor))
    delta, *_ = np.linalg.lstsq(P.values, target, rcond=None)

    log_sigma2 = P.values @ delta
    raw = np.exp(log_sigma2)
    geo_mean = float(np.exp(log_sigma2.mean()))
    lo, hi = geo_mean / CLAMP_SPAN, geo_mean * CLAMP_SPAN
    clamp_applied = int(((raw < lo) | (raw > hi)).sum())
    sigma2 = np.clip(raw, lo, hi)

    nonconst = delta[1:] if P.labels and P.labels[0] == "const" else delta
    homoscedastic = bool(
        (np.abs(nonconst).max(initial=0.0) <= HOMOSCEDASTIC_DELTA_TOL)
        and (np.var(np.log(sigma2)) <= HOMOSCEDASTIC_LOGVAR_TOL)
    )

    return VarianceModel(
        delta=delta,
        sigma2=sigma2,
        inv_sigma2=1.0 / sigma2,
        floor_applied=floor_applied,
        clamp_applied=clamp_applied,
        homoscedastic_flag=homoscedastic,
        clamp_bounds=(lo, hi),
        basis_labels=list(P.labels),
    )


def predict_sigma2(vm: VarianceModel, P_new: BasisMatrix) -> np.ndarray:
    """Fitted variances for new basis rows, clamped to the fitted bounds."""
    if P_new.m != vm.delta.shape[0]:
        raise DataError(
            f"basis has {P_new.m} columns but the model has {vm.delta.shape[0]} coefficients"
        )
    raw = np.exp(P_new.values @ vm.delta)
    return np.clip(raw, vm.clamp_bounds[0], vm.clamp_bounds[1])
