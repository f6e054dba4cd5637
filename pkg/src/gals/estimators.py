"""The three-step fitting pipeline: plain, weighted, and combined least squares.

Step 1 estimates residuals by ordinary least squares. Step 2 fits the
log-linear variance model to those residuals. Step 3 solves the stacked
moment system with the optimal weight. ``fit_all`` runs the pipeline once
and returns all three fits (the by-products are free); ``fit_gals`` is the
single-estimator wrapper around it.

When the moment system is degenerate (constant fitted variances or a
singular moment covariance), the combined fit falls back to the plain
least-squares result, flagged via ``diagnostics.degenerate_fallback``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .basis import BasisSpec, evaluate_basis
from .design import Dataset, fit_scaling
from .errors import DataError, NumericalError
from .gmm import RCOND_FLOOR, _rcond, build_moment_system, solve_gals
from .inference import gals_covariance, gmm_sandwich, hc_covariance
from .variance import VarianceModel, fit_variance_model

ESTIMATORS = ("ols", "wls", "gals")


@dataclass
class FitDiagnostics:
    degenerate_fallback: bool = False
    cond_omega: float | None = None
    ridge_lambda: float = 0.0
    basis_degree: int | None = None
    basis_family: str | None = None


@dataclass
class FitResult:
    """One fitted estimator: coefficients, sampling covariance, residuals."""

    estimator: str
    beta_hat: np.ndarray
    covariance: np.ndarray
    std_errors: np.ndarray
    residuals: np.ndarray
    variance_model: VarianceModel | None = None
    diagnostics: FitDiagnostics = field(default_factory=FitDiagnostics)


def _finalize(estimator, d, beta, cov, vm=None, diagnostics=None) -> FitResult:
    residuals = d.y - d.X @ beta
    return FitResult(
        estimator=estimator,
        beta_hat=beta,
        covariance=cov,
        std_errors=np.sqrt(np.diag(cov)),
        residuals=residuals,
        variance_model=vm,
        diagnostics=diagnostics or FitDiagnostics(),
    )


def fit_ols(d: Dataset) -> FitResult:
    """Ordinary least squares with the hc1 sandwich covariance."""
    beta, *_ = np.linalg.lstsq(d.X, d.y, rcond=None)
    residuals = d.y - d.X @ beta
    cov = hc_covariance(d, residuals, weights=None, variant="hc1")
    return _finalize("ols", d, beta, cov.matrix)


def fit_wls(d: Dataset, vm: VarianceModel) -> FitResult:
    """Inverse-variance weighted least squares with a robust sandwich.

    The weights come from a working variance model that may be
    misspecified; the sandwich covariance stays valid either way.
    """
    if vm.sigma2.shape[0] != d.n:
        raise ValueError("variance model does not match the dataset rows")
    iv = vm.inv_sigma2
    B = _backend.weighted_gram(d.X, iv)
    rhs = _backend.weighted_xty(d.X, iv, d.y)
    if _rcond(B) < RCOND_FLOOR:
        raise NumericalError("singular weighted normal matrix in the weighted fit")
    beta = np.linalg.solve(B, rhs)
    residuals = d.y - d.X @ beta
    cov = hc_covariance(d, residuals, weights=iv, variant="hc1")
    return _finalize("wls", d, beta, cov.matrix, vm=vm)


def fit_gals(d: Dataset, spec: BasisSpec | None = None,
             variance_model: VarianceModel | None = None) -> FitResult:
    """Combined-moments fit (the full three-step pipeline)."""
    return fit_all(d, spec, variance_model=variance_model)["gals"]


def fit_all(d: Dataset, spec: BasisSpec | None = None, *,
            variance_model: VarianceModel | None = None) -> dict[str, FitResult]:
    """Run the pipeline once and return {'ols', 'wls', 'gals'} fits.

    ``variance_model`` overrides step 2 when supplied (the basis spec is
    then ignored); otherwise the basis is scaled and evaluated on the
    sample and the model fitted from the step-1 residuals.
    """
    ols = fit_ols(d)

    if variance_model is not None:
        vm = variance_model
        spec = None
    else:
        if spec is None:
            spec = BasisSpec()
        if spec.scaling is None:
            spec = spec.with_scaling(fit_scaling(d))
        m = spec.dimension
        if d.n < 4 * m:
            raise DataError(
                f"basis dimension {m} needs at least {4 * m} observations, got {d.n}"
            )
        P = evaluate_basis(spec, d)
        vm = fit_variance_model(ols.residuals, P)

    basis_diag = dict(
        basis_degree=spec.degree if spec is not None else None,
        basis_family=spec.family if spec is not None else None,
    )

    wls = fit_wls(d, vm)
    wls = replace(wls, diagnostics=replace(wls.diagnostics, **basis_diag))

    ms = build_moment_system(d, ols.residuals, vm)
    diagnostics = FitDiagnostics(
        degenerate_fallback=ms.degenerate,
        cond_omega=ms.cond_omega,
        ridge_lambda=ms.ridge_lambda,
        **basis_diag,
    )
    if ms.degenerate:
        # Fall back to the plain least-squares solution, bit for bit.
        gals = FitResult(
            estimator="gals",
            beta_hat=ols.beta_hat,
            covariance=ols.covariance,
            std_errors=ols.std_errors,
            residuals=ols.residuals,
            variance_model=vm,
            diagnostics=diagnostics,
        )
    else:
        beta = solve_gals(ms)
        if ms.ridge_lambda > 0.0:
            cov = gmm_sandwich(ms, ms.W)
        else:
            cov = gals_covariance(ms)
        gals = _finalize("gals", d, beta, cov.matrix, vm=vm, diagnostics=diagnostics)

    return {"ols": ols, "wls": wls, "gals": gals}
