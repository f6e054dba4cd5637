"""Heteroscedasticity-adaptive linear regression.

Combines the plain least-squares moments with inverse-variance-weighted
moments from a working log-linear variance model into one optimally
weighted system. Because the weighting spans both moment sets, the
combined fit never pays an asymptotic variance penalty against ordinary
or weighted least squares, however badly the variance model is chosen;
when the model happens to be right it matches the efficient weighted fit.

Typical use::

    from gals import build_dataset, fit_all

    d = build_dataset(y, X, intercept=True, names=["x1", "x2"])
    fits = fit_all(d)                 # {'ols': ..., 'wls': ..., 'gals': ...}
    fits["gals"].beta_hat

The ``gals`` console script exposes the same pipeline (``gals fit``) plus
a seeded Monte Carlo harness (``gals simulate``).
"""

from ._backend import BACKEND, HAVE_COMPILED
from .basis import BasisMatrix, BasisSpec, evaluate_basis
from .design import ColumnScaling, Dataset, build_dataset, fit_scaling
from .errors import DataError, GalsError, NumericalError
from .estimators import FitDiagnostics, FitResult, fit_all, fit_gals, fit_ols, fit_wls
from .gmm import (
    MomentSystem,
    build_an_reference,
    build_moment_system,
    estimate_omega,
    invert_block,
    solve_gals,
)
from .inference import (
    CovarianceEstimate,
    confidence_interval,
    gals_covariance,
    gmm_sandwich,
    hc_covariance,
)
from .simulation import (
    DgpSpec,
    EstimatorSummary,
    SimulationReport,
    generate_sample,
    run_monte_carlo,
    true_sigma2,
)
from .variance import VarianceModel, fit_variance_model, predict_sigma2

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "BasisMatrix",
    "BasisSpec",
    "ColumnScaling",
    "CovarianceEstimate",
    "DataError",
    "Dataset",
    "DgpSpec",
    "EstimatorSummary",
    "FitDiagnostics",
    "FitResult",
    "GalsError",
    "MomentSystem",
    "NumericalError",
    "SimulationReport",
    "VarianceModel",
    "build_an_reference",
    "build_dataset",
    "build_moment_system",
    "confidence_interval",
    "estimate_omega",
    "evaluate_basis",
    "fit_all",
    "fit_gals",
    "fit_ols",
    "fit_scaling",
    "fit_variance_model",
    "fit_wls",
    "gals_covariance",
    "generate_sample",
    "gmm_sandwich",
    "hc_covariance",
    "invert_block",
    "predict_sigma2",
    "run_monte_carlo",
    "solve_gals",
    "true_sigma2",
]
