"""Monte Carlo harness for comparing the three estimators.

Generates heteroscedastic samples from closed-form variance families, fits
plain/weighted/combined least squares on each replication, and aggregates
bias, empirical variance, reported standard errors, interval coverage, and
relative efficiency.

Reproducibility: replication r uses a child seed derived from the root
seed by the SplitMix64 scheme in ``gals._seeds``. Replications may run on
several worker threads; results are stored by replication index and
aggregated in index order, so the report is identical for any worker
count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from ._seeds import child_seed
from .basis import BasisSpec
from .design import build_dataset
from .errors import GalsError, NumericalError
from .estimators import ESTIMATORS, fit_all

VARIANCE_FAMILIES = ("loglinear", "absolute", "homoscedastic", "quadratic")
X_DISTRIBUTIONS = ("standard_normal", "uniform")
ERROR_DISTRIBUTIONS = ("normal", "scaled_t5")

_GAMMA_LENGTHS = {"loglinear": 2, "absolute": 1, "homoscedastic": 1, "quadratic": 2}
MIN_REPLICATIONS = 100
MAX_SKIP_FRACTION = 0.01


@dataclass
class DgpSpec:
    """A data-generating process: linear mean plus scaled noise.

    The design is an intercept and p-1 independent regressor draws; the
    variance family is evaluated at the first regressor. beta_true[0] is
    the intercept coefficient.
    """

    beta_true: np.ndarray
    variance_family: str
    gamma: np.ndarray
    n: int
    x_distribution: str = "standard_normal"
    error_distribution: str = "normal"

    def __post_init__(self):
        self.beta_true = np.asarray(self.beta_true, dtype=np.float64).reshape(-1)
        self.gamma = np.asarray(self.gamma, dtype=np.float64).reshape(-1)
        if self.variance_family not in VARIANCE_FAMILIES:
            raise ValueError(
                f"unknown variance family {self.variance_family!r}; "
                f"choose from {VARIANCE_FAMILIES}"
            )
        if self.x_distribution not in X_DISTRIBUTIONS:
            raise ValueError(f"unknown x distribution {self.x_distribution!r}")
        if self.error_distribution not in ERROR_DISTRIBUTIONS:
            raise ValueError(f"unknown error distribution {self.error_distribution!r}")
        want = _GAMMA_LENGTHS[self.variance_family]
        if self.gamma.shape[0] != want:
            raise ValueError(
                f"{self.variance_family} takes {want} variance parameter(s), "
                f"got {self.gamma.shape[0]}"
            )
        if self.variance_family == "homoscedastic" and self.gamma[0] <= 0:
            raise ValueError("homoscedastic variance parameter must be positive")
        if self.variance_family == "quadratic" and (self.gamma[0] <= 0 or self.gamma[1] < 0):
            raise ValueError("quadratic variance parameters must be positive")
        if self.variance_family == "absolute" and self.gamma[0] < 0:
            raise ValueError("absolute variance parameter must be nonnegative")
        if self.p < 1:
            raise ValueError("beta_true must be non-empty")
        if self.variance_family != "homoscedastic" and self.p < 2:
            raise ValueError("heteroscedastic families need at least one regressor")
        if self.n < self.p + 1:
            raise ValueError("sample size too small for the coefficient count")

    @property
    def p(self) -> int:
        return self.beta_true.shape[0]


def true_sigma2(spec: DgpSpec, x: np.ndarray) -> np.ndarray:
    """Conditional error variance of the chosen family at regressor values x."""
    g = spec.gamma
    if spec.variance_family == "loglinear":
        return np.exp(g[0] + g[1] * x)
    if spec.variance_family == "absolute":
        return (0.1 + g[0] * np.abs(x)) ** 2
    if spec.variance_family == "quadratic":
        return g[0] * (1.0 + g[1] * x * x)
    return np.full_like(x, g[0], dtype=np.float64)


def generate_sample(spec: DgpSpec, seed: int):
    """Draw one sample; returns (Dataset, true variance vector).

    Deterministic given (spec, seed). Draw order is fixed: regressors
    first (one n x (p-1) block), then the standardized errors.
    """
    rng = np.random.default_rng(seed)
    n, p = spec.n, spec.p
    k = max(p - 1, 0)
    if spec.x_distribution == "standard_normal":
        X_raw = rng.standard_normal((n, k))
    else:
        X_raw = rng.uniform(-1.0, 1.0, (n, k))
    x_driver = X_raw[:, 0] if k else np.zeros(n)
    sigma2 = true_sigma2(spec, x_driver)
    if spec.error_distribution == "normal":
        z = rng.standard_normal(n)
    else:
        z = rng.standard_t(5, n) * np.sqrt(0.6)  # t(5) rescaled to unit variance
    eps = np.sqrt(sigma2) * z
    y = spec.beta_true[0] + X_raw @ spec.beta_true[1:] + eps
    d = build_dataset(y, X_raw, intercept=True) if k else build_dataset(
        y, np.ones((n, 1)), intercept=False, names=["const"]
    )
    return d, sigma2


@dataclass
class EstimatorSummary:
    """Aggregates for one estimator across completed replications."""

    mean_bias: np.ndarray
    empirical_covariance: np.ndarray
    mean_std_error: np.ndarray
    coverage95: np.ndarray


@dataclass
class SimulationReport:
    replications: int
    completed: int
    skipped: int
    seed: int
    dgp: DgpSpec
    basis_family: str
    basis_degree: int
    estimators: dict[str, EstimatorSummary]
    relative_efficiency: dict[str, np.ndarray]
    fallback_rate: float
    skip_messages: list[str] = field(default_factory=list)


def _run_replication(spec, basis, root_seed, r, betas, ses, fallback, ok, errors):
    try:
        d, _ = generate_sample(spec, child_seed(root_seed, r))
        fits = fit_all(d, basis)
        for e_idx, name in enumerate(ESTIMATORS):
            betas[r, e_idx] = fits[name].beta_hat
            ses[r, e_idx] = fits[name].std_errors
        fallback[r] = fits["gals"].diagnostics.degenerate_fallback
        ok[r] = True
    except GalsError as exc:
        errors[r] = f"replication {r}: {exc}"


def run_monte_carlo(spec: DgpSpec, reps: int, *, basis_family: str = "chebyshev",
                    basis_degree: int = 2, seed: int, workers: int = 1) -> SimulationReport:
    """Run ``reps`` replications of the three-way estimator comparison.

    Failed replications are skipped and recorded; more than
    ``MAX_SKIP_FRACTION`` of them fails the whole run. The report is a
    pure function of (spec, reps, basis, seed), independent of ``workers``.
    """
    if reps < MIN_REPLICATIONS:
        raise ValueError(f"need at least {MIN_REPLICATIONS} replications, got {reps}")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    basis = BasisSpec(family=basis_family, degree=basis_degree)
    p = spec.p

    betas = np.zeros((reps, len(ESTIMATORS), p))
    ses = np.zeros((reps, len(ESTIMATORS), p))
    fallback = np.zeros(reps, dtype=bool)
    ok = np.zeros(reps, dtype=bool)
    errors: list[str | None] = [None] * reps

    if workers == 1:
        for r in range(reps):
            _run_replication(spec, basis, seed, r, betas, ses, fallback, ok, errors)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(
                lambda r: _run_replication(spec, basis, seed, r, betas, ses, fallback, ok, errors),
                range(reps),
            ))

    skipped = int((~ok).sum())
    messages = [msg for msg in errors if msg is not None][:5]
    if skipped > MAX_SKIP_FRACTION * reps:
        raise NumericalError(
            f"{skipped} of {reps} replications failed "
            f"(limit {MAX_SKIP_FRACTION:.0%}); first errors: " + "; ".join(messages)
        )

    z95 = norm.ppf(0.975)
    completed = reps - skipped
    summaries: dict[str, EstimatorSummary] = {}
    variances = {}
    for e_idx, name in enumerate(ESTIMATORS):
        b = betas[ok, e_idx, :]
        s = ses[ok, e_idx, :]
        emp_cov = np.atleast_2d(np.cov(b, rowvar=False, ddof=1))
        covered = np.abs(b - spec.beta_true[None, :]) <= z95 * s
        summaries[name] = EstimatorSummary(
            mean_bias=b.mean(axis=0) - spec.beta_true,
            empirical_covariance=emp_cov,
            mean_std_error=s.mean(axis=0),
            coverage95=covered.mean(axis=0),
        )
        variances[name] = np.diag(emp_cov)

    rel = {
        "gals_vs_ols": variances["gals"] / variances["ols"],
        "gals_vs_wls": variances["gals"] / variances["wls"],
        "wls_vs_ols": variances["wls"] / variances["ols"],
    }
    return SimulationReport(
        replications=reps,
        completed=completed,
        skipped=skipped,
        seed=seed,
        dgp=spec,
        basis_family=basis_family,
        basis_degree=basis_degree,
        estimators=summaries,
        relative_efficiency=rel,
        fallback_rate=float(fallback[ok].mean()) if completed else 0.0,
        skip_messages=messages,
    )
