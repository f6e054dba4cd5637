"""Shared helpers for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from gals import (
    BasisSpec,
    VarianceModel,
    build_dataset,
    build_moment_system,
    evaluate_basis,
    fit_ols,
    fit_scaling,
    fit_variance_model,
)

FIXTURES = Path(__file__).parent / "fixtures"


def make_hetero_dataset(seed, n=120, p=2, gamma=0.5, intercept=True):
    """Random sample with log-linear variance in the first regressor.

    p counts design columns, including the intercept when requested.
    """
    rng = np.random.default_rng(seed)
    k = p - 1 if intercept else p
    X_raw = rng.standard_normal((n, k))
    x = X_raw[:, 0]
    sigma = np.exp(0.5 * gamma * x)
    beta = np.arange(1, k + 2, dtype=float) if intercept else np.arange(1, k + 1, dtype=float)
    mean = beta[0] + X_raw @ beta[1:] if intercept else X_raw @ beta
    y = mean + sigma * rng.standard_normal(n)
    return build_dataset(y, X_raw, intercept=intercept)


def make_vm(sigma2, homoscedastic=False):
    """Hand-built variance model around a given sigma^2 vector."""
    sigma2 = np.asarray(sigma2, dtype=np.float64)
    return VarianceModel(
        delta=np.zeros(1),
        sigma2=sigma2,
        inv_sigma2=1.0 / sigma2,
        floor_applied=0,
        clamp_applied=0,
        homoscedastic_flag=homoscedastic,
        clamp_bounds=(sigma2.min() / 1e6, sigma2.max() * 1e6),
        basis_labels=["const"],
    )


def pipeline_moments(seed, n=120, p=2, degree=2, family="chebyshev", intercept=True):
    """Full step-1/step-2 pipeline on a random heteroscedastic sample.

    Returns (dataset, ols result, variance model, moment system).
    """
    d = make_hetero_dataset(seed, n=n, p=p, intercept=intercept)
    ols = fit_ols(d)
    spec = BasisSpec(family=family, degree=degree).with_scaling(fit_scaling(d))
    P = evaluate_basis(spec, d)
    vm = fit_variance_model(ols.residuals, P)
    ms = build_moment_system(d, ols.residuals, vm)
    return d, ols, vm, ms


@pytest.fixture(scope="session")
def toy_csv():
    return str(FIXTURES / "toy.csv")


@pytest.fixture(scope="session")
def hetero200_csv(tmp_path_factory):
    """200-row heteroscedastic CSV written deterministically."""
    rng = np.random.default_rng(987654321)
    n = 200
    x1 = rng.standard_normal(n)
    x2 = rng.uniform(-1.0, 1.0, n)
    y = 1.0 + 2.0 * x1 - 0.5 * x2 + np.exp(0.3 * x1) * rng.standard_normal(n)
    path = tmp_path_factory.mktemp("data") / "hetero200.csv"
    lines = ["y,x1,x2"]
    for i in range(n):
        lines.append(f"{float(y[i])!r},{float(x1[i])!r},{float(x2[i])!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
