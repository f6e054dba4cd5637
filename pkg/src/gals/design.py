"""Dataset construction, validation, and regressor scaling.

A ``Dataset`` holds the response and a full-rank design matrix. A
``ColumnScaling`` maps each non-constant regressor affinely onto [-1, 1]
so polynomial bases stay well conditioned; constant columns (including a
prepended intercept) are excluded from basis expansion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DataError

# Smallest/largest singular value below this ratio => rank-deficiency error.
RANK_RTOL = 1e-10
# Constant-column test: (max - min) <= CONST_ATOL * max(1, |max|).
CONST_ATOL = 1e-12
# Out-of-sample scaled values are clamped here instead of erroring.
SCALE_CLAMP = (-1.05, 1.05)


@dataclass
class Dataset:
    """Validated regression sample: response y and n x p design X."""

    y: np.ndarray
    X: np.ndarray
    column_names: list[str]

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass
class ColumnScaling:
    """Affine per-column map onto [-1, 1], fitted on a sample.

    ``excluded`` marks constant columns, which have no meaningful scaling
    and are dropped from basis construction.
    """

    lower: np.ndarray
    upper: np.ndarray
    excluded: np.ndarray
    column_names: list[str]

    @property
    def n_active(self) -> int:
        return int((~self.excluded).sum())

    def scale_column(self, j: int, values: np.ndarray, clamp: bool = True) -> np.ndarray:
        """Map raw values of column j onto [-1, 1] (clamped to SCALE_CLAMP)."""
        if self.excluded[j]:
            raise ValueError(f"column {self.column_names[j]!r} is constant and excluded")
        span = self.upper[j] - self.lower[j]
        scaled = 2.0 * (np.asarray(values, dtype=np.float64) - self.lower[j]) / span - 1.0
        if clamp:
            scaled = np.clip(scaled, SCALE_CLAMP[0], SCALE_CLAMP[1])
        return scaled

    def unscale_column(self, j: int, scaled: np.ndarray) -> np.ndarray:
        """Inverse of scale_column for values inside the clamp range."""
        if self.excluded[j]:
            raise ValueError(f"column {self.column_names[j]!r} is constant and excluded")
        span = self.upper[j] - self.lower[j]
        return self.lower[j] + (np.asarray(scaled, dtype=np.float64) + 1.0) * span / 2.0


def _rank_deficient_columns(X: np.ndarray, names: list[str]) -> list[str]:
    """Name the columns past the numerical rank, via pivoted QR."""
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return list(names)
    rank = int(np.sum(diag > RANK_RTOL * diag[0]))
    return [names[j] for j in piv[rank:]]


def build_dataset(y, X_raw, intercept: bool = True, names=None) -> Dataset:
    """Assemble and validate a Dataset.

    Prepends an all-ones intercept column when ``intercept`` is set and no
    existing column is identically one. Raises DataError on dimension
    mismatch, non-finite entries, n < p + 1, or a rank-deficient design
    (naming the offending columns).
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    if y.ndim != 1:
        raise DataError(f"response must be a vector, got shape {y.shape}")
    X_raw = np.ascontiguousarray(X_raw, dtype=np.float64)
    if X_raw.ndim == 1:
        X_raw = X_raw.reshape(-1, 1)
    if X_raw.ndim != 2 or X_raw.shape[1] == 0:
        raise DataError("design matrix must be 2-d and non-empty")
    if y.shape[0] != X_raw.shape[0]:
        raise DataError(
            f"response length {y.shape[0]} does not match design rows {X_raw.shape[0]}"
        )
    if not np.isfinite(y).all():
        raise DataError("response contains non-finite entries")
    if not np.isfinite(X_raw).all():
        raise DataError("design matrix contains non-finite entries")

    k = X_raw.shape[1]
    if names is None:
        names = [f"x{j + 1}" for j in range(k)]
    else:
        names = [str(s) for s in names]
        if len(names) != k:
            raise DataError(f"{len(names)} column names given for {k} columns")

    has_ones = any(np.all(X_raw[:, j] == 1.0) for j in range(k))
    if intercept and not has_ones:
        X = np.column_stack([np.ones(X_raw.shape[0]), X_raw])
        names = ["const"] + names
    else:
        X = X_raw.copy()

    n, p = X.shape
    if n < p + 1:
        raise DataError(f"need at least p + 1 = {p + 1} observations, got {n}")

    sv = np.linalg.svd(X, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        bad = _rank_deficient_columns(X, names)
        raise DataError(
            "design matrix is rank deficient; offending columns: " + ", ".join(bad)
        )

    return Dataset(y=y, X=np.ascontiguousarray(X), column_names=names)


def fit_scaling(d: Dataset) -> ColumnScaling:
    """Per-column min/max bounds; constant columns flagged excluded."""
    lower = d.X.min(axis=0)
    upper = d.X.max(axis=0)
    excluded = (upper - lower) <= CONST_ATOL * np.maximum(1.0, np.abs(upper))
    return ColumnScaling(
        lower=lower,
        upper=upper,
        excluded=excluded,
        column_names=list(d.column_names),
    )
