"""Polynomial bases for the log-variance model.

Each non-constant regressor contributes degree-many terms evaluated on its
scaled values: Chebyshev polynomials of the first kind (recurrence
T_0 = 1, T_1 = x, T_{k+1} = 2 x T_k - T_{k-1}) or plain powers. No
cross-column interaction terms; the shared constant column leads.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _backend
from .design import ColumnScaling, Dataset

FAMILIES = ("chebyshev", "power")


@dataclass
class BasisSpec:
    """Family, per-regressor degree, and the column scaling to apply."""

    family: str = "chebyshev"
    degree: int = 2
    include_constant: bool = True
    scaling: ColumnScaling | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown basis family {self.family!r}; choose from {FAMILIES}")
        if self.degree < 1:
            raise ValueError("basis degree must be >= 1")

    def with_scaling(self, scaling: ColumnScaling) -> BasisSpec:
        return replace(self, scaling=scaling)

    @property
    def dimension(self) -> int:
        """Total number of basis columns, 1 + degree * (#non-excluded columns)."""
        if self.scaling is None:
            raise ValueError("basis dimension requires a fitted scaling")
        return int(self.include_constant) + self.degree * self.scaling.n_active


@dataclass
class BasisMatrix:
    """Evaluated basis: values[i, k] is basis function k at observation i."""

    values: np.ndarray
    labels: list[str]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


def _column_terms(spec: BasisSpec, scaled: np.ndarray, name: str):
    if spec.family == "chebyshev":
        block = _backend.chebyshev_basis(scaled, spec.degree)
        labels = [f"T{k}({name})" for k in range(1, spec.degree + 1)]
    else:
        block = np.column_stack([scaled**k for k in range(1, spec.degree + 1)])
        labels = [f"{name}^{k}" for k in range(1, spec.degree + 1)]
    return block, labels


def evaluate_basis(spec: BasisSpec, d: Dataset) -> BasisMatrix:
    """Evaluate the basis on a dataset with the scaling's column layout."""
    return evaluate_basis_values(spec, d.X, d.column_names)


def evaluate_basis_values(spec: BasisSpec, X: np.ndarray, column_names) -> BasisMatrix:
    """Evaluate on a raw matrix; rows outside the fitted range are clamped."""
    scaling = spec.scaling
    if scaling is None:
        raise ValueError("BasisSpec has no fitted scaling")
    if list(column_names) != scaling.column_names or X.shape[1] != len(scaling.column_names):
        raise ValueError("column layout does not match the scaling this basis was fitted on")

    n = X.shape[0]
    blocks = []
    labels = []
    if spec.include_constant:
        blocks.append(np.ones((n, 1)))
        labels.append("const")
    for j in range(X.shape[1]):
        if scaling.excluded[j]:
            continue
        scaled = scaling.scale_column(j, X[:, j])
        block, block_labels = _column_terms(spec, scaled, scaling.column_names[j])
        blocks.append(block)
        labels.extend(block_labels)
    return BasisMatrix(values=np.ascontiguousarray(np.hstack(blocks)), labels=labels)
