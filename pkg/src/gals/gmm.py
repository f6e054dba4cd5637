"""Stacked two-block moment system and its optimally weighted solve.

The estimator combines the plain orthogonality moments E(e x) = 0 with the
inverse-variance-weighted moments E(e x / s2(x)) = 0. Stacking both gives a
2p-equation system whose sample pieces are:

    G  (2p x p)  Jacobian: [mean x x' ; mean x x'/s2]
    m_y (2p)     [mean y x ; mean y x / s2]
    Omega        moment covariance, in four p x p blocks built from squared
                 residuals and fitted variances
    W            Omega^{-1}, assembled blockwise through the Schur
                 complement of the top-left block

and the estimate solves (G' W G) b = G' W m_y. An equivalent n x n
generalized-least-squares form (``build_an_reference``) is kept purely as
a cross-check oracle: expanding its weighting matrix shows
X' A X = n G'WG and X' A y = n G'W m_y, so the two solves must agree.

When the fitted variances are (numerically) constant the two moment blocks
coincide up to scale, Omega loses rank, and the system is flagged
degenerate; callers fall back to plain least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .design import Dataset
from .errors import NumericalError
from .variance import VarianceModel

# Reciprocal-condition floor below which a block triggers regularization.
RCOND_FLOOR = 1e-12
# At or below this the block has collapsed to machine-precision rank
# deficiency; a ridge cannot restore information, so it counts as failed.
HARD_SINGULAR = 1e-14
# Ridge applied to Omega's diagonal on a failed conditioning test:
# lambda = RIDGE_SCALE * trace(Omega) / (2p).
RIDGE_SCALE = 1e-10
# The n x n reference form is a test oracle only; refuse large samples.
AN_REFERENCE_MAX_N = 500
# Rank tolerance for the stacked Jacobian.
JACOBIAN_RANK_RTOL = 1e-10


@dataclass
class InversionDiagnostics:
    """What happened while inverting the moment covariance."""

    degenerate: bool
    cond: float
    ridge_lambda: float
    rcond_topleft: float
    rcond_schur: float


@dataclass
class MomentSystem:
    """Sample moment system for one dataset and one variance model."""

    G_hat: np.ndarray
    m_y: np.ndarray
    Omega_hat: np.ndarray
    W: np.ndarray | None
    degenerate: bool
    cond_omega: float
    ridge_lambda: float
    inv_sigma2: np.ndarray
    n: int
    p: int


def _rcond(M: np.ndarray) -> float:
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0.0
    return float(sv[-1] / sv[0])


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def estimate_omega(d: Dataset, residuals, vm: VarianceModel) -> np.ndarray:
    """Feasible moment covariance: four p x p blocks from residuals and weights.

    Blocks are mean e2 x x', mean (e2/s2) x x' (both off-diagonal slots),
    and mean (e2/s2^2) x x'.
    """
    residuals = np.asarray(residuals, dtype=np.float64).reshape(-1)
    if residuals.shape[0] != d.n or vm.sigma2.shape[0] != d.n:
        raise ValueError("residuals and variance model must match the dataset rows")
    _, _, _, _, O11, O12, O22 = _backend.moment_blocks(
        d.X, d.y, residuals, vm.inv_sigma2
    )
    return _assemble_omega(O11, O12, O22)


def _assemble_omega(O11, O12, O22) -> np.ndarray:
    p = O11.shape[0]
    Omega = np.empty((2 * p, 2 * p))
    Omega[:p, :p] = O11
    Omega[:p, p:] = O12
    Omega[p:, :p] = O12.T
    Omega[p:, p:] = O22
    return Omega


def _try_block_inverse(Omega: np.ndarray, p: int):
    """One Schur-complement inversion attempt.

    Returns (W, rc11, rc_schur, status) with status one of 'ok', 'soft'
    (poorly conditioned, a ridge may help), or 'hard' (rank collapsed to
    machine precision, no ridge can help). The top-left block is judged by
    its own reciprocal condition number; the Schur complement is judged
    against the scale of the bottom-right block it was cancelled out of,
    which keeps the test invariant to the units of y.
    """
    O11 = Omega[:p, :p]
    O12 = Omega[:p, p:]
    O22 = Omega[p:, p:]
    rc11 = _rcond(O11)
    if rc11 <= RCOND_FLOOR:
        return None, rc11, 0.0, "hard" if rc11 <= HARD_SINGULAR else "soft"
    inv11 = _sym(np.linalg.inv(O11))
    schur = _sym(O22 - O12.T @ inv11 @ O12)
    sv_schur = np.linalg.svd(schur, compute_uv=False)
    sv22 = np.linalg.svd(O22, compute_uv=False)
    scale = max(sv_schur[0], sv22[0])
    rc_schur = float(sv_schur[-1] / scale) if scale > 0.0 else 0.0
    if rc_schur <= RCOND_FLOOR:
        return None, rc11, rc_schur, "hard" if rc_schur <= HARD_SINGULAR else "soft"
    inv_schur = _sym(np.linalg.inv(schur))
    B = inv11 @ O12
    W = np.empty_like(Omega)
    W[:p, :p] = _sym(inv11 + B @ inv_schur @ B.T)
    W[:p, p:] = -B @ inv_schur
    W[p:, :p] = W[:p, p:].T
    W[p:, p:] = inv_schur
    return W, rc11, rc_schur, "ok"


def invert_block(Omega: np.ndarray):
    """Blockwise inverse of a symmetric 2p x 2p moment covariance.

    Inverts the top-left block, forms the Schur complement, and assembles
    the four blocks of the inverse. A block that is merely ill conditioned
    triggers one retry with a small ridge on the diagonal (recorded in the
    diagnostics); a block whose rank has collapsed to machine precision is
    degenerate outright, since a ridge would only return its own noise.
    Never raises on singular input: callers get (None, diagnostics) with
    the degenerate flag set.
    """
    Omega = np.asarray(Omega, dtype=np.float64)
    if Omega.ndim != 2 or Omega.shape[0] != Omega.shape[1] or Omega.shape[0] % 2:
        raise ValueError("Omega must be square with even dimension")
    scale = np.abs(Omega).max()
    if scale > 0 and np.abs(Omega - Omega.T).max() > 1e-8 * scale:
        raise ValueError("Omega must be symmetric")
    p = Omega.shape[0] // 2

    cond = np.inf
    rc_full = _rcond(Omega)
    if rc_full > 0.0:
        cond = 1.0 / rc_full

    W, rc11, rc_schur, status = _try_block_inverse(Omega, p)
    ridge = 0.0
    if status == "soft":
        candidate = RIDGE_SCALE * float(np.trace(Omega)) / (2 * p)
        if candidate > 0.0:
            ridge = candidate
            W, rc11, rc_schur, status = _try_block_inverse(
                Omega + ridge * np.eye(2 * p), p
            )
            if status != "ok":
                W = None
    diag = InversionDiagnostics(
        degenerate=W is None,
        cond=cond,
        ridge_lambda=ridge,
        rcond_topleft=rc11,
        rcond_schur=rc_schur,
    )
    return W, diag


def build_moment_system(d: Dataset, residuals, vm: VarianceModel) -> MomentSystem:
    """Assemble Jacobian, moment covariance, and optimal weight for a sample.

    Degenerate when the covariance cannot be inverted or the variance model
    is flagged homoscedastic (either alone makes the weighting vacuous).
    Raises NumericalError when the stacked Jacobian loses rank.
    """
    residuals = np.asarray(residuals, dtype=np.float64).reshape(-1)
    if residuals.shape[0] != d.n or vm.sigma2.shape[0] != d.n:
        raise ValueError("residuals and variance model must match the dataset rows")
    G1, G2, m1, m2, O11, O12, O22 = _backend.moment_blocks(
        d.X, d.y, residuals, vm.inv_sigma2
    )
    G = np.vstack([G1, G2])
    m_y = np.concatenate([m1, m2])
    sv = np.linalg.svd(G, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= JACOBIAN_RANK_RTOL * sv[0]:
        raise NumericalError("stacked moment Jacobian is rank deficient")

    Omega = _assemble_omega(O11, O12, O22)
    W, info = invert_block(Omega)
    degenerate = info.degenerate or vm.homoscedastic_flag
    return MomentSystem(
        G_hat=G,
        m_y=m_y,
        Omega_hat=Omega,
        W=W,
        degenerate=degenerate,
        cond_omega=info.cond,
        ridge_lambda=info.ridge_lambda,
        inv_sigma2=vm.inv_sigma2,
        n=d.n,
        p=d.p,
    )


def solve_gals(ms: MomentSystem) -> np.ndarray:
    """Solve (G' W G) b = G' W m_y for the combined-moments estimate."""
    if ms.degenerate or ms.W is None:
        raise NumericalError(
            "degenerate moment system (constant fitted variances or singular "
            "covariance); use the least-squares fallback"
        )
    WG = ms.W @ ms.G_hat
    A = _sym(ms.G_hat.T @ WG)
    b = ms.G_hat.T @ (ms.W @ ms.m_y)
    rc = _rcond(A)
    if rc < RCOND_FLOOR:
        raise NumericalError(
            f"weighted normal matrix is numerically singular (rcond {rc:.2e}, "
            f"cond(Omega) {ms.cond_omega:.2e})"
        )
    return np.linalg.solve(A, b)


def build_an_reference(d: Dataset, ms: MomentSystem):
    """Literal n x n weighting-matrix form of the same estimator.

    Assembles A = (1/n) (Xr W11 Xr' + Xr W12 Xr' D + D Xr W21 Xr' +
    D Xr W22 Xr' D), with Xr the n x p design, D = diag(1/s2), and solves
    (X' A X) b = X' A y. Quadratic memory; kept only as the cross-check
    oracle for solve_gals, hence the sample-size guard.
    """
    if d.n > AN_REFERENCE_MAX_N:
        raise ValueError(
            f"reference form is limited to n <= {AN_REFERENCE_MAX_N} (got {d.n})"
        )
    if ms.degenerate or ms.W is None:
        raise NumericalError("degenerate moment system; reference form undefined")
    p = ms.p
    W11 = ms.W[:p, :p]
    W12 = ms.W[:p, p:]
    W22 = ms.W[p:, p:]
    iv = ms.inv_sigma2
    X = d.X
    C11 = X @ W11 @ X.T
    C12 = X @ W12 @ X.T
    C22 = X @ W22 @ X.T
    A = (C11 + C12 * iv[None, :] + iv[:, None] * C12.T + iv[:, None] * C22 * iv[None, :]) / d.n
    lhs = X.T @ A @ X
    rhs = X.T @ (A @ d.y)
    beta = np.linalg.solve(lhs, rhs)
    return A, beta
