"""Score functions and their analytic gradients.

All scores are functions of a d x d weight matrix W given an n x d sample
matrix X (model ``X ≈ XW``):

* ``least_squares``:  ||X - XW||_F^2 / (2n);
* ``golem_ev``:       (d/2)·log(||X - XW||_F^2) - log|det(I - W)|
  (equal-variance Gaussian profile likelihood, unnormalized norms);
* ``golem_nv``:       (1/2)·Σ_j log(||(X - XW)_j||^2) - log|det(I - W)|
  (per-column variances);
* ``weighted_ls``:    ||(X - XW)·Sigma^{-1/2}||_F^2 / (2n), Mahalanobis
  weighting by a noise covariance Sigma.

The Gaussian scores always satisfy ``golem_nv <= golem_ev - log(d)`` for
d >= 2 (concavity of log); when the residual columns have equal norms the
gap is exactly ``(d/2)·log(d)``, which is the sharper bound the weaker one
follows from.

Each evaluation returns the smooth value, its gradient, and the L1 norm of
W separately; the full objective is ``value + lam * l1_value``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .data import Dataset

__all__ = [
    "LossDomainError",
    "LossSpec",
    "LossEval",
    "least_squares",
    "golem_ev",
    "golem_nv",
    "weighted_ls",
    "l1_norm_and_split",
    "combine_split",
    "bind_loss",
]

LOSS_KINDS = ("least_squares", "golem_ev", "golem_nv", "weighted_ls")

# reciprocal-condition cutoff below which I - W counts as singular
_RCOND_MIN = 1e-14
# eigenvalue floor for a usable noise covariance
_SIGMA_EIG_MIN = 1e-12


class LossDomainError(ValueError):
    """The score is not defined at this point (singular I-W, zero residual...)."""


@dataclass(frozen=True)
class LossSpec:
    """Which score to use, its L1 weight, and (for weighted_ls) Sigma."""

    kind: str = "least_squares"
    lam: float = 0.0
    sigma: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}; expected one of {LOSS_KINDS}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.kind == "weighted_ls" and self.sigma is None:
            raise ValueError("weighted_ls requires a sigma matrix")


@dataclass(frozen=True)
class LossEval:
    """Smooth value + gradient at W, with the L1 term reported separately."""

    value: float
    gradient: np.ndarray
    l1_value: float

    def objective(self, lam: float) -> float:
        return self.value + lam * self.l1_value


def _as_samples(X) -> np.ndarray:
    return X.samples if isinstance(X, Dataset) else np.asarray(X, dtype=np.float64)


def _check_pair(W, X) -> tuple[np.ndarray, np.ndarray]:
    W = np.asarray(W, dtype=np.float64)
    Xs = _as_samples(X)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"W must be square, got shape {W.shape}")
    if Xs.ndim != 2 or Xs.shape[1] != W.shape[0]:
        raise ValueError(f"dimension mismatch: X is {Xs.shape}, W is {W.shape}")
    return W, Xs


def least_squares(W, X) -> LossEval:
    """Half mean squared residual; gradient is -X^T (X - XW) / n."""
    W, Xs = _check_pair(W, X)
    n = Xs.shape[0]
    R = Xs - Xs @ W
    value = 0.5 / n * float((R * R).sum())
    grad = -(Xs.T @ R) / n
    return LossEval(value=value, gradient=grad, l1_value=float(np.abs(W).sum()))


def _logdet_terms(W: np.ndarray) -> tuple[float, np.ndarray]:
    """log|det(I - W)| and the gradient of its negation, via pivoted LU.

    Raises LossDomainError when the reciprocal condition estimate of I - W
    falls below 1e-14.
    """
    d = W.shape[0]
    A = np.eye(d) - W
    anorm = np.linalg.norm(A, 1)
    with warnings.catch_warnings():
        # an exactly singular factorization is rejected below via rcond;
        # scipy's advisory warning about it is just noise here
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    rcond, _ = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    if not np.isfinite(rcond) or rcond < _RCOND_MIN:
        raise LossDomainError(f"I - W is singular (rcond ~ {rcond:.2e})")
    logabsdet = float(np.log(np.abs(np.diag(lu))).sum())
    Ainv = scipy.linalg.lu_solve((lu, piv), np.eye(d), check_finite=False)
    # d/dW log|det(I - W)| = -(I - W)^{-T}; the scores subtract the log-det
    return logabsdet, Ainv.T


def golem_ev(W, X) -> LossEval:
    W, Xs = _check_pair(W, X)
    d = W.shape[1]
    R = Xs - Xs @ W
    total = float((R * R).sum())
    if total == 0.0:
        raise LossDomainError("zero residual matrix")
    logabsdet, neg_logdet_grad = _logdet_terms(W)
    value = 0.5 * d * np.log(total) - logabsdet
    grad = -d * (Xs.T @ R) / total + neg_logdet_grad
    return LossEval(value=value, gradient=grad, l1_value=float(np.abs(W).sum()))


def golem_nv(W, X) -> LossEval:
    W, Xs = _check_pair(W, X)
    R = Xs - Xs @ W
    col_sq = (R * R).sum(axis=0)
    if np.any(col_sq == 0.0):
        j = int(np.flatnonzero(col_sq == 0.0)[0])
        raise LossDomainError(f"zero residual in column {j}")
    logabsdet, neg_logdet_grad = _logdet_terms(W)
    value = 0.5 * float(np.log(col_sq).sum()) - logabsdet
    grad = -(Xs.T @ R) / col_sq + neg_logdet_grad
    return LossEval(value=value, gradient=grad, l1_value=float(np.abs(W).sum()))


def _precision(sigma: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive-definite Sigma via eigendecomposition."""
    S = np.asarray(sigma, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"sigma must be square, got shape {S.shape}")
    scale = max(float(np.abs(S).max()), 1.0)
    if not np.allclose(S, S.T, atol=1e-10 * scale):
        raise LossDomainError("sigma must be symmetric")
    eigvals, eigvecs = np.linalg.eigh(S)
    if eigvals.min() < _SIGMA_EIG_MIN:
        raise LossDomainError(
            f"sigma is not positive-definite (min eigenvalue {eigvals.min():.3e})"
        )
    return (eigvecs / eigvals) @ eigvecs.T


def weighted_ls(W, X, sigma) -> LossEval:
    """Least squares whitened by Sigma^{-1/2}; Sigma = I recovers least_squares."""
    P = _precision(sigma)
    return _weighted_ls_with_precision(W, X, P)


def _weighted_ls_with_precision(W, X, P: np.ndarray) -> LossEval:
    W, Xs = _check_pair(W, X)
    if P.shape != W.shape:
        raise ValueError(f"sigma is {P.shape}, W is {W.shape}")
    n = Xs.shape[0]
    R = Xs - Xs @ W
    value = 0.5 / n * float(np.einsum("ni,ij,nj->", R, P, R))
    grad = -(Xs.T @ R @ P) / n
    return LossEval(value=value, gradient=grad, l1_value=float(np.abs(W).sum()))


def l1_norm_and_split(W) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Sum of |W_ij| plus the nonnegative split W = plus - minus.

    The split is what the box-constrained solver optimizes over: with both
    parts constrained to be >= 0 the L1 term becomes the plain sum of all
    entries, which is linear.
    """
    W = np.asarray(W, dtype=np.float64)
    plus = np.maximum(W, 0.0)
    minus = np.maximum(-W, 0.0)
    return float(np.abs(W).sum()), (plus, minus)


def combine_split(plus: np.ndarray, minus: np.ndarray) -> np.ndarray:
    return np.asarray(plus, dtype=np.float64) - np.asarray(minus, dtype=np.float64)


def bind_loss(spec: LossSpec, X) -> Callable[[np.ndarray], LossEval]:
    """Close a LossSpec over a dataset, returning W -> LossEval."""
    Xs = _as_samples(X)
    if spec.kind == "least_squares":
        return lambda W: least_squares(W, Xs)
    if spec.kind == "golem_ev":
        return lambda W: golem_ev(W, Xs)
    if spec.kind == "golem_nv":
        return lambda W: golem_nv(W, Xs)
    P = _precision(spec.sigma)
    return lambda W: _weighted_ls_with_precision(W, Xs, P)
