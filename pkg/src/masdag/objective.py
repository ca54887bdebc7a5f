"""Least-squares linear-SEM objective, its proximity-penalized variant and helpers.

All matrix norms here are Frobenius (sum of squared entries).
"""
import warnings
from dataclasses import dataclass

import numpy as np


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Dataset:
    """Samples ``X`` (n x d) with the Gram matrix ``X.T @ X`` computed once."""

    X: np.ndarray
    gram: np.ndarray
    n: int

    @classmethod
    def from_samples(cls, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise ValueError(f"X must be a non-empty n x d matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        gram = X.T @ X
        gram = (gram + gram.T) / 2  # exact symmetry
        return cls(X, gram, X.shape[0])

    @property
    def d(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class PenaltyContext:
    lambda1: float
    lambda2: float
    anchor: np.ndarray

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambda1 and lambda2 must be nonnegative")


def _check_dims(data, W):
    W = np.asarray(W, dtype=np.float64)
    if W.shape != (data.d, data.d):
        raise ValueError(f"W has shape {W.shape}, expected {(data.d, data.d)}")
    return W


def sem_loss(data, W, use_gram=True):
    """(1/2n) ||XW - X||^2.

    The Gram path evaluates ``tr((W-I)^T G (W-I)) / 2n`` and never touches X.
    """
    W = _check_dims(data, W)
    if use_gram:
        D = W - np.eye(data.d)
        return float(np.sum(D * (data.gram @ D)) / (2 * data.n))
    R = data.X @ W - data.X
    return float(np.sum(R * R) / (2 * data.n))


def _loss_from_product(data, D, GD):
    return float(np.sum(D * GD) / (2 * data.n))


def full_objective(data, W, lambda1):
    """sem_loss + lambda1 * ||W||_1."""
    if lambda1 < 0:
        raise ValueError("lambda1 must be nonnegative")
    W = _check_dims(data, W)
    return sem_loss(data, W) + lambda1 * float(np.abs(W).sum())


def penalized_gradient(data, W, ctx):
    """Gradient of the smooth part: (1/n) G (W - I) + lambda2 (W - anchor)."""
    W = _check_dims(data, W)
    grad = data.gram @ (W - np.eye(data.d)) / data.n
    if ctx.lambda2:
        grad += ctx.lambda2 * (W - ctx.anchor)
    return grad


def penalized_objective(data, W, ctx):
    """phi_k(W) = sem_loss + lambda2/2 ||W - anchor||^2 + lambda1 ||W||_1."""
    W = _check_dims(data, W)
    diff = W - ctx.anchor
    return full_objective(data, W, ctx.lambda1) + 0.5 * ctx.lambda2 * float(np.sum(diff * diff))


def spectral_norm_psd(A, rtol=1e-6, max_iter=1000):
    """Largest eigenvalue of a symmetric PSD matrix by power iteration from the all-ones vector."""
    A = np.asarray(A, dtype=np.float64)
    v = np.ones(A.shape[0]) / np.sqrt(A.shape[0])
    est = 0.0
    for _ in range(max_iter):
        w = A @ v
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - est) <= rtol * new:
            return new
        est = new
    warnings.warn(
        f"power iteration did not converge in {max_iter} iterations; last estimate {est:.6g}",
        ConvergenceWarning,
        stacklevel=2,
    )
    return est


def lipschitz_bound(data, lambda2, safety=1.01):
    """(1/n) ||G + n lambda2 I||_2, inflated by ``safety``."""
    if lambda2 < 0:
        raise ValueError("lambda2 must be nonnegative")
    shifted = data.gram + data.n * lambda2 * np.eye(data.d)
    return safety * spectral_norm_psd(shifted) / data.n


def soft_threshold(W, tau):
    """Entrywise L1 prox; the diagonal is forced to zero."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    W = np.asarray(W, dtype=np.float64)
    out = np.sign(W) * np.maximum(np.abs(W) - tau, 0.0)
    np.fill_diagonal(out, 0.0)
    return out
