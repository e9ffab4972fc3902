"""Kernel Stein estimators of the score and of the diagonal of its Jacobian."""
from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import ConfigError, NumericalError
from .kernel import _as_data, median_bandwidth, rbf_aggregates

DEFAULT_ETA = 0.01


def _check(X, eta):
    X = _as_data(X)
    if X.shape[0] < 2:
        raise ConfigError("Stein estimators need n >= 2 samples")
    if not eta > 0:
        raise ConfigError(f"eta must be positive, got {eta}")
    return X


def _ridge_solve(K: np.ndarray, eta: float, rhs: np.ndarray) -> np.ndarray:
    A = K.copy()
    A.flat[:: A.shape[0] + 1] += eta
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        w = np.linalg.eigvalsh(A)
        raise NumericalError(
            f"Cholesky of K + eta*I failed (eta={eta}, eigenvalues in "
            f"[{w[0]:.3e}, {w[-1]:.3e}])"
        ) from exc
    return linalg.cho_solve(factor, rhs, check_finite=False)


def stein_gradient(X, eta: float = DEFAULT_ETA, s: float | None = None) -> np.ndarray:
    """Stein gradient estimate of ``grad log p`` at every sample, shape (n, d).

    Solves ``G = -(K + eta I)^{-1} <grad, K>`` with the RBF kernel at bandwidth
    ``s`` (median heuristic when omitted).
    """
    X = _check(X, eta)
    if s is None:
        s = median_bandwidth(X)
    K, grad, _ = rbf_aggregates(X, s)
    return -_ridge_solve(K, eta, grad)


def jacobian_diag_with_bandwidth(X, s: float, eta: float = DEFAULT_ETA) -> np.ndarray:
    """Stein estimate of ``d^2 log p / d x_j^2`` at every sample, for a given bandwidth.

    One Cholesky factor of ``K + eta I`` serves both the gradient and the
    second-order solve.
    """
    X = _check(X, eta)
    K, grad, hess = rbf_aggregates(X, s)
    d = X.shape[1]
    sol = _ridge_solve(K, eta, np.hstack([grad, hess]))
    G = -sol[:, :d]
    return sol[:, d:] - G * G


def stein_hessian_diag(X, eta: float = DEFAULT_ETA) -> np.ndarray:
    """Stein Jacobian-diagonal estimate with the median-heuristic bandwidth."""
    X = _check(X, eta)
    return jacobian_diag_with_bandwidth(X, median_bandwidth(X), eta)
