"""RBF kernel quantities used by the Stein estimators.

The fused aggregate routine runs in the compiled ``_core`` extension when it
is importable and falls back to a vectorised numpy implementation otherwise.
Set ``SCORE_DAG_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from .errors import ConfigError, DegenerateDataError

try:
    if os.environ.get("SCORE_DAG_PURE"):
        raise ImportError("compiled core disabled by SCORE_DAG_PURE")
    from . import _core
except ImportError:
    _core = None

BACKEND = "compiled" if _core is not None else "numpy"


def _as_data(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ConfigError(f"data must be 2-D, got shape {X.shape}")
    return X


def _centered(X: np.ndarray) -> np.ndarray:
    # every quantity here depends on differences only; centering keeps the
    # expanded-form distances free of cancellation for offset data
    return np.ascontiguousarray(X - X.mean(axis=0))


def _check_bandwidth(s: float) -> float:
    s = float(s)
    if not np.isfinite(s) or s <= 0:
        raise ConfigError(f"bandwidth must be positive and finite, got {s}")
    return s


def _sq_dists_numpy(X: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", X, X)
    D = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D


def pairwise_distances(X, backend: str | None = None) -> np.ndarray:
    """Condensed Euclidean distances over pairs ``i < k``."""
    X = _centered(_as_data(X))
    if (backend or BACKEND) == "compiled" and _core is not None:
        return np.sqrt(_core.pairwise_sq_dists(X))
    iu = np.triu_indices(X.shape[0], 1)
    return np.sqrt(_sq_dists_numpy(X)[iu])


def median_bandwidth(X, backend: str | None = None) -> float:
    """Median heuristic: median Euclidean distance over distinct-index row pairs."""
    X = _as_data(X)
    if X.shape[0] < 2:
        raise ConfigError("median heuristic needs at least two rows")
    s = float(np.median(pairwise_distances(X, backend)))
    if not s > 0:
        raise DegenerateDataError(
            "median pairwise distance is zero; data has no spread"
        )
    return s


def gram(X, s: float) -> np.ndarray:
    """RBF Gram matrix ``exp(-||x_i - x_k||^2 / (2 s^2))``."""
    s = _check_bandwidth(s)
    X = _centered(_as_data(X))
    return np.exp(-_sq_dists_numpy(X) / (2.0 * s * s))


def _aggregates_numpy(X: np.ndarray, s: float):
    inv2 = 1.0 / (s * s)
    K = np.exp(-0.5 * inv2 * _sq_dists_numpy(X))
    rs = K.sum(axis=1)[:, None]
    KX = K @ X
    KX2 = K @ (X * X)
    grad = (rs * X - KX) * inv2
    quad = rs * X * X - 2.0 * X * KX + KX2
    hess = quad * inv2 * inv2 - rs * inv2
    return K, grad, hess


def rbf_aggregates(X, s: float, backend: str | None = None):
    """Gram matrix together with both derivative aggregates, in one pass.

    Returns ``(K, grad_sum, diag_hess_sum)``; see :func:`grad_k_sum` and
    :func:`diag_hess_k_sum` for the definitions of the last two.
    """
    s = _check_bandwidth(s)
    X = _centered(_as_data(X))
    if (backend or BACKEND) == "compiled":
        if _core is None:
            raise ConfigError("compiled backend requested but score_dag._core is not built")
        return _core.rbf_aggregates(X, s)
    if backend not in (None, "numpy", "compiled"):
        raise ConfigError(f"unknown backend {backend!r}")
    return _aggregates_numpy(X, s)


def grad_k_sum(X, s: float, backend: str | None = None) -> np.ndarray:
    """``out[i, j] = sum_k d kappa(x^i, x^k) / d x^k_j = sum_k K[i, k] (x^i_j - x^k_j) / s^2``."""
    return rbf_aggregates(X, s, backend)[1]


def diag_hess_k_sum(X, s: float, backend: str | None = None) -> np.ndarray:
    """``out[i, j] = sum_k K[i, k] ((x^i_j - x^k_j)^2 / s^4 - 1 / s^2)``."""
    return rbf_aggregates(X, s, backend)[2]
