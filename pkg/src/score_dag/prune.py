"""Edge pruning with additive spline regressions and group F-tests."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats
from scipy.interpolate import BSpline

from .errors import ConfigError
from .graph import Dag, validate_order
from .kernel import _as_data
from .order import score_order
from .stein import DEFAULT_ETA


class PruneWarning(UserWarning):
    """A covariate was dropped or a candidate set truncated during pruning."""


@dataclass(frozen=True)
class PruneConfig:
    cutoff: float = 0.001
    basis_size: int = 10
    ridge: float = 1e-8

    def __post_init__(self):
        if not 0 < self.cutoff < 1:
            raise ConfigError(f"cutoff must lie in (0, 1), got {self.cutoff}")
        if self.basis_size < 3:
            raise ConfigError("basis_size must be >= 3")
        if self.ridge < 0:
            raise ConfigError("ridge must be non-negative")


def spline_basis(x: np.ndarray, size: int) -> np.ndarray | None:
    """B-spline basis (cubic when ``size >= 4``) with interior knots at empirical
    quantiles and clamped boundary knots; None for a constant covariate.

    Tied quantiles are merged, so fewer than ``size`` columns may come back.
    """
    lo, hi = float(x.min()), float(x.max())
    if not hi > lo:
        return None
    k = min(3, size - 1)
    interior = np.quantile(x, np.linspace(0, 1, size - k + 1)[1:-1])
    interior = np.unique(interior[(interior > lo) & (interior < hi)])
    t = np.r_[[lo] * (k + 1), interior, [hi] * (k + 1)]
    return BSpline.design_matrix(x, t, k).toarray()


def _rss(A: np.ndarray, y: np.ndarray, ridge: float) -> float:
    gram = A.T @ A
    gram.flat[:: gram.shape[0] + 1] += ridge
    beta = linalg.solve(gram, A.T @ y, assume_a="pos", check_finite=False)
    r = y - A @ beta
    return float(r @ r)


def prune_node(X: np.ndarray, j: int, candidates, cfg: PruneConfig):
    """p-values for each candidate parent of ``j`` from a joint additive fit.

    Returns ``{candidate: p_value}``; dropped covariates are absent.
    """
    n = X.shape[0]
    y = X[:, j]
    blocks = {}
    for i in candidates:
        B = spline_basis(X[:, i], cfg.basis_size)
        if B is None:
            warnings.warn(f"node {j}: covariate {i} is constant, dropped", PruneWarning)
            continue
        # B-splines sum to one; drop the first column against the intercept
        blocks[i] = B[:, 1:]
    keys = []
    A = np.ones((n, 1))
    for i, B in blocks.items():
        trial = np.hstack([A, B])
        if np.linalg.matrix_rank(trial) < trial.shape[1]:
            warnings.warn(f"node {j}: covariate {i} makes the design rank deficient, dropped",
                          PruneWarning)
            continue
        A = trial
        keys.append(i)
    if not keys:
        return {}
    p_full = A.shape[1]
    df2 = n - p_full
    if df2 <= 0:
        return {i: 1.0 for i in keys}
    rss_full = _rss(A, y, cfg.ridge)
    out = {}
    col = 1
    for i in keys:
        q = blocks[i].shape[1]
        mask = np.ones(p_full, dtype=bool)
        mask[col:col + q] = False
        col += q
        rss_red = _rss(A[:, mask], y, cfg.ridge)
        F = max(rss_red - rss_full, 0.0) / q / (rss_full / df2) if rss_full > 0 else np.inf
        out[i] = float(stats.f.sf(F, q, df2))
    return out


def prune(X, order, cfg: PruneConfig | None = None) -> Dag:
    """Keep ``i -> j`` for predecessors ``i`` of ``j`` whose spline group is
    significant at ``cfg.cutoff``.

    When ``n <= basis_size * len(predecessors)`` only the most recent
    predecessors that fit are tested.
    """
    cfg = cfg or PruneConfig()
    X = _as_data(X)
    n, d = X.shape
    order = validate_order(order, d)
    adj = np.zeros((d, d), dtype=np.int8)
    max_preds = (n - 1) // cfg.basis_size
    for pos, j in enumerate(order):
        preds = list(order[:pos])
        if len(preds) > max_preds:
            warnings.warn(
                f"node {j}: {len(preds)} predecessors exceed capacity {max_preds}; "
                "keeping the most recent", PruneWarning)
            preds = preds[len(preds) - max_preds:] if max_preds > 0 else []
        if not preds:
            continue
        for i, p in prune_node(X, j, preds, cfg).items():
            if p < cfg.cutoff:
                adj[i, j] = 1
    return Dag(adj)


def discover(X, eta: float = DEFAULT_ETA, cfg: PruneConfig | None = None):
    """Full pipeline: estimate the order, then prune its full DAG.

    Returns ``(dag, trace)``.
    """
    trace = score_order(X, eta)
    return prune(X, trace.order, cfg), trace
