"""Causal order search by repeated leaf removal, plus the variance-sorting baseline."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateDataError
from .kernel import _as_data, median_bandwidth
from .stein import DEFAULT_ETA, jacobian_diag_with_bandwidth


@dataclass
class OrderStep:
    remaining: tuple[int, ...]
    variances: np.ndarray
    leaf: int
    bandwidth: float | None
    leaf_mean: float

    def to_dict(self) -> dict:
        return {
            "remaining": list(self.remaining),
            "variances": [float(v) for v in self.variances],
            "leaf": self.leaf,
            "bandwidth": self.bandwidth,
            "leaf_mean": self.leaf_mean,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> OrderStep:
        return cls(tuple(obj["remaining"]), np.asarray(obj["variances"], dtype=float),
                   int(obj["leaf"]), obj["bandwidth"], float(obj["leaf_mean"]))


@dataclass
class OrderTrace:
    """Sources-first order plus one record per removal step."""

    order: tuple[int, ...]
    steps: list[OrderStep] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"order": list(self.order), "steps": [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, obj: dict) -> OrderTrace:
        return cls(tuple(obj["order"]), [OrderStep.from_dict(s) for s in obj.get("steps", [])])

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")


def read_order(path) -> tuple[int, ...]:
    """Order from a trace JSON, an ``{"order": [...]}`` object or a bare list."""
    obj = json.loads(Path(path).read_text())
    if isinstance(obj, dict):
        obj = obj["order"]
    return tuple(int(v) for v in obj)


def stein_jacobian(eta: float = DEFAULT_ETA):
    """Default per-step estimator: Stein Jacobian diagonal with a bandwidth
    recomputed on the surviving columns."""

    def estimate(X_sub, remaining):
        s = median_bandwidth(X_sub)
        return jacobian_diag_with_bandwidth(X_sub, s, eta), s

    return estimate


def score_order(X, eta: float = DEFAULT_ETA, jacobian=None) -> OrderTrace:
    """Estimate a topological order by peeling off one leaf per step.

    At every step the diagonal of the score Jacobian is estimated on the
    surviving columns and the column whose estimate varies least across samples
    is taken to be a leaf. ``jacobian(X_sub, remaining) -> (J, bandwidth)`` can
    replace the Stein estimator, e.g. with an exact oracle.
    """
    X = _as_data(X)
    d = X.shape[1]
    estimate = jacobian or stein_jacobian(eta)
    remaining = list(range(d))
    reversed_order = []
    steps = []
    for t in range(d):
        X_sub = X[:, remaining]
        try:
            J, s = estimate(X_sub, tuple(remaining))
        except DegenerateDataError as exc:
            raise DegenerateDataError(f"step {t}: {exc}") from exc
        V = np.var(J, axis=0, ddof=1) if J.shape[0] > 1 else np.zeros(J.shape[1])
        # argmin returns the first minimum, and remaining is sorted by node id
        pos = int(np.argmin(V))
        leaf = remaining[pos]
        steps.append(OrderStep(tuple(remaining), V, leaf, s, float(J[:, pos].mean())))
        reversed_order.append(leaf)
        del remaining[pos]
    return OrderTrace(tuple(reversed(reversed_order)), steps)


def var_sort_order(X) -> tuple[int, ...]:
    """Nodes by increasing marginal sample variance, ties by node id."""
    X = _as_data(X)
    v = np.var(X, axis=0, ddof=1) if X.shape[0] > 1 else np.zeros(X.shape[1])
    return tuple(int(i) for i in np.argsort(v, kind="stable"))
