"""DAG container, random DAG generators and topological utilities."""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, CycleError, DataError


@dataclass(frozen=True, eq=False)
class Dag:
    """Directed acyclic graph over ``d`` nodes.

    ``adj[i, j] == 1`` encodes the edge ``i -> j``. The adjacency array is
    stored read-only; use :meth:`with_edges` or build a new instance to change it.
    """

    adj: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adj, dtype=np.int8, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise DataError(f"adjacency must be square, got shape {adj.shape}")
        if not np.isin(adj, (0, 1)).all():
            raise DataError("adjacency entries must be 0 or 1")
        if np.any(np.diag(adj)):
            raise CycleError("self-loop present", int(np.flatnonzero(np.diag(adj))[0]))
        adj.setflags(write=False)
        object.__setattr__(self, "adj", adj)
        # raises CycleError on cyclic input
        topological_sort(self)

    @classmethod
    def empty(cls, d: int) -> Dag:
        return cls(np.zeros((d, d), dtype=np.int8))

    @classmethod
    def from_edges(cls, d: int, edges) -> Dag:
        adj = np.zeros((d, d), dtype=np.int8)
        for i, j in edges:
            if not (0 <= i < d and 0 <= j < d):
                raise DataError(f"edge ({i}, {j}) out of range for d={d}")
            adj[i, j] = 1
        return cls(adj)

    @property
    def d(self) -> int:
        return self.adj.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adj.sum())

    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adj))]

    def parents(self, j: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.adj[:, j])]

    def children(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.adj[i])]

    def leaves(self) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.adj.sum(axis=1) == 0)]

    def subgraph(self, nodes) -> Dag:
        """Induced subgraph on ``nodes``, relabelled 0..len(nodes)-1 in the given order."""
        idx = np.asarray(list(nodes), dtype=int)
        return Dag(self.adj[np.ix_(idx, idx)])

    def is_subgraph_of(self, other: Dag) -> bool:
        return bool(np.all(self.adj <= other.adj))

    def __eq__(self, other):
        return isinstance(other, Dag) and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash(self.adj.tobytes())

    def __repr__(self):
        return f"Dag(d={self.d}, edges={self.edges()})"

    def to_dict(self) -> dict:
        return {"d": self.d, "edges": [list(e) for e in sorted(self.edges())]}

    @classmethod
    def from_dict(cls, obj: dict) -> Dag:
        try:
            d = int(obj["d"])
            edges = [(int(i), int(j)) for i, j in obj["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed graph object: {exc}") from exc
        return cls.from_edges(d, edges)


def write_graph(g: Dag, path) -> None:
    Path(path).write_text(json.dumps(g.to_dict()) + "\n")


def read_graph(path) -> Dag:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    return Dag.from_dict(obj)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_er_dag(d: int, expected_edges: int, seed=None) -> Dag:
    """Erdős–Rényi DAG: each pair is connected with a fixed probability and
    oriented along a uniformly random permutation."""
    if d < 1:
        raise ConfigError("d must be >= 1")
    if d == 1:
        return Dag.empty(1)
    n_pairs = d * (d - 1) // 2
    if expected_edges < 0 or expected_edges > n_pairs:
        raise ConfigError(
            f"expected_edges={expected_edges} not in [0, {n_pairs}] for d={d}"
        )
    p = expected_edges / n_pairs
    rng = _rng(seed)
    rank = rng.permutation(d)
    a, b = np.triu_indices(d, 1)
    coin = rng.random(n_pairs) < p
    adj = np.zeros((d, d), dtype=np.int8)
    fwd = rank[a] < rank[b]
    adj[a[coin & fwd], b[coin & fwd]] = 1
    adj[b[coin & ~fwd], a[coin & ~fwd]] = 1
    return Dag(adj)


def sample_sf_dag(d: int, m: int, seed=None) -> Dag:
    """Barabási–Albert DAG; node ``j`` attaches to ``min(m, j)`` earlier nodes
    drawn without replacement with probability proportional to degree + 1."""
    if d < 1:
        raise ConfigError("d must be >= 1")
    if d == 1:
        return Dag.empty(1)
    if not 1 <= m < d:
        raise ConfigError(f"m={m} must satisfy 1 <= m < d={d}")
    rng = _rng(seed)
    adj = np.zeros((d, d), dtype=np.int8)
    degree = np.zeros(d)
    for j in range(1, d):
        w = degree[:j] + 1.0
        targets = rng.choice(j, size=min(m, j), replace=False, p=w / w.sum())
        adj[targets, j] = 1
        degree[targets] += 1
        degree[j] += len(targets)
    return Dag(adj)


def sample_dag(kind: str, d: int, seed=None) -> Dag:
    """Benchmark graph by name: ER1, ER4, SF1 or SF4."""
    kind = kind.upper()
    if kind not in ("ER1", "ER4", "SF1", "SF4"):
        raise ConfigError(f"unknown graph kind {kind!r}")
    k = int(kind[2:])
    if kind.startswith("ER"):
        return sample_er_dag(d, k * d, seed)
    return sample_sf_dag(d, k, seed)


def topological_sort(g) -> tuple[int, ...]:
    """Kahn's algorithm, smallest available index first.

    Accepts a :class:`Dag` or a raw adjacency matrix.
    """
    adj = np.asarray(g.adj if isinstance(g, Dag) else g)
    d = adj.shape[0]
    indeg = adj.sum(axis=0).astype(int)
    heap = [i for i in range(d) if indeg[i] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        i = heapq.heappop(heap)
        out.append(i)
        for j in np.flatnonzero(adj[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, int(j))
    if len(out) < d:
        # a node still blocked that lies on a cycle: walk parents until one repeats
        blocked = set(range(d)) - set(out)
        node = min(blocked)
        seen = []
        while node not in seen:
            seen.append(node)
            node = next(int(p) for p in np.flatnonzero(adj[:, node]) if int(p) in blocked)
        raise CycleError(f"graph contains a cycle through node {node}", node)
    return tuple(out)


def validate_order(order, d: int | None = None) -> tuple[int, ...]:
    order = tuple(int(v) for v in order)
    n = len(order) if d is None else d
    if len(order) != n or sorted(order) != list(range(n)):
        raise DataError(f"order {order} is not a permutation of 0..{n - 1}")
    return order


def full_dag_from_order(order) -> Dag:
    order = validate_order(order)
    d = len(order)
    adj = np.zeros((d, d), dtype=np.int8)
    for a in range(d):
        for b in range(a + 1, d):
            adj[order[a], order[b]] = 1
    return Dag(adj)
