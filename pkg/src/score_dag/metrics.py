"""Structure recovery metrics: SHD, SID and topological order divergence."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .graph import Dag, validate_order


@dataclass(frozen=True)
class MetricReport:
    shd: int
    sid: int
    d_top: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> MetricReport:
        d_top = obj.get("d_top")
        return cls(int(obj["shd"]), int(obj["sid"]), None if d_top is None else int(d_top))

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")


def _check_same_d(a: Dag, b: Dag) -> None:
    if a.d != b.d:
        raise DataError(f"node count mismatch: {a.d} vs {b.d}")


def shd(true_g: Dag, est_g: Dag) -> int:
    """Structural Hamming distance; a reversed edge counts once."""
    _check_same_d(true_g, est_g)
    a = true_g.adj.astype(bool)
    b = est_g.adj.astype(bool)
    skel_a = a | a.T
    skel_b = b | b.T
    # both DAGs, so a connected pair has exactly one orientation in each graph
    diff = (skel_a != skel_b) | (skel_a & skel_b & (a != b))
    return int(np.triu(diff, 1).sum())


def d_top(order, true_g: Dag) -> int:
    """Number of true edges ``i -> j`` for which ``j`` comes before ``i`` in ``order``."""
    order = validate_order(order, true_g.d)
    pos = np.empty(true_g.d, dtype=int)
    pos[list(order)] = np.arange(true_g.d)
    i, j = np.nonzero(true_g.adj)
    return int(np.sum(pos[j] < pos[i]))


def _bit_lists(adj: np.ndarray):
    d = adj.shape[0]
    parents = [[int(p) for p in np.flatnonzero(adj[:, v])] for v in range(d)]
    children = [[int(c) for c in np.flatnonzero(adj[v])] for v in range(d)]
    return parents, children


def _closure(nbrs, d: int) -> list[int]:
    """Per-node reflexive reachability bitmask along ``nbrs``."""
    out = [0] * d
    for v in range(d):
        seen = 1 << v
        stack = [v]
        while stack:
            u = stack.pop()
            for w in nbrs[u]:
                if not seen >> w & 1:
                    seen |= 1 << w
                    stack.append(w)
        out[v] = seen
    return out


def _d_connected(source: int, target: int, zmask: int, parents, children, anc_z: int,
                 cut: int) -> bool:
    """Reachability ("Bayes ball") test for an active path source ~ target given Z.

    Edges ``source -> c`` with ``c`` in the ``cut`` bitmask are treated as absent.
    """
    # state: (node, came_from_child)
    seen = set()
    queue = deque([(source, True)])
    while queue:
        v, up = queue.popleft()
        if (v, up) in seen:
            continue
        seen.add((v, up))
        in_z = zmask >> v & 1
        if v == target and not in_z:
            return True
        if up:
            if in_z:
                continue
            for p in parents[v]:
                if p == source and cut >> v & 1:
                    continue
                queue.append((p, True))
            for c in children[v]:
                if v == source and cut >> c & 1:
                    continue
                queue.append((c, False))
        else:
            if not in_z:
                for c in children[v]:
                    if v == source and cut >> c & 1:
                        continue
                    queue.append((c, False))
            if anc_z >> v & 1:
                for p in parents[v]:
                    if p == source and cut >> v & 1:
                        continue
                    queue.append((p, True))
    return False


def adjustment_is_valid(true_g: Dag, i: int, j: int, z) -> bool:
    """Whether adjusting for ``z`` gives the correct ``p(x_j | do(x_i))`` in ``true_g``.

    ``j`` inside ``z`` means the adjustment formula collapses to ``p(x_j)``, which is
    correct iff ``j`` is not a descendant of ``i``.
    """
    parents, children = _bit_lists(true_g.adj)
    desc = _closure(children, true_g.d)
    anc = _closure(parents, true_g.d)
    zmask = 0
    for v in z:
        zmask |= 1 << int(v)
    return _valid(i, j, zmask, parents, children, desc, anc)


def _valid(i, j, zmask, parents, children, desc, anc) -> bool:
    j_desc_of_i = bool(desc[i] >> j & 1)
    if zmask >> j & 1:
        return not j_desc_of_i
    if zmask >> i & 1:
        raise DataError("adjustment set must not contain the treatment")
    # nodes other than i on directed paths i -> ... -> j
    on_path = (desc[i] & anc[j]) & ~(1 << i)
    forb = 0
    w = on_path
    while w:
        low = w & -w
        forb |= desc[low.bit_length() - 1]
        w ^= low
    if zmask & forb:
        return False
    anc_z = 0
    w = zmask
    while w:
        low = w & -w
        anc_z |= anc[low.bit_length() - 1]
        w ^= low
    return not _d_connected(i, j, zmask, parents, children, anc_z, on_path)


def sid(true_g: Dag, est_g: Dag) -> int:
    """Structural intervention distance.

    Counts ordered pairs ``(i, j)`` for which adjusting for the parents of ``i`` in
    ``est_g`` does not yield the interventional distribution implied by ``true_g``.
    """
    _check_same_d(true_g, est_g)
    d = true_g.d
    parents, children = _bit_lists(true_g.adj)
    desc = _closure(children, d)
    anc = _closure(parents, d)
    wrong = 0
    for i in range(d):
        zmask = 0
        for p in est_g.parents(i):
            zmask |= 1 << p
        for j in range(d):
            if j != i and not _valid(i, j, zmask, parents, children, desc, anc):
                wrong += 1
    return wrong


def evaluate(true_g: Dag, est_g: Dag, order=None) -> MetricReport:
    return MetricReport(
        shd=shd(true_g, est_g),
        sid=sid(true_g, est_g),
        d_top=None if order is None else d_top(order, true_g),
    )
