import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from score_dag.errors import DataError
from score_dag.graph import Dag, full_dag_from_order, sample_er_dag, topological_sort
from score_dag.metrics import MetricReport, adjustment_is_valid, d_top, evaluate, shd, sid

from . import oracles

CHAIN = Dag.from_edges(3, [(0, 1), (1, 2)])


def test_shd_examples():
    assert shd(CHAIN, CHAIN) == 0
    assert shd(Dag.from_edges(2, [(0, 1)]), Dag.from_edges(2, [(1, 0)])) == 1
    assert shd(CHAIN, Dag.from_edges(3, [(0, 1), (0, 2)])) == 2


def test_shd_dimension_mismatch():
    with pytest.raises(DataError):
        shd(Dag.empty(2), Dag.empty(3))


@settings(max_examples=100, deadline=None)
@given(d=st.integers(2, 10), s1=st.integers(0, 10**6), s2=st.integers(0, 10**6))
def test_shd_symmetric_and_zero_iff_equal(d, s1, s2):
    a = sample_er_dag(d, d - 1, s1)
    b = sample_er_dag(d, d - 1, s2)
    assert shd(a, b) == shd(b, a)
    assert (shd(a, b) == 0) == (a == b)


def test_d_top_examples():
    assert d_top((0, 1, 2), CHAIN) == 0
    assert d_top((1, 0, 2), CHAIN) == 1
    order = (3, 0, 4, 1, 2)
    full = full_dag_from_order(order)
    assert d_top(order[::-1], full) == 10


def test_d_top_rejects_bad_order():
    with pytest.raises(DataError):
        d_top((0, 0, 1), CHAIN)


@settings(max_examples=100, deadline=None)
@given(d=st.integers(1, 12), seed=st.integers(0, 10**6), perm_seed=st.integers(0, 10**6))
def test_d_top_bounds(d, seed, perm_seed):
    g = sample_er_dag(d, min(d, d * (d - 1) // 2), seed)
    assert d_top(topological_sort(g), g) == 0
    perm = tuple(np.random.default_rng(perm_seed).permutation(d))
    assert 0 <= d_top(perm, g) <= g.n_edges


def test_sid_examples():
    assert sid(CHAIN, CHAIN) == 0
    assert sid(CHAIN, Dag.empty(3)) == 3
    assert oracles.sid_bruteforce(CHAIN.adj, np.zeros((3, 3))) == 3
    rev = sid(Dag.from_edges(2, [(0, 1)]), Dag.from_edges(2, [(1, 0)]))
    assert rev >= 1
    assert rev == oracles.sid_bruteforce([[0, 1], [0, 0]], [[0, 0], [1, 0]])


@settings(max_examples=100, deadline=None)
@given(d=st.integers(1, 15), seed=st.integers(0, 10**6))
def test_sid_self_is_zero(d, seed):
    g = sample_er_dag(d, min(2 * d, d * (d - 1) // 2), seed)
    assert sid(g, g) == 0


def test_adjustment_matches_oracles_exhaustive_d3():
    for adj in oracles.all_dags(3):
        g = Dag(adj)
        for i, j in itertools.permutations(range(3), 2):
            others = [v for v in range(3) if v != i]
            for r in range(3):
                for z in itertools.combinations(others, r):
                    expect = oracles.adjustment_valid_bruteforce(adj, i, j, set(z))
                    assert adjustment_is_valid(g, i, j, z) == expect
                    assert oracles.adjustment_valid_linear_gaussian(adj, i, j, z) == expect


def test_sid_matches_bruteforce_random_d6():
    rng = np.random.default_rng(11)
    for _ in range(40):
        d = int(rng.integers(2, 7))
        a = sample_er_dag(d, int(rng.integers(0, d * (d - 1) // 2 + 1)), int(rng.integers(1e9)))
        b = sample_er_dag(d, int(rng.integers(0, d * (d - 1) // 2 + 1)), int(rng.integers(1e9)))
        assert sid(a, b) == oracles.sid_bruteforce(a.adj, b.adj)


def test_metric_report_json():
    rep = evaluate(CHAIN, CHAIN)
    assert rep.to_dict() == {"shd": 0, "sid": 0, "d_top": None}
    assert MetricReport.from_dict(evaluate(CHAIN, CHAIN, (0, 1, 2)).to_dict()).d_top == 0
