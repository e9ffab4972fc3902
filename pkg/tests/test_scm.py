import json

import numpy as np
import pytest

from score_dag import scm
from score_dag.errors import ConfigError, DataError, NumericalError
from score_dag.graph import Dag, sample_er_dag, topological_sort


def sin_chain(var0=1.0, var1=0.4, noise="gaussian"):
    """0 -> 1 with f(x) = sin(2x)."""
    z = np.zeros((2, 2))
    a, b, e = z.copy(), z.copy(), z.copy()
    a[0, 1], b[0, 1], e[0, 1] = 1.0, 2.0, 1.0
    links = scm.LinkSpec("parametric", a=a, b=b, c=z.copy(), e=e)
    return scm.ScmModel(Dag.from_edges(2, [(0, 1)]), [var0, var1], noise, links)


def zero_links(d):
    z = np.zeros((d, d))
    return scm.LinkSpec("parametric", a=z, b=z, c=z, e=z)


def parametric_models(count=10, noise="gaussian", dmax=6):
    rng = np.random.default_rng(123)
    for _ in range(count):
        d = int(rng.integers(2, dmax + 1))
        g = sample_er_dag(d, int(rng.integers(1, d * (d - 1) // 2 + 1)), int(rng.integers(1e9)))
        yield scm.random_model(g, "parametric", noise, int(rng.integers(1e9)))


def test_isolated_nodes_have_noise_variance():
    model = scm.ScmModel(Dag.empty(3), [0.5, 0.5, 0.5])
    X = scm.sample_dataset(model, 5000, seed=1)
    se = 0.5 * np.sqrt(2 / 4999)
    assert np.all(np.abs(X.var(axis=0, ddof=1) - 0.5) < 3 * se)


def test_chain_residual_variance():
    X = scm.sample_dataset(sin_chain(), 5000, seed=2)
    r = X[:, 1] - np.sin(2 * X[:, 0])
    assert abs(r.var(ddof=1) - 0.4) < 3 * 0.4 * np.sqrt(2 / 4999)


@pytest.mark.parametrize("noise", scm.NOISE_FAMILIES)
def test_noise_families_zero_mean_with_target_variance(noise):
    model = scm.ScmModel(Dag.empty(1), [0.6], noise)
    x = scm.sample_dataset(model, 200_000, seed=3)[:, 0]
    assert abs(x.mean()) < 0.01
    assert abs(x.var() - 0.6) < 0.02


def test_single_row():
    g = sample_er_dag(5, 5, 0)
    for links in ("gp", "parametric"):
        X = scm.sample_dataset(scm.random_model(g, links, seed=1), 1, seed=2)
        assert X.shape == (1, 5) and np.all(np.isfinite(X))


def test_gp_links_nonlinear_and_finite():
    g = Dag.from_edges(2, [(0, 1)])
    model = scm.random_model(g, "gp", seed=0)
    X = scm.sample_dataset(model, 1000, seed=4)
    assert np.all(np.isfinite(X))
    # the link carries signal beyond the noise
    assert X[:, 1].var() > model.variances[1]


def test_gp_factorization_failure_names_node(monkeypatch):
    def boom(*args, **kwargs):
        raise np.linalg.LinAlgError("not PD")

    monkeypatch.setattr(scm.linalg, "cholesky", boom)
    model = scm.random_model(Dag.from_edges(3, [(0, 2)]), "gp", seed=0)
    with pytest.raises(NumericalError, match="node 2"):
        scm.sample_dataset(model, 10, seed=0)


def test_score_single_node():
    model = scm.ScmModel(Dag.empty(1), [1.0], links=zero_links(1))
    assert scm.analytic_score(model, [[2.0]])[0, 0] == -2.0


def test_score_chain_closed_form():
    model = sin_chain(1.0, 1.0)
    X = np.array([[0.3, -0.7], [1.2, 0.4]])
    S = scm.analytic_score(model, X)
    r = X[:, 1] - np.sin(2 * X[:, 0])
    np.testing.assert_allclose(S[:, 0], -X[:, 0] + 2 * np.cos(2 * X[:, 0]) * r, rtol=1e-14)
    np.testing.assert_allclose(S[:, 1], -r, rtol=1e-14)


@pytest.mark.parametrize("noise", ["gaussian", "gumbel"])
def test_score_matches_finite_differences_of_log_density(noise):
    h = 1e-6
    for model in parametric_models(10, noise):
        X = scm.sample_dataset(model, 30, seed=5)
        S = scm.analytic_score(model, X)
        fd = np.empty_like(S)
        for j in range(model.d):
            step = np.zeros(model.d)
            step[j] = h
            fd[:, j] = (scm.log_density(model, X + step) - scm.log_density(model, X - step)) / (2 * h)
        assert np.max(np.abs(S - fd) / np.maximum(np.abs(S), 1.0)) < 1e-6


def test_laplace_score_zero_residual_is_defined():
    model = sin_chain(0.5, 0.5, "laplace")
    S = scm.analytic_score(model, [[0.0, 0.0]])
    assert np.all(np.isfinite(S))
    b = np.sqrt(0.25)
    # residual exactly zero is treated as +tiny, giving slope -1/b
    assert S[0, 1] == pytest.approx(-1 / b)


def test_score_rejects_gp_links():
    model = scm.random_model(Dag.from_edges(2, [(0, 1)]), "gp", seed=0)
    with pytest.raises(ConfigError):
        scm.analytic_score(model, np.zeros((3, 2)))


def test_jacobian_diag_constant_at_leaf():
    model = sin_chain(1.0, 0.5)
    X = scm.sample_dataset(model, 200, seed=6)
    J = scm.analytic_jacobian_diag(model, X)
    assert np.all(J[:, 1] == -2.0)
    assert J[:, 0].var(ddof=1) > 0
    iso = scm.ScmModel(Dag.empty(1), [1.0], links=zero_links(1))
    assert np.all(scm.analytic_jacobian_diag(iso, np.ones((4, 1))) == -1.0)


def test_jacobian_matches_finite_differences_of_score():
    h = 1e-6
    for model in parametric_models(8):
        X = scm.sample_dataset(model, 20, seed=7)
        jac = scm.analytic_score_jacobian(model, X)
        for i in range(model.d):
            step = np.zeros(model.d)
            step[i] = h
            fd = (scm.analytic_score(model, X + step) - scm.analytic_score(model, X - step)) / (2 * h)
            assert np.max(np.abs(jac[:, :, i] - fd) / np.maximum(np.abs(fd), 1.0)) < 1e-6


def test_leaf_iff_constant_jacobian_diagonal():
    for model in parametric_models(20):
        X = scm.sample_dataset(model, 1000, seed=8)
        V = scm.analytic_jacobian_diag(model, X).var(axis=0, ddof=1)
        leaves = set(model.g.leaves())
        for j in range(model.d):
            assert (V[j] < 1e-20) == (j in leaves)


def test_leaf_parents_from_cross_derivatives():
    for model in parametric_models(20):
        X = scm.sample_dataset(model, 1000, seed=9)
        jac = scm.analytic_score_jacobian(model, X)
        for leaf in model.g.leaves():
            pa = set(model.g.parents(leaf))
            for i in range(model.d):
                if i == leaf:
                    continue
                varies = jac[:, leaf, i].var(ddof=1) > 1e-12
                assert varies == (i in pa)


def test_restrict_after_leaf_removal():
    model = next(parametric_models(1))
    leaf = model.g.leaves()[0]
    keep = [v for v in range(model.d) if v != leaf]
    sub = model.restrict(keep)
    X = scm.sample_dataset(model, 50, seed=1)
    # marginal score of the kept columns equals the sub-model score
    S = scm.analytic_score(sub, X[:, keep])
    assert S.shape == (50, model.d - 1)
    parent = model.g.edges()[0][0]
    with pytest.raises(ConfigError):
        model.restrict([v for v in range(model.d) if v != parent])


def test_benchmark_suite_er1_d10_setup():
    cfg = scm.SuiteConfig(d=10, graph="ER1", noise="gaussian", n=1000, runs=10, seed=0)
    triples = scm.benchmark_suite(cfg)
    assert len(triples) == 10
    edges = [g.n_edges for _, _, g in triples]
    assert 5 <= np.mean(edges) <= 15
    for model, X, g in triples:
        assert X.shape == (1000, 10)
        topological_sort(g)
        assert np.all((model.variances >= 0.4) & (model.variances <= 0.8))


def test_benchmark_suite_empty_and_deterministic():
    assert scm.benchmark_suite(scm.SuiteConfig(d=5, runs=0)) == []
    cfg = scm.SuiteConfig(d=5, n=200, runs=2, seed=3, noise="gumbel")
    a = scm.benchmark_suite(cfg)
    b = scm.benchmark_suite(cfg)
    for (ma, Xa, ga), (mb, Xb, gb) in zip(a, b):
        assert ga == gb
        assert np.array_equal(Xa, Xb)
        assert np.array_equal(ma.variances, mb.variances)


def test_csv_roundtrip_is_lossless(tmp_path):
    X = np.random.default_rng(0).standard_normal((50, 4)) * 1e-3
    X[0, 0] = 1 / 3
    path = tmp_path / "x.csv"
    scm.write_csv(X, path)
    assert path.read_text().splitlines()[0] == "x0,x1,x2,x3"
    assert np.array_equal(scm.read_csv(path), X)


@pytest.mark.parametrize("body, line", [
    ("x0,x1\n1,2\n3\n", 3),
    ("x0,x1\n1,2\n3,abc\n", 3),
    ("x0,x1\n1,2\n4,5\nnan,1\n", 4),
])
def test_csv_errors_name_the_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(DataError, match=f":{line}:"):
        scm.read_csv(path)


def test_model_json_reproduces_gp_data(tmp_path):
    cfg = scm.SuiteConfig(d=6, n=300, runs=1, seed=4)
    model, X, g = scm.make_run(cfg, 0)
    path = tmp_path / "model.json"
    scm.write_model(model, path)
    obj = json.loads(path.read_text())
    assert obj["links"]["kind"] == "gp" and "a" not in obj["links"]
    loaded = scm.read_model(path)
    assert loaded.g == g
    assert np.array_equal(scm.sample_dataset(loaded, 300, loaded.seed), X)


def test_parametric_model_json_roundtrip(tmp_path):
    model = next(parametric_models(1))
    path = tmp_path / "m.json"
    scm.write_model(model, path)
    loaded = scm.read_model(path)
    X = scm.sample_dataset(model, 20, seed=1)
    assert np.array_equal(scm.analytic_score(loaded, X), scm.analytic_score(model, X))
