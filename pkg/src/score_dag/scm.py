"""Synthetic additive noise models and their closed-form scores.

Each variable is generated as ``x_i = f_i(parents) + e_i``. Link functions are
either joint Gaussian-process draws (the benchmark default) or a parametric
sum of ``a sin(b x) + c tanh(e x)`` terms whose derivatives are available in
closed form, which makes the exact score usable as a test oracle.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg

from .errors import ConfigError, DataError, NumericalError
from .graph import Dag, sample_dag, topological_sort

NOISE_FAMILIES = ("gaussian", "laplace", "gumbel")
LINK_KINDS = ("gp", "parametric")
EULER_GAMMA = 0.5772156649015329
# a Laplace residual of exactly zero is treated as +tiny so the score stays defined
_LAPLACE_ZERO_SIGN = 1.0


@dataclass(frozen=True, eq=False)
class LinkSpec:
    """How the link functions are produced.

    For ``kind="parametric"`` the four ``d x d`` arrays hold the coefficients of
    ``a sin(b x_p) + c tanh(e x_p)`` for each edge ``p -> child`` (zero elsewhere).
    """

    kind: str = "gp"
    bandwidth: float = 1.0
    jitter: float = 1e-6
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    c: np.ndarray | None = None
    e: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in LINK_KINDS:
            raise ConfigError(f"unknown link kind {self.kind!r}")
        if self.kind == "parametric" and any(
            v is None for v in (self.a, self.b, self.c, self.e)
        ):
            raise ConfigError("parametric links need coefficient arrays a, b, c, e")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "gp":
            out.update(bandwidth=self.bandwidth, jitter=self.jitter)
        else:
            out.update({k: np.asarray(getattr(self, k)).tolist() for k in "abce"})
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> LinkSpec:
        if obj.get("kind") == "parametric":
            return cls("parametric", **{k: np.asarray(obj[k], dtype=float) for k in "abce"})
        return cls(
            obj.get("kind", "gp"),
            bandwidth=float(obj.get("bandwidth", 1.0)),
            jitter=float(obj.get("jitter", 1e-6)),
        )


@dataclass(frozen=True, eq=False)
class ScmModel:
    g: Dag
    variances: np.ndarray
    noise: str = "gaussian"
    links: LinkSpec = field(default_factory=LinkSpec)
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        if v.shape != (self.g.d,):
            raise ConfigError(f"need {self.g.d} noise variances, got shape {v.shape}")
        if not np.all((v > 0) & np.isfinite(v)):
            raise ConfigError("noise variances must be positive and finite")
        if self.noise not in NOISE_FAMILIES:
            raise ConfigError(f"unknown noise family {self.noise!r}")
        object.__setattr__(self, "variances", v)

    @property
    def d(self) -> int:
        return self.g.d

    def restrict(self, nodes) -> ScmModel:
        """Model of the marginal over ``nodes`` (relabelled in the given order).

        Valid only when no kept node has a dropped parent, e.g. after removing
        leaves; the marginal of such a set is the same additive model.
        """
        idx = list(nodes)
        keep = set(idx)
        for j in idx:
            missing = set(self.g.parents(j)) - keep
            if missing:
                raise ConfigError(f"node {j} loses parents {sorted(missing)}")
        links = self.links
        if links.kind == "parametric":
            sub = np.ix_(idx, idx)
            links = LinkSpec("parametric", a=links.a[sub], b=links.b[sub],
                             c=links.c[sub], e=links.e[sub])
        return ScmModel(self.g.subgraph(idx), self.variances[idx], self.noise, links,
                        self.seed)

    def to_dict(self) -> dict:
        return {
            "graph": self.g.to_dict(),
            "noise": {"family": self.noise, "variances": self.variances.tolist()},
            "links": self.links.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> ScmModel:
        try:
            return cls(
                Dag.from_dict(obj["graph"]),
                np.asarray(obj["noise"]["variances"], dtype=float),
                obj["noise"]["family"],
                LinkSpec.from_dict(obj["links"]),
                obj.get("seed"),
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed model object: {exc}") from exc


def random_model(g: Dag, links: str = "gp", noise: str = "gaussian", seed=None,
                 var_range=(0.4, 0.8), data_seed: int | None = None) -> ScmModel:
    """Draw noise variances uniformly in ``var_range`` and, for parametric links,
    coefficients with magnitudes in [0.5, 2] (random signs on the amplitudes)."""
    rng = np.random.default_rng(seed)
    variances = rng.uniform(*var_range, size=g.d)
    if links == "gp":
        spec = LinkSpec("gp")
    elif links == "parametric":
        mask = g.adj.astype(float)
        coef = {}
        for name in "abce":
            vals = rng.uniform(0.5, 2.0, size=(g.d, g.d))
            if name in "ac":
                vals *= rng.choice([-1.0, 1.0], size=(g.d, g.d))
            coef[name] = vals * mask
        spec = LinkSpec("parametric", **coef)
    else:
        raise ConfigError(f"unknown link kind {links!r}")
    return ScmModel(g, variances, noise, spec, data_seed)


def _link_terms(links: LinkSpec, X: np.ndarray):
    """Per-edge value, first and second derivative arrays of shape (n, d, d):
    entry ``[k, p, c]`` is the ``p``-term of ``f_c`` at row ``k``."""
    x = X[:, :, None]
    a, b, c, e = links.a, links.b, links.c, links.e
    sb, cb = np.sin(b * x), np.cos(b * x)
    th = np.tanh(e * x)
    sech2 = 1.0 - th * th
    val = a * sb + c * th
    d1 = a * b * cb + c * e * sech2
    d2 = -a * b * b * sb - 2.0 * c * e * e * th * sech2
    return val, d1, d2


def link_values(model: ScmModel, X: np.ndarray) -> np.ndarray:
    """``f_i(pa_i(x))`` for each row, parametric links only."""
    if model.links.kind != "parametric":
        raise ConfigError("GP links have no closed form; only parametric links can be evaluated")
    val, _, _ = _link_terms(model.links, np.asarray(X, dtype=float))
    return val.sum(axis=1)


def _rbf_cov(P: np.ndarray, bandwidth: float) -> np.ndarray:
    sq = np.sum(P * P, axis=1)
    D = np.maximum(sq[:, None] + sq[None, :] - 2.0 * P @ P.T, 0.0)
    return np.exp(-D / (2.0 * bandwidth**2))


def _gp_draw(P: np.ndarray, links: LinkSpec, rng, node: int) -> np.ndarray:
    C = _rbf_cov(P, links.bandwidth)
    base = links.jitter * float(np.mean(np.diag(C)))
    jitter = base
    while True:
        try:
            L = linalg.cholesky(C + jitter * np.eye(len(C)), lower=True, check_finite=False)
            break
        except linalg.LinAlgError:
            jitter *= 10.0
            if jitter > 1e-2 * (1 + 1e-9):
                raise NumericalError(
                    f"GP covariance for node {node} not factorizable with jitter up to 1e-2"
                ) from None
    return L @ rng.standard_normal(len(C))


def _noise(family: str, var: float, n: int, rng) -> np.ndarray:
    sigma = math.sqrt(var)
    if family == "gaussian":
        return rng.normal(0.0, sigma, n)
    if family == "laplace":
        return rng.laplace(0.0, sigma / math.sqrt(2.0), n)
    beta = sigma * math.sqrt(6.0) / math.pi
    return rng.gumbel(-beta * EULER_GAMMA, beta, n)


def sample_dataset(model: ScmModel, n: int, seed=None) -> np.ndarray:
    """Draw an ``n x d`` sample, processing nodes in topological order."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    rng = np.random.default_rng(seed)
    X = np.zeros((n, model.d))
    for j in topological_sort(model.g):
        pa = model.g.parents(j)
        if pa:
            if model.links.kind == "gp":
                X[:, j] = _gp_draw(X[:, pa], model.links, rng, j)
            else:
                val, _, _ = _link_terms(model.links, X)
                X[:, j] = val[:, :, j].sum(axis=1)
        X[:, j] += _noise(model.noise, model.variances[j], n, rng)
    return X


def _noise_log_derivs(model: ScmModel, R: np.ndarray, second: bool):
    """First (and optionally second) derivative of each node's log noise density
    evaluated at the residuals ``R``."""
    v = model.variances
    if model.noise == "gaussian":
        phi = -R / v
        dphi = np.broadcast_to(-1.0 / v, R.shape)
    elif model.noise == "laplace":
        scale = np.sqrt(v / 2.0)
        sign = np.where(R == 0.0, _LAPLACE_ZERO_SIGN, np.sign(R))
        phi = -sign / scale
        dphi = None
    else:
        beta = np.sqrt(v) * math.sqrt(6.0) / math.pi
        z = (R + beta * EULER_GAMMA) / beta
        ez = np.exp(-z)
        phi = (ez - 1.0) / beta
        dphi = -ez / beta**2
    if second and dphi is None:
        raise ConfigError("Laplace log-density is not twice differentiable")
    return phi, dphi


def _check_oracle(model: ScmModel, X) -> np.ndarray:
    if model.links.kind != "parametric":
        raise ConfigError("analytic score needs parametric links; GP links are only known at samples")
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise DataError(f"data shape {X.shape} does not match d={model.d}")
    return X


def analytic_score(model: ScmModel, X) -> np.ndarray:
    """Exact ``grad log p`` at each row.

    ``s_j = phi_j(r_j) - sum_{c in children(j)} df_c/dx_j * phi_c(r_c)`` where
    ``r`` are the residuals and ``phi`` the derivative of the log noise density.
    """
    X = _check_oracle(model, X)
    val, d1, _ = _link_terms(model.links, X)
    R = X - val.sum(axis=1)
    phi, _ = _noise_log_derivs(model, R, second=False)
    return phi - np.einsum("kjc,kc->kj", d1, phi)


def analytic_score_jacobian(model: ScmModel, X) -> np.ndarray:
    """Exact Jacobian of the score, shape (n, d, d), entry ``[k, j, i] = d s_j / d x_i``."""
    X = _check_oracle(model, X)
    val, d1, d2 = _link_terms(model.links, X)
    R = X - val.sum(axis=1)
    phi, dphi = _noise_log_derivs(model, R, second=True)
    n, d = X.shape
    eye = np.eye(d)
    # d r_c / d x_i = delta_ci - d1[i, c]
    dr = eye[None] - d1  # [k, i, c]
    jac = np.einsum("kj,kij->kji", dphi, dr)
    jac -= eye[None] * np.einsum("kjc,kc->kj", d2, phi)[:, :, None]
    jac -= np.einsum("kjc,kc,kic->kji", d1, dphi, dr)
    return jac


def analytic_jacobian_diag(model: ScmModel, X) -> np.ndarray:
    """Exact ``d s_j / d x_j`` at each row; constant in ``j`` iff ``j`` is a leaf."""
    return np.einsum("kjj->kj", analytic_score_jacobian(model, X))


def log_density(model: ScmModel, X) -> np.ndarray:
    """Joint log-density per row (parametric links)."""
    X = _check_oracle(model, X)
    R = X - link_values(model, X)
    v = model.variances
    if model.noise == "gaussian":
        return np.sum(-0.5 * R * R / v - 0.5 * np.log(2 * np.pi * v), axis=1)
    if model.noise == "laplace":
        b = np.sqrt(v / 2.0)
        return np.sum(-np.abs(R) / b - np.log(2 * b), axis=1)
    beta = np.sqrt(v) * math.sqrt(6.0) / math.pi
    z = (R + beta * EULER_GAMMA) / beta
    return np.sum(-z - np.exp(-z) - np.log(beta), axis=1)


@dataclass(frozen=True)
class SuiteConfig:
    d: int
    graph: str = "ER1"
    noise: str = "gaussian"
    n: int = 1000
    runs: int = 10
    seed: int = 0
    links: str = "gp"

    def __post_init__(self):
        if self.d < 1 or self.n < 1 or self.runs < 0:
            raise ConfigError("need d >= 1, n >= 1, runs >= 0")
        if self.noise not in NOISE_FAMILIES:
            raise ConfigError(f"unknown noise family {self.noise!r}")
        if self.links not in LINK_KINDS:
            raise ConfigError(f"unknown link kind {self.links!r}")


def run_seeds(seed: int, runs: int) -> list[tuple[int, int, int]]:
    """Independent (graph, model, data) integer seeds for each run."""
    children = np.random.SeedSequence(seed).spawn(runs)
    return [tuple(int(s) for s in child.generate_state(3)) for child in children]


def make_run(cfg: SuiteConfig, run: int):
    """Build the ``run``-th (model, data, graph) triple of a suite."""
    g_seed, m_seed, x_seed = run_seeds(cfg.seed, cfg.runs)[run]
    g = sample_dag(cfg.graph, cfg.d, g_seed)
    model = random_model(g, cfg.links, cfg.noise, m_seed, data_seed=x_seed)
    return model, sample_dataset(model, cfg.n, x_seed), g


def benchmark_suite(cfg: SuiteConfig) -> list[tuple[ScmModel, np.ndarray, Dag]]:
    return [make_run(cfg, r) for r in range(cfg.runs)]


def write_csv(X, path) -> None:
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j}" for j in range(X.shape[1])])
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def read_csv(path) -> np.ndarray:
    """Read a dataset CSV; errors name the offending line (1-based, header = 1)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        d = len(header)
        if d == 0:
            raise DataError(f"{path}:1: empty header")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != d:
                raise DataError(f"{path}:{line}: expected {d} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise DataError(f"{path}:{line}: non-numeric field") from None
            if not all(math.isfinite(v) for v in vals):
                raise DataError(f"{path}:{line}: non-finite value")
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def write_model(model: ScmModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict()) + "\n")


def read_model(path) -> ScmModel:
    try:
        return ScmModel.from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
