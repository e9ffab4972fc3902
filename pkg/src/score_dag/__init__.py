"""Causal discovery for additive noise models from Stein estimates of the score Jacobian."""
from .errors import (
    ConfigError,
    CycleError,
    DataError,
    DegenerateDataError,
    NumericalError,
    ScoreDagError,
)
from .graph import (
    Dag,
    full_dag_from_order,
    sample_dag,
    sample_er_dag,
    sample_sf_dag,
    topological_sort,
)
from .kernel import BACKEND, diag_hess_k_sum, grad_k_sum, gram, median_bandwidth
from .metrics import MetricReport, d_top, evaluate, shd, sid
from .order import OrderTrace, score_order, var_sort_order
from .prune import PruneConfig, discover, prune
from .scm import (
    LinkSpec,
    ScmModel,
    SuiteConfig,
    analytic_jacobian_diag,
    analytic_score,
    benchmark_suite,
    random_model,
    sample_dataset,
)
from .stein import jacobian_diag_with_bandwidth, stein_gradient, stein_hessian_diag

__version__ = "0.1.0"
