"""explab: how strongly are attributes encoded in learned representations?

Estimates the mutual information between a feature matrix and a scalar
attribute with a trained neural critic, sweeps the estimate across layers
and attributes, and evaluates binary classifiers with bootstrap
confidence intervals. Ships synthetic generators with analytic MI ground
truth for validating the estimator end to end.
"""

__version__ = "0.1.0"

from .data import (
    BalanceResult,
    MetadataRow,
    SyntheticSpec,
    balance_classes,
    embed_attributes,
    gen_synthetic,
    read_attribute,
    read_features,
    read_metadata,
    write_attribute,
    write_features,
)
from .errors import ExplabError, NumericError, ParseError
from .expressivity import (
    ExpressivityResult,
    LayerSweepResult,
    compute_expressivity,
    sweep,
)
from .metrics import MetricWithCi, auprc, auroc, bootstrap_ci, pr_points, roc_points
from .mine import (
    MiEstimate,
    MineConfig,
    MineEstimator,
    dv_bound,
    log_mean_exp,
    shuffle_marginal,
    train_mine,
)
from .nn import (
    AdamState,
    MlpParams,
    adam_step,
    elu,
    elu_grad,
    init_mlp,
    mlp_backward,
    mlp_forward,
    xavier_init,
)

__all__ = [
    "__version__",
    "AdamState",
    "BalanceResult",
    "ExplabError",
    "ExpressivityResult",
    "LayerSweepResult",
    "MetadataRow",
    "MetricWithCi",
    "MiEstimate",
    "MineConfig",
    "MineEstimator",
    "MlpParams",
    "NumericError",
    "ParseError",
    "SyntheticSpec",
    "adam_step",
    "auprc",
    "auroc",
    "balance_classes",
    "bootstrap_ci",
    "compute_expressivity",
    "dv_bound",
    "elu",
    "elu_grad",
    "embed_attributes",
    "gen_synthetic",
    "init_mlp",
    "log_mean_exp",
    "mlp_backward",
    "mlp_forward",
    "pr_points",
    "read_attribute",
    "read_features",
    "read_metadata",
    "roc_points",
    "shuffle_marginal",
    "sweep",
    "train_mine",
    "write_attribute",
    "write_features",
    "xavier_init",
]
