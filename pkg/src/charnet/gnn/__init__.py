"""Dense numpy GCN / GAT models, Adam, logistic regression and gradient checks."""

from .gradcheck import gradient_check, numeric_gradient, random_connected_graph, relative_error
from .layers import (
    ModelParams,
    ShapeError,
    attention_bias,
    gat_backward,
    gat_forward,
    gcn_backward,
    gcn_forward,
    init_params,
    normalize_adjacency,
)
from .logistic import LogisticModel, logistic_classify, logistic_fit, logistic_predict
from .optim import AdamState, adam_step
from .train import (
    LinkPredictor,
    NodeClassifierResult,
    TrainConfig,
    feature_matrix,
    load_checkpoint,
    save_checkpoint,
    train_link_predictor,
    train_node_classifier,
    training_log_csv,
)

__all__ = [
    "ModelParams",
    "ShapeError",
    "attention_bias",
    "gat_backward",
    "gat_forward",
    "gcn_backward",
    "gcn_forward",
    "init_params",
    "normalize_adjacency",
    "LogisticModel",
    "logistic_classify",
    "logistic_fit",
    "logistic_predict",
    "AdamState",
    "adam_step",
    "LinkPredictor",
    "NodeClassifierResult",
    "TrainConfig",
    "feature_matrix",
    "load_checkpoint",
    "save_checkpoint",
    "train_link_predictor",
    "train_node_classifier",
    "training_log_csv",
    "gradient_check",
    "numeric_gradient",
    "random_connected_graph",
    "relative_error",
]
