"""The three estimators (graph attention network, sequence transformer,
per-target tabular baseline), their training loops, and checkpoints."""

from wahls.surrogates.gat import GraphAttentionV2, GatBlock, segment_softmax
from wahls.surrogates.models import (
    GraphRegressor,
    SequenceRegressor,
    TabularEnsemble,
    MODEL_KINDS,
)
from wahls.surrogates.train import TrainConfig, TrainedModel, default_train_config, train
from wahls.surrogates.checkpoint import (
    checkpoint_hash,
    load_checkpoint,
    load_checkpoint_file,
    save_checkpoint,
    save_checkpoint_file,
)

__all__ = [
    "GraphAttentionV2",
    "GatBlock",
    "segment_softmax",
    "GraphRegressor",
    "SequenceRegressor",
    "TabularEnsemble",
    "MODEL_KINDS",
    "TrainConfig",
    "TrainedModel",
    "default_train_config",
    "train",
    "checkpoint_hash",
    "load_checkpoint",
    "load_checkpoint_file",
    "save_checkpoint",
    "save_checkpoint_file",
]
