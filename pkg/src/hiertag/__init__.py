"""Hierarchical GRU-CRF sequence tagging with multi-task and cross-lingual sharing."""

from .data import ConfigError, RawSentence, read_conll
from .model import TrainConfig
from .training import TaskSpec, classify_params, train_joint, train_standalone

__version__ = "0.1.0"

__all__ = ["ConfigError", "RawSentence", "TaskSpec", "TrainConfig", "classify_params",
           "read_conll", "train_joint", "train_standalone"]
