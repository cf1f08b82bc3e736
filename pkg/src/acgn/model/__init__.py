"""Model cores: the capsule network and its concatenation ablation."""

from .acgn import ACGN, HiddenState, command_batch
from .checkpoint import checkpoint_digest, load_checkpoint, save_checkpoint
from .concat import ConcatModel, action_vector_length
from .config import ModelConfig

__all__ = [
    "ACGN", "HiddenState", "command_batch", "checkpoint_digest",
    "load_checkpoint", "save_checkpoint", "ConcatModel",
    "action_vector_length", "ModelConfig",
]
