"""Pretrained-encoder backend for the two-phase relation-extraction recipe.

Consumes the instance JSONL files produced by the generation pipeline and
writes TrainReport JSON in the shared schema, so report tooling reads the
output of either trainer interchangeably.
"""

from .config import BridgeConfig
from .data import BridgeError, read_instances
from .train import bridge_train, run_bridge

__version__ = "0.1.0"

__all__ = ["BridgeConfig", "BridgeError", "bridge_train", "read_instances", "run_bridge", "__version__"]
