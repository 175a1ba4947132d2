"""Bridge configuration. Defaults mirror the published training recipe."""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass
class BridgeConfig:
    encoder: str = "bert-base-cased"
    lr_pretrain: float = 1e-5
    lr_finetune: float = 2e-5
    batch_size_pretrain: int = 12
    batch_size_finetune: int = 24
    seeds: tuple[int, ...] = (4012, 5096, 8878, 8857, 9908)
    epochs: int = 3
    max_steps: int | None = None  # cap on optimizer steps per phase (smoke runs)
    patience: int = 5
    max_length: int = 128
    device: str = "cpu"
    macro_exclude: tuple[str, ...] = ("no-relation",)

    def __post_init__(self) -> None:
        if self.lr_pretrain <= 0 or self.lr_finetune <= 0:
            raise ValueError("learning rates must be positive")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        self.seeds = tuple(int(s) for s in self.seeds)

    @classmethod
    def from_json(cls, path) -> "BridgeConfig":
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
        return cls(**obj)

    def echo(self) -> dict:
        return {
            "encoder": self.encoder,
            "lr_pretrain": self.lr_pretrain,
            "lr_finetune": self.lr_finetune,
            "batch_sizes": [self.batch_size_pretrain, self.batch_size_finetune],
            "seeds": list(self.seeds),
            "epochs": self.epochs,
            "max_steps": self.max_steps,
            "patience": self.patience,
            "max_length": self.max_length,
            "device": self.device,
            "macro_exclude": list(self.macro_exclude),
        }
