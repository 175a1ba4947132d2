"""Marker-based relation classifier over a pretrained encoder.

The sentence (with the four marker tokens inserted) goes through the
encoder; the classifier is a single affine layer over the concatenation of
the encoder states at the two start-marker positions. Replacing the head
between training phases swaps only that layer.
"""

from __future__ import annotations

import torch
from torch import nn
from transformers import AutoModel, AutoTokenizer

from .data import E1_START, E2_START, MARKER_TOKENS, BridgeError, insert_markers


def load_tokenizer(encoder_name: str):
    tokenizer = AutoTokenizer.from_pretrained(encoder_name)
    tokenizer.add_special_tokens({"additional_special_tokens": list(MARKER_TOKENS)})
    return tokenizer


class MarkerClassifier(nn.Module):
    def __init__(self, encoder_name: str, tokenizer, label_count: int):
        super().__init__()
        self.encoder = AutoModel.from_pretrained(encoder_name)
        self.encoder.resize_token_embeddings(len(tokenizer))
        self.hidden_size = self.encoder.config.hidden_size
        self.head = nn.Linear(2 * self.hidden_size, label_count)

    def replace_head(self, label_count: int) -> None:
        """Fresh classification layer; encoder parameters untouched."""
        self.head = nn.Linear(2 * self.hidden_size, label_count)

    def forward(self, input_ids, attention_mask, e1_pos, e2_pos):
        states = self.encoder(input_ids=input_ids, attention_mask=attention_mask).last_hidden_state
        rows = torch.arange(states.size(0), device=states.device)
        representation = torch.cat([states[rows, e1_pos], states[rows, e2_pos]], dim=1)
        return self.head(representation)

    def encoder_state_bytes(self) -> bytes:
        import hashlib

        md = hashlib.sha256()
        for name, tensor in sorted(self.encoder.state_dict().items()):
            md.update(name.encode())
            md.update(tensor.detach().cpu().numpy().tobytes())
        return md.digest()


def encode_batch(tokenizer, instances: list[dict], max_length: int, device: str):
    """Tokenize a batch of marked instances and locate the start markers."""
    words = [
        insert_markers(obj["tokens"], tuple(obj["e1"]), tuple(obj["e2"])) for obj in instances
    ]
    encoded = tokenizer(
        words,
        is_split_into_words=True,
        truncation=True,
        max_length=max_length,
        padding=True,
        return_tensors="pt",
    )
    e1_id = tokenizer.convert_tokens_to_ids(E1_START)
    e2_id = tokenizer.convert_tokens_to_ids(E2_START)
    positions = []
    for marker_id in (e1_id, e2_id):
        hits = (encoded["input_ids"] == marker_id).float().argmax(dim=1)
        present = (encoded["input_ids"] == marker_id).any(dim=1)
        if not bool(present.all()):
            raise BridgeError(
                "a start marker fell outside max_length after truncation; raise max_length"
            )
        positions.append(hits.long())
    return (
        encoded["input_ids"].to(device),
        encoded["attention_mask"].to(device),
        positions[0].to(device),
        positions[1].to(device),
    )
