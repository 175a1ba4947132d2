"""Bundled synthetic task for desk-scale protocol experiments.

An entity vocabulary is partitioned into latent groups. The semantic label
of an instance is a deterministic function of the (group, group) pair of
its two entities, and the silver syntactic label is a different function of
the same pair, so the two tasks are correlated exactly the way dependency
labels correlate with semantic relations: learning to predict one requires
group-discriminating entity representations that transfer to the other.

Both label maps are built additively, ``label = argmax_k(A[k, g1] + B[k, g2])``
with random score matrices, which guarantees they are realizable by a model
whose two arguments meet only at a linear head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .silver import stable_rng

DOMAIN = "synthetic"


def _additive_table(rng: np.random.Generator, classes: int, groups: int) -> np.ndarray:
    """Surjective group-pair -> class map of the additive family."""
    if classes > groups * groups:
        raise ValueError(f"{classes} classes cannot cover {groups}x{groups} group pairs")
    while True:
        a = rng.normal(size=(classes, groups))
        b = rng.normal(size=(classes, groups))
        table = np.argmax(a[:, :, None] + b[:, None, :], axis=0)  # (g1, g2)
        if len(np.unique(table)) == classes:
            return table


@dataclass
class SynthTask:
    groups: int
    entity_tokens: list[list[str]]  # per group
    filler_tokens: list[str]
    sem_labels: list[str]
    syn_labels: list[str]
    sem_table: np.ndarray  # (groups, groups) -> sem label index
    syn_table: np.ndarray  # (groups, groups) -> syn label index

    def _cells_for(self, table: np.ndarray, label_index: int) -> list[tuple[int, int]]:
        g1s, g2s = np.nonzero(table == label_index)
        return list(zip(g1s.tolist(), g2s.tolist()))

    def _instance(self, rng: np.random.Generator, g1: int, g2: int, label: str) -> dict:
        pick = lambda group: self.entity_tokens[group][int(rng.integers(len(self.entity_tokens[group])))]
        filler = lambda n: [self.filler_tokens[int(i)] for i in rng.integers(len(self.filler_tokens), size=n)]
        left = filler(int(rng.integers(2, 5)))
        mid = filler(int(rng.integers(1, 4)))
        right = filler(int(rng.integers(0, 3)))
        tokens = left + [pick(g1)] + mid + [pick(g2)] + right
        p1 = len(left)
        p2 = p1 + 1 + len(mid)
        return {
            "tokens": tokens,
            "e1": [p1, p1 + 1],
            "e2": [p2, p2 + 1],
            "label": label,
            "domain": DOMAIN,
            "provenance": {"groups": [g1, g2]},
        }

    def sample_silver(self, n: int, seed: int) -> list[dict]:
        """Pre-training instances labeled by the syntactic group-pair map."""
        rng = stable_rng(seed, "synth-silver")
        out = []
        for _ in range(n):
            g1 = int(rng.integers(self.groups))
            g2 = int(rng.integers(self.groups))
            out.append(self._instance(rng, g1, g2, self.syn_labels[self.syn_table[g1, g2]]))
        return out

    def sample_gold(self, n: int, seed: int) -> list[dict]:
        """Fine-tuning/eval instances, stratified over the semantic classes."""
        rng = stable_rng(seed, "synth-gold")
        cells = [self._cells_for(self.sem_table, k) for k in range(len(self.sem_labels))]
        out = []
        for i in range(n):
            k = i % len(self.sem_labels)
            g1, g2 = cells[k][int(rng.integers(len(cells[k])))]
            out.append(self._instance(rng, g1, g2, self.sem_labels[k]))
        return out


def make_task(
    task_seed: int = 7,
    groups: int = 4,
    tokens_per_group: int = 25,
    sem_classes: int = 4,
    syn_labels: tuple[str, ...] = ("nsubj", "obj", "obl", "nmod", "appos"),
    filler_count: int = 30,
) -> SynthTask:
    rng = stable_rng(task_seed, "synth-task")
    entity_tokens = [
        [f"ent{g}_{i}" for i in range(tokens_per_group)] for g in range(groups)
    ]
    filler_tokens = [f"w{i:02d}" for i in range(filler_count)]
    sem_table = _additive_table(rng, sem_classes, groups)
    syn_table = _additive_table(rng, len(syn_labels), groups)
    return SynthTask(
        groups=groups,
        entity_tokens=entity_tokens,
        filler_tokens=filler_tokens,
        sem_labels=[f"sem{k}" for k in range(sem_classes)],
        syn_labels=list(syn_labels),
        sem_table=sem_table,
        syn_table=syn_table,
    )


__all__ = ["DOMAIN", "SynthTask", "make_task"]
