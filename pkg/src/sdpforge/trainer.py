"""Desk-scale realization of the two-phase training protocol.

The model mirrors the full recipe structurally: instances get four entity
markers, the representation is the concatenation of the encoder states at
the two start markers, and a single affine head classifies it. The encoder
is a per-position affine+tanh over embeddings rather than a transformer;
each position's input embedding sums the token's own embedding and its
right neighbour's, so the state at a start marker carries the marker plus
the argument's first token. That two-token window is the whole context the
surrogate sees (a deliberate, documented limitation), which keeps every
gradient hand-derivable and finite-difference-checkable.

Training is plain mini-batch Adam on softmax cross-entropy. All parameters,
embeddings included, are updated in both phases; between phases only the
head is re-initialized. Everything is seeded and single-threaded, so a
(config, data, seed) triple reproduces bit-identical reports.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SdpforgeError
from .silver import (
    E1_START,
    E2_START,
    MARKER_TOKENS,
    MarkedInstance,
    mark_instance,
    stable_rng,
)

UNK = "<unk>"
DEFAULT_SEEDS = (4012, 5096, 8878, 8857, 9908)


class EmptyCorpus(SdpforgeError):
    pass


class LabelOutOfRange(SdpforgeError):
    pass


class NonFiniteLoss(SdpforgeError):
    pass


class MarkerMissing(SdpforgeError):
    pass


@dataclass
class TrainConfig:
    d: int = 16
    h: int = 16
    lr_pretrain: float = 1e-5
    lr_finetune: float = 2e-5
    batch_size: int = 12
    epochs: int = 20
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    max_instances: int | None = None
    patience: int = 5
    vocab_cap: int | None = None
    macro_exclude: tuple[str, ...] = ("no-relation",)

    def __post_init__(self) -> None:
        if self.lr_pretrain <= 0 or self.lr_finetune <= 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        self.seeds = tuple(int(s) for s in self.seeds)

    def echo(self) -> dict:
        out = asdict(self)
        out["seeds"] = list(self.seeds)
        out["macro_exclude"] = list(self.macro_exclude)
        return out


@dataclass
class ModelParams:
    vocab: dict[str, int]
    E: np.ndarray  # (V, d)
    W_enc: np.ndarray  # (h, d)
    b_enc: np.ndarray  # (h,)
    W_head: np.ndarray  # (K, 2h)
    b_head: np.ndarray  # (K,)

    def copy(self) -> "ModelParams":
        return ModelParams(
            vocab=self.vocab,
            E=self.E.copy(),
            W_enc=self.W_enc.copy(),
            b_enc=self.b_enc.copy(),
            W_head=self.W_head.copy(),
            b_head=self.b_head.copy(),
        )

    def encoder_digest(self) -> str:
        """Hash of everything except the head; replace_head must keep it."""
        md = hashlib.sha256()
        for arr in (self.E, self.W_enc, self.b_enc):
            md.update(np.ascontiguousarray(arr).tobytes())
        md.update(json.dumps(self.vocab, sort_keys=True).encode())
        return md.hexdigest()


def build_vocab(corpus: Iterable[Sequence[str]], cap: int | None = None) -> dict[str, int]:
    """Frequency-ordered vocabulary with reserved unknown + marker slots."""
    counts: dict[str, int] = {}
    for tokens in corpus:
        for token in tokens:
            if token in MARKER_TOKENS or token == UNK:
                continue
            counts[token] = counts.get(token, 0) + 1
    if not counts:
        raise EmptyCorpus("no tokens to build a vocabulary from")
    vocab = {UNK: 0}
    for marker in MARKER_TOKENS:
        vocab[marker] = len(vocab)
    ordered = sorted(counts, key=lambda t: (-counts[t], t))
    if cap is not None:
        ordered = ordered[: max(0, cap - len(vocab))]
    for token in ordered:
        vocab[token] = len(vocab)
    return vocab


def _init_head(rng: np.random.Generator, k: int, h: int) -> tuple[np.ndarray, np.ndarray]:
    return rng.standard_normal((k, 2 * h)) / math.sqrt(2 * h), np.zeros(k)


def init_model(
    config: TrainConfig,
    label_count: int,
    corpus_for_vocab: Iterable[Sequence[str]],
    seed: int,
) -> ModelParams:
    """Seeded 1/sqrt(fan-in)-scaled initialization; bit-identical per seed."""
    if label_count < 2:
        raise ValueError("label_count must be >= 2")
    vocab = build_vocab(corpus_for_vocab, cap=config.vocab_cap)
    rng = stable_rng(seed, "init")
    E = rng.standard_normal((len(vocab), config.d)) / math.sqrt(config.d)
    W_enc = rng.standard_normal((config.h, config.d)) / math.sqrt(config.d)
    b_enc = np.zeros(config.h)
    W_head, b_head = _init_head(stable_rng(seed, "init-head"), label_count, config.h)
    return ModelParams(vocab=vocab, E=E, W_enc=W_enc, b_enc=b_enc, W_head=W_head, b_head=b_head)


def replace_head(params: ModelParams, new_label_count: int, seed: int) -> ModelParams:
    """Fresh head for a new label set; encoder and vocab bit-identical."""
    if new_label_count < 2:
        raise ValueError("new_label_count must be >= 2")
    h = params.W_enc.shape[0]
    W_head, b_head = _init_head(stable_rng(seed, "replace-head"), new_label_count, h)
    return ModelParams(
        vocab=params.vocab,
        E=params.E,
        W_enc=params.W_enc,
        b_enc=params.b_enc,
        W_head=W_head,
        b_head=b_head,
    )


# ----------------------------------------------------------------------------
# instance encoding

@dataclass
class EncodedDataset:
    """Instances reduced to the four embedding rows the model reads.

    ``cols[i]`` = (e1 marker id, e1 first-argument-token id,
    e2 marker id, e2 first-argument-token id); ``y[i]`` the label index.
    """

    cols: np.ndarray  # (n, 4) int
    y: np.ndarray  # (n,) int
    label_list: list[str]

    @property
    def n(self) -> int:
        return int(self.cols.shape[0])

    def subset(self, indices) -> "EncodedDataset":
        return EncodedDataset(cols=self.cols[indices], y=self.y[indices], label_list=self.label_list)


def marker_columns(params: ModelParams, instance: MarkedInstance) -> tuple[int, int, int, int]:
    tokens = instance.tokens
    for pos, marker in ((instance.e1_start_pos, E1_START), (instance.e2_start_pos, E2_START)):
        if pos < 0 or pos + 1 >= len(tokens) or tokens[pos] != marker:
            raise MarkerMissing(f"{marker} not at position {pos}")
    lookup = params.vocab
    unk = lookup[UNK]
    p1, p2 = instance.e1_start_pos, instance.e2_start_pos
    return (
        lookup.get(tokens[p1], unk),
        lookup.get(tokens[p1 + 1], unk),
        lookup.get(tokens[p2], unk),
        lookup.get(tokens[p2 + 1], unk),
    )


def encode_instances(
    params: ModelParams,
    instances: Sequence[dict],
    label_list: Sequence[str],
) -> EncodedDataset:
    """Mark raw JSONL instances and reduce them to column ids."""
    label_index = {label: i for i, label in enumerate(label_list)}
    cols = np.zeros((len(instances), 4), dtype=np.int64)
    y = np.zeros(len(instances), dtype=np.int64)
    for i, obj in enumerate(instances):
        marked = mark_instance(obj["tokens"], tuple(obj["e1"]), tuple(obj["e2"]), obj["label"])
        cols[i] = marker_columns(params, marked)
        if obj["label"] not in label_index:
            raise LabelOutOfRange(f"label {obj['label']!r} not in label set")
        y[i] = label_index[obj["label"]]
    return EncodedDataset(cols=cols, y=y, label_list=list(label_list))


# ----------------------------------------------------------------------------
# forward / loss / gradients

def _hidden(params: ModelParams, token_ids: np.ndarray, neighbor_ids: np.ndarray) -> np.ndarray:
    x = params.E[token_ids] + params.E[neighbor_ids]
    return np.tanh(x @ params.W_enc.T + params.b_enc)


def batch_logits(params: ModelParams, cols: np.ndarray) -> np.ndarray:
    h1 = _hidden(params, cols[:, 0], cols[:, 1])
    h2 = _hidden(params, cols[:, 2], cols[:, 3])
    return np.concatenate([h1, h2], axis=1) @ params.W_head.T + params.b_head


def forward(params: ModelParams, instance: MarkedInstance) -> np.ndarray:
    """Logits for one marked instance.

    Encodes every position (each sees its own plus its right neighbour's
    embedding) and reads the states at the two start-marker positions; only
    those two windows can influence the logits.
    """
    tokens = instance.tokens
    marker_columns(params, instance)  # validates marker positions
    ids = np.array([params.vocab.get(t, params.vocab[UNK]) for t in tokens], dtype=np.int64)
    x = params.E[ids].copy()
    x[:-1] += params.E[ids[1:]]  # last position has no right neighbour
    hidden = np.tanh(x @ params.W_enc.T + params.b_enc)
    r = np.concatenate([hidden[instance.e1_start_pos], hidden[instance.e2_start_pos]])
    return params.W_head @ r + params.b_head


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def batch_loss(params: ModelParams, cols: np.ndarray, y: np.ndarray) -> float:
    logits = batch_logits(params, cols)
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-log_probs[np.arange(len(y)), y].mean())


def loss_and_grads(
    params: ModelParams, cols: np.ndarray, y: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and analytic gradients."""
    m = len(y)
    h = params.W_enc.shape[0]
    x1 = params.E[cols[:, 0]] + params.E[cols[:, 1]]
    x2 = params.E[cols[:, 2]] + params.E[cols[:, 3]]
    h1 = np.tanh(x1 @ params.W_enc.T + params.b_enc)
    h2 = np.tanh(x2 @ params.W_enc.T + params.b_enc)
    r = np.concatenate([h1, h2], axis=1)
    logits = r @ params.W_head.T + params.b_head

    z = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(z)
    probs = exp / exp.sum(axis=1, keepdims=True)
    log_probs = z - np.log(exp.sum(axis=1, keepdims=True))
    loss = float(-log_probs[np.arange(m), y].mean())

    g = probs.copy()
    g[np.arange(m), y] -= 1.0
    g /= m

    d_W_head = g.T @ r
    d_b_head = g.sum(axis=0)
    d_r = g @ params.W_head
    d_z1 = d_r[:, :h] * (1.0 - h1 * h1)
    d_z2 = d_r[:, h:] * (1.0 - h2 * h2)
    d_W_enc = d_z1.T @ x1 + d_z2.T @ x2
    d_b_enc = d_z1.sum(axis=0) + d_z2.sum(axis=0)
    d_x1 = d_z1 @ params.W_enc
    d_x2 = d_z2 @ params.W_enc
    d_E = np.zeros_like(params.E)
    np.add.at(d_E, cols[:, 0], d_x1)
    np.add.at(d_E, cols[:, 1], d_x1)
    np.add.at(d_E, cols[:, 2], d_x2)
    np.add.at(d_E, cols[:, 3], d_x2)

    return loss, {"E": d_E, "W_enc": d_W_enc, "b_enc": d_b_enc, "W_head": d_W_head, "b_head": d_b_head}


class _Adam:
    def __init__(self, params: ModelParams, lr: float, beta1: float, beta2: float, eps: float):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(getattr(params, k)) for k in ("E", "W_enc", "b_enc", "W_head", "b_head")}
        self.v = {k: np.zeros_like(getattr(params, k)) for k in self.m}

    def step(self, params: ModelParams, grads: Mapping[str, np.ndarray]) -> None:
        self.t += 1
        correction1 = 1.0 - self.beta1**self.t
        correction2 = 1.0 - self.beta2**self.t
        for key, grad in grads.items():
            m = self.m[key]
            v = self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            update = (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            getattr(params, key)[...] -= self.lr * update


# ----------------------------------------------------------------------------
# evaluation

@dataclass
class EvalResult:
    macro_f1: float
    per_class: dict[str, dict[str, float]]  # label -> precision/recall/f1/support


def macro_scores(
    y_true: np.ndarray,
    y_pred: np.ndarray,
    label_list: Sequence[str],
    exclude: Sequence[str] = ("no-relation",),
) -> EvalResult:
    """Macro-F1 plus per-class precision/recall/F1 from prediction arrays.

    The macro average runs over the labels present in the gold data minus
    ``exclude``; excluded labels stay valid prediction targets and keep
    their per-class row. Undefined precision/recall/F1 count as 0.
    """
    per_class: dict[str, dict[str, float]] = {}
    averaged: list[float] = []
    excluded = set(exclude)
    for index, label in enumerate(label_list):
        tp = int(np.sum((y_pred == index) & (y_true == index)))
        fp = int(np.sum((y_pred == index) & (y_true != index)))
        fn = int(np.sum((y_pred != index) & (y_true == index)))
        support = tp + fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = {"precision": precision, "recall": recall, "f1": f1, "support": float(support)}
        if support and label not in excluded:
            averaged.append(f1)
    macro = float(np.mean(averaged)) if averaged else 0.0
    return EvalResult(macro_f1=macro, per_class=per_class)


def evaluate(
    params: ModelParams,
    data: EncodedDataset,
    exclude: Sequence[str] = ("no-relation",),
) -> EvalResult:
    """Score the model's argmax predictions on an encoded dataset."""
    if data.n == 0:
        return EvalResult(macro_f1=0.0, per_class={})
    preds = batch_logits(params, data.cols).argmax(axis=1)
    return macro_scores(data.y, preds, data.label_list, exclude)


# ----------------------------------------------------------------------------
# training loop

@dataclass
class PhaseHistory:
    losses: list[float] = field(default_factory=list)
    dev_scores: list[float] = field(default_factory=list)
    best_epoch: int | None = None

    @property
    def final_loss(self) -> float | None:
        return self.losses[-1] if self.losses else None


def train_phase(
    params: ModelParams,
    data: EncodedDataset,
    lr: float,
    config: TrainConfig,
    seed: int,
    dev: EncodedDataset | None = None,
    phase: str = "train",
) -> tuple[ModelParams, PhaseHistory]:
    """Mini-batch Adam over the dataset; returns updated params + history.

    With a dev set, keeps the epoch with the best dev Macro-F1 and stops
    early after ``config.patience`` epochs without improvement. An empty
    dataset is a no-op (params returned untouched, no RNG consumed).
    """
    history = PhaseHistory()
    if data.n == 0:
        return params, history
    k = params.W_head.shape[0]
    if int(data.y.max()) >= k:
        raise LabelOutOfRange(f"label index {int(data.y.max())} >= {k} classes")
    if config.max_instances is not None and data.n > config.max_instances:
        data = data.subset(np.arange(config.max_instances))

    params = params.copy()
    optimizer = _Adam(params, lr, config.adam_beta1, config.adam_beta2, config.adam_eps)
    rng = stable_rng(seed, "shuffle", phase)
    best: tuple[float, int, ModelParams] | None = None
    stale = 0
    for epoch in range(config.epochs):
        order = rng.permutation(data.n)
        total = 0.0
        batches = 0
        for start in range(0, data.n, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grads = loss_and_grads(params, data.cols[batch], data.y[batch])
            if not math.isfinite(loss):
                raise NonFiniteLoss(f"{phase} epoch {epoch}: loss={loss}")
            optimizer.step(params, grads)
            total += loss
            batches += 1
        history.losses.append(total / batches)
        if dev is not None and dev.n:
            score = evaluate(params, dev, exclude=config.macro_exclude).macro_f1
            history.dev_scores.append(score)
            if best is None or score > best[0]:
                best = (score, epoch, params.copy())
                stale = 0
            else:
                stale += 1
                if stale >= config.patience:
                    break
    if best is not None:
        history.best_epoch = best[1]
        params = best[2]
    return params, history


# ----------------------------------------------------------------------------
# two-phase protocol

@dataclass
class DomainData:
    train: list[dict] = field(default_factory=list)
    dev: list[dict] = field(default_factory=list)
    test: list[dict] = field(default_factory=list)


def _label_set(instance_groups: Iterable[Sequence[dict]]) -> list[str]:
    labels = set()
    for group in instance_groups:
        labels.update(obj["label"] for obj in group)
    return sorted(labels)


def run_protocol(
    pretrain_instances: Sequence[dict],
    finetune: Mapping[str, DomainData],
    config: TrainConfig,
    baseline: bool = False,
    pretrain_dev: Sequence[dict] | None = None,
) -> "TrainReport":
    """Per seed: init, syntax pre-train, head replacement, fine-tune, test.

    One model copy is fine-tuned per train domain (all starting from the
    same post-pretraining parameters) and evaluated on every domain's test
    split. Baseline mode keeps the identical initialization and simply
    skips the first phase, which equals running with an empty pretrain set.
    """
    domains = sorted(finetune)
    pretrain_labels = _label_set([pretrain_instances, pretrain_dev or []])
    finetune_labels = _label_set(
        [finetune[d].train for d in domains]
        + [finetune[d].dev for d in domains]
        + [finetune[d].test for d in domains]
    )
    if not finetune_labels:
        raise EmptyCorpus("no fine-tuning labels")

    vocab_corpus = [obj["tokens"] for obj in pretrain_instances]
    for domain in domains:
        vocab_corpus.extend(obj["tokens"] for obj in finetune[domain].train)

    k1 = max(2, len(pretrain_labels))
    k2 = max(2, len(finetune_labels))

    cells: list[dict] = []
    dev_scores: list[dict] = []
    pretrain_curves: dict[str, list[float]] = {}
    finetune_curves: dict[str, dict[str, list[float]]] = {}

    for seed in config.seeds:
        params = init_model(config, k1, vocab_corpus, seed)
        encoded_pretrain = encode_instances(params, pretrain_instances, pretrain_labels or ["_a", "_b"])
        if not baseline and encoded_pretrain.n:
            encoded_pdev = (
                encode_instances(params, pretrain_dev, pretrain_labels) if pretrain_dev else None
            )
            params, history = train_phase(
                params, encoded_pretrain, config.lr_pretrain, config, seed, dev=encoded_pdev, phase="pretrain"
            )
            pretrain_curves[str(seed)] = history.losses
        params = replace_head(params, k2, seed)

        finetune_curves[str(seed)] = {}
        for domain in domains:
            splits = finetune[domain]
            encoded_train = encode_instances(params, splits.train, finetune_labels)
            encoded_dev = encode_instances(params, splits.dev, finetune_labels) if splits.dev else None
            tuned, history = train_phase(
                params,
                encoded_train,
                config.lr_finetune,
                config,
                seed,
                dev=encoded_dev,
                phase=f"finetune-{domain}",
            )
            finetune_curves[str(seed)][domain] = history.losses
            if encoded_dev is not None:
                dev_scores.append(
                    {
                        "train_domain": domain,
                        "seed": seed,
                        "dev_macro_f1": evaluate(tuned, encoded_dev, config.macro_exclude).macro_f1,
                    }
                )
            for test_domain in domains:
                encoded_test = encode_instances(tuned, finetune[test_domain].test, finetune_labels)
                result = evaluate(tuned, encoded_test, config.macro_exclude)
                cells.append(
                    {
                        "train_domain": domain,
                        "test_domain": test_domain,
                        "seed": seed,
                        "macro_f1": result.macro_f1,
                    }
                )

    summary = []
    for train_domain in domains:
        for test_domain in domains:
            values = [
                c["macro_f1"]
                for c in cells
                if c["train_domain"] == train_domain and c["test_domain"] == test_domain
            ]
            summary.append(
                {
                    "train_domain": train_domain,
                    "test_domain": test_domain,
                    "mean_macro_f1": float(np.mean(values)),
                    "std_macro_f1": float(np.std(values)),
                    "min_macro_f1": float(np.min(values)),
                    "max_macro_f1": float(np.max(values)),
                }
            )

    return TrainReport(
        config=config.echo(),
        baseline=baseline,
        label_set=finetune_labels,
        pretrain_label_set=pretrain_labels,
        instance_counts={
            "pretrain": len(pretrain_instances),
            "train": {d: len(finetune[d].train) for d in domains},
            "dev": {d: len(finetune[d].dev) for d in domains},
            "test": {d: len(finetune[d].test) for d in domains},
        },
        cells=cells,
        summary=summary,
        dev_scores=dev_scores,
        loss_curves={"pretrain": pretrain_curves, "finetune": finetune_curves},
    )


@dataclass
class TrainReport:
    config: dict
    baseline: bool
    label_set: list[str]
    pretrain_label_set: list[str]
    instance_counts: dict
    cells: list[dict]
    summary: list[dict]
    dev_scores: list[dict]
    loss_curves: dict

    def mean_macro_f1(self, train_domain: str | None = None, test_domain: str | None = None) -> float:
        values = [
            c["macro_f1"]
            for c in self.cells
            if (train_domain is None or c["train_domain"] == train_domain)
            and (test_domain is None or c["test_domain"] == test_domain)
        ]
        return float(np.mean(values))

    def mean_dev_macro_f1(self) -> float:
        return float(np.mean([d["dev_macro_f1"] for d in self.dev_scores]))

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "baseline": self.baseline,
            "label_set": self.label_set,
            "pretrain_label_set": self.pretrain_label_set,
            "instance_counts": self.instance_counts,
            "cells": self.cells,
            "summary": self.summary,
            "dev_scores": self.dev_scores,
            "loss_curves": self.loss_curves,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def cells_tsv(self) -> str:
        lines = ["train_domain\ttest_domain\tseed\tmacro_f1"]
        for cell in self.cells:
            lines.append(f"{cell['train_domain']}\t{cell['test_domain']}\t{cell['seed']}\t{cell['macro_f1']:.6f}")
        return "\n".join(lines) + "\n"


def sweep(
    manifest: Sequence[dict | tuple[int, Sequence[dict]]],
    finetune: Mapping[str, DomainData],
    config: TrainConfig,
    pretrain_dev: Sequence[dict] | None = None,
) -> list[dict]:
    """One protocol run per nested manifest point.

    Points are (instance_count, instances) pairs or build_manifest entries
    ({"instances": n, "path": ...}). Each row reports the mean dev Macro-F1
    over seeds and train domains, the Fig.-5 analog curve.
    """
    from .silver import read_instances

    curve = []
    for point in manifest:
        if isinstance(point, dict):
            count, instances = point["instances"], read_instances(point["path"])
        else:
            count, instances = point
        report = run_protocol(instances, finetune, config, pretrain_dev=pretrain_dev)
        row = {
            "instances": int(count),
            "mean_dev_macro_f1": report.mean_dev_macro_f1() if report.dev_scores else None,
            "mean_test_macro_f1": report.mean_macro_f1(),
            "per_domain": {
                domain: float(
                    np.mean([d["dev_macro_f1"] for d in report.dev_scores if d["train_domain"] == domain])
                )
                for domain in sorted(finetune)
                if any(d["train_domain"] == domain for d in report.dev_scores)
            },
        }
        curve.append(row)
    return curve


def sweep_tsv(curve: Sequence[dict]) -> str:
    lines = ["instances\tmean_dev_macro_f1\tmean_test_macro_f1"]
    for row in curve:
        dev = "" if row["mean_dev_macro_f1"] is None else f"{row['mean_dev_macro_f1']:.6f}"
        lines.append(f"{row['instances']}\t{dev}\t{row['mean_test_macro_f1']:.6f}")
    return "\n".join(lines) + "\n"


__all__ = [
    "DEFAULT_SEEDS",
    "DomainData",
    "EmptyCorpus",
    "EncodedDataset",
    "EvalResult",
    "LabelOutOfRange",
    "MarkerMissing",
    "ModelParams",
    "NonFiniteLoss",
    "PhaseHistory",
    "TrainConfig",
    "TrainReport",
    "UNK",
    "batch_logits",
    "batch_loss",
    "build_vocab",
    "encode_instances",
    "evaluate",
    "forward",
    "init_model",
    "loss_and_grads",
    "macro_scores",
    "marker_columns",
    "replace_head",
    "run_protocol",
    "softmax",
    "sweep",
    "sweep_tsv",
    "train_phase",
]
