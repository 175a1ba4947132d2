"""Two-phase training over a pretrained encoder.

Mirrors the reference desk-scale protocol and emits the identical report
schema: syntax pre-training on silver instances, head replacement, then one
fine-tuned copy per train domain evaluated on every domain's test split.
The encoder is updated in both phases.

Per-seed determinism is best effort (torch.manual_seed before every model
build and shuffle); bit-identical reruns additionally require fixed thread
counts and identical library builds, which the framework does not promise.
"""

from __future__ import annotations

import copy
import json

import numpy as np
import torch

from .config import BridgeConfig
from .data import BridgeError, group_by_domain, label_set, read_instances
from .model import MarkerClassifier, encode_batch, load_tokenizer


def macro_scores(y_true, y_pred, labels: list[str], exclude=("no-relation",)) -> dict:
    """Per-class P/R/F1 and macro-F1 over gold-present, non-excluded labels."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    per_class = {}
    averaged = []
    for index, label in enumerate(labels):
        tp = int(np.sum((y_pred == index) & (y_true == index)))
        fp = int(np.sum((y_pred == index) & (y_true != index)))
        fn = int(np.sum((y_pred != index) & (y_true == index)))
        support = tp + fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = {"precision": precision, "recall": recall, "f1": f1, "support": support}
        if support and label not in exclude:
            averaged.append(f1)
    macro = float(np.mean(averaged)) if averaged else 0.0
    return {"macro_f1": macro, "per_class": per_class}


def _batches(n: int, batch_size: int, generator: torch.Generator):
    order = torch.randperm(n, generator=generator).tolist()
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _evaluate(model, tokenizer, instances, labels, config) -> dict:
    if not instances:
        return {"macro_f1": 0.0, "per_class": {}}
    index = {label: i for i, label in enumerate(labels)}
    model.eval()
    preds = []
    gold = []
    with torch.no_grad():
        for start in range(0, len(instances), config.batch_size_finetune):
            chunk = instances[start : start + config.batch_size_finetune]
            ids, mask, p1, p2 = encode_batch(tokenizer, chunk, config.max_length, config.device)
            logits = model(ids, mask, p1, p2)
            preds.extend(logits.argmax(dim=1).tolist())
            gold.extend(index[obj["label"]] for obj in chunk)
    return macro_scores(gold, preds, labels, exclude=config.macro_exclude)


def _train_phase(
    model,
    tokenizer,
    instances,
    labels,
    lr: float,
    batch_size: int,
    config: BridgeConfig,
    generator: torch.Generator,
    dev=None,
) -> list[float]:
    """Adam on cross-entropy; returns per-epoch mean losses.

    Keeps the best dev-Macro-F1 epoch when a dev set is supplied; honours
    config.max_steps as a per-phase cap on optimizer steps.
    """
    if not instances:
        return []
    index = {label: i for i, label in enumerate(labels)}
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = torch.nn.CrossEntropyLoss()
    losses: list[float] = []
    steps = 0
    best: tuple[float, dict] | None = None
    stale = 0
    try:
        for _ in range(config.epochs):
            model.train()
            total, count = 0.0, 0
            for batch_idx in _batches(len(instances), batch_size, generator):
                chunk = [instances[i] for i in batch_idx]
                ids, mask, p1, p2 = encode_batch(tokenizer, chunk, config.max_length, config.device)
                y = torch.tensor([index[obj["label"]] for obj in chunk], device=config.device)
                optimizer.zero_grad()
                loss = loss_fn(model(ids, mask, p1, p2), y)
                loss.backward()
                optimizer.step()
                total += float(loss.item())
                count += 1
                steps += 1
                if config.max_steps is not None and steps >= config.max_steps:
                    break
            if count:
                losses.append(total / count)
            if dev:
                score = _evaluate(model, tokenizer, dev, labels, config)["macro_f1"]
                if best is None or score > best[0]:
                    best = (score, copy.deepcopy(model.state_dict()))
                    stale = 0
                else:
                    stale += 1
                    if stale >= config.patience:
                        break
            if config.max_steps is not None and steps >= config.max_steps:
                break
    except RuntimeError as exc:  # pragma: no cover - depends on host memory
        if "out of memory" in str(exc).lower():
            raise BridgeError(
                "encoder ran out of memory; lower batch sizes, max_length, or use a smaller encoder"
            ) from exc
        raise
    if best is not None:
        model.load_state_dict(best[1])
    return losses


def run_bridge(
    config: BridgeConfig,
    pretrain_instances: list[dict],
    finetune: dict[str, dict[str, list[dict]]],
    baseline: bool = False,
) -> dict:
    """Execute the protocol and return the shared-schema report dict."""
    domains = sorted(finetune)
    pretrain_labels = label_set(pretrain_instances)
    finetune_labels = label_set(
        *[finetune[d].get(split, []) for d in domains for split in ("train", "dev", "test")]
    )
    if not finetune_labels:
        raise BridgeError("no fine-tuning labels found")
    k1 = max(2, len(pretrain_labels))
    k2 = max(2, len(finetune_labels))

    cells: list[dict] = []
    dev_scores: list[dict] = []
    pretrain_curves: dict[str, list[float]] = {}
    finetune_curves: dict[str, dict[str, list[float]]] = {}

    for seed in config.seeds:
        torch.manual_seed(seed)
        generator = torch.Generator().manual_seed(seed)
        tokenizer = load_tokenizer(config.encoder)
        model = MarkerClassifier(config.encoder, tokenizer, k1).to(config.device)

        if not baseline and pretrain_instances:
            curve = _train_phase(
                model,
                tokenizer,
                pretrain_instances,
                pretrain_labels,
                config.lr_pretrain,
                config.batch_size_pretrain,
                config,
                generator,
            )
            pretrain_curves[str(seed)] = curve

        model.replace_head(k2)
        model.to(config.device)
        base_state = copy.deepcopy(model.state_dict())

        finetune_curves[str(seed)] = {}
        for domain in domains:
            model.load_state_dict(base_state)
            splits = finetune[domain]
            curve = _train_phase(
                model,
                tokenizer,
                splits.get("train", []),
                finetune_labels,
                config.lr_finetune,
                config.batch_size_finetune,
                config,
                generator,
                dev=splits.get("dev") or None,
            )
            finetune_curves[str(seed)][domain] = curve
            if splits.get("dev"):
                dev_scores.append(
                    {
                        "train_domain": domain,
                        "seed": seed,
                        "dev_macro_f1": _evaluate(model, tokenizer, splits["dev"], finetune_labels, config)["macro_f1"],
                    }
                )
            for test_domain in domains:
                result = _evaluate(
                    model, tokenizer, finetune[test_domain].get("test", []), finetune_labels, config
                )
                cells.append(
                    {
                        "train_domain": domain,
                        "test_domain": test_domain,
                        "seed": int(seed),
                        "macro_f1": result["macro_f1"],
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
                }
            )

    return {
        "config": config.echo(),
        "baseline": baseline,
        "label_set": finetune_labels,
        "pretrain_label_set": pretrain_labels,
        "instance_counts": {
            "pretrain": len(pretrain_instances),
            "train": {d: len(finetune[d].get("train", [])) for d in domains},
            "dev": {d: len(finetune[d].get("dev", [])) for d in domains},
            "test": {d: len(finetune[d].get("test", [])) for d in domains},
        },
        "cells": cells,
        "summary": summary,
        "dev_scores": dev_scores,
        "loss_curves": {"pretrain": pretrain_curves, "finetune": finetune_curves},
    }


def bridge_train(
    config: BridgeConfig,
    train_path,
    test_path,
    pretrain_path=None,
    dev_path=None,
    report_path=None,
) -> dict:
    """File-level entry: JSONL instance files in, TrainReport JSON out."""
    pretrain = read_instances(pretrain_path) if pretrain_path else []
    train = group_by_domain(read_instances(train_path))
    dev = group_by_domain(read_instances(dev_path)) if dev_path else {}
    test = group_by_domain(read_instances(test_path)) if test_path else {}
    domains = sorted(set(train) | set(dev) | set(test))
    finetune = {
        d: {"train": train.get(d, []), "dev": dev.get(d, []), "test": test.get(d, [])}
        for d in domains
    }
    report = run_bridge(config, pretrain, finetune, baseline=pretrain_path is None)
    if report_path is not None:
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write("\n")
    return report
