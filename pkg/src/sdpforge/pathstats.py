"""Corpus analyses over shortest dependency paths.

Counts which edge labels appear on the path between the two entities of
each gold relation, and how long those paths are, grouped either by text
domain or by semantic relation type. The label ranking drives the choice of
the pre-training label whitelist.

Callers are responsible for conj-propagating the parses first; the CLI
pipeline does this unconditionally so analysis and generation see the same
trees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .conllu import ParsedSentence
from .corpus import CorpusRecord
from .errors import SdpforgeError
from .trees import path_labels, shortest_path, span_head

GROUP_BY_DOMAIN = "domain"
GROUP_BY_RELATION = "relation_type"

KIND_LABELS = "labels"
KIND_LENGTHS = "lengths"


class WrongTableKind(SdpforgeError):
    pass


@dataclass
class PathStatsTable:
    kind: str  # KIND_LABELS | KIND_LENGTHS
    group_by: str
    cells: dict[tuple[str, str | int], int] = field(default_factory=dict)
    total_pairs: int = 0

    def add(self, group: str, key: str | int, count: int = 1) -> None:
        self.cells[(group, key)] = self.cells.get((group, key), 0) + count

    def group_total(self, group: str) -> int:
        return sum(c for (g, _), c in self.cells.items() if g == group)

    def key_total(self, key: str | int) -> int:
        return sum(c for (_, k), c in self.cells.items() if k == key)

    def merged(self, other: "PathStatsTable") -> "PathStatsTable":
        """Commutative-associative merge; safe under any reduction order."""
        if (self.kind, self.group_by) != (other.kind, other.group_by):
            raise WrongTableKind(f"cannot merge {self.kind}/{self.group_by} with {other.kind}/{other.group_by}")
        out = PathStatsTable(kind=self.kind, group_by=self.group_by, cells=dict(self.cells), total_pairs=self.total_pairs + other.total_pairs)
        for (group, key), count in other.cells.items():
            out.add(group, key, count)
        return out

    def to_tsv(self) -> str:
        lines = ["group\tkey\tcount"]
        for (group, key), count in sorted(self.cells.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
            lines.append(f"{group}\t{key}\t{count}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        rows = [
            {"group": group, "key": key, "count": count}
            for (group, key), count in sorted(self.cells.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))
        ]
        return json.dumps(
            {"kind": self.kind, "group_by": self.group_by, "cells": rows, "total_pairs": self.total_pairs},
            indent=2,
            sort_keys=True,
        )


def _relation_paths(aligned: Iterable[tuple[CorpusRecord, ParsedSentence]]):
    for record, parse in aligned:
        for relation in record.relations:
            head = record.entity(relation.head_entity)
            tail = record.entity(relation.tail_entity)
            a = span_head(parse, head.start, head.end)
            b = span_head(parse, tail.start, tail.end)
            yield record, relation, shortest_path(parse, a, b)


def _group_key(record: CorpusRecord, relation, group_by: str) -> str:
    if group_by == GROUP_BY_DOMAIN:
        return record.domain
    if group_by == GROUP_BY_RELATION:
        return relation.label
    raise ValueError(f"unknown group_by {group_by!r}")


def label_distribution(
    aligned: Sequence[tuple[CorpusRecord, ParsedSentence]],
    group_by: str = GROUP_BY_DOMAIN,
    count_multiplicity: bool = True,
) -> PathStatsTable:
    """Count subtype-stripped deprels on the path of every gold relation.

    With ``count_multiplicity`` (the default) a label occurring twice on one
    path contributes two; otherwise each path contributes its label set.
    """
    table = PathStatsTable(kind=KIND_LABELS, group_by=group_by)
    for record, relation, path in _relation_paths(aligned):
        group = _group_key(record, relation, group_by)
        labels = path_labels(path)
        for label, count in labels.items():
            table.add(group, label, count if count_multiplicity else 1)
        table.total_pairs += 1
    return table


def length_histogram(
    aligned: Sequence[tuple[CorpusRecord, ParsedSentence]],
    group_by: str = GROUP_BY_DOMAIN,
) -> PathStatsTable:
    """One increment per gold relation at its path edge count."""
    table = PathStatsTable(kind=KIND_LENGTHS, group_by=group_by)
    for record, relation, path in _relation_paths(aligned):
        table.add(_group_key(record, relation, group_by), len(path))
        table.total_pairs += 1
    return table


def select_labels(
    table: PathStatsTable,
    k: int | None = None,
    min_count: int | None = None,
) -> list[str]:
    """Deprel whitelist ranked by aggregate count (ties alphabetical).

    Exactly one of ``k`` (top-k) or ``min_count`` (threshold) applies; with
    neither, all labels are returned ranked.
    """
    if table.kind != KIND_LABELS:
        raise WrongTableKind(f"expected a {KIND_LABELS} table, got {table.kind}")
    totals: dict[str, int] = {}
    for (_, key), count in table.cells.items():
        totals[str(key)] = totals.get(str(key), 0) + count
    ranked = sorted(totals, key=lambda label: (-totals[label], label))
    if min_count is not None:
        ranked = [label for label in ranked if totals[label] >= min_count]
    if k is not None:
        ranked = ranked[:k]
    return ranked


__all__ = [
    "GROUP_BY_DOMAIN",
    "GROUP_BY_RELATION",
    "KIND_LABELS",
    "KIND_LENGTHS",
    "PathStatsTable",
    "WrongTableKind",
    "label_distribution",
    "length_histogram",
    "select_labels",
]
