"""Gold relation-extraction corpus ingestion and statistics.

Two on-disk formats are understood:

* ``canonical`` — our own JSONL, one record per line::

      {"doc_id": ..., "domain": ..., "tokens": [...],
       "entities": [{"id", "start", "end", "etype"}, ...],
       "relations": [{"head", "tail", "label"}, ...]}

  Spans are end-exclusive token intervals.

* ``crossre`` — the released multi-domain RE files. Field mapping
  (reviewed against the published format, DyGIE-style JSON lines):

      doc_key          -> doc_id; domain defaults to the doc_key/file
                          prefix before the first "-"
      sentence         -> tokens
      ner[i]           -> [start, end, etype] with END-INCLUSIVE token
                          indices; entity id generated as "e{i}";
                          converted to end-exclusive (end + 1)
      relations[i]     -> [h_start, h_end, t_start, t_end, label, ...]
                          (explanation / uncertainty flags ignored);
                          head/tail resolved to the entity ids whose
                          spans match exactly
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .conllu import ParsedSentence
from .errors import SdpforgeError

NO_RELATION = "no-relation"


class UnknownAdapter(SdpforgeError):
    pass


class SchemaMismatch(SdpforgeError):
    pass


class InvariantViolation(SdpforgeError):
    pass


class LengthMismatch(SdpforgeError):
    pass


class TokenMismatch(SdpforgeError):
    def __init__(self, doc_id: str, index: int, got: str, expected: str):
        self.index = index
        super().__init__(f"{doc_id}: token {index} differs: corpus {expected!r} vs parse {got!r}")


@dataclass(frozen=True)
class EntitySpan:
    id: str
    start: int  # 0-based, end-exclusive
    end: int
    etype: str


@dataclass(frozen=True)
class RelationInstance:
    head_entity: str
    tail_entity: str
    label: str


@dataclass
class CorpusRecord:
    doc_id: str
    domain: str
    tokens: list[str]
    entities: list[EntitySpan] = field(default_factory=list)
    relations: list[RelationInstance] = field(default_factory=list)

    def entity(self, entity_id: str) -> EntitySpan:
        for ent in self.entities:
            if ent.id == entity_id:
                return ent
        raise KeyError(entity_id)


def _check_record(record: CorpusRecord) -> None:
    n = len(record.tokens)
    ids = [e.id for e in record.entities]
    if len(set(ids)) != len(ids):
        raise InvariantViolation(f"{record.doc_id}: duplicate entity ids")
    for ent in record.entities:
        if not 0 <= ent.start < ent.end <= n:
            raise InvariantViolation(f"{record.doc_id}: entity {ent.id} span [{ent.start}, {ent.end}) outside 0..{n}")
    known = set(ids)
    seen_pairs = set()
    for rel in record.relations:
        if rel.head_entity == rel.tail_entity:
            raise InvariantViolation(f"{record.doc_id}: self-relation on {rel.head_entity}")
        if not rel.label:
            raise InvariantViolation(f"{record.doc_id}: empty relation label")
        if rel.head_entity not in known or rel.tail_entity not in known:
            raise InvariantViolation(f"{record.doc_id}: relation references unknown entity")
        pair = (rel.head_entity, rel.tail_entity)
        if pair in seen_pairs:
            raise InvariantViolation(f"{record.doc_id}: duplicate directed pair {pair}")
        seen_pairs.add(pair)


def _require(obj: dict, fields: Sequence[str], doc: str) -> None:
    missing = [f for f in fields if f not in obj]
    if missing:
        raise SchemaMismatch(f"{doc}: missing field(s) {missing}")


def _record_from_canonical(obj: dict) -> CorpusRecord:
    _require(obj, ("doc_id", "domain", "tokens", "entities", "relations"), obj.get("doc_id", "<record>"))
    entities = []
    for ent in obj["entities"]:
        _require(ent, ("id", "start", "end", "etype"), obj["doc_id"])
        entities.append(EntitySpan(id=ent["id"], start=ent["start"], end=ent["end"], etype=ent["etype"]))
    relations = []
    for rel in obj["relations"]:
        _require(rel, ("head", "tail", "label"), obj["doc_id"])
        relations.append(RelationInstance(head_entity=rel["head"], tail_entity=rel["tail"], label=rel["label"]))
    return CorpusRecord(
        doc_id=obj["doc_id"],
        domain=obj["domain"],
        tokens=list(obj["tokens"]),
        entities=entities,
        relations=relations,
    )


def _record_from_crossre(obj: dict, default_domain: str | None) -> CorpusRecord:
    _require(obj, ("doc_key", "sentence", "ner", "relations"), obj.get("doc_key", "<record>"))
    doc_id = obj["doc_key"]
    domain = default_domain or doc_id.split("-", 1)[0]
    entities = []
    by_span: dict[tuple[int, int], str] = {}
    for i, ent in enumerate(obj["ner"]):
        start, end_incl, etype = ent[0], ent[1], ent[2]
        span = EntitySpan(id=f"e{i}", start=start, end=end_incl + 1, etype=etype)
        entities.append(span)
        by_span[(start, end_incl)] = span.id
    relations = []
    for rel in obj["relations"]:
        h = by_span.get((rel[0], rel[1]))
        t = by_span.get((rel[2], rel[3]))
        if h is None or t is None:
            raise InvariantViolation(f"{doc_id}: relation span {rel[:4]} matches no entity")
        relations.append(RelationInstance(head_entity=h, tail_entity=t, label=rel[4]))
    return CorpusRecord(
        doc_id=doc_id,
        domain=domain,
        tokens=list(obj["sentence"]),
        entities=entities,
        relations=relations,
    )


def load_corpus(path, adapter: str = "canonical", domain: str | None = None) -> list[CorpusRecord]:
    """Load a JSONL corpus file; every returned record passes its invariants."""
    if adapter not in ("canonical", "crossre"):
        raise UnknownAdapter(adapter)
    path = Path(path)
    if adapter == "crossre" and domain is None:
        stem = path.stem  # e.g. news-train
        domain = stem.split("-", 1)[0] if "-" in stem else None
    records: list[CorpusRecord] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaMismatch(f"{path.name}:{lineno}: not valid JSON ({exc})") from None
            if adapter == "canonical":
                record = _record_from_canonical(obj)
                if domain is not None:
                    record.domain = domain
            else:
                record = _record_from_crossre(obj, domain)
            _check_record(record)
            records.append(record)
    return records


def save_corpus(records: Iterable[CorpusRecord], path) -> None:
    """Write records in the canonical JSONL format."""
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            obj = {
                "doc_id": record.doc_id,
                "domain": record.domain,
                "tokens": record.tokens,
                "entities": [
                    {"id": e.id, "start": e.start, "end": e.end, "etype": e.etype} for e in record.entities
                ],
                "relations": [
                    {"head": r.head_entity, "tail": r.tail_entity, "label": r.label} for r in record.relations
                ],
            }
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")


def candidate_pairs(record: CorpusRecord) -> list[tuple[str, str, str]]:
    """All ordered pairs of distinct entities with their gold or no-relation label.

    Output size is exactly E*(E-1); order is by head then tail entity span
    position, so reruns are stable.
    """
    gold = {(r.head_entity, r.tail_entity): r.label for r in record.relations}
    ordered = sorted(record.entities, key=lambda e: (e.start, e.end, e.id))
    pairs = []
    for head in ordered:
        for tail in ordered:
            if head.id == tail.id:
                continue
            pairs.append((head.id, tail.id, gold.get((head.id, tail.id), NO_RELATION)))
    return pairs


def align(
    records: Sequence[CorpusRecord], parses: Sequence[ParsedSentence]
) -> list[tuple[CorpusRecord, ParsedSentence]]:
    """Pair records with their parses positionally; token forms must match."""
    if len(records) != len(parses):
        raise LengthMismatch(f"{len(records)} records vs {len(parses)} parses")
    aligned = []
    for record, parse in zip(records, parses):
        forms = [t.form for t in parse.tokens]
        if len(forms) != len(record.tokens):
            raise LengthMismatch(f"{record.doc_id}: {len(record.tokens)} tokens vs {len(forms)} parsed")
        for i, (a, b) in enumerate(zip(record.tokens, forms)):
            if a != b:
                raise TokenMismatch(record.doc_id, i, got=b, expected=a)
        aligned.append((record, parse))
    return aligned


@dataclass
class DatasetStats:
    """Sentence/relation counts per (domain, split) and per relation type."""

    counts: dict[tuple[str, str], tuple[int, int]]  # (domain, split) -> (sentences, relations)
    relation_types: dict[str, int]

    def total_sentences(self) -> int:
        return sum(s for s, _ in self.counts.values())

    def total_relations(self) -> int:
        return sum(r for _, r in self.counts.values())

    def to_tsv(self) -> str:
        lines = ["domain\tsplit\tsentences\trelations"]
        for (domain, split), (sentences, relations) in sorted(self.counts.items()):
            lines.append(f"{domain}\t{split}\t{sentences}\t{relations}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        obj = {
            "counts": [
                {"domain": d, "split": s, "sentences": ns, "relations": nr}
                for (d, s), (ns, nr) in sorted(self.counts.items())
            ],
            "relation_types": dict(sorted(self.relation_types.items())),
            "total_sentences": self.total_sentences(),
            "total_relations": self.total_relations(),
        }
        return json.dumps(obj, indent=2, sort_keys=True)


def dataset_stats(splits: Mapping[str, Sequence[CorpusRecord]]) -> DatasetStats:
    """Exact counts over a mapping of split name -> records."""
    counts: dict[tuple[str, str], tuple[int, int]] = {}
    relation_types: dict[str, int] = {}
    for split, records in splits.items():
        for record in records:
            sentences, relations = counts.get((record.domain, split), (0, 0))
            counts[(record.domain, split)] = (sentences + 1, relations + len(record.relations))
            for rel in record.relations:
                relation_types[rel.label] = relation_types.get(rel.label, 0) + 1
    return DatasetStats(counts=counts, relation_types=relation_types)


__all__ = [
    "NO_RELATION",
    "CorpusRecord",
    "DatasetStats",
    "EntitySpan",
    "InvariantViolation",
    "LengthMismatch",
    "RelationInstance",
    "SchemaMismatch",
    "TokenMismatch",
    "UnknownAdapter",
    "align",
    "candidate_pairs",
    "dataset_stats",
    "load_corpus",
    "save_corpus",
]
