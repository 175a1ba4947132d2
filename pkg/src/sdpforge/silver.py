"""Silver pre-training instance generation.

Turns conj-propagated dependency trees into labeled training instances: one
instance per whitelisted tree edge, at most ``max_per_sentence`` per
sentence, spread equally over domains, with a held-out evaluation slice and
optional nested files for data-quantity sweeps.

Every random choice flows through :func:`stable_rng`, which derives an
independent PCG64 stream from (seed, purpose, keys) via SHA-256. Results
therefore never depend on processing order, and reruns with the same seed
are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .conllu import ParsedSentence
from .corpus import NO_RELATION, CorpusRecord, candidate_pairs
from .errors import SdpforgeError

DEFAULT_LABEL_WHITELIST = ("nsubj", "obj", "obl", "nmod", "appos")
DEFAULT_MAX_PER_SENTENCE = 5

E1_START, E1_END, E2_START, E2_END = "<e1>", "</e1>", "<e2>", "</e2>"
MARKER_TOKENS = (E1_START, E1_END, E2_START, E2_END)


class PoolTooSmall(SdpforgeError):
    pass


class OverlappingSpans(SdpforgeError):
    pass


class SpanOutOfRange(SdpforgeError):
    pass


class InsufficientInstances(SdpforgeError):
    pass


class MarkerError(SdpforgeError):
    pass


def stable_rng(seed: int, *keys) -> np.random.Generator:
    """PCG64 generator keyed by (seed, *keys); same inputs, same stream."""
    digest = hashlib.sha256("\x1f".join(str(k) for k in keys).encode("utf-8")).digest()
    words = struct.unpack("<8I", digest)
    return np.random.default_rng(np.random.SeedSequence([abs(int(seed)), *words]))


@dataclass(frozen=True)
class SilverTriplet:
    """One whitelisted tree edge: the deprel is the instance label."""

    sent_ref: tuple[str, str]  # (file, sent_id)
    deprel: str
    head_index: int  # 1-based governor
    dep_index: int  # 1-based dependent
    domain: str


@dataclass(frozen=True)
class MarkedInstance:
    """A token sequence with the four entity markers already inserted."""

    tokens: tuple[str, ...]
    e1_start_pos: int
    e2_start_pos: int
    label: str
    provenance: dict | None = None


def extract_triplets(
    sentence: ParsedSentence,
    whitelist: Sequence[str] = DEFAULT_LABEL_WHITELIST,
    file: str = "",
) -> list[SilverTriplet]:
    """One triplet per edge whose subtype-stripped deprel is whitelisted.

    The input must already be conj-propagated. Output is ordered by
    dependent index.
    """
    allowed = set(whitelist)
    triplets = []
    for token in sentence.tokens:
        if token.head == 0:
            continue
        bare = token.bare_deprel()
        if bare in allowed:
            triplets.append(
                SilverTriplet(
                    sent_ref=(file, sentence.sent_id),
                    deprel=bare,
                    head_index=token.head,
                    dep_index=token.index,
                    domain=sentence.domain,
                )
            )
    return triplets


def cap_per_sentence(
    triplets: Sequence[SilverTriplet],
    max_n: int = DEFAULT_MAX_PER_SENTENCE,
    seed: int = 0,
) -> list[SilverTriplet]:
    """Keep at most max_n triplets, chosen uniformly, input order preserved.

    The choice depends only on (seed, sent_ref), not on processing order.
    """
    if max_n < 0:
        raise ValueError("max_n must be >= 0")
    if len(triplets) <= max_n:
        return list(triplets)
    file, sent_id = triplets[0].sent_ref
    rng = stable_rng(seed, "cap", file, sent_id)
    chosen = rng.choice(len(triplets), size=max_n, replace=False)
    return [triplets[i] for i in sorted(chosen)]


def mark_instance(
    tokens: Sequence[str],
    e1_span: tuple[int, int],
    e2_span: tuple[int, int],
    label: str,
    provenance: dict | None = None,
) -> MarkedInstance:
    """Insert the four entity markers around two non-overlapping spans.

    Spans are 0-based end-exclusive; e2 may precede e1 in surface order.
    Removing the markers restores the input exactly (see unmark_instance).
    """
    n = len(tokens)
    for name, (s, e) in (("e1", e1_span), ("e2", e2_span)):
        if not 0 <= s < e <= n:
            raise SpanOutOfRange(f"{name} span [{s}, {e}) outside 0..{n}")
    (s1, e1), (s2, e2) = e1_span, e2_span
    if s1 < e2 and s2 < e1:
        raise OverlappingSpans(f"e1 [{s1}, {e1}) overlaps e2 [{s2}, {e2})")

    first_is_e1 = s1 < s2
    fs, fe = (s1, e1) if first_is_e1 else (s2, e2)
    ss, se = (s2, e2) if first_is_e1 else (s1, e1)
    first_marks = (E1_START, E1_END) if first_is_e1 else (E2_START, E2_END)
    second_marks = (E2_START, E2_END) if first_is_e1 else (E1_START, E1_END)

    out = (
        list(tokens[:fs])
        + [first_marks[0]]
        + list(tokens[fs:fe])
        + [first_marks[1]]
        + list(tokens[fe:ss])
        + [second_marks[0]]
        + list(tokens[ss:se])
        + [second_marks[1]]
        + list(tokens[se:])
    )
    first_start = fs
    second_start = ss + 2
    e1_pos = first_start if first_is_e1 else second_start
    e2_pos = second_start if first_is_e1 else first_start
    return MarkedInstance(
        tokens=tuple(out),
        e1_start_pos=e1_pos,
        e2_start_pos=e2_pos,
        label=label,
        provenance=provenance,
    )


def unmark_instance(instance: MarkedInstance) -> tuple[list[str], tuple[int, int], tuple[int, int]]:
    """Inverse of mark_instance: original tokens plus the two spans."""
    tokens = list(instance.tokens)
    positions = {}
    for marker in MARKER_TOKENS:
        try:
            positions[marker] = tokens.index(marker)
        except ValueError:
            raise MarkerError(f"marker {marker} missing") from None
    if not (
        positions[E1_START] < positions[E1_END]
        and positions[E2_START] < positions[E2_END]
        and positions[E1_START] == instance.e1_start_pos
        and positions[E2_START] == instance.e2_start_pos
    ):
        raise MarkerError("markers out of order or positions inconsistent")

    def strip(span_start: str, span_end: str) -> tuple[int, int]:
        s, e = positions[span_start], positions[span_end]
        offset = sum(1 for m, p in positions.items() if p < s)
        return s - offset, e - offset - 1

    e1 = strip(E1_START, E1_END)
    e2 = strip(E2_START, E2_END)
    bare = [t for t in tokens if t not in MARKER_TOKENS]
    return bare, e1, e2


def sample_sentences(
    pools: Mapping[str, Sequence[ParsedSentence]],
    n_per_domain: int,
    seed: int,
) -> dict[str, list[ParsedSentence]]:
    """Exactly n_per_domain sentences per domain, drawn without replacement."""
    sampled: dict[str, list[ParsedSentence]] = {}
    for domain in sorted(pools):
        pool = pools[domain]
        if len(pool) < n_per_domain:
            raise PoolTooSmall(f"domain {domain}: need {n_per_domain}, have {len(pool)} (short by {n_per_domain - len(pool)})")
        order = stable_rng(seed, "sample", domain).permutation(len(pool))
        sampled[domain] = [pool[i] for i in order[:n_per_domain]]
    return sampled


def make_holdout(
    pools: Mapping[str, Sequence[ParsedSentence]],
    per_domain: int = 100,
    seed: int = 0,
) -> tuple[dict[str, list[ParsedSentence]], dict[str, list[ParsedSentence]]]:
    """Split each domain pool into disjoint (train, holdout) parts.

    The holdout gets exactly per_domain sentences per domain; both halves
    keep their original relative order.
    """
    train: dict[str, list[ParsedSentence]] = {}
    holdout: dict[str, list[ParsedSentence]] = {}
    for domain in sorted(pools):
        pool = pools[domain]
        if len(pool) < per_domain:
            raise PoolTooSmall(f"domain {domain}: need {per_domain} holdout, have {len(pool)}")
        order = stable_rng(seed, "holdout", domain).permutation(len(pool))
        held = set(int(i) for i in order[:per_domain])
        train[domain] = [s for i, s in enumerate(pool) if i not in held]
        holdout[domain] = [s for i, s in enumerate(pool) if i in held]
    return train, holdout


def triplet_to_instance(sentence: ParsedSentence, triplet: SilverTriplet) -> dict:
    h, d = triplet.head_index - 1, triplet.dep_index - 1
    return {
        "tokens": [t.form for t in sentence.tokens],
        "e1": [h, h + 1],
        "e2": [d, d + 1],
        "label": triplet.deprel,
        "domain": triplet.domain,
        "provenance": {
            "file": triplet.sent_ref[0],
            "sent_id": triplet.sent_ref[1],
            "deprel": triplet.deprel,
            "head": triplet.head_index,
            "dep": triplet.dep_index,
        },
    }


def sentence_instances(
    sentence: ParsedSentence,
    whitelist: Sequence[str] = DEFAULT_LABEL_WHITELIST,
    max_per_sentence: int = DEFAULT_MAX_PER_SENTENCE,
    seed: int = 0,
    file: str = "",
) -> list[dict]:
    triplets = cap_per_sentence(
        extract_triplets(sentence, whitelist, file=file), max_per_sentence, seed
    )
    return [triplet_to_instance(sentence, t) for t in triplets]


def generate_silver(
    pools: Mapping[str, Sequence[ParsedSentence]],
    n_per_domain: int,
    seed: int,
    whitelist: Sequence[str] = DEFAULT_LABEL_WHITELIST,
    max_per_sentence: int = DEFAULT_MAX_PER_SENTENCE,
    holdout_per_domain: int = 0,
    files: Mapping[str, str] | None = None,
) -> tuple[list[dict], list[dict]]:
    """Full generation pipeline: holdout split, equal sampling, extraction.

    Returns (train_instances, holdout_instances); pools must already be
    conj-propagated. ``files`` optionally maps domain -> source file name
    for provenance.
    """
    files = dict(files or {})
    if holdout_per_domain:
        train_pools, holdout_pools = make_holdout(pools, holdout_per_domain, seed)
    else:
        train_pools, holdout_pools = {k: list(v) for k, v in pools.items()}, {}
    sampled = sample_sentences(train_pools, n_per_domain, seed)

    def emit(per_domain: Mapping[str, Sequence[ParsedSentence]]) -> list[dict]:
        out: list[dict] = []
        for domain in sorted(per_domain):
            src = files.get(domain, "")
            for sentence in per_domain[domain]:
                out.extend(sentence_instances(sentence, whitelist, max_per_sentence, seed, file=src))
        return out

    return emit(sampled), emit(holdout_pools)


def balanced_instance_stream(
    pools: Mapping[str, Sequence[ParsedSentence]],
    seed: int,
    whitelist: Sequence[str] = DEFAULT_LABEL_WHITELIST,
    max_per_sentence: int = DEFAULT_MAX_PER_SENTENCE,
    files: Mapping[str, str] | None = None,
) -> list[dict]:
    """Instances interleaved so per-domain counts stay within max_per_sentence.

    Sentences are consumed in seeded order, always from the domain with the
    fewest emitted instances (ties by name), so any prefix of the stream is
    domain-balanced up to one sentence's worth of triplets.
    """
    files = dict(files or {})
    queues: dict[str, list[list[dict]]] = {}
    for domain in sorted(pools):
        pool = pools[domain]
        order = stable_rng(seed, "sample", domain).permutation(len(pool))
        groups = []
        for i in order:
            group = sentence_instances(pool[i], whitelist, max_per_sentence, seed, file=files.get(domain, ""))
            if group:
                groups.append(group)
        queues[domain] = groups
    counts = {domain: 0 for domain in queues}
    cursor = {domain: 0 for domain in queues}
    stream: list[dict] = []
    while True:
        live = [d for d in queues if cursor[d] < len(queues[d])]
        if not live:
            break
        domain = min(live, key=lambda d: (counts[d], d))
        group = queues[domain][cursor[domain]]
        cursor[domain] += 1
        counts[domain] += len(group)
        stream.extend(group)
    return stream


def build_manifest(
    pools: Mapping[str, Sequence[ParsedSentence]],
    targets: Sequence[int],
    seed: int,
    out_dir,
    whitelist: Sequence[str] = DEFAULT_LABEL_WHITELIST,
    max_per_sentence: int = DEFAULT_MAX_PER_SENTENCE,
    files: Mapping[str, str] | None = None,
) -> list[dict]:
    """Write one nested instance file per target count.

    Each file is a byte-prefix of the next (sweep points differ only by
    added data) and holds exactly its target count: the final sentence's
    triplets are truncated as needed.
    """
    targets = list(targets)
    if targets != sorted(targets):
        raise ValueError("targets must be ascending")
    stream = balanced_instance_stream(pools, seed, whitelist, max_per_sentence, files)
    if targets and targets[-1] > len(stream):
        raise InsufficientInstances(f"need {targets[-1]} instances, pool yields {len(stream)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for target in targets:
        path = out_dir / f"silver_{target}.jsonl"
        write_instances(stream[:target], path)
        manifest.append({"instances": target, "path": str(path)})
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
    return manifest


def gold_instances(
    record: CorpusRecord,
    include_negatives: bool = True,
    max_negatives: int | None = None,
    seed: int = 0,
) -> list[dict]:
    """Fine-tuning instances from a gold record, one per candidate pair.

    Negative (no-relation) pairs are uncapped by default; a cap subsamples
    them with the record-keyed generator.
    """
    pairs = candidate_pairs(record)
    if not include_negatives:
        pairs = [p for p in pairs if p[2] != NO_RELATION]
    elif max_negatives is not None:
        negatives = [p for p in pairs if p[2] == NO_RELATION]
        if len(negatives) > max_negatives:
            rng = stable_rng(seed, "negcap", record.doc_id)
            keep = set(int(i) for i in rng.choice(len(negatives), size=max_negatives, replace=False))
            kept_negatives = [p for i, p in enumerate(negatives) if i in keep]
            positives = [p for p in pairs if p[2] != NO_RELATION]
            pairs = sorted(
                positives + kept_negatives,
                key=lambda p: (record.entity(p[0]).start, record.entity(p[0]).end, record.entity(p[1]).start),
            )
    out = []
    for head_id, tail_id, label in pairs:
        head, tail = record.entity(head_id), record.entity(tail_id)
        out.append(
            {
                "tokens": list(record.tokens),
                "e1": [head.start, head.end],
                "e2": [tail.start, tail.end],
                "label": label,
                "domain": record.domain,
                "provenance": {"doc_id": record.doc_id, "head": head_id, "tail": tail_id},
            }
        )
    return out


def write_instances(instances: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for instance in instances:
            f.write(json.dumps(instance, ensure_ascii=False) + "\n")


def read_instances(path) -> list[dict]:
    instances = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            for key in ("tokens", "e1", "e2", "label"):
                if key not in obj:
                    raise SdpforgeError(f"{path}:{lineno}: instance missing {key!r}")
            instances.append(obj)
    return instances


__all__ = [
    "DEFAULT_LABEL_WHITELIST",
    "DEFAULT_MAX_PER_SENTENCE",
    "E1_END",
    "E1_START",
    "E2_END",
    "E2_START",
    "InsufficientInstances",
    "MARKER_TOKENS",
    "MarkedInstance",
    "MarkerError",
    "OverlappingSpans",
    "PoolTooSmall",
    "SilverTriplet",
    "SpanOutOfRange",
    "balanced_instance_stream",
    "build_manifest",
    "cap_per_sentence",
    "extract_triplets",
    "generate_silver",
    "gold_instances",
    "make_holdout",
    "mark_instance",
    "read_instances",
    "sample_sentences",
    "sentence_instances",
    "stable_rng",
    "triplet_to_instance",
    "unmark_instance",
    "write_instances",
]
