"""Instance JSONL consumption.

The upstream generator emits one JSON object per line with ``tokens``,
end-exclusive ``e1``/``e2`` token spans, ``label``, and ``domain``. The
bridge inserts the four reserved marker tokens around the spans before
subword tokenization; the start markers are where the classifier reads the
encoder states.
"""

from __future__ import annotations

import json

E1_START, E1_END, E2_START, E2_END = "<e1>", "</e1>", "<e2>", "</e2>"
MARKER_TOKENS = (E1_START, E1_END, E2_START, E2_END)


class BridgeError(Exception):
    pass


def read_instances(path) -> list[dict]:
    instances = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            missing = [k for k in ("tokens", "e1", "e2", "label") if k not in obj]
            if missing:
                raise BridgeError(f"{path}:{lineno}: instance missing {missing}")
            instances.append(obj)
    return instances


def insert_markers(tokens: list[str], e1: tuple[int, int], e2: tuple[int, int]) -> list[str]:
    """Word sequence with the four markers inserted (e2 may precede e1)."""
    (s1, e1_end), (s2, e2_end) = tuple(e1), tuple(e2)
    if s1 < e2_end and s2 < e1_end:
        raise BridgeError(f"overlapping spans {e1} / {e2}")
    spans = sorted(
        [(s1, e1_end, E1_START, E1_END), (s2, e2_end, E2_START, E2_END)]
    )
    (fs, fe, fm_start, fm_end), (ss, se, sm_start, sm_end) = spans
    return (
        list(tokens[:fs])
        + [fm_start]
        + list(tokens[fs:fe])
        + [fm_end]
        + list(tokens[fe:ss])
        + [sm_start]
        + list(tokens[ss:se])
        + [sm_end]
        + list(tokens[se:])
    )


def group_by_domain(instances: list[dict]) -> dict[str, list[dict]]:
    grouped: dict[str, list[dict]] = {}
    for obj in instances:
        grouped.setdefault(obj.get("domain", "unknown"), []).append(obj)
    return grouped


def label_set(*instance_groups: list[dict]) -> list[str]:
    labels = set()
    for group in instance_groups:
        labels.update(obj["label"] for obj in group)
    return sorted(labels)
