"""Tree algorithms over parsed sentences.

Three building blocks used by both the statistics and the generation
pipelines: rewriting conjunct attachments so list elements hang off the
list's external governor, resolving an entity span to the single token that
represents it in the tree, and extracting the unique path between two
tokens together with its edge labels.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from .conllu import ParsedSentence, validate_tree
from .errors import SdpforgeError


class InvalidTree(SdpforgeError):
    pass


class EmptySpan(SdpforgeError):
    pass


class SpanOutOfRange(SdpforgeError):
    pass


class IndexOutOfRange(SdpforgeError):
    pass


@dataclass(frozen=True)
class PathEdge:
    """One tree edge on a path; ``direction`` is relative to walking
    from the path's source toward its target ("up" = toward the root)."""

    governor: int
    dependent: int
    deprel: str
    direction: str  # "up" | "down"


@dataclass(frozen=True)
class DependencyPath:
    source: int
    target: int
    edges: tuple[PathEdge, ...]

    def __len__(self) -> int:
        return len(self.edges)


def propagate_conj(sentence: ParsedSentence) -> ParsedSentence:
    """Reattach conjuncts to their list's external governor.

    Repeatedly, every token whose deprel is "conj" and whose governor is
    neither another conjunct nor the root takes over its governor's head and
    deprel. Conjuncts of the root keep "conj" (rewriting them would create a
    second root). Token count, order, and forms are unchanged; the result is
    still a valid single-root tree.
    """
    if validate_tree(sentence):
        raise InvalidTree(f"{sentence.sent_id}: input is not a valid tree")
    tokens = list(sentence.tokens)
    changed = True
    while changed:
        changed = False
        for i, token in enumerate(tokens):
            if token.deprel != "conj" or token.head == 0:
                continue
            governor = tokens[token.head - 1]
            if governor.deprel in ("conj", "root"):
                continue
            tokens[i] = replace(token, head=governor.head, deprel=governor.deprel)
            changed = True
    return sentence.with_tokens(tokens)


def span_head(sentence: ParsedSentence, start: int, end: int) -> int:
    """Token (1-based index) representing the 0-based span [start, end).

    Returns the leftmost token whose head lies outside the span; in a tree
    at least one such token always exists.
    """
    if start >= end:
        raise EmptySpan(f"empty span [{start}, {end})")
    if start < 0 or end > len(sentence.tokens):
        raise SpanOutOfRange(f"span [{start}, {end}) outside 0..{len(sentence.tokens)}")
    lo, hi = start + 1, end  # 1-based inclusive token indices covered
    for token in sentence.tokens[start:end]:
        if token.head == 0 or token.head < lo or token.head > hi:
            return token.index
    raise InvalidTree(f"{sentence.sent_id}: span [{start}, {end}) has no outside-headed token")


def _depths(sentence: ParsedSentence) -> list[int]:
    n = len(sentence.tokens)
    depths = [-1] * (n + 1)
    depths[0] = 0
    for index in range(1, n + 1):
        chain = []
        current = index
        while depths[current] < 0:
            chain.append(current)
            current = sentence.tokens[current - 1].head
        base = depths[current]
        for offset, node in enumerate(reversed(chain), start=1):
            depths[node] = base + offset
    return depths


def shortest_path(sentence: ParsedSentence, a: int, b: int) -> DependencyPath:
    """The unique tree path from token a to token b (1-based indices).

    Both endpoints ascend to their lowest common ancestor; a's ascent edges
    are directed "up", b's descent edges "down".
    """
    n = len(sentence.tokens)
    for index in (a, b):
        if not 1 <= index <= n:
            raise IndexOutOfRange(f"token index {index} outside 1..{n}")
    depths = _depths(sentence)

    def parent_edge(node: int, direction: str) -> PathEdge:
        token = sentence.tokens[node - 1]
        return PathEdge(governor=token.head, dependent=node, deprel=token.deprel, direction=direction)

    up: list[PathEdge] = []
    down: list[PathEdge] = []
    x, y = a, b
    while depths[x] > depths[y]:
        up.append(parent_edge(x, "up"))
        x = sentence.tokens[x - 1].head
    while depths[y] > depths[x]:
        down.append(parent_edge(y, "down"))
        y = sentence.tokens[y - 1].head
    while x != y:
        up.append(parent_edge(x, "up"))
        down.append(parent_edge(y, "down"))
        x = sentence.tokens[x - 1].head
        y = sentence.tokens[y - 1].head
    return DependencyPath(source=a, target=b, edges=tuple(up + down[::-1]))


def path_labels(path: DependencyPath) -> Counter[str]:
    """Multiset of subtype-stripped deprels on the path (direction dropped)."""
    return Counter(edge.deprel.split(":", 1)[0] for edge in path.edges)


__all__ = [
    "DependencyPath",
    "EmptySpan",
    "IndexOutOfRange",
    "InvalidTree",
    "PathEdge",
    "SpanOutOfRange",
    "path_labels",
    "propagate_conj",
    "shortest_path",
    "span_head",
]
