"""CoNLL-U reading, validation, and writing.

Only the basic dependency tree is interpreted: multiword-token lines
(``1-2``) and empty-node lines (``1.1``) are carried through verbatim but
take no part in tree computations, and the DEPS column (enhanced graph) is
never read. Parsing collects every problem it finds instead of stopping at
the first one, so a whole treebank can be QA'd in one pass.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .errors import SdpforgeError

# Issue / violation codes shared by the parser and validate_tree.
MALFORMED_LINE = "MalformedLine"
NON_INTEGER_HEAD = "NonIntegerHead"
HEAD_OUT_OF_RANGE = "HeadOutOfRange"
MULTIPLE_ROOTS = "MultipleRoots"
NO_ROOT = "NoRoot"
CYCLE_DETECTED = "CycleDetected"


class ConlluError(SdpforgeError):
    """Raised by raise_if_errors() with the full issue list attached."""

    def __init__(self, issues: list["Issue"]):
        self.issues = issues
        preview = "; ".join(str(i) for i in issues[:3])
        more = f" (+{len(issues) - 3} more)" if len(issues) > 3 else ""
        super().__init__(f"{len(issues)} CoNLL-U issue(s): {preview}{more}")


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    sent_id: str
    line: int  # 1-based line number in the input stream, 0 if block-level

    def __str__(self) -> str:
        return f"{self.code} [{self.sent_id}:{self.line}] {self.message}"


@dataclass(frozen=True)
class Token:
    """One syntactic word. ``head`` is 0 for the root, else a 1-based index."""

    index: int
    form: str
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: str = "_"
    head: int = 0
    deprel: str = "root"
    deps: str = "_"
    misc: str = "_"

    def bare_deprel(self) -> str:
        """Deprel with any subtype suffix (text after ':') removed."""
        return self.deprel.split(":", 1)[0]


@dataclass
class ParsedSentence:
    """A dependency tree plus the verbatim non-token lines of its block.

    ``passthrough`` stores (position, line) pairs where position counts how
    many token lines precede the line; serialization re-inserts them there,
    which is what makes parse -> serialize byte-exact.
    """

    sent_id: str
    tokens: list[Token]
    domain: str = "unknown"
    passthrough: list[tuple[int, str]] = field(default_factory=list)

    @property
    def raw_comments(self) -> list[str]:
        return [line for _, line in self.passthrough if line.startswith("#")]

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> Token:
        """Token by 1-based index."""
        return self.tokens[index - 1]

    def head_of(self, index: int) -> int:
        return self.tokens[index - 1].head

    def with_tokens(self, tokens: list[Token]) -> "ParsedSentence":
        return ParsedSentence(
            sent_id=self.sent_id,
            tokens=tokens,
            domain=self.domain,
            passthrough=list(self.passthrough),
        )


@dataclass
class ParseResult:
    sentences: list[ParsedSentence]
    issues: list[Issue]

    @property
    def ok(self) -> bool:
        return not self.issues

    def __iter__(self) -> Iterator[ParsedSentence]:
        return iter(self.sentences)

    def __len__(self) -> int:
        return len(self.sentences)

    def raise_if_errors(self) -> list[ParsedSentence]:
        if self.issues:
            raise ConlluError(self.issues)
        return self.sentences


def _is_passthrough_id(token_id: str) -> bool:
    # multiword ranges ("2-3") and empty nodes ("2.1")
    return "-" in token_id or "." in token_id


def _parse_block(
    lines: list[tuple[int, str]],
    block_index: int,
    default_domain: str,
) -> tuple[ParsedSentence | None, list[Issue]]:
    sent_id = f"s{block_index}"
    domain = default_domain
    tokens: list[Token] = []
    passthrough: list[tuple[int, str]] = []
    issues: list[Issue] = []

    for lineno, line in lines:
        if line.startswith("#"):
            passthrough.append((len(tokens), line))
            body = line.lstrip("#").strip()
            if "=" in body:
                key, value = body.split("=", 1)
                key, value = key.strip(), value.strip()
                if key == "sent_id":
                    sent_id = value
                elif key == "domain":
                    domain = value
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            issues.append(Issue(MALFORMED_LINE, f"expected 10 columns, got {len(cols)}", sent_id, lineno))
            continue
        if _is_passthrough_id(cols[0]):
            passthrough.append((len(tokens), line))
            continue
        try:
            index = int(cols[0])
        except ValueError:
            issues.append(Issue(MALFORMED_LINE, f"non-integer token id {cols[0]!r}", sent_id, lineno))
            continue
        if index != len(tokens) + 1:
            issues.append(Issue(MALFORMED_LINE, f"token id {index} out of sequence", sent_id, lineno))
            continue
        try:
            head = int(cols[6])
        except ValueError:
            issues.append(Issue(NON_INTEGER_HEAD, f"head {cols[6]!r} is not an integer", sent_id, lineno))
            continue
        if head < 0:
            issues.append(Issue(HEAD_OUT_OF_RANGE, f"negative head {head}", sent_id, lineno))
            continue
        deprel = cols[7].lower()
        if not deprel or deprel == "_":
            issues.append(Issue(MALFORMED_LINE, "empty deprel", sent_id, lineno))
            continue
        tokens.append(
            Token(
                index=index,
                form=cols[1],
                lemma=cols[2],
                upos=cols[3],
                xpos=cols[4],
                feats=cols[5],
                head=head,
                deprel=deprel,
                deps=cols[8],
                misc=cols[9],
            )
        )

    if issues:
        return None, issues

    sentence = ParsedSentence(sent_id=sent_id, tokens=tokens, domain=domain, passthrough=passthrough)
    first_line = lines[0][0] if lines else 0
    structural = [
        Issue(v.code, v.message, sent_id, first_line) for v in validate_tree(sentence)
    ]
    if structural:
        return None, structural
    return sentence, []


def parse_conllu(text: str | TextIO, default_domain: str = "unknown") -> ParseResult:
    """Parse a CoNLL-U stream into sentences, collecting all issues.

    Blocks are separated by blank lines. A block that produces any issue is
    dropped from ``sentences`` (its issues keep the sent_id and line number)
    and parsing continues with the next block. The sentence domain is read
    from a ``# domain = X`` comment when present, else ``default_domain``.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    sentences: list[ParsedSentence] = []
    issues: list[Issue] = []
    block: list[tuple[int, str]] = []
    block_index = 1

    def flush() -> None:
        nonlocal block_index
        if not block:
            return
        sentence, block_issues = _parse_block(block, block_index, default_domain)
        if sentence is not None:
            sentences.append(sentence)
        issues.extend(block_issues)
        block_index += 1
        block.clear()

    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if line == "":
            flush()
        else:
            block.append((lineno, line))
    flush()
    return ParseResult(sentences=sentences, issues=issues)


def parse_conllu_file(path, default_domain: str = "unknown") -> ParseResult:
    with open(path, encoding="utf-8") as f:
        return parse_conllu(f, default_domain=default_domain)


def _token_line(token: Token) -> str:
    return "\t".join(
        (
            str(token.index),
            token.form,
            token.lemma,
            token.upos,
            token.xpos,
            token.feats,
            str(token.head),
            token.deprel,
            token.deps,
            token.misc,
        )
    )


def serialize_conllu(sentences: Iterable[ParsedSentence]) -> str:
    """Render sentences back to CoNLL-U text (one blank line after each)."""
    out: list[str] = []
    for sentence in sentences:
        by_position: dict[int, list[str]] = {}
        for position, line in sentence.passthrough:
            by_position.setdefault(position, []).append(line)
        for position in range(len(sentence.tokens) + 1):
            out.extend(by_position.get(position, ()))
            if position < len(sentence.tokens):
                out.append(_token_line(sentence.tokens[position]))
        out.append("")
    return "\n".join(out) + "\n" if out else ""


@dataclass(frozen=True)
class Violation:
    code: str
    token_index: int  # 0 when no single token is at fault
    message: str

    def __str__(self) -> str:
        return f"{self.code} (token {self.token_index}): {self.message}"


def validate_tree(sentence: ParsedSentence) -> list[Violation]:
    """Check the single-root / acyclicity / head-range invariants.

    Returns an empty list iff the sentence is a well-formed tree. Violations
    are data, not exceptions: treebank QA wants all of them.
    """
    violations: list[Violation] = []
    n = len(sentence.tokens)
    roots = []
    out_of_range = False
    for position, token in enumerate(sentence.tokens, start=1):
        if token.index != position:
            violations.append(Violation(MALFORMED_LINE, token.index, f"index {token.index} at position {position}"))
        if not token.deprel:
            violations.append(Violation(MALFORMED_LINE, token.index, "empty deprel"))
        if token.head > n or token.head < 0:
            violations.append(Violation(HEAD_OUT_OF_RANGE, token.index, f"head {token.head} outside 0..{n}"))
            out_of_range = True
        if token.head == 0:
            roots.append(token.index)
    if not roots and n > 0:
        violations.append(Violation(NO_ROOT, 0, "no token has head 0"))
    elif len(roots) > 1:
        violations.append(Violation(MULTIPLE_ROOTS, roots[1], f"roots at {roots}"))
    if out_of_range:
        return violations  # head chains cannot be walked safely

    # every token must reach 0 by following heads, without revisiting
    for token in sentence.tokens:
        seen = set()
        current = token.index
        while current != 0:
            if current in seen:
                violations.append(Violation(CYCLE_DETECTED, token.index, f"head chain revisits token {current}"))
                return violations
            seen.add(current)
            current = sentence.tokens[current - 1].head
    return violations


def retag_domain(sentence: ParsedSentence, domain: str) -> ParsedSentence:
    out = sentence.with_tokens(list(sentence.tokens))
    out.domain = domain
    return out


__all__ = [
    "ConlluError",
    "Issue",
    "ParseResult",
    "ParsedSentence",
    "Token",
    "Violation",
    "parse_conllu",
    "parse_conllu_file",
    "serialize_conllu",
    "validate_tree",
    "retag_domain",
    "MALFORMED_LINE",
    "NON_INTEGER_HEAD",
    "HEAD_OUT_OF_RANGE",
    "MULTIPLE_ROOTS",
    "NO_ROOT",
    "CYCLE_DETECTED",
]
