"""Parse a CoNLL-U file, inspect the tree, validate it, write it back.

Run from the repository root:  python3 demos/01_parse_validate_roundtrip.py
"""

from pathlib import Path

from sdpforge.conllu import parse_conllu, parse_conllu_file, serialize_conllu, validate_tree

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

# Every sentence block becomes a ParsedSentence; problems are collected, not
# raised, so a whole treebank can be checked in one pass.
result = parse_conllu_file(FIXTURES / "lfp_generalization.conllu")
print(f"parsed {len(result.sentences)} sentence(s), {len(result.issues)} issue(s)")

sentence = result.sentences[0]
print(f"sent_id={sentence.sent_id} domain={sentence.domain} tokens={len(sentence)}")
for token in sentence.tokens[:5]:
    governor = sentence.token(token.head).form if token.head else "<root>"
    print(f"  {token.index:>2} {token.form:<18} --{token.deprel}--> {governor}")

# validate_tree returns violations as data; an empty list means a good tree
print("violations:", validate_tree(sentence))

# serialization is byte-exact for files that parse cleanly
text = (FIXTURES / "lfp_generalization.conllu").read_text(encoding="utf-8")
assert serialize_conllu(result.sentences) == text
print("round-trip: byte-identical")

# malformed input: every problem is reported with its sent_id and line
broken = parse_conllu("1\ta\t_\tX\t_\t_\t2\tdet\t_\t_\n2\tb\t_\tX\t_\t_\t1\tdet\t_\t_\n")
for issue in broken.issues:
    print("issue:", issue)
