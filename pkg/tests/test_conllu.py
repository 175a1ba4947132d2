import numpy as np
import pytest

from sdpforge.conllu import (
    CYCLE_DETECTED,
    HEAD_OUT_OF_RANGE,
    MALFORMED_LINE,
    MULTIPLE_ROOTS,
    NO_ROOT,
    NON_INTEGER_HEAD,
    ParsedSentence,
    Token,
    parse_conllu,
    parse_conllu_file,
    serialize_conllu,
    validate_tree,
)
from treegen import random_tree

ALL_FIXTURES = [
    "uk_countries.conllu",
    "professor_appos.conllu",
    "lfp_generalization.conllu",
    "tech_conj_list.conllu",
    "mini_corpus.conllu",
    "mwt_passthrough.conllu",
]


def test_single_token_sentence():
    result = parse_conllu("1\tHello\t_\tINTJ\t_\t_\t0\troot\t_\t_\n")
    assert result.ok
    (sentence,) = result.sentences
    assert len(sentence.tokens) == 1
    assert sentence.tokens[0].form == "Hello"
    assert sentence.tokens[0].head == 0


def test_conj_fixture_edges(fixtures):
    (sentence,) = parse_conllu_file(fixtures / "tech_conj_list.conllu").raise_if_errors()
    forms = {t.index: t.form for t in sentence.tokens}
    retrieval = next(t for t in sentence.tokens if t.form == "retrieval")
    mining = next(t for t in sentence.tokens if t.form == "mining")
    assert retrieval.deprel == "conj" and forms[retrieval.head] == "mining"
    assert mining.deprel == "nmod" and forms[mining.head] == "techniques"


@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_round_trip_byte_exact(fixtures, name):
    original = (fixtures / name).read_text(encoding="utf-8")
    result = parse_conllu(original)
    assert result.ok, result.issues
    assert serialize_conllu(result.sentences) == original


def test_serialize_empty_is_empty():
    assert serialize_conllu([]) == ""


def test_fifteen_token_fixture_order(fixtures):
    (sentence,) = parse_conllu_file(fixtures / "lfp_generalization.conllu").raise_if_errors()
    assert [t.index for t in sentence.tokens] == list(range(1, 16))
    text = serialize_conllu([sentence])
    token_lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    assert len(token_lines) == 15


def test_domain_comment_and_default(fixtures):
    (sentence,) = parse_conllu_file(fixtures / "uk_countries.conllu").sentences
    assert sentence.domain == "news"
    result = parse_conllu("1\tHi\t_\tINTJ\t_\t_\t0\troot\t_\t_\n", default_domain="music")
    assert result.sentences[0].domain == "music"


def test_mwt_lines_are_passthrough_only(fixtures):
    (sentence,) = parse_conllu_file(fixtures / "mwt_passthrough.conllu").raise_if_errors()
    assert [t.form for t in sentence.tokens] == ["vamos", "nos", "a", "el", "mar"]
    assert any(line.startswith("1-2") for _, line in sentence.passthrough)
    assert sentence.raw_comments[0].startswith("# sent_id")


def _block(rows: list[str]) -> str:
    return "\n".join(rows) + "\n"


def test_malformed_line_collected_and_block_dropped():
    bad = _block(["1\tonly\tthree"])
    good = _block(["1\tHi\t_\tINTJ\t_\t_\t0\troot\t_\t_"])
    result = parse_conllu(bad + "\n" + good)
    assert len(result.sentences) == 1
    assert [i.code for i in result.issues] == [MALFORMED_LINE]
    assert result.issues[0].line == 1


def test_non_integer_head():
    result = parse_conllu(_block(["1\tHi\t_\tINTJ\t_\t_\tx\troot\t_\t_"]))
    assert [i.code for i in result.issues] == [NON_INTEGER_HEAD]


def test_head_out_of_range():
    result = parse_conllu(_block(["1\tHi\t_\tINTJ\t_\t_\t9\troot\t_\t_"]))
    assert not result.sentences
    assert HEAD_OUT_OF_RANGE in [i.code for i in result.issues]


def test_multiple_roots_and_no_root():
    two_roots = _block(
        [
            "1\ta\t_\tX\t_\t_\t0\troot\t_\t_",
            "2\tb\t_\tX\t_\t_\t0\troot\t_\t_",
        ]
    )
    assert [i.code for i in parse_conllu(two_roots).issues] == [MULTIPLE_ROOTS]
    no_root = _block(
        [
            "1\ta\t_\tX\t_\t_\t2\tdet\t_\t_",
            "2\tb\t_\tX\t_\t_\t1\tdet\t_\t_",
        ]
    )
    codes = [i.code for i in parse_conllu(no_root).issues]
    assert NO_ROOT in codes


def test_cycle_detected_in_parse():
    text = _block(
        [
            "1\ta\t_\tX\t_\t_\t2\tdet\t_\t_",
            "2\tb\t_\tX\t_\t_\t1\tdet\t_\t_",
            "3\tc\t_\tX\t_\t_\t0\troot\t_\t_",
        ]
    )
    result = parse_conllu(text)
    assert not result.sentences
    assert any(i.code == CYCLE_DETECTED for i in result.issues)


def test_validate_tree_clean_fixture(fixtures):
    (sentence,) = parse_conllu_file(fixtures / "lfp_generalization.conllu").sentences
    assert validate_tree(sentence) == []


def test_validate_tree_smallest_cycle():
    sentence = ParsedSentence(
        sent_id="x",
        tokens=[
            Token(index=1, form="a", head=2, deprel="det"),
            Token(index=2, form="b", head=1, deprel="det"),
            Token(index=3, form="c", head=0, deprel="root"),
        ],
    )
    codes = [v.code for v in validate_tree(sentence)]
    assert codes == [CYCLE_DETECTED]


def test_deprel_lowercased_and_subtype_kept():
    result = parse_conllu(_block(["1\tHi\t_\tX\t_\t_\t0\tROOT\t_\t_"]))
    assert result.sentences[0].tokens[0].deprel == "root"
    result = parse_conllu(
        _block(
            [
                "1\ta\t_\tX\t_\t_\t2\tnmod:poss\t_\t_",
                "2\tb\t_\tX\t_\t_\t0\troot\t_\t_",
            ]
        )
    )
    token = result.sentences[0].tokens[0]
    assert token.deprel == "nmod:poss"
    assert token.bare_deprel() == "nmod"


def test_random_valid_trees_pass_validation():
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        sentence = random_tree(rng, int(rng.integers(1, 15)))
        assert validate_tree(sentence) == []


def test_random_trees_round_trip():
    rng = np.random.default_rng(7)
    sentences = [random_tree(rng, int(rng.integers(1, 25))) for _ in range(50)]
    text = serialize_conllu(sentences)
    reparsed = parse_conllu(text)
    assert reparsed.ok
    assert serialize_conllu(reparsed.sentences) == text
