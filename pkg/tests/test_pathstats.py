import json

import pytest

from sdpforge.conllu import parse_conllu_file
from sdpforge.corpus import align, load_corpus
from sdpforge.pathstats import (
    GROUP_BY_DOMAIN,
    GROUP_BY_RELATION,
    KIND_LABELS,
    KIND_LENGTHS,
    PathStatsTable,
    WrongTableKind,
    label_distribution,
    length_histogram,
    select_labels,
)
from sdpforge.trees import propagate_conj


@pytest.fixture
def aligned(fixtures):
    records = load_corpus(fixtures / "mini_corpus.jsonl")
    parses = parse_conllu_file(fixtures / "mini_corpus.conllu").raise_if_errors()
    return align(records, [propagate_conj(p) for p in parses])


# Expected values below are walked by hand on the fixture trees.

def test_label_distribution_by_domain(aligned):
    table = label_distribution(aligned, GROUP_BY_DOMAIN)
    assert table.kind == KIND_LABELS
    assert table.cells[("news", "nmod")] == 1
    assert table.cells[("literature", "appos")] == 1
    assert table.cells[("literature", "nmod")] == 1
    assert table.cells[("ai", "appos")] == 2
    assert table.cells[("ai", "nmod")] == 4
    assert table.cells[("ai", "nsubj")] == 1
    assert table.total_pairs == 8


def test_label_distribution_by_relation(aligned):
    table = label_distribution(aligned, GROUP_BY_RELATION)
    assert table.cells[("named", "appos")] == 2
    assert table.cells[("type-of", "nmod")] == 2
    assert table.cells[("type-of", "nsubj")] == 1
    assert table.cells[("role", "appos")] == 1
    assert table.cells[("part-of", "nmod")] == 3


def test_label_distribution_empty():
    table = label_distribution([], GROUP_BY_DOMAIN)
    assert table.cells == {} and table.total_pairs == 0


def test_length_histogram_by_relation(aligned):
    table = length_histogram(aligned, GROUP_BY_RELATION)
    assert table.kind == KIND_LENGTHS
    assert table.cells[("named", 1)] == 2
    assert table.cells[("type-of", 1)] == 1
    assert table.cells[("type-of", 2)] == 1
    assert table.cells[("role", 2)] == 1
    assert table.cells[("part-of", 1)] == 3


def test_length_histogram_group_sums_equal_relation_counts(aligned):
    table = length_histogram(aligned, GROUP_BY_DOMAIN)
    relation_counts = {}
    for record, _ in aligned:
        relation_counts[record.domain] = relation_counts.get(record.domain, 0) + len(record.relations)
    for domain, expected in relation_counts.items():
        assert table.group_total(domain) == expected
    assert table.total_pairs == sum(relation_counts.values())


def test_label_totals_equal_sum_of_path_lengths(aligned):
    labels = label_distribution(aligned, GROUP_BY_DOMAIN)
    lengths = length_histogram(aligned, GROUP_BY_DOMAIN)
    for domain in {record.domain for record, _ in aligned}:
        total_edges = sum(
            count * length for (g, length), count in lengths.cells.items() if g == domain
        )
        assert labels.group_total(domain) == total_edges


def test_domain_grouping_sums_to_global(aligned):
    by_domain = label_distribution(aligned, GROUP_BY_DOMAIN)
    global_counts = {}
    for (_, label), count in by_domain.cells.items():
        global_counts[label] = global_counts.get(label, 0) + count
    flat = label_distribution(
        [(r, p) for r, p in aligned], GROUP_BY_DOMAIN
    )
    assert {k: flat.key_total(k) for k in global_counts} == global_counts


def test_multiplicity_switch():
    # a path visiting two nmod edges counts 2 with multiplicity, 1 without
    from sdpforge.conllu import ParsedSentence, Token
    from sdpforge.corpus import CorpusRecord, EntitySpan, RelationInstance

    sentence = ParsedSentence(
        sent_id="m",
        tokens=[
            Token(index=1, form="a", head=0, deprel="root"),
            Token(index=2, form="b", head=1, deprel="nmod"),
            Token(index=3, form="c", head=2, deprel="nmod"),
        ],
    )
    record = CorpusRecord(
        doc_id="m",
        domain="d",
        tokens=["a", "b", "c"],
        entities=[EntitySpan("x", 0, 1, "t"), EntitySpan("y", 2, 3, "t")],
        relations=[RelationInstance("x", "y", "r")],
    )
    with_mult = label_distribution([(record, sentence)], GROUP_BY_DOMAIN)
    without = label_distribution([(record, sentence)], GROUP_BY_DOMAIN, count_multiplicity=False)
    assert with_mult.cells[("d", "nmod")] == 2
    assert without.cells[("d", "nmod")] == 1


# ---------------------------------------------------------------------------
# whitelist selection

def _aggregate_label_table() -> PathStatsTable:
    # aggregate counts in the ballpark of a full multi-domain corpus
    table = PathStatsTable(kind=KIND_LABELS, group_by=GROUP_BY_DOMAIN)
    for label, count in {
        "nmod": 1653,
        "nsubj": 1148,
        "obl": 1086,
        "obj": 815,
        "appos": 623,
        "acl": 388,
        "compound": 381,
        "advcl": 236,
        "xcomp": 117,
        "flat": 87,
    }.items():
        table.add("all", label, count)
    return table


def test_select_labels_top5_is_default_whitelist():
    ranked = select_labels(_aggregate_label_table(), k=5)
    assert set(ranked) == {"nsubj", "obj", "obl", "nmod", "appos"}
    assert ranked == ["nmod", "nsubj", "obl", "obj", "appos"]  # count order


def test_select_labels_empty_table():
    assert select_labels(PathStatsTable(kind=KIND_LABELS, group_by=GROUP_BY_DOMAIN), k=5) == []


def test_select_labels_k_exceeds_distinct():
    table = _aggregate_label_table()
    ranked = select_labels(table, k=99)
    assert len(ranked) == 10
    counts = [table.key_total(label) for label in ranked]
    assert counts == sorted(counts, reverse=True)


def test_select_labels_min_count():
    assert select_labels(_aggregate_label_table(), min_count=600) == [
        "nmod",
        "nsubj",
        "obl",
        "obj",
        "appos",
    ]


def test_select_labels_rejects_length_table():
    with pytest.raises(WrongTableKind):
        select_labels(PathStatsTable(kind=KIND_LENGTHS, group_by=GROUP_BY_DOMAIN), k=5)


# ---------------------------------------------------------------------------
# emission and merge

def test_tsv_and_json_agree(aligned):
    table = label_distribution(aligned, GROUP_BY_RELATION)
    tsv_rows = [line.split("\t") for line in table.to_tsv().strip().splitlines()[1:]]
    json_rows = json.loads(table.to_json())["cells"]
    assert [[r["group"], str(r["key"]), str(r["count"])] for r in json_rows] == tsv_rows


def test_merge_is_order_independent(aligned):
    first = label_distribution(aligned[:2], GROUP_BY_DOMAIN)
    second = label_distribution(aligned[2:], GROUP_BY_DOMAIN)
    combined = label_distribution(aligned, GROUP_BY_DOMAIN)
    assert first.merged(second).cells == combined.cells
    assert second.merged(first).cells == combined.cells
