"""Gold-corpus ingestion, candidate pairs, and path statistics.

Run from the repository root:  python3 demos/03_corpus_stats.py
"""

from pathlib import Path

from sdpforge.conllu import parse_conllu_file
from sdpforge.corpus import align, candidate_pairs, dataset_stats, load_corpus
from sdpforge.pathstats import (
    GROUP_BY_RELATION,
    label_distribution,
    length_histogram,
    select_labels,
)
from sdpforge.trees import propagate_conj

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

records = load_corpus(FIXTURES / "mini_corpus.jsonl")
parses = parse_conllu_file(FIXTURES / "mini_corpus.conllu").raise_if_errors()

# candidate pairs: every ordered entity pair, unannotated ones as no-relation
record = records[2]
print(f"{record.doc_id}: {len(record.entities)} entities ->")
for head, tail, label in candidate_pairs(record):
    print(f"  {head} -> {tail}: {label}")

# dataset-level counts, grouped by (domain, split)
stats = dataset_stats({"train": records})
print("\n" + stats.to_tsv())

# path statistics run on conj-propagated trees
aligned = align(records, [propagate_conj(p) for p in parses])
labels = label_distribution(aligned, GROUP_BY_RELATION)
lengths = length_histogram(aligned, GROUP_BY_RELATION)
print("label counts on entity paths:")
print(labels.to_tsv())
print("path length histogram:")
print(lengths.to_tsv())

# the ranked label whitelist used for silver generation
print("top-3 labels by count:", select_labels(labels, k=3))
