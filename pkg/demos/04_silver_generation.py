"""Silver instance generation: sample, extract, cap, mark, hold out.

Run from the repository root:  python3 demos/04_silver_generation.py
"""

from pathlib import Path

from sdpforge.conllu import parse_conllu_file
from sdpforge.silver import (
    DEFAULT_LABEL_WHITELIST,
    extract_triplets,
    generate_silver,
    mark_instance,
    unmark_instance,
)
from sdpforge.trees import propagate_conj

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

# one instance per whitelisted tree edge: governor is e1, dependent is e2
(sentence,) = parse_conllu_file(FIXTURES / "lfp_generalization.conllu").raise_if_errors()
sentence = propagate_conj(sentence)
print(f"whitelist: {DEFAULT_LABEL_WHITELIST}")
for t in extract_triplets(sentence, DEFAULT_LABEL_WHITELIST):
    head = sentence.token(t.head_index).form
    dep = sentence.token(t.dep_index).form
    print(f"  {t.deprel}({head}, {dep})")

# marker serialization is invertible
tokens = [t.form for t in sentence.tokens]
marked = mark_instance(tokens, (1, 2), (3, 4), "appos")
print("\nmarked:", " ".join(marked.tokens[:9]), "...")
assert unmark_instance(marked)[0] == tokens

# the full pipeline: equal per-domain sampling, per-sentence cap, holdout
parses = parse_conllu_file(FIXTURES / "mini_corpus.conllu").raise_if_errors()
pools = {}
for parse in parses:
    pools.setdefault(parse.domain, []).append(propagate_conj(parse))
train, holdout = generate_silver(pools, n_per_domain=1, seed=4012)
print(f"\ngenerated {len(train)} instances from {sorted(pools)}")
for obj in train[:4]:
    print(f"  [{obj['domain']}] {obj['label']}: e1={obj['e1']} e2={obj['e2']}")
