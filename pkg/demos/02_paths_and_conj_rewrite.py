"""Conjunction propagation, span heads, and shortest dependency paths.

Run from the repository root:  python3 demos/02_paths_and_conj_rewrite.py
"""

from pathlib import Path

from sdpforge.conllu import parse_conllu_file
from sdpforge.trees import path_labels, propagate_conj, shortest_path, span_head

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"


def load(name):
    (sentence,) = parse_conllu_file(FIXTURES / name).raise_if_errors()
    return sentence


# --- conjunct reattachment --------------------------------------------------
# "techniques including text mining, information retrieval, sentiment
# analysis": UD attaches retrieval/analysis under mining via conj; after the
# rewrite all three list elements hang off "techniques" with the list's
# original relation.
before = load("tech_conj_list.conllu")
after = propagate_conj(before)
for b, a in zip(before.tokens, after.tokens):
    if (b.head, b.deprel) != (a.head, a.deprel):
        print(
            f"{b.form}: {b.deprel}({before.token(b.head).form}) -> "
            f"{a.deprel}({after.token(a.head).form})"
        )

# --- span heads and paths ---------------------------------------------------
# the token that represents an entity span is the one whose governor lies
# outside the span; paths between those tokens carry the labels that matter
uk = load("uk_countries.conllu")
kingdom = span_head(uk, 8, 10)  # "United Kingdom"
countries = span_head(uk, 4, 6)  # "European countries"
path = shortest_path(uk, kingdom, countries)
print(f"\n{uk.token(kingdom).form} -> {uk.token(countries).form}: "
      f"{len(path)} edge(s), labels {sorted(path_labels(path))}")

professor = load("professor_appos.conllu")
john = span_head(professor, 0, 2)
university = span_head(professor, 10, 13)
path = shortest_path(professor, john, university)
print(f"{professor.token(john).form} -> {professor.token(university).form}: "
      f"{len(path)} edge(s), labels {sorted(path_labels(path))}")
for edge in path.edges:
    print(f"  {professor.token(edge.governor).form} -{edge.deprel}/{edge.direction}-> "
          f"{professor.token(edge.dependent).form}")
