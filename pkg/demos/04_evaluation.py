"""Evaluation machinery: tagger precision/coverage, PR sweeps, feature
correlation.

Runs the three dictionary taggers over the bundled labeled corpus, then
demonstrates the threshold sweep, information gain and phi-coefficient
tooling on synthetic selection results.

Run: python demos/04_evaluation.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import random
from pathlib import Path

from tableseek import (
    Query,
    default_entity_name_lexicon,
    default_superlative_lexicon,
    default_type_dictionary,
    tdl_er_dp_tag,
    tdl_er_tag,
    tdl_tag,
)
from tableseek.evaluation import (
    ScoredQuery,
    contingency_from,
    information_gain,
    phi_coefficient,
    pr_curve,
    read_labeled_queries,
    tagging_metrics,
)

corpus_path = Path(__file__).parent.parent / "tests/fixtures/labeled_queries.tsv"
corpus = read_labeled_queries(corpus_path)
td = default_type_dictionary()
sl = default_superlative_lexicon()
el = default_entity_name_lexicon()

print(f"labeled corpus: {len(corpus)} queries")
print(f"{'tagger':12}{'tp':>5}{'fp':>5}{'precision':>11}{'coverage':>10}")
for name, run in (
    ("lookup", lambda q: tdl_tag(q, td, sl)),
    ("+entity", lambda q: tdl_er_tag(q, td, sl, el)),
    ("+root", lambda q: tdl_er_dp_tag(q, td, sl, el)[0]),
):
    outputs = [(run(Query.from_text(item.query)), item.gold) for item in corpus]
    m = tagging_metrics(outputs)
    print(
        f"{name:12}{m.tp:>5}{m.fp:>5}{m.precision:>11.4f}{m.coverage:>10.4f}"
    )
print()

# threshold sweep over synthetic per-query selection outcomes
rng = random.Random(0)
scored = []
for _ in range(200):
    good = rng.random() < 0.55
    score = rng.betavariate(5, 2) if good else rng.betavariate(2, 4)
    scored.append(ScoredQuery(score, int(good), good or rng.random() < 0.3))
print("precision/recall sweep:")
print(f"{'theta':>6}{'precision':>11}{'recall':>9}")
for point in pr_curve(scored, [i / 10 for i in range(1, 10)]):
    precision = "-" if point.precision is None else f"{point.precision:.3f}"
    recall = "-" if point.recall is None else f"{point.recall:.3f}"
    print(f"{point.theta:>6.1f}{precision:>11}{recall:>9}")
print()

# feature diagnostics on synthetic boolean features
labels = [rng.randint(0, 1) for _ in range(500)]
strong = [y if rng.random() < 0.9 else 1 - y for y in labels]
weak = [y if rng.random() < 0.6 else 1 - y for y in labels]
noise = [rng.randint(0, 1) for _ in range(500)]
print(f"{'feature':10}{'info gain':>11}{'phi':>8}")
for name, values in (("strong", strong), ("weak", weak), ("noise", noise)):
    gain = information_gain(values, labels)
    phi = phi_coefficient(contingency_from(values, labels))
    print(f"{name:10}{gain:>11.4f}{phi:>8.3f}")
