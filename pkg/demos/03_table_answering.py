"""End to end: extract tables from HTML, featurize, select, snip.

Builds a tiny two-table page (a filmography and a co-star list on the
same URL), shows that plain text-match features cannot tell them apart,
and that structure-aware matching picks the right one. Finishes with the
display snippet for a filtered query.

Run: python demos/03_table_answering.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))

from helpers_inline import FILMOGRAPHY_PAGE
import numpy as np

from tableseek import (
    Intent,
    Query,
    TaggedQuery,
    featurize,
    generate_snippet,
    select_answer,
)
from tableseek.features import FEATURE_NAMES
from tableseek.selector import SelectorConfig, train_selector
from tableseek.tables import CandidatePool, extract_tables

film_table, costar_table = extract_tables(
    FILMOGRAPHY_PAGE, url="http://example.org/tom-cruise-movies",
    title="Tom Cruise Movies",
)
print("extracted two relational tables from one page:")
for table in (film_table, costar_table):
    subject = table.column_names[table.subject_col]
    print(
        f"  columns={list(table.column_names)} subject column={subject!r} "
        f"rows={table.num_rows}"
    )
print()

# a tagged query as the neural tagger would produce it
tagged = TaggedQuery(
    Query.from_text("tom cruise movies"), Intent.LIST, (2, 3), "film", 0.9
)

fa = featurize(tagged, film_table).as_dict()
fb = featurize(tagged, costar_table).as_dict()
interesting = [
    "qInPageTitle", "qInColNames", "qInLeftmostCol",
    "SubjectColName_SET_Match", "SubjectColValues_SET_Match",
]
print(f"{'feature':30}{'filmography':>12}{'co-stars':>10}")
for name in interesting:
    print(f"{name:30}{fa[name]:>12.1f}{fb[name]:>10.1f}")
print()

# train a small selector on synthetic pairs where the label follows the
# subject-column matches, then select over the two candidates
rng = np.random.default_rng(0)
pairs = []
for _ in range(300):
    row = np.zeros(len(FEATURE_NAMES))
    row[FEATURE_NAMES.index("numRows")] = rng.integers(2, 25)
    match = rng.random() < 0.5
    row[FEATURE_NAMES.index("SubjectColName_SET_Match")] = float(match)
    row[FEATURE_NAMES.index("SubjectColValues_SET_Match")] = (
        float(rng.integers(1, 4)) if match else 0.0
    )
    pairs.append((tuple(row), int(match)))
selector = train_selector(pairs, SelectorConfig(rounds=40, depth=3)).model
selector.feature_names = FEATURE_NAMES

pool = CandidatePool(tagged, (film_table, costar_table))
result = select_answer(tagged, pool, selector, theta=0.5)
print("selection scores:", [f"{s:.3f}" for s in result.all_scores])
winner = "filmography" if result.best_table is film_table else "co-stars"
print(f"selected table: {winner} (score {result.best_score:.3f})")
print()

# a filtered query: only the 2017 row answers it
filtered = TaggedQuery(
    Query.from_text("2017 tom cruise movies"), Intent.LIST, (3, 4), "film", 0.9
)
snippet = generate_snippet(filtered, film_table, m=3, n=3)
payload = snippet.to_dict(film_table)
print("snippet for '2017 tom cruise movies':")
print("  columns:", payload["columns"])
for row in payload["rows"]:
    print("  ", row)
