"""Query-table features: baseline table-search features plus the
structure-aware match family.

Baseline qIn* features count distinct query tokens found verbatim in a
page field; the structure-aware features instead match the extracted
intent (PST, sought type, modifiers) against specific table fields using
token containment with singular/plural equivalence. That asymmetry is
what lets the structure-aware family separate tables the text features
cannot.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Query, TaggedQuery, TypeDictionary, cont, tokenize, tokens_equivalent
from .errors import ContractError, DataError
from .tables import WebTable

FEATURE_NAMES: tuple[str, ...] = (
    "numRows",
    "numCols",
    "emptyCellRatio",
    "columnNamesPresent",
    "tableImportance",
    "tablePageFraction",
    "srRank",
    "staticRank",
    "qInPageTitle",
    "qInTableTitle",
    "qInColNames",
    "qInLeftmostCol",
    "qInSecondLeftCol",
    "qInOtherCol",
    "qInSurrText",
    "SubjectColName_SET_Match",
    "SubjectColValues_SET_Match",
    "SectionHeadings_SET_Match",
    "AllHeadings_SET_Match",
    "PremodPostmod_MaxColHits",
    "PremodPostmod_FullMatch",
    "PremodPostmod_MissingTokens",
    "PremodPostmod_IdfMissingFrac",
)

_BOOLEAN_FEATURES = {
    "columnNamesPresent",
    "SubjectColName_SET_Match",
    "SectionHeadings_SET_Match",
    "AllHeadings_SET_Match",
    "PremodPostmod_FullMatch",
}


@dataclass(frozen=True)
class FeatureVector:
    """Named feature values in a fixed order."""

    values: tuple[float, ...]

    NAMES = FEATURE_NAMES

    def __post_init__(self):
        if len(self.values) != len(FEATURE_NAMES):
            raise ContractError(
                f"expected {len(FEATURE_NAMES)} features, got {len(self.values)}"
            )
        for name, value in zip(FEATURE_NAMES, self.values):
            if not math.isfinite(value):
                raise ContractError(f"feature {name} is not finite: {value}")
            if name in _BOOLEAN_FEATURES and value not in (0.0, 1.0):
                raise ContractError(f"feature {name} must be 0 or 1")

    def __getitem__(self, name: str) -> float:
        return self.values[FEATURE_NAMES.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))

    @classmethod
    def from_dict(cls, record: dict) -> "FeatureVector":
        missing = set(FEATURE_NAMES) - set(record)
        if missing:
            raise DataError(f"feature record missing {sorted(missing)}")
        return cls(tuple(float(record[name]) for name in FEATURE_NAMES))


class IdfTable:
    """Smoothed inverse document frequencies over table cell text.

    idf(token) = log((N + 1) / (df + 1)) + 1. With no statistics loaded
    every token weighs 1 (uniform fallback).
    """

    def __init__(self, n_docs: int = 0, df: dict[str, int] | None = None):
        if n_docs < 0:
            raise DataError("corpus size must be non-negative")
        self.n_docs = n_docs
        self.df = dict(df or {})

    def idf(self, token: str) -> float:
        if self.n_docs == 0:
            return 1.0
        return math.log((self.n_docs + 1) / (self.df.get(token, 0) + 1)) + 1.0

    @classmethod
    def from_tables(cls, tables: Iterable[WebTable]) -> "IdfTable":
        df: dict[str, int] = {}
        n = 0
        for table in tables:
            n += 1
            seen = set()
            for row in table.cells:
                for cell in row:
                    seen.update(tokenize(cell))
            for token in seen:
                df[token] = df.get(token, 0) + 1
        return cls(n, df)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(f"N={self.n_docs}\n")
            for token in sorted(self.df):
                handle.write(f"{token}\t{self.df[token]}\n")

    @classmethod
    def load(cls, path) -> "IdfTable":
        n_docs = None
        df: dict[str, int] = {}
        with open(path, encoding="utf-8") as handle:
            for raw in handle:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if line.startswith("N="):
                    n_docs = int(line[2:])
                    continue
                token, _, count = line.partition("\t")
                df[token] = int(count)
        if n_docs is None:
            raise DataError(f"idf file {path} missing 'N=' header")
        return cls(n_docs, df)


UNIFORM_IDF = IdfTable()


def _distinct_query_tokens_in(q_toks: Sequence[str], field_text: str) -> int:
    field_tokens = set(tokenize(field_text))
    return sum(1 for tok in set(q_toks) if tok in field_tokens)


def baseline_features(q: Query, t: WebTable) -> dict[str, float]:
    """The previously-proposed table search features.

    Text-match features count distinct query tokens present verbatim in
    each field; the rest describe table quality, importance and page
    rank.
    """
    total = t.num_rows * t.num_cols
    empty = sum(1 for row in t.cells for cell in row if not cell.strip())
    leftmost = " ".join(t.column(0))
    second = " ".join(t.column(1)) if t.num_cols > 1 else ""
    other = " ".join(
        cell for j in range(2, t.num_cols) for cell in t.column(j)
    )
    return {
        "numRows": float(t.num_rows),
        "numCols": float(t.num_cols),
        "emptyCellRatio": empty / total,
        "columnNamesPresent": 1.0 if t.column_names else 0.0,
        "tableImportance": 1.0 / t.doc.num_tables_on_page,
        "tablePageFraction": min(
            1.0, t.table_char_length / t.doc.page_text_length
        ),
        "srRank": float(t.doc.sr_rank),
        "staticRank": float(t.doc.static_rank),
        "qInPageTitle": float(_distinct_query_tokens_in(q.toks, t.doc.title)),
        "qInTableTitle": float(_distinct_query_tokens_in(q.toks, t.caption)),
        "qInColNames": float(
            _distinct_query_tokens_in(q.toks, " ".join(t.column_names))
        ),
        "qInLeftmostCol": float(_distinct_query_tokens_in(q.toks, leftmost)),
        "qInSecondLeftCol": float(_distinct_query_tokens_in(q.toks, second)),
        "qInOtherCol": float(_distinct_query_tokens_in(q.toks, other)),
        "qInSurrText": float(
            _distinct_query_tokens_in(q.toks, t.surrounding_text)
        ),
    }


def _set_name_token_lists(
    tq: TaggedQuery, td: TypeDictionary | None
) -> list[tuple[str, ...]]:
    """Token lists denoting the sought type: the PST plus the type names."""
    targets = [tuple(tq.pst_tokens)]
    if td is not None and tq.set_type in td:
        targets.extend(sorted(td.names_of(tq.set_type)))
    else:
        type_toks = tuple(tokenize(tq.set_type))
        if type_toks:
            targets.append(type_toks)
    return targets


def _contains_set(field_text: str, targets) -> bool:
    field_tokens = tokenize(field_text)
    if not field_tokens:
        return False
    return any(cont(field_tokens, target) for target in targets)


def subject_colname_set_match(
    tq: TaggedQuery, t: WebTable, td: TypeDictionary | None = None
) -> int:
    """1 iff the subject column name contains the PST or the type name."""
    return int(_contains_set(t.subject_col_name, _set_name_token_lists(tq, td)))


def subject_colvalues_set_match(
    tq: TaggedQuery, t: WebTable, td: TypeDictionary | None = None
) -> int:
    """Number of subject-column cells containing the PST or the type name.

    Entity names often embed their type ('Lake Washington', 'Redwood
    City'), so cell-level hits signal the column's entity type.
    """
    targets = _set_name_token_lists(tq, td)
    return sum(
        1 for row in t.cells if _contains_set(row[t.subject_col], targets)
    )


def section_headings_set_match(
    tq: TaggedQuery, t: WebTable, td: TypeDictionary | None = None
) -> int:
    """1 iff the immediate section heading contains the PST or type name."""
    return int(_contains_set(t.section_heading, _set_name_token_lists(tq, td)))


def all_headings_set_match(
    tq: TaggedQuery, t: WebTable, td: TypeDictionary | None = None
) -> int:
    """1 iff any enclosing heading (h1 included) contains PST or type name."""
    return int(_contains_set(t.all_headings, _set_name_token_lists(tq, td)))


def _modifier_tokens(tq: TaggedQuery) -> list[str]:
    seen = []
    for tok in list(tq.premod) + list(tq.postmod):
        if tok not in seen:
            seen.append(tok)
    return seen


def _token_in_text(token: str, text_tokens: Sequence[str]) -> bool:
    return any(tokens_equivalent(token, other) for other in text_tokens)


def premod_postmod_match(
    tq: TaggedQuery, t: WebTable, idf: IdfTable = UNIFORM_IDF
) -> tuple[int, int, int, float]:
    """Match the filtering criteria against non-subject column values.

    Returns (max_col_hits, full_match, missing_tokens, idf_missing_frac):
    per non-subject column, the number of cells containing any modifier
    token, maxed over columns; whether every modifier token occurs in
    some non-subject cell; how many modifier tokens occur nowhere in the
    table's fields; and the idf-weighted fraction of those missing
    tokens. With no modifiers the match is vacuously full.
    """
    modifiers = _modifier_tokens(tq)
    if not modifiers:
        return 0, 1, 0, 0.0

    non_subject_cols = [j for j in range(t.num_cols) if j != t.subject_col]
    max_hits = 0
    non_subject_tokens: set[str] = set()
    for j in non_subject_cols:
        hits = 0
        for row in t.cells:
            cell_tokens = tokenize(row[j])
            non_subject_tokens.update(cell_tokens)
            if any(_token_in_text(m, cell_tokens) for m in modifiers):
                hits += 1
        max_hits = max(max_hits, hits)

    full_match = int(
        all(_token_in_text(m, sorted(non_subject_tokens)) for m in modifiers)
    )

    field_tokens: set[str] = set()
    for text in (
        t.caption,
        t.section_heading,
        t.all_headings,
        t.surrounding_text,
        " ".join(t.column_names),
    ):
        field_tokens.update(tokenize(text))
    for row in t.cells:
        for cell in row:
            field_tokens.update(tokenize(cell))
    sorted_fields = sorted(field_tokens)
    missing = [m for m in modifiers if not _token_in_text(m, sorted_fields)]
    total_weight = sum(idf.idf(m) for m in modifiers)
    missing_weight = sum(idf.idf(m) for m in missing)
    frac = missing_weight / total_weight if total_weight > 0 else 0.0
    return max_hits, full_match, len(missing), frac


def featurize(
    tq: TaggedQuery,
    t: WebTable,
    idf: IdfTable = UNIFORM_IDF,
    td: TypeDictionary | None = None,
) -> FeatureVector:
    """The full feature vector for a query-table pair, in fixed order."""
    values = baseline_features(tq.query, t)
    values["SubjectColName_SET_Match"] = float(
        subject_colname_set_match(tq, t, td)
    )
    values["SubjectColValues_SET_Match"] = float(
        subject_colvalues_set_match(tq, t, td)
    )
    values["SectionHeadings_SET_Match"] = float(
        section_headings_set_match(tq, t, td)
    )
    values["AllHeadings_SET_Match"] = float(all_headings_set_match(tq, t, td))
    max_hits, full, missing, frac = premod_postmod_match(tq, t, idf)
    values["PremodPostmod_MaxColHits"] = float(max_hits)
    values["PremodPostmod_FullMatch"] = float(full)
    values["PremodPostmod_MissingTokens"] = float(missing)
    values["PremodPostmod_IdfMissingFrac"] = frac
    return FeatureVector(tuple(values[name] for name in FEATURE_NAMES))


def write_features_jsonl(records: Iterable[dict], path) -> None:
    """Dump {query, table_ref, features, label?} records, one per line."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def read_features_jsonl(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            if "features" not in record:
                raise DataError(f"{path}:{lineno}: record lacks 'features'")
            out.append(record)
    return out
