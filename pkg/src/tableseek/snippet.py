"""Snippet generation: choose an m x n display subset of a table answer.

Whole-table answers keep the author's top rows; partial answers promote
the rows whose non-subject cells hit the query's filtering criteria. The
subject column is always shown.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import TaggedQuery, tokenize, tokens_equivalent
from .errors import ContractError
from .tables import WebTable


class AnswerMode(str, Enum):
    ENTIRE_TABLE = "entire_table"
    SUBSET = "subset"


@dataclass(frozen=True)
class Snippet:
    """Ordered row/column index subsets of a source table."""

    row_indices: tuple[int, ...]
    col_indices: tuple[int, ...]
    column_names: tuple[str, ...]
    doc_title: str
    url: str

    def render(self, table: WebTable) -> list[list[str]]:
        return [
            [table.cells[i][j] for j in self.col_indices]
            for i in self.row_indices
        ]

    def to_dict(self, table: WebTable) -> dict:
        return {
            "rows": self.render(table),
            "columns": list(self.column_names),
            "title": self.doc_title,
            "url": self.url,
        }


def _modifier_tokens(tq: TaggedQuery) -> list[str]:
    out = []
    for tok in list(tq.premod) + list(tq.postmod):
        if tok not in out:
            out.append(tok)
    return out


def _cell_hit(cell: str, modifiers) -> bool:
    cell_tokens = tokenize(cell)
    return any(
        tokens_equivalent(m, tok) for m in modifiers for tok in cell_tokens
    )


def _hit_rows(tq: TaggedQuery, t: WebTable) -> list[int]:
    modifiers = _modifier_tokens(tq)
    if not modifiers:
        return []
    hits = []
    for i, row in enumerate(t.cells):
        for j in range(t.num_cols):
            if j == t.subject_col:
                continue
            if _cell_hit(row[j], modifiers):
                hits.append(i)
                break
    return hits


def _hit_columns(tq: TaggedQuery, t: WebTable) -> list[int]:
    modifiers = _modifier_tokens(tq)
    if not modifiers:
        return []
    hits = []
    for j in range(t.num_cols):
        name_hit = bool(t.column_names) and _cell_hit(t.column_names[j], modifiers)
        cell_hit = j != t.subject_col and any(
            _cell_hit(row[j], modifiers) for row in t.cells
        )
        if name_hit or cell_hit:
            hits.append(j)
    return hits


def detect_answer_mode(tq: TaggedQuery, t: WebTable) -> AnswerMode:
    """Whole table vs subset, decided by where the modifier tokens hit.

    A modifier hitting a column name or a non-subject cell means only
    part of the table answers the query; no hits (or no modifiers at
    all) means the whole table does.
    """
    modifiers = _modifier_tokens(tq)
    if not modifiers:
        return AnswerMode.ENTIRE_TABLE
    if _hit_rows(tq, t) or _hit_columns(tq, t):
        return AnswerMode.SUBSET
    return AnswerMode.ENTIRE_TABLE


def _column_quality_ok(t: WebTable, j: int) -> bool:
    values = [row[j] for row in t.cells]
    empty = sum(1 for v in values if not v.strip())
    if empty / len(values) > 0.5:
        return False
    top = max(values.count(v) for v in set(values))
    if top / len(values) > 0.5:
        return False
    return True


def _choose_columns(tq: TaggedQuery, t: WebTable, n: int, mode: AnswerMode):
    chosen = [t.subject_col]
    if mode is AnswerMode.SUBSET:
        for j in _hit_columns(tq, t):
            if len(chosen) >= n:
                break
            if j not in chosen:
                chosen.append(j)
    for j in range(t.num_cols):
        if len(chosen) >= n:
            break
        if j not in chosen and _column_quality_ok(t, j):
            chosen.append(j)
    # low-quality columns only when needed to reach n
    for j in range(t.num_cols):
        if len(chosen) >= n:
            break
        if j not in chosen:
            chosen.append(j)
    return tuple(sorted(chosen))


def generate_snippet(tq: TaggedQuery, t: WebTable, m: int, n: int) -> Snippet:
    """Pick at most m rows and n columns for display.

    Whole-table mode keeps the top m rows; subset mode places the rows
    with modifier hits first (in table order) and pads with top rows.
    Columns keep their original order, always include the subject
    column, and skip mostly-empty or mostly-repeated columns unless
    needed to reach n.
    """
    if m < 1 or n < 1:
        raise ContractError(f"snippet dimensions must be >= 1, got {m}x{n}")
    mode = detect_answer_mode(tq, t)
    cols = _choose_columns(tq, t, n, mode)
    if mode is AnswerMode.SUBSET:
        hits = _hit_rows(tq, t)[:m]
        rows = list(hits)
        for i in range(t.num_rows):
            if len(rows) >= m:
                break
            if i not in rows:
                rows.append(i)
        row_indices = tuple(rows)
    else:
        row_indices = tuple(range(min(m, t.num_rows)))
    names = tuple(
        t.column_names[j] if t.column_names else "" for j in cols
    )
    return Snippet(
        row_indices=row_indices,
        col_indices=cols,
        column_names=names,
        doc_title=t.doc.title or t.doc.h1,
        url=t.doc.url,
    )
