"""Relational-table extraction from HTML pages and candidate-pool assembly.

Parsing is lenient (stdlib HTMLParser) and deterministic: the same HTML
bytes always yield the same tables. Only top-level ``<table>`` elements
that pass a relational classifier are kept; colspan/rowspan cells are
flattened by value duplication so every grid is rectangular.
"""

from __future__ import annotations

import json
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Sequence

from .core import TaggedQuery, tokenize
from .errors import ContractError, DataError, RetrievalError

_BLOCK_TAGS = {
    "p", "div", "li", "ul", "ol", "blockquote", "pre", "section", "article",
}
_HEADING_TAGS = {"h1": 1, "h2": 2, "h3": 3, "h4": 4, "h5": 5, "h6": 6}


def _clean(parts) -> str:
    return " ".join("".join(parts).split())


def _is_numeric(text: str) -> bool:
    s = text.strip().strip("$%").replace(",", "")
    if not s:
        return False
    try:
        float(s)
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class DocumentContext:
    """Page-level metadata shared by every table extracted from a page."""

    url: str
    title: str
    h1: str
    sr_rank: int
    static_rank: float
    num_tables_on_page: int
    page_text_length: int

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "title": self.title,
            "h1": self.h1,
            "sr_rank": self.sr_rank,
            "static_rank": self.static_rank,
            "num_tables_on_page": self.num_tables_on_page,
            "page_text_length": self.page_text_length,
        }


@dataclass(frozen=True)
class WebTable:
    """An extracted relational table plus its page context.

    ``cells`` holds the data rows (header removed) as a rectangular,
    padded grid. ``column_names`` are lowercased and may be empty when no
    header row was found. ``all_headings`` concatenates the headings of
    every enclosing section including the h1.
    """

    doc: DocumentContext
    caption: str
    section_heading: str
    all_headings: str
    surrounding_text: str
    column_names: tuple[str, ...]
    subject_col: int
    cells: tuple[tuple[str, ...], ...]
    table_char_length: int

    def __post_init__(self):
        if not self.cells:
            raise ContractError("WebTable needs at least one data row")
        width = len(self.cells[0])
        if any(len(row) != width for row in self.cells):
            raise ContractError("WebTable grid must be rectangular")
        if not (0 <= self.subject_col < width):
            raise ContractError(
                f"subject_col {self.subject_col} outside 0..{width - 1}"
            )
        if self.column_names and len(self.column_names) != width:
            raise ContractError("column_names length must match grid width")

    @property
    def num_rows(self) -> int:
        return len(self.cells)

    @property
    def num_cols(self) -> int:
        return len(self.cells[0])

    @property
    def subject_col_name(self) -> str:
        if self.column_names:
            return self.column_names[self.subject_col]
        return ""

    def column(self, j: int) -> tuple[str, ...]:
        return tuple(row[j] for row in self.cells)

    def to_dict(self) -> dict:
        return {
            "doc": self.doc.to_dict(),
            "caption": self.caption,
            "section_heading": self.section_heading,
            "all_headings": self.all_headings,
            "surrounding_text": self.surrounding_text,
            "column_names": list(self.column_names),
            "subject_col": self.subject_col,
            "cells": [list(row) for row in self.cells],
            "table_char_length": self.table_char_length,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "WebTable":
        doc = DocumentContext(**record["doc"])
        return cls(
            doc=doc,
            caption=record["caption"],
            section_heading=record["section_heading"],
            all_headings=record["all_headings"],
            surrounding_text=record["surrounding_text"],
            column_names=tuple(record["column_names"]),
            subject_col=record["subject_col"],
            cells=tuple(tuple(row) for row in record["cells"]),
            table_char_length=record["table_char_length"],
        )


@dataclass
class _Cell:
    parts: list = field(default_factory=list)
    colspan: int = 1
    rowspan: int = 1
    is_header: bool = False

    @property
    def text(self) -> str:
        return _clean(self.parts)


@dataclass
class _RawTable:
    rows: list = field(default_factory=list)
    caption_parts: list = field(default_factory=list)
    section_heading: str = ""
    all_headings: str = ""
    surrounding_text: str = ""
    depth: int = 0
    current_row: list | None = None
    current_cell: _Cell | None = None
    in_caption: bool = False


def _expand_grid(rows):
    """Flatten colspan/rowspan by value duplication; pad to a rectangle."""
    grid: list[list[str]] = []
    header_flags: list[bool] = []
    carry: dict[int, tuple[str, int]] = {}
    max_colspan = 1
    for cells in rows:
        out: list[str] = []
        col = 0

        def place_carries():
            nonlocal col
            while col in carry:
                text, remaining = carry.pop(col)
                out.append(text)
                if remaining > 1:
                    carry[col] = (text, remaining - 1)
                col += 1

        for cell in cells:
            place_carries()
            span = max(1, cell.colspan)
            max_colspan = max(max_colspan, span)
            for k in range(span):
                out.append(cell.text)
                if cell.rowspan > 1:
                    carry[col + k] = (cell.text, cell.rowspan - 1)
            col += span
        place_carries()
        if out:
            grid.append(out)
            header_flags.append(bool(cells) and all(c.is_header for c in cells))
    width = max((len(row) for row in grid), default=0)
    for row in grid:
        row.extend([""] * (width - len(row)))
    return grid, header_flags, max_colspan


class _PageParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.title_parts: list = []
        self.in_title = False
        self.suppress = 0
        self.page_parts: list = []
        self.h1 = ""
        self.headings: dict[int, str] = {}
        self.heading_capture: tuple[int, list] | None = None
        self.block_stack: list[tuple[str, list]] = []
        self.last_block_text = ""
        self.table: _RawTable | None = None
        self.raw_tables: list[_RawTable] = []

    # heading bookkeeping -------------------------------------------------
    def _all_headings(self) -> str:
        return " ".join(
            self.headings[level] for level in sorted(self.headings)
        )

    def _section_heading(self) -> str:
        levels = [lvl for lvl in self.headings if lvl in (2, 3, 4)]
        return self.headings[max(levels)] if levels else ""

    # table bookkeeping ---------------------------------------------------
    def _close_cell(self):
        t = self.table
        if t.current_cell is not None:
            if t.current_row is None:
                t.current_row = []
            t.current_row.append(t.current_cell)
            t.current_cell = None

    def _close_row(self):
        t = self.table
        self._close_cell()
        if t.current_row:
            t.rows.append(t.current_row)
        t.current_row = None

    def _finish_table(self):
        self._close_row()
        self.raw_tables.append(self.table)
        self.table = None

    def _close_block(self, tag):
        for i in range(len(self.block_stack) - 1, -1, -1):
            if self.block_stack[i][0] == tag:
                closed = self.block_stack[i:]
                del self.block_stack[i:]
                for _, parts in reversed(closed):
                    text = _clean(parts)
                    if text:
                        self.last_block_text = text
                return

    # HTMLParser hooks ----------------------------------------------------
    def handle_starttag(self, tag, attrs):
        if tag in ("script", "style"):
            self.suppress += 1
            return
        if self.suppress:
            return
        if tag == "title":
            self.in_title = True
            return
        if self.table is not None:
            t = self.table
            if tag == "table":
                t.depth += 1
            elif t.depth == 0:
                if tag == "caption":
                    t.in_caption = True
                elif tag == "tr":
                    self._close_row()
                    t.current_row = []
                elif tag in ("td", "th"):
                    self._close_cell()
                    attr = dict(attrs)

                    def _span(name):
                        try:
                            return max(1, int(attr.get(name, 1)))
                        except (TypeError, ValueError):
                            return 1

                    t.current_cell = _Cell(
                        colspan=_span("colspan"),
                        rowspan=_span("rowspan"),
                        is_header=tag == "th",
                    )
            return
        if tag == "table":
            self.table = _RawTable(
                section_heading=self._section_heading(),
                all_headings=self._all_headings(),
                surrounding_text=self.last_block_text,
            )
            return
        if tag in _HEADING_TAGS:
            self.heading_capture = (_HEADING_TAGS[tag], [])
            return
        if tag in _BLOCK_TAGS:
            # <p>/<li> close implicitly when a new block begins
            while self.block_stack and self.block_stack[-1][0] in ("p", "li"):
                self._close_block(self.block_stack[-1][0])
            self.block_stack.append((tag, []))

    def handle_endtag(self, tag):
        if tag in ("script", "style"):
            self.suppress = max(0, self.suppress - 1)
            return
        if self.suppress:
            return
        if tag == "title":
            self.in_title = False
            return
        if self.table is not None:
            t = self.table
            if tag == "table":
                if t.depth > 0:
                    t.depth -= 1
                else:
                    self._finish_table()
            elif t.depth == 0:
                if tag == "caption":
                    t.in_caption = False
                elif tag == "tr":
                    self._close_row()
                elif tag in ("td", "th"):
                    self._close_cell()
            return
        if tag in _HEADING_TAGS:
            if self.heading_capture is not None:
                level, parts = self.heading_capture
                self.heading_capture = None
                text = _clean(parts)
                if text:
                    if level == 1 and not self.h1:
                        self.h1 = text
                    self.headings[level] = text
                    for deeper in [d for d in self.headings if d > level]:
                        del self.headings[deeper]
            return
        if tag in _BLOCK_TAGS:
            self._close_block(tag)

    def handle_data(self, data):
        if self.suppress:
            return
        if self.in_title:
            self.title_parts.append(data)
            return
        self.page_parts.append(data)
        if self.table is not None:
            t = self.table
            if t.in_caption:
                t.caption_parts.append(data)
            elif t.current_cell is not None:
                t.current_cell.parts.append(data)
            return
        if self.heading_capture is not None:
            self.heading_capture[1].append(data)
            return
        for _, parts in self.block_stack:
            parts.append(data)


def classify_relational(
    grid: Sequence[Sequence[str]], max_colspan: int = 1
) -> bool:
    """Heuristic relational-table classifier.

    True iff the grid has >= 2 rows and >= 2 columns, at most half the
    cells empty, no cell spanning more than half a row, and at least one
    column with >= 80% distinct values. Thresholds are stand-ins for a
    learned classifier.
    """
    rows = len(grid)
    if rows < 2:
        return False
    cols = len(grid[0])
    if cols < 2:
        return False
    total = rows * cols
    empty = sum(1 for row in grid for cell in row if not cell.strip())
    if empty / total > 0.5:
        return False
    if max_colspan > 0.5 * cols:
        return False
    for j in range(cols):
        values = [row[j] for row in grid]
        if len(set(values)) / rows >= 0.8:
            return True
    return False


def choose_subject_column(cells: Sequence[Sequence[str]]) -> int:
    """Leftmost non-numeric-majority column maximizing distinct-value ratio.

    Falls back to column 0 when every column is numeric-dominated.
    """
    if not cells:
        return 0
    cols = len(cells[0])
    best = None
    best_ratio = -1.0
    for j in range(cols):
        values = [row[j] for row in cells]
        non_empty = [v for v in values if v.strip()]
        numeric = sum(1 for v in non_empty if _is_numeric(v))
        if non_empty and numeric > len(non_empty) / 2:
            continue
        ratio = len(set(values)) / len(values)
        if ratio > best_ratio:
            best, best_ratio = j, ratio
    return 0 if best is None else best


def identify_subject_column(table: WebTable) -> int:
    """Recompute the subject column of an extracted table."""
    return choose_subject_column(table.cells)


def _header_split(grid, header_flags):
    if header_flags and header_flags[0]:
        return [c.strip().lower() for c in grid[0]], grid[1:]
    if len(grid) >= 2 and all(
        c.strip() and not _is_numeric(c) for c in grid[0]
    ):
        return [c.strip().lower() for c in grid[0]], grid[1:]
    return [], grid


def extract_tables(
    html: str,
    url: str = "",
    title: str | None = None,
    sr_rank: int = 1,
    static_rank: float = 0.0,
) -> list[WebTable]:
    """Extract every relational table from an HTML document.

    ``title`` overrides the parsed ``<title>`` (e.g. from sidecar
    metadata). An unparseable document raises DataError without affecting
    other documents.
    """
    parser = _PageParser()
    try:
        parser.feed(html)
        parser.close()
    except Exception as exc:  # noqa: BLE001 - parser internals vary
        raise DataError(f"unparseable document {url or '<inline>'}: {exc}")
    if parser.table is not None:
        # unterminated <table>: keep what was parsed
        parser._finish_table()

    kept = []
    for raw in parser.raw_tables:
        grid, header_flags, max_colspan = _expand_grid(raw.rows)
        if not classify_relational(grid, max_colspan):
            continue
        column_names, data = _header_split(grid, header_flags)
        if not data:
            continue
        kept.append((raw, column_names, data))
    if not kept:
        return []

    page_text = _clean(parser.page_parts)
    doc = DocumentContext(
        url=url,
        title=title if title is not None else _clean(parser.title_parts),
        h1=parser.h1,
        sr_rank=sr_rank,
        static_rank=static_rank,
        num_tables_on_page=len(kept),
        page_text_length=max(1, len(page_text)),
    )
    tables = []
    for raw, column_names, data in kept:
        char_length = sum(
            len(cell.text) for row in raw.rows for cell in row
        )
        tables.append(
            WebTable(
                doc=doc,
                caption=_clean(raw.caption_parts),
                section_heading=raw.section_heading,
                all_headings=raw.all_headings,
                surrounding_text=raw.surrounding_text,
                column_names=tuple(column_names),
                subject_col=choose_subject_column(data),
                cells=tuple(tuple(cell for cell in row) for row in data),
                table_char_length=max(1, char_length),
            )
        )
    return tables


@dataclass(frozen=True)
class RetrievedDoc:
    doc_id: str
    html: str
    url: str
    title: str | None = None
    static_rank: float = 0.0


class SearchSource(ABC):
    """Pluggable candidate-document retrieval."""

    @abstractmethod
    def ranked_documents(self, query: str, k: int) -> list[RetrievedDoc]:
        """Top-k documents for a query, best first."""


class LocalCorpusSource(SearchSource):
    """Corpus directory with precomputed per-query rankings.

    Layout: ``*.html`` documents with optional ``*.meta.json`` sidecars
    ({url, title, staticRank}) plus a ranking file of
    ``query<TAB>doc1,doc2,...`` lines. Queries are matched on normalized
    tokens.
    """

    def __init__(self, root, ranking_path=None):
        self.root = Path(root)
        if not self.root.is_dir():
            raise RetrievalError(f"corpus directory {root} not found")
        path = Path(ranking_path) if ranking_path else self.root / "ranking.tsv"
        if not path.is_file():
            raise RetrievalError(f"ranking file {path} not found")
        self.ranking: dict[str, list[str]] = {}
        for raw in path.read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"bad ranking line {raw!r}")
            key = " ".join(tokenize(parts[0]))
            docs = [d.strip() for d in parts[1].split(",") if d.strip()]
            self.ranking[key] = docs

    def ranked_documents(self, query: str, k: int) -> list[RetrievedDoc]:
        key = " ".join(tokenize(query))
        docs = self.ranking.get(key, [])[:k]
        out = []
        for name in docs:
            html_path = self.root / name
            if not html_path.is_file():
                raise RetrievalError(
                    f"document {name} listed in ranking but missing from corpus",
                    transient=False,
                )
            meta = {}
            meta_path = html_path.with_suffix("").with_suffix(".meta.json")
            if meta_path.is_file():
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
            out.append(
                RetrievedDoc(
                    doc_id=name,
                    html=html_path.read_text(encoding="utf-8"),
                    url=meta.get("url", name),
                    title=meta.get("title"),
                    static_rank=float(meta.get("staticRank", 0.0)),
                )
            )
        return out


@dataclass(frozen=True)
class CandidatePool:
    """Tables drawn from the top-k documents for a tagged query."""

    query: TaggedQuery
    tables: tuple[WebTable, ...]

    def __len__(self) -> int:
        return len(self.tables)


def candidate_pool(
    tq: TaggedQuery, source: SearchSource, k: int
) -> CandidatePool:
    """Assemble the candidate tables for a tagged query.

    Documents that fail to parse are skipped with a warning so one bad
    page cannot empty the pool. An empty pool is a valid outcome.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    tables: list[WebTable] = []
    for rank, doc in enumerate(
        source.ranked_documents(tq.query.raw_text, k), start=1
    ):
        try:
            tables.extend(
                extract_tables(
                    doc.html,
                    url=doc.url,
                    title=doc.title,
                    sr_rank=rank,
                    static_rank=doc.static_rank,
                )
            )
        except DataError as exc:
            warnings.warn(str(exc), RuntimeWarning, stacklevel=2)
    return CandidatePool(tq, tuple(tables))


def table_ref(table: WebTable, pool: CandidatePool) -> str:
    """Stable reference for a table: url plus on-page position."""
    position = 0
    for other in pool.tables:
        if other is table:
            break
        if other.doc.url == table.doc.url:
            position += 1
    return f"{table.doc.url}#table{position}"


def write_tables_jsonl(tables, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for table in tables:
            handle.write(json.dumps(table.to_dict(), sort_keys=True) + "\n")


def read_tables_jsonl(path) -> list[WebTable]:
    out = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                out.append(WebTable.from_dict(json.loads(line)))
    return out
