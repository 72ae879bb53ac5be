"""Automatic training-data generation from a query log.

Queries accepted by the strictest dictionary tagger become positive
sequence-tagging examples; queries it rejected for entity-name or
root-check reasons become all-O negative examples. The output stream is
downsampled to a configurable positive/entity/root mix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .core import (
    EntityNameLexicon,
    Query,
    SuperlativeLexicon,
    TypeDictionary,
)
from .dict_tagger import (
    DEFAULT_ROOT_RULE,
    RejectionReason,
    RootCheckRule,
    tdl_er_dp_tag,
)
from .errors import ConfigError, ContractError, DataError, ParseError

O_TAG = "O"


class ExampleSource(str, Enum):
    POSITIVE = "positive"
    ENTITY_REJECTED = "entity_rejected"
    ROOT_REJECTED = "root_rejected"


@dataclass(frozen=True)
class QueryLogEntry:
    query: str
    impressions: int

    def __post_init__(self):
        if self.impressions < 0:
            raise DataError("impressions must be non-negative")


@dataclass(frozen=True)
class LabeledExample:
    """A token sequence with aligned tags and its provenance.

    Tags are entity type identifiers or O. At most one maximal non-O run
    is allowed and all non-O tags within an example must agree.
    """

    tokens: tuple[str, ...]
    tags: tuple[str, ...]
    source: ExampleSource = ExampleSource.POSITIVE

    def __post_init__(self):
        if len(self.tokens) != len(self.tags) or not self.tokens:
            raise DataError("tokens and tags must be equal-length and non-empty")
        non_o = [(i, t) for i, t in enumerate(self.tags) if t != O_TAG]
        if non_o:
            types = {t for _, t in non_o}
            if len(types) != 1:
                raise DataError(
                    f"example mixes entity types {sorted(types)}"
                )
            positions = [i for i, _ in non_o]
            if positions != list(range(positions[0], positions[-1] + 1)):
                raise DataError("non-O tags must form one contiguous run")

    @property
    def entity_type(self) -> str | None:
        for tag in self.tags:
            if tag != O_TAG:
                return tag
        return None


def generate(
    log: Iterable[QueryLogEntry],
    td: TypeDictionary,
    sl: SuperlativeLexicon,
    el: EntityNameLexicon,
    rule: RootCheckRule = DEFAULT_ROOT_RULE,
    min_impressions: int = 100,
    mix: Sequence[float] = (0.5, 0.2, 0.3),
    seed: int = 0,
) -> list[LabeledExample]:
    """Run the dictionary tagger over a query log and emit labeled examples.

    Entries below ``min_impressions`` are dropped. Non-null taggings
    become positives with the PST tokens tagged by type; entity-name and
    root-check rejects become all-O negatives. The three sources are then
    downsampled to the requested mix (largest output satisfying it),
    deterministically for a given seed.
    """
    if len(mix) != 3 or any(m < 0 for m in mix):
        raise ConfigError(f"mix must be three non-negative ratios, got {mix!r}")
    if abs(sum(mix) - 1.0) > 1e-9:
        raise ConfigError(f"mix must sum to 1, got {mix!r}")
    if min_impressions < 0:
        raise ConfigError("min_impressions must be non-negative")

    buckets: dict[ExampleSource, list[LabeledExample]] = {
        ExampleSource.POSITIVE: [],
        ExampleSource.ENTITY_REJECTED: [],
        ExampleSource.ROOT_REJECTED: [],
    }
    saw_entry = False
    for entry in log:
        saw_entry = True
        if entry.impressions < min_impressions:
            continue
        q = Query.from_text(entry.query)
        if not q.toks:
            continue
        tq, reason = tdl_er_dp_tag(q, td, sl, el, rule)
        if tq is not None:
            start, stop = tq.pst_span
            tags = tuple(
                tq.set_type if start <= i < stop else O_TAG
                for i in range(len(q.toks))
            )
            buckets[ExampleSource.POSITIVE].append(
                LabeledExample(q.toks, tags, ExampleSource.POSITIVE)
            )
        elif reason is RejectionReason.ENTITY_NAME:
            buckets[ExampleSource.ENTITY_REJECTED].append(
                LabeledExample(
                    q.toks,
                    (O_TAG,) * len(q.toks),
                    ExampleSource.ENTITY_REJECTED,
                )
            )
        elif reason is RejectionReason.NOT_ROOT:
            buckets[ExampleSource.ROOT_REJECTED].append(
                LabeledExample(
                    q.toks, (O_TAG,) * len(q.toks), ExampleSource.ROOT_REJECTED
                )
            )
    if not saw_entry:
        warnings.warn("query log is empty", RuntimeWarning, stacklevel=2)
        return []

    sources = (
        ExampleSource.POSITIVE,
        ExampleSource.ENTITY_REJECTED,
        ExampleSource.ROOT_REJECTED,
    )
    # Largest total honoring the mix without duplicating any example.
    total = None
    for source, ratio in zip(sources, mix):
        if ratio > 0:
            cap = int(len(buckets[source]) / ratio)
            total = cap if total is None else min(total, cap)
    if total is None:
        total = 0
    rng = np.random.default_rng(seed)
    out: list[LabeledExample] = []
    for source, ratio in zip(sources, mix):
        want = int(total * ratio)
        pool = buckets[source]
        if want >= len(pool):
            chosen = pool
        else:
            idx = sorted(rng.choice(len(pool), size=want, replace=False))
            chosen = [pool[i] for i in idx]
        out.extend(chosen[:want])
    return out


def stratify(
    examples: Sequence[LabeledExample], per_type_cap: int, seed: int = 0
) -> list[LabeledExample]:
    """Cap the number of positive examples per entity type.

    Sampling is seed-deterministic; negatives pass through untouched and
    relative order is preserved.
    """
    if per_type_cap <= 0:
        raise ContractError("per_type_cap must be positive")
    rng = np.random.default_rng(seed)
    by_type: dict[str, list[int]] = {}
    for i, ex in enumerate(examples):
        etype = ex.entity_type
        if etype is not None:
            by_type.setdefault(etype, []).append(i)
    keep = set(range(len(examples)))
    for etype in sorted(by_type):
        indices = by_type[etype]
        if len(indices) > per_type_cap:
            chosen = set(
                int(i)
                for i in rng.choice(
                    len(indices), size=per_type_cap, replace=False
                )
            )
            for pos, idx in enumerate(indices):
                if pos not in chosen:
                    keep.discard(idx)
    return [ex for i, ex in enumerate(examples) if i in keep]


def read_query_log(path) -> list[QueryLogEntry]:
    """Parse a ``query<TAB>impressions`` file."""
    entries = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(
                    "expected 'query<TAB>impressions'", path=path, line=lineno
                )
            try:
                impressions = int(parts[1])
            except ValueError:
                raise ParseError(
                    f"bad impression count {parts[1]!r}", path=path, line=lineno
                ) from None
            entries.append(QueryLogEntry(parts[0], impressions))
    return entries


def write_examples(examples: Iterable[LabeledExample], path) -> None:
    """Write ``token<TAB>tag`` blocks separated by blank lines."""
    with open(path, "w", encoding="utf-8") as handle:
        for ex in examples:
            handle.write(f"# source={ex.source.value}\n")
            for token, tag in zip(ex.tokens, ex.tags):
                handle.write(f"{token}\t{tag}\n")
            handle.write("\n")


def read_examples(path) -> list[LabeledExample]:
    """Read the example format written by :func:`write_examples`.

    The ``# source=`` comment line is optional and defaults to positive.
    """
    examples: list[LabeledExample] = []
    tokens: list[str] = []
    tags: list[str] = []
    source = ExampleSource.POSITIVE

    def flush(lineno):
        nonlocal tokens, tags, source
        if tokens:
            examples.append(
                LabeledExample(tuple(tokens), tuple(tags), source)
            )
        tokens, tags = [], []
        source = ExampleSource.POSITIVE

    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                flush(lineno)
                continue
            if line.startswith("#"):
                comment = line[1:].strip()
                if comment.startswith("source="):
                    try:
                        source = ExampleSource(comment[len("source="):])
                    except ValueError:
                        raise ParseError(
                            f"unknown source {comment!r}", path=path, line=lineno
                        ) from None
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(
                    "expected 'token<TAB>tag'", path=path, line=lineno
                )
            tokens.append(parts[0])
            tags.append(parts[1])
    flush(None)
    return examples
