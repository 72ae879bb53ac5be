"""Evaluation machinery: tagging precision/coverage, selection
precision/recall with threshold sweeps, feature information gain and
phi-coefficient correlation.

Precision is reported as None (never 0 or 1) when no prediction fired,
so threshold sweeps do not fabricate extremes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import TaggedQuery
from .errors import ContractError, DataError


@dataclass(frozen=True)
class GoldQueryLabel:
    """Judged label for one query: positive/negative plus the PST span."""

    positive: bool
    pst_span: tuple[int, int] | None = None

    def __post_init__(self):
        if self.positive and self.pst_span is None:
            raise DataError("positive gold labels must carry a PST span")


@dataclass(frozen=True)
class LabeledQuery:
    """A corpus line: the query, its gold label and an optional category."""

    query: str
    gold: GoldQueryLabel
    category: str | None = None


def read_labeled_queries(path) -> list[LabeledQuery]:
    """Parse a labeled-query TSV.

    Format: ``query<TAB>span[<TAB>category]`` where span is ``a:b``
    (half-open token indices of the gold PST) for positives or ``-`` for
    negatives. The category column is free-form bookkeeping.
    """
    out = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise DataError(
                    f"{path}:{lineno}: expected 'query<TAB>span[<TAB>category]'"
                )
            query, span_text = parts[0], parts[1].strip()
            category = parts[2].strip() if len(parts) == 3 else None
            if span_text == "-":
                gold = GoldQueryLabel(False)
            else:
                try:
                    a, b = span_text.split(":")
                    gold = GoldQueryLabel(True, (int(a), int(b)))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: bad span {span_text!r}"
                    ) from None
            out.append(LabeledQuery(query, gold, category))
    return out


@dataclass(frozen=True)
class TaggingMetrics:
    tp: int
    fp: int
    total: int

    @property
    def precision(self) -> float | None:
        fired = self.tp + self.fp
        return self.tp / fired if fired else None

    @property
    def coverage(self) -> float:
        return (self.tp + self.fp) / self.total


def tagging_metrics(
    outputs: Sequence[tuple[TaggedQuery | None, GoldQueryLabel]],
    total: int | None = None,
) -> TaggingMetrics:
    """Score tagger outputs against gold labels.

    A prediction is a true positive only when the gold label is positive
    and the PST spans agree exactly; any other non-null prediction
    (negative gold or span disagreement) is a false positive.
    """
    n = len(outputs) if total is None else total
    if n <= 0:
        raise ContractError("total evaluated queries must be positive")
    tp = fp = 0
    for predicted, gold in outputs:
        if predicted is None:
            continue
        if gold.positive and tuple(predicted.pst_span) == tuple(gold.pst_span):
            tp += 1
        else:
            fp += 1
    return TaggingMetrics(tp, fp, n)


@dataclass(frozen=True)
class SelectionOutcome:
    """Per-query selection outcome against gold pair labels.

    ``returned_label`` is the gold label of the returned pair, or None
    when the selector abstained; ``any_positive`` says whether any
    candidate pair of the query was labeled good.
    """

    returned_label: int | None
    any_positive: bool

    def __post_init__(self):
        if self.returned_label not in (None, 0, 1):
            raise DataError(
                f"returned pair needs a 0/1 gold label, got {self.returned_label}"
            )


@dataclass(frozen=True)
class SelectionMetrics:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float | None:
        fired = self.tp + self.fp
        return self.tp / fired if fired else None

    @property
    def recall(self) -> float | None:
        relevant = self.tp + self.fn
        return self.tp / relevant if relevant else None


def selection_metrics(outcomes: Iterable[SelectionOutcome]) -> SelectionMetrics:
    tp = fp = fn = 0
    for outcome in outcomes:
        if outcome.returned_label == 1:
            tp += 1
        elif outcome.returned_label == 0:
            fp += 1
        elif outcome.any_positive:
            fn += 1
    return SelectionMetrics(tp, fp, fn)


@dataclass(frozen=True)
class ScoredQuery:
    """Cached per-query scoring so a theta sweep never rescores pairs.

    The argmax table is threshold-independent, so a query's contribution
    at any theta is fully determined by its best score, that pair's gold
    label and whether any of its pairs was positive.
    """

    best_score: float
    best_label: int | None
    any_positive: bool


@dataclass(frozen=True)
class PrPoint:
    theta: float
    precision: float | None
    recall: float | None


def outcome_at(scored: ScoredQuery, theta: float) -> SelectionOutcome:
    if scored.best_score > theta:
        if scored.best_label is None:
            raise DataError("returned pair lacks a gold label")
        return SelectionOutcome(scored.best_label, scored.any_positive)
    return SelectionOutcome(None, scored.any_positive)


def pr_curve(
    scored: Sequence[ScoredQuery], thetas: Sequence[float]
) -> list[PrPoint]:
    """Precision-recall points over a theta grid, reusing cached scores."""
    points = []
    for theta in thetas:
        metrics = selection_metrics(outcome_at(s, theta) for s in scored)
        points.append(PrPoint(theta, metrics.precision, metrics.recall))
    return points


def write_pr_curve_csv(points: Iterable[PrPoint], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("theta,precision,recall\n")
        for point in points:
            precision = "" if point.precision is None else repr(point.precision)
            recall = "" if point.recall is None else repr(point.recall)
            handle.write(f"{point.theta!r},{precision},{recall}\n")


def _entropy(counts) -> float:
    total = sum(counts)
    if total == 0:
        return 0.0
    h = 0.0
    for count in counts:
        if count:
            p = count / total
            h -= p * math.log2(p)
    return h


def booleanize(values) -> list[int]:
    """Non-boolean features become boolean: 1 iff the value exceeds 0."""
    return [1 if v > 0 else 0 for v in values]


def information_gain(feature_values: Sequence, labels: Sequence) -> float:
    """Mutual information (bits) between a booleanized feature and labels."""
    if len(feature_values) == 0:
        raise ContractError("information_gain needs at least one example")
    if len(feature_values) != len(labels):
        raise ContractError("feature/label length mismatch")
    feats = booleanize(feature_values)
    n = len(feats)
    label_counts: dict = {}
    cond: dict[int, dict] = {0: {}, 1: {}}
    split = {0: 0, 1: 0}
    for f, y in zip(feats, labels):
        label_counts[y] = label_counts.get(y, 0) + 1
        cond[f][y] = cond[f].get(y, 0) + 1
        split[f] += 1
    h_label = _entropy(label_counts.values())
    h_cond = sum(
        (split[f] / n) * _entropy(cond[f].values()) for f in (0, 1) if split[f]
    )
    gain = h_label - h_cond
    return max(0.0, gain)


@dataclass(frozen=True)
class ContingencyCounts:
    """2x2 label/feature contingency table; n_xy = #(label=x, feature=y)."""

    n11: int
    n10: int
    n01: int
    n00: int

    def __post_init__(self):
        if min(self.n11, self.n10, self.n01, self.n00) < 0:
            raise DataError("contingency counts must be non-negative")

    @property
    def label1(self) -> int:
        return self.n11 + self.n10

    @property
    def label0(self) -> int:
        return self.n01 + self.n00

    @property
    def feature1(self) -> int:
        return self.n11 + self.n01

    @property
    def feature0(self) -> int:
        return self.n10 + self.n00


def contingency_from(feature_values, labels) -> ContingencyCounts:
    if len(feature_values) != len(labels):
        raise ContractError("feature/label length mismatch")
    feats = booleanize(feature_values)
    n11 = n10 = n01 = n00 = 0
    for f, y in zip(feats, labels):
        if y not in (0, 1):
            raise DataError(f"labels must be 0/1, got {y!r}")
        if y == 1 and f == 1:
            n11 += 1
        elif y == 1:
            n10 += 1
        elif f == 1:
            n01 += 1
        else:
            n00 += 1
    return ContingencyCounts(n11, n10, n01, n00)


def phi_coefficient(c: ContingencyCounts) -> float | None:
    """Correlation of a boolean feature with boolean labels, in [-1, 1].

    None when any marginal is zero (the coefficient is undefined there).
    """
    denom_product = c.label1 * c.label0 * c.feature1 * c.feature0
    if denom_product == 0:
        return None
    return (c.n11 * c.n00 - c.n10 * c.n01) / math.sqrt(denom_product)


def feature_group_or(features: Sequence[Sequence]) -> list[int]:
    """Element-wise OR of booleanized feature vectors (group scoring)."""
    if not features:
        raise ContractError("feature_group_or needs at least one vector")
    length = len(features[0])
    if any(len(f) != length for f in features):
        raise ContractError("feature vectors must have equal lengths")
    out = [0] * length
    for feature in features:
        for i, v in enumerate(booleanize(feature)):
            if v:
                out[i] = 1
    return out


@dataclass(frozen=True)
class FeatureReportRow:
    name: str
    information_gain: float
    phi: float | None


def feature_report(
    feature_columns: dict[str, Sequence[float]],
    labels: Sequence[int],
    groups: dict[str, Sequence[str]] | None = None,
) -> list[FeatureReportRow]:
    """Information gain and phi per feature (and per OR-ed feature group)."""
    rows = []
    for name, values in feature_columns.items():
        rows.append(
            FeatureReportRow(
                name,
                information_gain(values, labels),
                phi_coefficient(contingency_from(values, labels)),
            )
        )
    for group_name, members in (groups or {}).items():
        combined = feature_group_or(
            [feature_columns[m] for m in members]
        )
        rows.append(
            FeatureReportRow(
                group_name,
                information_gain(combined, labels),
                phi_coefficient(contingency_from(combined, labels)),
            )
        )
    rows.sort(key=lambda row: -row.information_gain)
    return rows


def format_report_text(rows: Iterable[FeatureReportRow]) -> str:
    lines = [f"{'feature':<34} {'info_gain':>10} {'phi':>8}"]
    for row in rows:
        phi = "n/a" if row.phi is None else f"{row.phi:.4f}"
        lines.append(
            f"{row.name:<34} {row.information_gain:>10.6f} {phi:>8}"
        )
    return "\n".join(lines)


def report_to_json(rows: Iterable[FeatureReportRow]) -> str:
    return json.dumps(
        [
            {
                "name": row.name,
                "information_gain": row.information_gain,
                "phi": row.phi,
            }
            for row in rows
        ],
        indent=2,
        sort_keys=True,
    )
