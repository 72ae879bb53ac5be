import math
import random

import pytest

from helpers import make_tagged
from tableseek.errors import ContractError, DataError
from tableseek.evaluation import (
    ContingencyCounts,
    GoldQueryLabel,
    ScoredQuery,
    SelectionOutcome,
    booleanize,
    contingency_from,
    feature_group_or,
    feature_report,
    format_report_text,
    information_gain,
    outcome_at,
    phi_coefficient,
    pr_curve,
    read_labeled_queries,
    selection_metrics,
    tagging_metrics,
    write_pr_curve_csv,
)


class TestTaggingMetrics:
    def test_formula(self):
        # 20 true positives, 8 false positives out of 100 evaluated
        outputs = []
        for i in range(20):
            outputs.append(
                (make_tagged("tom cruise films", (2, 3), "film"),
                 GoldQueryLabel(True, (2, 3)))
            )
        for i in range(8):
            outputs.append(
                (make_tagged("joan rivers", (1, 2), "river"),
                 GoldQueryLabel(False))
            )
        for i in range(72):
            outputs.append((None, GoldQueryLabel(False)))
        metrics = tagging_metrics(outputs)
        assert metrics.tp == 20 and metrics.fp == 8
        assert metrics.precision == 20 / 28
        assert metrics.precision == pytest.approx(0.7143, abs=5e-5)
        assert metrics.coverage == 0.28

    def test_all_null_coverage_zero_precision_none(self):
        outputs = [(None, GoldQueryLabel(False))] * 10
        metrics = tagging_metrics(outputs)
        assert metrics.coverage == 0.0
        assert metrics.precision is None

    def test_span_disagreement_is_fp(self):
        outputs = [
            (make_tagged("washington state parks", (2, 3), "park"),
             GoldQueryLabel(True, (1, 3)))
        ]
        metrics = tagging_metrics(outputs)
        assert metrics.tp == 0 and metrics.fp == 1

    def test_explicit_total(self):
        outputs = [
            (make_tagged("tom cruise films", (2, 3), "film"),
             GoldQueryLabel(True, (2, 3)))
        ]
        metrics = tagging_metrics(outputs, total=50)
        assert metrics.coverage == 1 / 50

    def test_zero_total_rejected(self):
        with pytest.raises(ContractError):
            tagging_metrics([], total=0)

    def test_positive_gold_without_span_rejected(self):
        with pytest.raises(DataError):
            GoldQueryLabel(True, None)


class TestSelectionMetrics:
    def test_hand_counted_example(self):
        outcomes = [
            SelectionOutcome(1, True),    # returned a good pair
            SelectionOutcome(0, False),   # returned a bad pair
            SelectionOutcome(None, True), # abstained with a good pair available
        ]
        metrics = selection_metrics(outcomes)
        assert metrics.precision == 0.5
        assert metrics.recall == 0.5

    def test_abstain_everywhere_no_positives(self):
        outcomes = [SelectionOutcome(None, False)] * 5
        metrics = selection_metrics(outcomes)
        assert metrics.precision is None
        assert metrics.recall is None

    def test_theta_zero_all_positive_pools_full_recall(self):
        scored = [ScoredQuery(0.9, 1, True), ScoredQuery(0.8, 1, True)]
        points = pr_curve(scored, [0.0])
        assert points[0].recall == 1.0

    def test_returned_without_label_rejected(self):
        with pytest.raises(DataError):
            outcome_at(ScoredQuery(0.9, None, True), 0.5)


class TestPrCurve:
    def scored_set(self):
        rng = random.Random(8)
        scored = []
        for _ in range(60):
            best = rng.random()
            label = rng.randint(0, 1)
            any_pos = label == 1 or rng.random() < 0.4
            scored.append(ScoredQuery(best, label, any_pos))
        return scored

    def test_matches_from_scratch_recomputation(self):
        scored = self.scored_set()
        thetas = [0.1, 0.25, 0.5, 0.75, 0.9]
        points = pr_curve(scored, thetas)
        for point in points:
            outcomes = []
            for s in scored:
                if s.best_score > point.theta:
                    outcomes.append(SelectionOutcome(s.best_label, s.any_positive))
                else:
                    outcomes.append(SelectionOutcome(None, s.any_positive))
            fresh = selection_metrics(outcomes)
            assert point.precision == fresh.precision
            assert point.recall == fresh.recall

    def test_csv_output(self, tmp_path):
        scored = self.scored_set()
        points = pr_curve(scored, [0.2, 0.8])
        path = tmp_path / "curve.csv"
        write_pr_curve_csv(points, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta,precision,recall"
        assert len(lines) == 3


class TestInformationGain:
    def test_perfect_predictor_equals_label_entropy(self):
        labels = [0, 1] * 50
        assert information_gain(labels, labels) == pytest.approx(1.0, abs=1e-12)

    def test_skewed_perfect_predictor(self):
        labels = [1] * 25 + [0] * 75
        h = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
        assert information_gain(labels, labels) == pytest.approx(h, abs=1e-12)

    def test_constant_feature_zero_gain(self):
        labels = [0, 1, 0, 1]
        assert information_gain([1, 1, 1, 1], labels) == 0.0

    def test_independent_feature_near_zero(self):
        rng = random.Random(3)
        labels = [rng.randint(0, 1) for _ in range(4000)]
        feature = [rng.randint(0, 1) for _ in range(4000)]
        assert information_gain(feature, labels) < 0.01

    def test_three_quarters_agreement_closed_form(self):
        # 50/50 labels; feature agrees on exactly 75% of examples
        labels = [0] * 100 + [1] * 100
        feature = [0] * 75 + [1] * 25 + [1] * 75 + [0] * 25
        expected = 1.0 - (
            -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
        )
        assert information_gain(feature, labels) == pytest.approx(
            expected, abs=1e-9
        )
        assert expected == pytest.approx(0.1887, abs=5e-5)

    def test_polarity_invariance(self):
        labels = [0, 1, 1, 0, 1, 0, 0, 1] * 10
        feature = [1, 0, 1, 1, 0, 0, 1, 0] * 10
        flipped = [1 - f for f in feature]
        assert information_gain(feature, labels) == pytest.approx(
            information_gain(flipped, labels), abs=1e-12
        )

    def test_never_negative(self):
        rng = random.Random(7)
        for _ in range(100):
            n = rng.randint(1, 30)
            labels = [rng.randint(0, 1) for _ in range(n)]
            feature = [rng.uniform(-2, 2) for _ in range(n)]
            assert information_gain(feature, labels) >= 0.0

    def test_empty_rejected(self):
        with pytest.raises(ContractError):
            information_gain([], [])


class TestPhi:
    def test_worked_fixture(self):
        counts = ContingencyCounts(n11=40, n10=10, n01=10, n00=40)
        assert phi_coefficient(counts) == pytest.approx(0.6, abs=1e-12)
        # (40*40 - 10*10) / sqrt(50^4) = 1500/2500
        assert phi_coefficient(counts) == (40 * 40 - 10 * 10) / 2500

    def test_identity_is_one(self):
        labels = [0, 1, 1, 0, 1]
        counts = contingency_from(labels, labels)
        assert phi_coefficient(counts) == pytest.approx(1.0)

    def test_complement_is_minus_one(self):
        labels = [0, 1, 1, 0, 1]
        counts = contingency_from([1 - y for y in labels], labels)
        assert phi_coefficient(counts) == pytest.approx(-1.0)

    def test_zero_marginal_undefined(self):
        counts = ContingencyCounts(n11=5, n10=5, n01=0, n00=0)
        assert phi_coefficient(counts) is None

    def test_range(self):
        rng = random.Random(9)
        for _ in range(200):
            counts = ContingencyCounts(
                rng.randint(1, 50), rng.randint(1, 50),
                rng.randint(1, 50), rng.randint(1, 50),
            )
            phi = phi_coefficient(counts)
            assert -1.0 <= phi <= 1.0

    def test_antisymmetric_under_label_complement(self):
        rng = random.Random(10)
        labels = [rng.randint(0, 1) for _ in range(200)]
        feature = [rng.randint(0, 1) for _ in range(200)]
        direct = phi_coefficient(contingency_from(feature, labels))
        flipped = phi_coefficient(
            contingency_from(feature, [1 - y for y in labels])
        )
        assert direct == pytest.approx(-flipped)

    def test_booleanization_rule(self):
        # value > 0 becomes 1, everything else 0
        assert booleanize([0.5, 0.0, -1.0, 3.0]) == [1, 0, 0, 1]

    def test_marginals(self):
        counts = ContingencyCounts(n11=4, n10=3, n01=2, n00=1)
        assert counts.label1 == 7 and counts.label0 == 3
        assert counts.feature1 == 6 and counts.feature0 == 4


class TestFeatureGroupOr:
    def test_basic(self):
        assert feature_group_or([[1, 0, 0], [0, 0, 1]]) == [1, 0, 1]

    def test_single_feature_identity(self):
        assert feature_group_or([[1, 0, 1]]) == [1, 0, 1]

    def test_all_zero(self):
        assert feature_group_or([[0, 0], [0, 0]]) == [0, 0]

    def test_length_mismatch_rejected(self):
        with pytest.raises(ContractError):
            feature_group_or([[1, 0], [1, 0, 1]])

    def test_booleanizes_inputs(self):
        assert feature_group_or([[2.5, 0.0], [0.0, 0.0]]) == [1, 0]


class TestReports:
    def test_report_rows_sorted_by_gain(self):
        labels = [0, 1] * 20
        columns = {
            "perfect": list(labels),
            "noise": [0, 0, 1, 1] * 10,
            "constant": [1] * 40,
        }
        rows = feature_report(columns, labels)
        assert rows[0].name == "perfect"
        assert rows[-1].information_gain <= rows[0].information_gain

    def test_group_rows_included(self):
        labels = [0, 1] * 20
        columns = {"a": [0, 1] * 20, "b": [0] * 40}
        rows = feature_report(columns, labels, groups={"ab_group": ["a", "b"]})
        assert any(row.name == "ab_group" for row in rows)

    def test_text_format(self):
        labels = [0, 1] * 5
        rows = feature_report({"f": list(labels)}, labels)
        text = format_report_text(rows)
        assert "feature" in text and "f" in text


class TestLabeledQueryFile:
    def test_bundled_corpus_loads(self, labeled_corpus):
        assert len(labeled_corpus) == 200
        positives = [i for i in labeled_corpus if i.gold.positive]
        for item in positives:
            assert item.gold.pst_span is not None

    def test_bad_span_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("some query\t1-2\n", encoding="utf-8")
        with pytest.raises(DataError):
            read_labeled_queries(path)
