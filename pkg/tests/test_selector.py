import numpy as np
import pytest

from helpers import make_table, make_tagged
from oracles import auc, exhaustive_select
from tableseek.errors import ContractError, DataError
from tableseek.features import FEATURE_NAMES, featurize
from tableseek.selector import (
    SelectorConfig,
    dump_selector_json,
    load_selector_json,
    score,
    select_answer,
    train_selector,
)
from tableseek.tables import CandidatePool


def synthetic_pairs(n, seed, noise=0.0):
    """Linearly separable vectors with a known separator."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 6))
    w = np.array([2.0, -1.5, 1.0, 0.0, 0.5, -0.5])
    y = (X @ w + noise * rng.normal(size=n) > 0).astype(int)
    return [(tuple(row), int(label)) for row, label in zip(X, y)]


class TestTraining:
    def test_zero_rounds_constant_half_on_balanced(self):
        pairs = [((0.0, 1.0), 0), ((1.0, 0.0), 1)]
        result = train_selector(pairs, SelectorConfig(rounds=0))
        assert result.model.base_score == 0.0
        assert score(result.model, (5.0, -3.0)) == 0.5
        assert score(result.model, (0.0, 0.0)) == 0.5

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            train_selector([((1.0,), 1), ((2.0,), 1)], SelectorConfig(rounds=1))

    def test_bad_labels_rejected(self):
        with pytest.raises(DataError):
            train_selector([((1.0,), 2), ((2.0,), 0)], SelectorConfig(rounds=1))

    def test_conflicting_duplicates_bounded_loss(self):
        pairs = [((1.0, 1.0), 0), ((1.0, 1.0), 1)] * 10
        result = train_selector(pairs, SelectorConfig(rounds=30))
        assert result.round_losses[-1] > 0.5  # irreducible noise
        assert all(np.isfinite(result.round_losses))

    def test_loss_non_increasing(self):
        pairs = synthetic_pairs(300, seed=0, noise=0.3)
        result = train_selector(pairs, SelectorConfig(rounds=60, depth=3))
        losses = result.round_losses
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_separable_set_high_auc(self):
        train_pairs = synthetic_pairs(500, seed=1)
        test_pairs = synthetic_pairs(300, seed=2)
        result = train_selector(
            train_pairs, SelectorConfig(rounds=50, depth=3, learning_rate=0.2)
        )
        scores = [score(result.model, x) for x, _ in test_pairs]
        labels = [y for _, y in test_pairs]
        assert auc(scores, labels) >= 0.95

    def test_monotone_feature_monotone_score(self):
        # label correlates positively with feature 0 only
        pairs = [((float(v), 0.0), int(v > 4)) for v in range(10)] * 5
        result = train_selector(pairs, SelectorConfig(rounds=40, depth=2))
        scores = [score(result.model, (float(v), 0.0)) for v in range(10)]
        assert all(b >= a - 1e-12 for a, b in zip(scores, scores[1:]))

    def test_deterministic(self):
        pairs = synthetic_pairs(200, seed=3)
        a = train_selector(pairs, SelectorConfig(rounds=20))
        b = train_selector(pairs, SelectorConfig(rounds=20))
        assert dump_selector_json(a.model) == dump_selector_json(b.model)

    def test_feature_count_mismatch_rejected(self):
        with pytest.raises(ContractError):
            train_selector(
                [((1.0, 2.0), 0), ((1.0,), 1)], SelectorConfig(rounds=1)
            )


class TestScore:
    def test_range_and_determinism(self):
        pairs = synthetic_pairs(200, seed=4)
        model = train_selector(pairs, SelectorConfig(rounds=20)).model
        for x, _ in pairs[:20]:
            s = score(model, x)
            assert 0.0 < s < 1.0
            assert score(model, x) == s

    def test_wrong_width_rejected(self):
        model = train_selector(
            [((1.0, 0.0), 0), ((0.0, 1.0), 1)], SelectorConfig(rounds=2)
        ).model
        with pytest.raises(ContractError):
            score(model, (1.0, 2.0, 3.0))

    def test_serialization_bitwise_scores(self):
        pairs = synthetic_pairs(300, seed=5)
        model = train_selector(pairs, SelectorConfig(rounds=30, depth=3)).model
        clone = load_selector_json(dump_selector_json(model))
        for x, _ in pairs[:50]:
            assert score(clone, x) == score(model, x)


def _pool_of(tables, query_text="tom cruise movies", span=(2, 3)):
    tq = make_tagged(query_text, span, "film")
    return tq, CandidatePool(tq, tuple(tables))


def _feature_model(seed=0):
    """A model over real FeatureVectors favoring subject-column matches."""
    rng = np.random.default_rng(seed)
    name_idx = FEATURE_NAMES.index("SubjectColName_SET_Match")
    values_idx = FEATURE_NAMES.index("SubjectColValues_SET_Match")
    pairs = []
    for _ in range(400):
        row = np.zeros(len(FEATURE_NAMES))
        row[FEATURE_NAMES.index("numRows")] = rng.integers(2, 30)
        row[FEATURE_NAMES.index("numCols")] = rng.integers(2, 6)
        row[FEATURE_NAMES.index("srRank")] = rng.integers(1, 5)
        has_match = rng.random() < 0.5
        row[name_idx] = float(has_match)
        row[values_idx] = float(rng.integers(1, 6)) if has_match else 0.0
        label = int(has_match) if rng.random() < 0.95 else int(not has_match)
        pairs.append((tuple(row), label))
    return train_selector(pairs, SelectorConfig(rounds=60, depth=3)).model


class FeatureModelWrapper:
    """Adapts a tuple-trained model to FeatureVector scoring in tests."""

    def __init__(self, model):
        self.model = model

    def score_table(self, tq, table):
        return score(self.model, featurize(tq, table).values)


class TestSelectAnswer:
    def model(self):
        # trained on real FeatureVector layout so select_answer can be used
        rng = np.random.default_rng(7)
        pairs = []
        for _ in range(300):
            row = np.zeros(len(FEATURE_NAMES))
            row[FEATURE_NAMES.index("numRows")] = rng.integers(2, 20)
            match = rng.random() < 0.5
            row[FEATURE_NAMES.index("SubjectColName_SET_Match")] = float(match)
            row[FEATURE_NAMES.index("SubjectColValues_SET_Match")] = (
                float(rng.integers(1, 4)) if match else 0.0
            )
            pairs.append((tuple(row), int(match)))
        result = train_selector(pairs, SelectorConfig(rounds=50, depth=3))
        model = result.model
        # re-fingerprint for FeatureVector input
        model.feature_names = FEATURE_NAMES
        return model

    def test_empty_pool_null(self):
        tq, pool = _pool_of([])
        result = select_answer(tq, pool, self.model(), 0.5)
        assert result.best_table is None
        assert result.best_score == 0.0
        assert result.all_scores == ()

    def test_theta_bounds(self):
        tq, pool = _pool_of([])
        with pytest.raises(ContractError):
            select_answer(tq, pool, self.model(), 0.0)

    def test_high_theta_returns_null(self, film_table, coactor_table):
        tq, pool = _pool_of([film_table, coactor_table])
        model = self.model()
        result = select_answer(tq, pool, model, 0.99)
        if max(result.all_scores) <= 0.99:
            assert result.best_table is None

    def test_matches_exhaustive_oracle_on_random_pools(
        self, film_table, coactor_table
    ):
        import random as pyrandom

        rng = pyrandom.Random(13)
        model = self.model()
        base_tables = [film_table, coactor_table]
        for trial in range(30):
            tables = []
            for i in range(rng.randint(1, 20)):
                src = rng.choice(base_tables)
                tables.append(
                    make_table(
                        [list(row) for row in src.cells],
                        column_names=src.column_names,
                        subject_col=src.subject_col,
                        sr_rank=rng.randint(1, 5),
                        num_tables_on_page=rng.randint(1, 3),
                    )
                )
            tq, pool = _pool_of(tables)
            theta = rng.choice([0.2, 0.5, 0.8])
            result = select_answer(tq, pool, model, theta)
            scores = [
                score(model, featurize(tq, t)) for t in pool.tables
            ]
            ranks = [t.doc.sr_rank for t in pool.tables]
            oracle_idx = exhaustive_select(scores, ranks, theta)
            if oracle_idx is None:
                assert result.best_table is None
            else:
                assert result.best_table is pool.tables[oracle_idx]
            assert list(result.all_scores) == scores

    def test_raising_theta_never_creates_answer(self, film_table, coactor_table):
        tq, pool = _pool_of([film_table, coactor_table])
        model = self.model()
        low = select_answer(tq, pool, model, 0.1)
        high = select_answer(tq, pool, model, 0.9)
        if low.best_table is None:
            assert high.best_table is None
        if high.best_table is not None and low.best_table is not None:
            assert high.best_table is low.best_table

    def test_tie_break_prefers_lower_sr_rank(self):
        rows = [["a", "1"], ["b", "2"]]
        t_rank2 = make_table(rows, sr_rank=2)
        t_rank1 = make_table(rows, sr_rank=1)
        tq, pool = _pool_of([t_rank2, t_rank1])
        model = self.model()
        result = select_answer(tq, pool, model, 0.01)
        assert result.all_scores[0] == result.all_scores[1]
        if result.best_table is not None:
            assert result.best_table is t_rank1

    def test_invariant_result_nonnull_iff_above_theta(
        self, film_table, coactor_table
    ):
        tq, pool = _pool_of([film_table, coactor_table])
        model = self.model()
        for theta in (0.1, 0.3, 0.5, 0.7, 0.9):
            result = select_answer(tq, pool, model, theta)
            assert (result.best_table is not None) == (result.best_score > theta)
