import random

import pytest

from helpers import make_table, make_tagged
from oracles import recount_distinct_tokens
from tableseek.core import Query, tokenize
from tableseek.errors import ContractError, DataError
from tableseek.features import (
    FEATURE_NAMES,
    FeatureVector,
    IdfTable,
    all_headings_set_match,
    baseline_features,
    featurize,
    premod_postmod_match,
    read_features_jsonl,
    section_headings_set_match,
    subject_colname_set_match,
    subject_colvalues_set_match,
    write_features_jsonl,
)


class TestBaselineFeatures:
    def test_title_token_count_on_fixture(self, film_table):
        q = Query.from_text("tom cruise movies")
        values = baseline_features(q, film_table)
        assert values["qInPageTitle"] == 3.0

    def test_table_shape_features(self):
        table = make_table(
            [[f"v{i}{j}" for j in range(3)] for i in range(10)],
            column_names=("a", "b", "c"),
        )
        q = Query.from_text("anything")
        values = baseline_features(q, table)
        assert values["numRows"] == 10.0
        assert values["numCols"] == 3.0
        assert values["emptyCellRatio"] == 0.0
        assert values["columnNamesPresent"] == 1.0

    def test_importance_and_fraction(self):
        table = make_table(
            [["a", "1"], ["b", "2"]],
            num_tables_on_page=1,
            page_text_length=100,
            table_char_length=40,
        )
        q = Query.from_text("x")
        values = baseline_features(q, table)
        assert values["tableImportance"] == 1.0
        assert values["tablePageFraction"] == 0.4

    def test_distinct_not_occurrences(self):
        table = make_table(
            [["tom tom tom", "x"], ["tom", "y"]],
            column_names=("name", "other"),
        )
        q = Query.from_text("tom tom cruise")
        values = baseline_features(q, table)
        assert values["qInLeftmostCol"] == 1.0  # 'tom' counted once

    def test_exact_match_only_no_pluralization(self):
        table = make_table([["movie a", "1"], ["movie b", "2"]])
        q = Query.from_text("movies")
        values = baseline_features(q, table)
        assert values["qInLeftmostCol"] == 0.0

    def test_counts_match_recount_oracle(self, film_table, coactor_table):
        rng = random.Random(5)
        vocab = ["tom", "cruise", "movies", "year", "mummy", "edge", "blunt", "2017"]
        for _ in range(200):
            q = Query.from_text(
                " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 5)))
            )
            table = rng.choice([film_table, coactor_table])
            values = baseline_features(q, table)
            assert values["qInPageTitle"] == recount_distinct_tokens(
                q.toks, tokenize(table.doc.title)
            )
            assert values["qInColNames"] == recount_distinct_tokens(
                q.toks, tokenize(" ".join(table.column_names))
            )
            leftmost = tokenize(" ".join(row[0] for row in table.cells))
            assert values["qInLeftmostCol"] == recount_distinct_tokens(
                q.toks, leftmost
            )


class TestSubjectMatches:
    def test_colname_plural_equivalence(self):
        table = make_table(
            [["2017", "The Mummy"], ["2014", "Edge"]],
            column_names=("year", "movie"),
            subject_col=1,
        )
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        assert subject_colname_set_match(tq, table) == 1

    def test_colname_mismatch(self):
        table = make_table(
            [["Nicole Kidman", "1990"]],
            column_names=("actor", "year"),
            subject_col=0,
        )
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        assert subject_colname_set_match(tq, table) == 0

    def test_empty_colname(self):
        table = make_table([["a", "b"], ["c", "d"]])
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        assert subject_colname_set_match(tq, table) == 0

    def test_type_name_route(self, td):
        # PST 'flicks' is not in the column name, but the type name is
        table = make_table(
            [["x", "1"]], column_names=("film", "gross"), subject_col=0
        )
        tq = make_tagged("tom cruise flicks", (2, 3), "film")
        assert subject_colname_set_match(tq, table, td) == 1

    def test_colvalues_lake_fixture(self):
        table = make_table(
            [["Lake Washington", "1"], ["Lake Tahoe", "2"], ["Crater Lake", "3"]],
            column_names=("name", "depth"),
            subject_col=0,
        )
        tq = make_tagged("largest lakes in america", (1, 2), "lake")
        assert subject_colvalues_set_match(tq, table) == 3

    def test_colvalues_no_match(self):
        table = make_table(
            [["Top Gun", "1986"], ["The Mummy", "2017"]],
            column_names=("movie", "year"),
            subject_col=0,
        )
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        assert subject_colvalues_set_match(tq, table) == 0

    def test_colvalues_counts_rows(self):
        table = make_table(
            [["Redwood City", "a"], ["Daly City", "b"], ["Oakland", "c"]],
            subject_col=0,
        )
        tq = make_tagged("cities in california", (0, 1), "city")
        assert subject_colvalues_set_match(tq, table) == 2


class TestHeadingMatches:
    def test_section_implies_all(self):
        table = make_table(
            [["a", "b"], ["c", "d"]],
            section_heading="Movies",
            all_headings="Tom Cruise Movies",
        )
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        assert section_headings_set_match(tq, table) == 1
        assert all_headings_set_match(tq, table) == 1

    def test_h1_only_match(self, film_table):
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        assert section_headings_set_match(tq, film_table) == 0
        assert all_headings_set_match(tq, film_table) == 1

    def test_no_headings(self):
        table = make_table([["a", "b"], ["c", "d"]])
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        assert section_headings_set_match(tq, table) == 0
        assert all_headings_set_match(tq, table) == 0

    def test_section_implication_invariant(self, filmography_tables, td):
        for table in filmography_tables:
            for text, span, set_type in [
                ("tom cruise movies", (2, 3), "film"),
                ("tom cruise films", (2, 3), "film"),
            ]:
                tq = make_tagged(text, span, set_type)
                if section_headings_set_match(tq, table, td) == 1:
                    assert all_headings_set_match(tq, table, td) == 1


class TestPremodPostmod:
    def fixture_table(self):
        return make_table(
            [
                ["2017", "The Mummy", "Nick"],
                ["2014", "Edge of Tomorrow", "Cage"],
                ["2012", "Jack Reacher", "Reacher"],
            ],
            column_names=("year", "movie", "role"),
            subject_col=1,
        )

    def test_year_column_hit(self):
        tq = make_tagged("2017 tom cruise movies", (3, 4), "film")
        max_hits, full, missing, frac = premod_postmod_match(tq, self.fixture_table())
        assert max_hits >= 1

    def test_no_modifiers_vacuous(self):
        tq = make_tagged("movies", (0, 1), "film")
        assert premod_postmod_match(tq, self.fixture_table()) == (0, 1, 0, 0.0)

    def test_all_modifiers_missing(self):
        tq = make_tagged("antarctic penguin movies", (2, 3), "film")
        max_hits, full, missing, frac = premod_postmod_match(tq, self.fixture_table())
        assert (max_hits, full) == (0, 0)
        assert missing == 2
        assert frac == 1.0

    def test_full_match_when_all_tokens_in_non_subject_cells(self):
        table = make_table(
            [["Rome", "coastal", "2017"], ["Milan", "inland", "2018"]],
            column_names=("city", "kind", "year"),
            subject_col=0,
        )
        tq = make_tagged("coastal cities 2017", (1, 2), "city")
        max_hits, full, missing, frac = premod_postmod_match(tq, table)
        assert full == 1
        assert missing == 0
        assert frac == 0.0

    def test_full_match_implies_no_missing(self):
        rng = random.Random(11)
        table = self.fixture_table()
        vocab = ["2017", "2014", "cage", "reacher", "zz", "qq"]
        for _ in range(100):
            premod = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 2)))
            text = (premod + " movies").strip()
            span = (len(premod.split()), len(premod.split()) + 1)
            tq = make_tagged(text, span, "film")
            _, full, missing, frac = premod_postmod_match(tq, table)
            if full == 1:
                assert missing == 0 and frac == 0.0

    def test_idf_weighting(self):
        idf = IdfTable(10, {"2017": 9, "rare": 0})
        table = self.fixture_table()
        tq = make_tagged("rare 2017 movies", (2, 3), "film")
        _, _, missing, frac = premod_postmod_match(tq, table, idf)
        assert missing == 1  # 'rare' absent, '2017' present
        assert frac == pytest.approx(
            idf.idf("rare") / (idf.idf("rare") + idf.idf("2017"))
        )


class TestIdfTable:
    def test_uniform_fallback(self):
        assert IdfTable().idf("anything") == 1.0

    def test_smoothing_formula(self):
        import math

        idf = IdfTable(9, {"common": 9})
        assert idf.idf("common") == pytest.approx(math.log(10 / 10) + 1)
        assert idf.idf("unseen") == pytest.approx(math.log(10 / 1) + 1)

    def test_file_round_trip(self, tmp_path):
        idf = IdfTable(5, {"tom": 3, "cruise": 2})
        path = tmp_path / "idf.tsv"
        idf.save(path)
        restored = IdfTable.load(path)
        assert restored.n_docs == 5 and restored.df == idf.df

    def test_from_tables(self, filmography_tables):
        idf = IdfTable.from_tables(filmography_tables)
        assert idf.n_docs == 2
        assert idf.df["mummy"] == 2  # appears in both tables
        assert idf.df["valkyrie"] == 1

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "idf.tsv"
        path.write_text("tom\t3\n", encoding="utf-8")
        with pytest.raises(DataError):
            IdfTable.load(path)


class TestFeaturize:
    def test_vector_length_and_order(self, film_table):
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        fv = featurize(tq, film_table)
        assert len(fv.values) == len(FEATURE_NAMES) == 23
        assert tuple(fv.as_dict()) == FEATURE_NAMES

    def test_deterministic(self, film_table):
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        assert featurize(tq, film_table).values == featurize(tq, film_table).values

    def test_two_table_page_discrimination(self, film_table, coactor_table, td):
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        fa = featurize(tq, film_table, td=td).as_dict()
        fb = featurize(tq, coactor_table, td=td).as_dict()
        text_features = [
            "qInPageTitle", "qInTableTitle", "qInColNames", "qInLeftmostCol",
            "qInSecondLeftCol", "qInOtherCol", "qInSurrText",
        ]
        for name in text_features:
            assert fa[name] == fb[name], name
        assert fa["SubjectColName_SET_Match"] > fb["SubjectColName_SET_Match"]
        assert fa["SubjectColValues_SET_Match"] > fb["SubjectColValues_SET_Match"]

    def test_serialization_round_trip(self, film_table, tmp_path):
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        fv = featurize(tq, film_table)
        path = tmp_path / "features.jsonl"
        write_features_jsonl(
            [{"query": "tom cruise movies", "table_ref": "u#0",
              "features": fv.as_dict(), "label": 1}],
            path,
        )
        (record,) = read_features_jsonl(path)
        assert FeatureVector.from_dict(record["features"]).values == fv.values
        assert record["label"] == 1

    def test_wrong_length_rejected(self):
        with pytest.raises(ContractError):
            FeatureVector((1.0, 2.0))

    def test_boolean_feature_validated(self, film_table):
        tq = make_tagged("tom cruise movies", (2, 3), "film")
        values = dict(featurize(tq, film_table).as_dict())
        values["columnNamesPresent"] = 0.5
        with pytest.raises(ContractError):
            FeatureVector.from_dict(values)
