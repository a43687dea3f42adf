from datetime import datetime

import numpy as np
import pytest

from kmodel.analytics import (
    common_topics,
    discipline_expertise,
    lecture_comprehension,
    match_referees,
    pool_group,
    pool_idf,
    pool_person,
    pool_tf,
    research_concentrations,
)
from kmodel.errors import NotFoundError
from kmodel.familiarity import LogisticParams
from kmodel.history import HistoryStore, LearningRecord
from kmodel.textprep import tokenize

from conftest import EVAL_AT, TABLE_ROWS

TABLE_SCORES = {
    "bayes-rule": 15.14,
    "conditional-entropy": 25.75,
    "posterior-distribution": 35.05,
    "lagrange-multiplier": 3.97,
    "expectation-maximization-algorithm": 122.54,
}


class TestPoolTf:
    def test_above_threshold_included(self):
        corpus = [tokenize("x x x x x y")]
        assert pool_tf(corpus, 3).members == {"x"}

    def test_exactly_at_threshold_excluded(self):
        corpus = [tokenize("x x x y")]
        assert pool_tf(corpus, 3).members == set()

    def test_empty_corpus(self):
        pool = pool_tf([], 1)
        assert pool.members == set()
        assert pool.criteria == {"min_tf": 1}

    def test_counts_span_documents(self):
        corpus = [tokenize("x x"), tokenize("x y")]
        assert pool_tf(corpus, 2).members == {"x"}

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            pool_tf([], 0)


class TestPoolIdf:
    def test_everywhere_term_has_zero_idf(self):
        corpus = [tokenize(f"shared unique{i}") for i in range(10)]
        pool = pool_idf(corpus, 0.0)
        assert pool.members == {"shared"}

    def test_rare_term_idf_one(self):
        corpus = [tokenize("rare common")] + [tokenize(f"common w{i}") for i in range(9)]
        assert "rare" in pool_idf(corpus, 1.0).members
        assert "rare" not in pool_idf(corpus, 0.99).members

    def test_threshold_below_all(self):
        corpus = [tokenize("a"), tokenize("b")]
        assert pool_idf(corpus, -0.1).members == set()

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            pool_idf([], 1.0)


class TestPoolPerson:
    def test_table_scores_above_twenty(self):
        pool = pool_person(TABLE_SCORES, 20.0)
        assert pool.members == {
            "conditional-entropy",
            "posterior-distribution",
            "expectation-maximization-algorithm",
        }

    def test_zero_threshold_keeps_positive(self):
        pool = pool_person({"a": 0.0, "b": 0.5}, 0.0)
        assert pool.members == {"b"}

    def test_threshold_above_max(self):
        assert pool_person(TABLE_SCORES, 1000.0).members == set()


class TestPoolGroup:
    def test_full_quorum_is_intersection(self):
        group = {"p": {"x": 5.0, "y": 5.0}, "q": {"x": 5.0}}
        pool = pool_group(group, 1.0, 1.0)
        assert pool.members == pool_person(group["p"], 1.0).members & pool_person(
            group["q"], 1.0
        ).members

    def test_half_quorum_includes_single_knower(self):
        group = {"p": {"x": 5.0}, "q": {}}
        assert pool_group(group, 1.0, 0.5).members == {"x"}

    def test_full_quorum_excludes_single_knower(self):
        group = {"p": {"x": 5.0}, "q": {}}
        assert pool_group(group, 1.0, 1.0).members == set()

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            pool_group({}, 1.0, 1.0)
        with pytest.raises(ValueError):
            pool_group({"p": {}}, 1.0, 0.0)


class TestCommonTopics:
    def test_disjoint_maps_empty(self):
        assert common_topics({"x": 9.0}, {"y": 9.0}) == []

    def test_identical_maps_self_ranked(self):
        scores = {"x": 50.0, "y": 10.0}
        ranked = common_topics(scores, scores, min_f=5.0)
        assert ranked == [("x", 50.0), ("y", 10.0)]

    def test_min_rank_key(self):
        ranked = common_topics({"x": 50.0, "y": 10.0}, {"x": 30.0, "y": 40.0}, min_f=20.0)
        assert ranked == [("x", 30.0)]

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            points = [f"p{i}" for i in range(6)]
            a = {p: float(rng.uniform(0, 50)) for p in points if rng.random() < 0.7}
            b = {p: float(rng.uniform(0, 50)) for p in points if rng.random() < 0.7}
            assert common_topics(a, b, 10.0) == common_topics(b, a, 10.0)

    def test_branch_restriction(self, science_tree):
        a = {"bayes-rule": 9.0, "inverse-document-frequency": 9.0}
        ranked = common_topics(a, dict(a), branch="mathematics", tree=science_tree)
        assert ranked == [("bayes-rule", 9.0)]

    def test_unknown_branch(self, science_tree):
        with pytest.raises(NotFoundError):
            common_topics({}, {}, branch="astrology", tree=science_tree)

    def test_branch_without_tree(self):
        with pytest.raises(ValueError):
            common_topics({}, {}, branch="mathematics")


class TestLectureComprehension:
    def test_all_points_unknown(self):
        assert lecture_comprehension({"a": 5.0}, ["x", "y"]) == 0.0

    def test_no_scores_at_all(self):
        assert lecture_comprehension({}, ["x"]) == 0.0

    def test_mean_relative(self):
        # relative scores are x: 1.5, y: 0.5
        assert lecture_comprehension({"x": 15.0, "y": 5.0}, ["x", "y"]) == pytest.approx(1.0)

    def test_logistic_mode_neutral_params(self):
        params = LogisticParams(0.0, (0.0, 0.0))
        assert lecture_comprehension({"x": 99.0}, ["x", "y"], params) == 0.5

    def test_logistic_mode_uses_raw_scores(self):
        params = LogisticParams(-1.0, (0.5,))
        value = lecture_comprehension({"x": 2.0}, ["x"], params)
        assert value == 0.5

    def test_empty_poster_rejected(self):
        with pytest.raises(ValueError):
            lecture_comprehension({"x": 1.0}, [])


def build_table_store(tmp_path):
    """Store whose familiarity at EVAL_AT approximates the worked table."""
    store = HistoryStore(tmp_path / "store.tsv")
    entries = []
    for seq, stop, duration, proportion in TABLE_ROWS:
        entries.append(
            ("subject", "bayes-rule", LearningRecord(seq, stop, duration, proportion))
        )
    store.append_many(entries)
    # single-record stand-ins for the other four points, chosen to land
    # near the reference measures (shares derived from measure / (d*b))
    synthetic = [
        ("conditional-entropy", datetime(2016, 2, 24, 16, 13), 6294, 0.019442),
        ("posterior-distribution", datetime(2016, 3, 5, 17, 44), 4715, 0.034213),
        ("lagrange-multiplier", datetime(2016, 2, 27, 19, 52), 751, 0.024909),
        ("expectation-maximization-algorithm", datetime(2016, 3, 3, 16, 21), 11448, 0.049633),
    ]
    store.append_many(
        ("subject", point, LearningRecord(1, stop, duration, share))
        for point, stop, duration, share in synthetic
    )
    return store


class TestResearchConcentrations:
    def test_table_fixture_ranks_em_first(self, tmp_path):
        store = build_table_store(tmp_path)
        window = (datetime(2016, 2, 23), datetime(2016, 3, 6))
        result = research_concentrations(store, "subject", window, EVAL_AT, top_n=5)
        assert result.ranked[0][0] == "expectation-maximization-algorithm"
        assert result.ranked[0][1] == pytest.approx(122.54, rel=0.01)

    def test_top_one(self, tmp_path):
        store = build_table_store(tmp_path)
        window = (datetime(2016, 2, 23), datetime(2016, 3, 6))
        result = research_concentrations(store, "subject", window, EVAL_AT, top_n=1)
        assert [p for p, _ in result.ranked] == ["expectation-maximization-algorithm"]

    def test_window_before_records_is_empty(self, tmp_path):
        store = build_table_store(tmp_path)
        window = (datetime(2015, 1, 1), datetime(2015, 2, 1))
        result = research_concentrations(store, "subject", window, EVAL_AT, top_n=5)
        assert result.ranked == ()

    def test_window_restricts_records(self, tmp_path):
        store = build_table_store(tmp_path)
        window = (datetime(2016, 2, 29), datetime(2016, 3, 1))
        result = research_concentrations(store, "subject", window, EVAL_AT, top_n=5)
        assert [p for p, _ in result.ranked] == ["bayes-rule"]

    def test_evaluation_before_window_end_rejected(self, tmp_path):
        store = build_table_store(tmp_path)
        with pytest.raises(ValueError):
            research_concentrations(
                store, "subject", (datetime(2016, 1, 1), datetime(2017, 1, 1)), EVAL_AT, 5
            )


class TestMatchReferees:
    def make_report(self, scores):
        from kmodel.analytics import ConcentrationReport

        return ConcentrationReport(
            person="r",
            window=(datetime(2016, 1, 1), datetime(2016, 2, 1)),
            ranked=tuple(sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))),
        )

    def test_parallel_vector_similarity_one(self):
        match = match_referees(
            {"x": 2.0, "y": 4.0}, {"r": self.make_report({"x": 1.0, "y": 2.0})}
        )
        assert match.ranked_referees[0][1] == pytest.approx(1.0)

    def test_disjoint_supports_zero(self):
        match = match_referees({"x": 1.0}, {"r": self.make_report({"y": 3.0})})
        assert match.ranked_referees == (("r", 0.0),)

    def test_partial_overlap_ranking(self):
        match = match_referees(
            {"x": 1.0},
            {
                "a": self.make_report({"x": 1.0, "y": 1.0}),
                "b": self.make_report({"y": 1.0}),
            },
        )
        assert [r for r, _ in match.ranked_referees] == ["a", "b"]
        assert match.ranked_referees[0][1] == pytest.approx(0.7071, abs=1e-4)
        assert match.ranked_referees[1][1] == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            paper = {f"p{i}": float(rng.uniform(0, 1)) for i in range(4)}
            referee = {f"p{i}": float(rng.uniform(0, 9)) for i in range(4)}
            scale = float(rng.uniform(0.1, 40))
            plain = match_referees(paper, {"r": self.make_report(referee)})
            scaled = match_referees(
                paper, {"r": self.make_report({k: v * scale for k, v in referee.items()})}
            )
            assert plain.ranked_referees[0][1] == pytest.approx(
                scaled.ranked_referees[0][1], abs=1e-9
            )

    def test_empty_paper_rejected(self):
        with pytest.raises(ValueError):
            match_referees({}, {})


class TestDisciplineExpertise:
    def test_count_and_mean(self, science_tree):
        scores = {"bayes-rule": 10.0, "conditional-entropy": 0.0}
        mastered, average = discipline_expertise(scores, science_tree, "mathematics", 5.0)
        assert mastered == 1
        assert average == pytest.approx(2.5)

    def test_empty_scores(self, science_tree):
        mastered, average = discipline_expertise({}, science_tree, "mathematics", 5.0)
        assert (mastered, average) == (0, 0.0)

    def test_huge_threshold_only_affects_count(self, science_tree):
        scores = {"bayes-rule": 10.0}
        _, mean_low = discipline_expertise(scores, science_tree, "mathematics", 0.0)
        mastered, mean_high = discipline_expertise(scores, science_tree, "mathematics", 1e9)
        assert mastered == 0
        assert mean_low == mean_high

    def test_unknown_branch(self, science_tree):
        with pytest.raises(NotFoundError):
            discipline_expertise({}, science_tree, "astrology", 0.0)


class TestThresholdMonotonicity:
    def test_pools_monotone(self):
        rng = np.random.default_rng(8)
        corpus = [
            tokenize(" ".join(rng.choice(["a", "b", "c", "d"], size=12)))
            for _ in range(6)
        ]
        scores = {p: float(rng.uniform(0, 40)) for p in "abcdef"}
        for low, high in [(1, 2), (2, 5)]:
            assert pool_tf(corpus, high).members <= pool_tf(corpus, low).members
        for low, high in [(0.0, 0.5), (0.5, 1.0)]:
            assert pool_idf(corpus, low).members <= pool_idf(corpus, high).members
        for low, high in [(5.0, 10.0), (10.0, 30.0)]:
            assert pool_person(scores, high).members <= pool_person(scores, low).members
