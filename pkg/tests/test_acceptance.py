"""Acceptance suite: one test per release criterion.

Each test prints a PASS/FAIL line in the terminal summary (see
conftest).  Expected values are frozen from independent oracles: direct
formula evaluation, brute-force enumeration, or hand arithmetic.
"""

import json
import math
import time
from datetime import datetime, timedelta

import numpy as np
import pytest

from kmodel.analytics import (
    common_topics,
    match_referees,
    pool_group,
    pool_person,
    pool_tf,
    research_concentrations,
)
from kmodel.errors import StoreError
from kmodel.events import discriminate_sessions, filter_sessions, merge_sessions, parse_event_log
from kmodel.familiarity import (
    familiarity,
    fit_logistic,
    relative_familiarity,
    retention,
    standardize,
    understanding_probability,
)
from kmodel.history import HistoryStore, LearningHistory, LearningRecord
from kmodel.lda import TopicModelResult, fit_lda
from kmodel.shares import knowledge_point_shares

from conftest import EVAL_AT, TABLE_ROWS
from test_analytics import build_table_store
from test_events import THREE_ACTIVITIES
from test_pipeline import run_ingest, workspace  # noqa: F401 (fixture)

TABLE_STORE_LINES = (
    "subject\tbayes-rule\t1\t2016-02-27T18:41:00\t1171\t0.0122\n"
    "subject\tbayes-rule\t2\t2016-02-27T18:47:00\t220\t0.0212\n"
    "subject\tbayes-rule\t3\t2016-02-29T16:08:00\t2523\t0.0117\n"
    "subject\tbayes-rule\t4\t2016-02-29T16:55:00\t330\t0.0066\n"
    "subject\tbayes-rule\t5\t2016-03-03T16:21:00\t1710\t0.0117\n"
)


def oracle_retention(minutes: float) -> float:
    """Independent evaluation of the retention formula (base-10 log)."""
    t = minutes + 1.0
    return 1.84 / (math.log10(t) ** 1.25 + 1.84)


def test_criterion_1_table_familiarity_reproduction(tmp_path):
    started = time.perf_counter()

    # Oracle first: direct evaluation with calendar-minute arithmetic.
    oracle = 0.0
    for _, stop, duration, proportion in TABLE_ROWS:
        minutes = (EVAL_AT - stop).total_seconds() / 60.0
        oracle += duration * proportion * oracle_retention(minutes)
    assert abs(oracle - 15.14) <= 0.01 * 15.14

    # Now the artifact, fed from a store file with exactly the five records.
    path = tmp_path / "store.tsv"
    path.write_text(TABLE_STORE_LINES, encoding="utf-8")
    store = HistoryStore(path)
    history = store.history("subject", "bayes-rule")
    assert history.cumulative_seconds() == 5954
    value = familiarity(history, EVAL_AT).value
    assert abs(value - 15.14) <= 0.01 * 15.14
    assert value == pytest.approx(oracle, abs=1e-9)

    assert time.perf_counter() - started < 1.0


def test_criterion_2_retention_curve():
    assert retention(0.0) == 1.0  # t = 1
    grid_t = [1, 2, 5, 20, 60, 1440, 44684]
    values = [retention(t - 1) for t in grid_t]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert abs(retention(19.0) - 0.5697) <= 0.0005
    for t, value in zip(grid_t, values):
        assert value == pytest.approx(oracle_retention(t - 1), abs=1e-12)


def test_criterion_3_session_pipeline():
    started = time.perf_counter()
    sessions = discriminate_sessions(parse_event_log(THREE_ACTIVITIES))
    assert [s.duration_seconds for s in sessions] == [3610, 2710, 930]

    # same document, 20-minute gap: merges into one session
    pair = parse_event_log(
        [
            json.dumps({"timestamp": "2016-03-13T09:00:00", "kind": "DocOpen", "doc_id": "d"}),
            json.dumps({"timestamp": "2016-03-13T09:10:00", "kind": "DocClose", "doc_id": "d"}),
            json.dumps({"timestamp": "2016-03-13T09:30:00", "kind": "DocOpen", "doc_id": "d"}),
            json.dumps({"timestamp": "2016-03-13T09:40:00", "kind": "DocClose", "doc_id": "d"}),
        ]
    )
    merged = merge_sessions(discriminate_sessions(pair), merge_gap_s=1800)
    assert len(merged) == 1
    assert merged[0].duration_seconds == 2400

    # filtering drops a 149 s session and 29 s page views
    short = parse_event_log(
        [
            json.dumps({"timestamp": "2016-03-13T11:00:00", "kind": "DocOpen", "doc_id": "d"}),
            json.dumps({"timestamp": "2016-03-13T11:02:29", "kind": "DocClose", "doc_id": "d"}),
            json.dumps({"timestamp": "2016-03-13T12:00:00", "kind": "DocOpen", "doc_id": "d"}),
            json.dumps({"timestamp": "2016-03-13T12:00:29", "kind": "PageSwitch", "page": 2}),
            json.dumps({"timestamp": "2016-03-13T12:10:00", "kind": "DocClose", "doc_id": "d"}),
        ]
    )
    filtered = filter_sessions(discriminate_sessions(short), 30, 150)
    assert len(filtered) == 1
    assert filtered[0].duration_seconds == 600
    assert [pv.page for pv in filtered[0].page_views] == [2]  # the 29 s view of page 1 dropped
    assert time.perf_counter() - started < 1.0


def test_criterion_4_share_formula_oracle_equivalence():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        k = int(rng.integers(1, 4))
        m = int(rng.integers(1, 5))
        vocab_size = int(rng.integers(max(2, m), m + 6))
        vocab = tuple(f"t{i}" for i in range(vocab_size))
        result = TopicModelResult(
            k=k,
            vocabulary=vocab,
            topic_term=rng.dirichlet(np.ones(vocab_size), size=k),
            coverage=rng.dirichlet(np.ones(k), size=1),
            seed=0,
        )
        leaves = {v for v in vocab if rng.random() < 0.5}
        allocation = knowledge_point_shares(result, 0, leaves, m=m)

        # brute-force double loop over topics x top-m terms
        slots = {}
        for topic in range(k):
            for term, p in result.top_terms(topic, m):
                slots[(topic, term)] = float(result.coverage[0][topic]) * p
        total = sum(slots.values())
        expected = {slot: w / total for slot, w in slots.items()}

        assert len(allocation.term_shares) == len(expected)
        for topic, term, share in allocation.term_shares:
            assert abs(share - expected[(topic, term)]) <= 1e-12
        assert abs(sum(s for _, _, s in allocation.term_shares) - 1.0) <= 1e-9


def test_criterion_5_topic_model_properties():
    started = time.perf_counter()
    rng = np.random.default_rng(7)

    # probability-vector shape over 20 random corpora
    for _ in range(20):
        n_docs = int(rng.integers(1, 5))
        vocab = [f"w{i}" for i in range(int(rng.integers(3, 20)))]
        docs = [
            [vocab[i] for i in rng.integers(0, len(vocab), int(rng.integers(3, 40)))]
            for _ in range(n_docs)
        ]
        k = int(rng.integers(1, 4))
        result = fit_lda(docs, k=k, iterations=30, seed=int(rng.integers(0, 10_000)))
        assert np.all(result.topic_term >= 0) and np.all(result.coverage >= 0)
        np.testing.assert_allclose(result.topic_term.sum(axis=1), 1.0, atol=1e-9)
        np.testing.assert_allclose(result.coverage.sum(axis=1), 1.0, atol=1e-9)

    # fixed seed: bitwise-identical across two runs
    docs = [["a", "b", "c", "a"], ["c", "d", "d", "b"]]
    first = fit_lda(docs, k=2, iterations=100, seed=99)
    second = fit_lda(docs, k=2, iterations=100, seed=99)
    assert first.topic_term.tobytes() == second.topic_term.tobytes()
    assert first.coverage.tobytes() == second.coverage.tobytes()

    # two disjoint 5-word vocabularies, 50 tokens per document
    cluster_a = ["apple", "pear", "plum", "grape", "melon"]
    cluster_b = ["proton", "neutron", "quark", "boson", "lepton"]
    docs = []
    for index in range(8):
        source = cluster_a if index % 2 == 0 else cluster_b
        docs.append([source[i] for i in rng.integers(0, 5, 50)])
    result = fit_lda(docs, k=2, iterations=1000, seed=13)
    ia = [result.vocabulary.index(t) for t in cluster_a]
    ib = [result.vocabulary.index(t) for t in cluster_b]
    mass = np.array(
        [[result.topic_term[t, ia].sum(), result.topic_term[t, ib].sum()] for t in range(2)]
    )
    purity = max(min(mass[0, 0], mass[1, 1]), min(mass[0, 1], mass[1, 0]))
    assert purity > 0.9
    assert time.perf_counter() - started < 30.0


def test_criterion_6_familiarity_invariants():
    rng = np.random.default_rng(600)
    base = datetime(2016, 1, 1)
    for _ in range(200):
        n = int(rng.integers(1, 10))
        stops = sorted(base + timedelta(minutes=float(m)) for m in rng.uniform(0, 4e4, n))
        records = tuple(
            LearningRecord(i + 1, stop, float(rng.uniform(1, 4000)), float(rng.uniform(0, 1)))
            for i, stop in enumerate(stops)
        )
        history = LearningHistory("x", records)
        at = stops[-1] + timedelta(minutes=float(rng.uniform(0, 9e4)))

        # additivity over concatenation
        split = int(rng.integers(0, n + 1))
        left = LearningHistory("x", records[:split])
        right = LearningHistory("x", records[split:])
        total = familiarity(left, at).value + familiarity(right, at).value
        assert abs(total - familiarity(history, at).value) <= 1e-9

        # monotone non-increase as evaluation time advances
        later = at + timedelta(minutes=float(rng.uniform(1, 1e4)))
        assert familiarity(history, later).value <= familiarity(history, at).value

        # relative familiarity averages exactly 1
        scores = {f"p{i}": float(rng.uniform(0.01, 99)) for i in range(int(rng.integers(1, 8)))}
        relative = relative_familiarity(scores)
        assert abs(sum(relative.values()) / len(relative) - 1.0) <= 1e-9

        # standardize: mean 0, population sigma 1
        spread = {f"p{i}": float(rng.uniform(0, 50)) for i in range(int(rng.integers(2, 8)))}
        if len(set(spread.values())) > 1:
            z = standardize(spread)
            values = np.array(list(z.values()))
            assert abs(values.mean()) <= 1e-9
            assert abs(math.sqrt(np.mean(values**2) - values.mean() ** 2) - 1.0) <= 1e-9


def test_criterion_7_logistic_layer():
    assert understanding_probability(0.0) == 0.5
    assert abs(understanding_probability(2.0) - 0.8808) <= 1e-4
    grid = np.linspace(-25, 25, 201)
    values = [understanding_probability(t) for t in grid]
    assert all(a < b for a, b in zip(values, values[1:]))

    rng = np.random.default_rng(77)
    alpha0, alphas = -0.5, np.array([1.5, 0.6, -1.0])
    X = rng.uniform(0.0, 4.0, size=(500, 3))
    y = (alpha0 + X @ alphas) > 0  # separable by construction
    params = fit_logistic(X, y, learning_rate=0.5, max_iterations=8000)
    fitted = np.array(params.alphas)
    assert np.all(np.sign(fitted) == np.sign(alphas))
    assert list(np.argsort(fitted)) == list(np.argsort(alphas))
    assert params.alpha0 < 0  # planted intercept is negative


def test_criterion_8_analytics_properties(tmp_path):
    rng = np.random.default_rng(800)
    points = [f"p{i}" for i in range(8)]
    for _ in range(100):
        # pool monotonicity in thresholds
        scores = {p: float(rng.uniform(0, 40)) for p in points}
        low, high = sorted(rng.uniform(0, 40, 2))
        assert pool_person(scores, high).members <= pool_person(scores, low).members

        from kmodel.textprep import TokenizedContent

        docs = []
        for _ in range(int(rng.integers(1, 5))):
            tokens = tuple(rng.choice(points, size=int(rng.integers(1, 12))))
            docs.append(TokenizedContent(tokens=tokens, vocabulary=frozenset(tokens)))
        t_low, t_high = sorted(int(v) for v in rng.integers(1, 9, 2))
        if t_low == t_high:
            t_high += 1
        assert pool_tf(docs, t_high).members <= pool_tf(docs, t_low).members

        # common topics symmetry
        a = {p: float(rng.uniform(0, 50)) for p in points if rng.random() < 0.7}
        b = {p: float(rng.uniform(0, 50)) for p in points if rng.random() < 0.7}
        threshold = float(rng.uniform(0, 30))
        assert common_topics(a, b, threshold) == common_topics(b, a, threshold)

        # referee cosine scale invariance
        paper = {p: float(rng.uniform(0.1, 1)) for p in points[:4]}
        referee = {p: float(rng.uniform(0.1, 9)) for p in points[:4]}
        from kmodel.analytics import ConcentrationReport

        def report_of(vector):
            return ConcentrationReport(
                "r", (datetime(2016, 1, 1), datetime(2016, 2, 1)), tuple(vector.items())
            )

        scale = float(rng.uniform(0.05, 50))
        plain = match_referees(paper, {"r": report_of(referee)}).ranked_referees[0][1]
        scaled = match_referees(
            paper, {"r": report_of({k: v * scale for k, v in referee.items()})}
        ).ranked_referees[0][1]
        assert abs(plain - scaled) <= 1e-9

        # quorum 1.0 equals the intersection of individual pools
        group = {
            f"person{j}": {p: float(rng.uniform(0, 20)) for p in points if rng.random() < 0.6}
            for j in range(int(rng.integers(1, 4)))
        }
        min_f = float(rng.uniform(0, 15))
        quorum_members = pool_group(group, min_f, 1.0).members
        intersection = None
        for scores in group.values():
            individual = pool_person(scores, min_f).members
            intersection = individual if intersection is None else intersection & individual
        assert quorum_members == intersection

    # concentration report over the reference fixture ranks the
    # highest-measure point first
    store = build_table_store(tmp_path)
    result = research_concentrations(
        store, "subject", (datetime(2016, 2, 23), datetime(2016, 3, 6)), EVAL_AT, top_n=5
    )
    assert result.ranked[0][0] == "expectation-maximization-algorithm"


def test_criterion_9_determinism_and_atomicity(workspace, monkeypatch):  # noqa: F811
    # double ingest: byte-identical store
    run_ingest(workspace)
    store_path = workspace / "store.tsv"
    before = store_path.read_bytes()
    report, _ = run_ingest(workspace)
    assert report.records_written == 0
    assert store_path.read_bytes() == before

    # injected write failure: store byte-identical to its pre-run state
    extra = [
        {"timestamp": "2016-03-14T09:00:00", "kind": "DocOpen", "doc_id": "d1"},
        {"timestamp": "2016-03-14T10:00:00", "kind": "DocClose", "doc_id": "d1"},
    ]
    from test_pipeline import event_lines

    (workspace / "events.jsonl").write_text(
        event_lines() + "\n".join(json.dumps(r) for r in extra) + "\n", encoding="utf-8"
    )

    def boom(self, payload):
        raise StoreError("injected failure")

    monkeypatch.setattr(HistoryStore, "_commit", boom)
    with pytest.raises(StoreError):
        run_ingest(workspace)
    assert store_path.read_bytes() == before
