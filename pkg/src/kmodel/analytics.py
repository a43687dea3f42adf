"""Applications over familiarity scores: concept pools, common topics,
research concentrations, referee matching, and discipline expertise."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Mapping, Sequence

from .familiarity import (
    DEFAULT_RETENTION,
    LogisticParams,
    RetentionLike,
    familiarity,
    relative_familiarity,
    understanding_logit,
    understanding_probability,
)
from .history import HistoryStore, history_window
from .textprep import TokenizedContent
from .tree import KnowledgeTree

POOL_TF = "TF"
POOL_IDF = "IDF"
POOL_PERSON = "PersonFamiliarity"
POOL_GROUP = "GroupFamiliarity"


@dataclass(frozen=True)
class ConceptsPool:
    """A concept set selected by corpus statistics or familiarity thresholds."""

    pool_type: str
    members: frozenset[str]
    criteria: dict


@dataclass(frozen=True)
class ConcentrationReport:
    """Knowledge points ranked by familiarity over a time window."""

    person: str
    window: tuple[datetime, datetime]
    ranked: tuple[tuple[str, float], ...]

    def as_scores(self) -> dict[str, float]:
        return dict(self.ranked)


@dataclass(frozen=True)
class RefereeMatch:
    """Candidate referees ranked by similarity to a paper's share vector."""

    paper_shares: dict[str, float]
    ranked_referees: tuple[tuple[str, float], ...]


def _term_counts(corpus: Iterable[TokenizedContent]) -> Counter:
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(doc.tokens)
    return counts


def pool_tf(corpus: Sequence[TokenizedContent], min_tf: int) -> ConceptsPool:
    """Terms whose total corpus frequency is strictly above *min_tf*."""
    if min_tf < 1:
        raise ValueError(f"min_tf must be >= 1, got {min_tf}")
    counts = _term_counts(corpus)
    members = frozenset(term for term, count in counts.items() if count > min_tf)
    return ConceptsPool(POOL_TF, members, {"min_tf": min_tf})


def pool_idf(corpus: Sequence[TokenizedContent], max_idf: float) -> ConceptsPool:
    """Terms shared widely across documents: log10(N / df) <= *max_idf*."""
    if not corpus:
        raise ValueError("pool_idf needs a non-empty corpus")
    n_docs = len(corpus)
    doc_frequency: Counter = Counter()
    for doc in corpus:
        doc_frequency.update(doc.vocabulary)
    members = frozenset(
        term for term, df in doc_frequency.items() if math.log10(n_docs / df) <= max_idf
    )
    return ConceptsPool(POOL_IDF, members, {"max_idf": max_idf})


def pool_person(scores: Mapping[str, float], min_f: float) -> ConceptsPool:
    """Points whose familiarity is strictly above *min_f*."""
    members = frozenset(point for point, value in scores.items() if value > min_f)
    return ConceptsPool(POOL_PERSON, members, {"min_f": min_f})


def pool_group(
    per_person_scores: Mapping[str, Mapping[str, float]],
    min_f: float,
    quorum_fraction: float,
) -> ConceptsPool:
    """Points familiar (F > min_f) to at least a quorum of the group."""
    if not per_person_scores:
        raise ValueError("pool_group needs a non-empty group")
    if not 0 < quorum_fraction <= 1:
        raise ValueError(f"quorum_fraction must be in (0, 1], got {quorum_fraction}")
    group_size = len(per_person_scores)
    candidates = set()
    for scores in per_person_scores.values():
        candidates.update(scores)
    members = frozenset(
        point
        for point in candidates
        if sum(1 for scores in per_person_scores.values() if scores.get(point, 0.0) > min_f)
        / group_size
        >= quorum_fraction
    )
    return ConceptsPool(
        POOL_GROUP, members, {"min_f": min_f, "quorum_fraction": quorum_fraction}
    )


def common_topics(
    scores_a: Mapping[str, float],
    scores_b: Mapping[str, float],
    min_f: float = 0.0,
    branch: str | None = None,
    tree: KnowledgeTree | None = None,
) -> list[tuple[str, float]]:
    """Points familiar to both persons, ranked by the smaller familiarity.

    With *branch* given (requires *tree*), candidates are restricted to
    that subtree.  Returns (point, min(F_a, F_b)) pairs, descending, ties
    broken by name.
    """
    candidates = set(scores_a) & set(scores_b)
    if branch is not None:
        if tree is None:
            raise ValueError("a tree is required to restrict to a branch")
        candidates &= set(tree.subtree_points(branch))
    ranked = [
        (point, min(scores_a[point], scores_b[point]))
        for point in candidates
        if scores_a[point] > min_f and scores_b[point] > min_f
    ]
    ranked.sort(key=lambda pair: (-pair[1], pair[0]))
    return ranked


def lecture_comprehension(
    scores: Mapping[str, float],
    poster_points: Sequence[str],
    weights: LogisticParams | None = None,
) -> float:
    """Predicted comprehension of a lecture from its poster's points.

    Default mode: mean relative familiarity over the poster points, with
    unknown points contributing 0.  With *weights* given, returns the
    logistic understanding probability over the points' raw scores.
    """
    if not poster_points:
        raise ValueError("poster_points must be non-empty")
    if weights is not None:
        values = [scores.get(point, 0.0) for point in poster_points]
        return understanding_probability(understanding_logit(values, weights))
    if not scores or sum(scores.values()) <= 0:
        return 0.0
    relative = relative_familiarity(scores)
    return sum(relative.get(point, 0.0) for point in poster_points) / len(poster_points)


def research_concentrations(
    store: HistoryStore,
    person: str,
    window: tuple[datetime, datetime],
    at: datetime,
    top_n: int,
    params: RetentionLike = DEFAULT_RETENTION,
) -> ConcentrationReport:
    """Top knowledge points by familiarity over the windowed histories.

    Only records stopping inside the window count; points without any
    such record are omitted.
    """
    t0, t1 = window
    if t0 > t1:
        raise ValueError(f"window start {t0} is after window end {t1}")
    if at < t1:
        raise ValueError(f"evaluation time {at} is before the window end {t1}")
    if top_n < 0:
        raise ValueError(f"top_n must be >= 0, got {top_n}")
    scored = []
    for point in store.points(person):
        windowed = history_window(store.history(person, point), t0, t1)
        if windowed.records:
            scored.append((point, familiarity(windowed, at, params).value))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return ConcentrationReport(person=person, window=(t0, t1), ranked=tuple(scored[:top_n]))


def _cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    keys = set(a) | set(b)
    dot = sum(a.get(k, 0.0) * b.get(k, 0.0) for k in keys)
    norm_a = math.sqrt(sum(v * v for v in a.values()))
    norm_b = math.sqrt(sum(v * v for v in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def match_referees(
    paper_shares: Mapping[str, float],
    candidate_reports: Mapping[str, ConcentrationReport],
) -> RefereeMatch:
    """Rank candidate referees by cosine similarity of concentration
    vectors to the paper's knowledge point shares."""
    if not paper_shares:
        raise ValueError("paper_shares must be non-empty")
    ranked = [
        (referee, _cosine(paper_shares, report.as_scores()))
        for referee, report in candidate_reports.items()
    ]
    ranked.sort(key=lambda pair: (-pair[1], pair[0]))
    return RefereeMatch(paper_shares=dict(paper_shares), ranked_referees=tuple(ranked))


def discipline_expertise(
    scores: Mapping[str, float],
    tree: KnowledgeTree,
    branch: str,
    min_f: float,
) -> tuple[int, float]:
    """(points mastered, average familiarity) over a branch's subtree.

    Mastery means F strictly above *min_f*; unscored points count as 0
    in the average.
    """
    points = tree.subtree_points(branch)
    mastered = sum(1 for point in points if scores.get(point, 0.0) > min_f)
    average = sum(scores.get(point, 0.0) for point in points) / len(points)
    return mastered, average
