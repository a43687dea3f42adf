"""Allocation of a document's topic mass to knowledge points.

Only the top m terms of each topic are considered.  Each considered
(topic, term) slot gets the share

    coverage_j * p(term | topic_j)  /  sum over all considered slots,

so the considered shares always total 1.  A knowledge point's share is
the sum of its slot shares across topics; shares on terms that are not
tree leaves are reported as non-knowledge mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection

from .errors import MathDomainError
from .lda import TopicModelResult
from .tree import KnowledgeTree


@dataclass(frozen=True)
class ShareAllocation:
    """Per-knowledge-point shares of one document's content."""

    shares: dict[str, float]
    m: int
    non_knowledge: float
    term_shares: tuple[tuple[int, str, float], ...]  # (topic, term, share) per slot
    short_topics: tuple[int, ...] = ()  # topics with fewer than m positive terms


def knowledge_point_shares(
    result: TopicModelResult,
    doc_index: int,
    tree: KnowledgeTree | Collection[str],
    m: int = 10,
) -> ShareAllocation:
    """Allocate document *doc_index*'s content shares to knowledge points.

    *tree* may be a knowledge tree or any collection of leaf names.  A
    term appearing in several topics' top-m contributes each slot share.
    Topics with fewer than m positive terms contribute what they have
    and are listed in ``short_topics``.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0 <= doc_index < result.n_docs:
        raise IndexError(f"doc_index {doc_index} out of range for {result.n_docs} documents")
    leaves = tree.leaves if isinstance(tree, KnowledgeTree) else frozenset(tree)

    coverage = result.coverage[doc_index]
    slots: list[tuple[int, str, float]] = []
    short: list[int] = []
    for topic in range(result.k):
        top = result.top_terms(topic, m)
        if len(top) < m:
            short.append(topic)
        weight = float(coverage[topic])
        slots.extend((topic, term, weight * p) for term, p in top)

    total = sum(weight for _, _, weight in slots)
    if total <= 0:
        raise MathDomainError("no positive term mass among the considered top terms")

    shares: dict[str, float] = {}
    non_knowledge = 0.0
    term_shares = []
    for topic, term, weight in slots:
        share = weight / total
        term_shares.append((topic, term, share))
        if term in leaves:
            shares[term] = shares.get(term, 0.0) + share
        else:
            non_knowledge += share
    return ShareAllocation(
        shares=shares,
        m=m,
        non_knowledge=non_knowledge,
        term_shares=tuple(term_shares),
        short_topics=tuple(short),
    )
