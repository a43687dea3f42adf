"""Topic model fitting by collapsed Gibbs sampling.

The per-token sweep dominates runtime, so it lives in a compiled kernel
(kmodel._gibbs) with a pure-Python twin selected at import time when the
extension is unavailable or KMODEL_PURE_PYTHON=1 is set.  Both kernels
draw from the same deterministic stream, so a fit depends only on the
inputs and the seed, never on the backend.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import chain
from typing import Iterable, Sequence

import numpy as np

from .textprep import TokenizedContent

if os.environ.get("KMODEL_PURE_PYTHON") == "1":
    from . import _gibbs_py as _kernel

    _NATIVE = False
else:
    try:
        from . import _gibbs as _kernel  # type: ignore[no-redef]

        _NATIVE = True
    except ImportError:
        from . import _gibbs_py as _kernel  # type: ignore[no-redef]

        _NATIVE = False


def gibbs_backend() -> str:
    """Which sweep kernel was selected at import: 'native' or 'python'."""
    return "native" if _NATIVE else "python"


@dataclass(frozen=True, eq=False)
class TopicModelResult:
    """Fitted topic model: per-topic word distributions and per-document coverage."""

    k: int
    vocabulary: tuple[str, ...]
    topic_term: np.ndarray  # shape (k, V); each row sums to 1
    coverage: np.ndarray  # shape (n_docs, k); each row sums to 1
    seed: int

    @property
    def n_docs(self) -> int:
        return self.coverage.shape[0]

    def term_probability(self, topic: int, term: str) -> float:
        return float(self.topic_term[topic, self.vocabulary.index(term)])

    def top_terms(self, topic: int, m: int) -> list[tuple[str, float]]:
        """Up to *m* highest-probability terms of a topic.

        Only terms with positive probability qualify; ties break
        lexicographically so the cut is deterministic.
        """
        row = self.topic_term[topic]
        ranked = sorted(
            ((term, float(p)) for term, p in zip(self.vocabulary, row) if p > 0),
            key=lambda pair: (-pair[1], pair[0]),
        )
        return ranked[:m]


def _token_lists(docs: Iterable) -> list[list[str]]:
    lists = []
    for doc in docs:
        if isinstance(doc, TokenizedContent):
            lists.append(list(doc.tokens))
        else:
            lists.append([str(t) for t in doc])
    return lists


def fit_lda(
    docs: Sequence,
    k: int,
    alpha: float = 0.1,
    beta: float = 0.01,
    iterations: int = 1000,
    seed: int = 0,
) -> TopicModelResult:
    """Fit a topic model to tokenized documents.

    Runs *iterations* collapsed-Gibbs sweeps from the seeded stream and
    estimates the distributions from the final counts with the usual
    smoothed ratios: topic-term (count + beta) / (topic total + V*beta),
    coverage (count + alpha) / (doc length + k*alpha).  Deterministic for
    a fixed (docs, k, alpha, beta, iterations, seed).
    """
    token_lists = _token_lists(docs)
    if not token_lists:
        raise ValueError("corpus is empty")
    for index, tokens in enumerate(token_lists):
        if not tokens:
            raise ValueError(f"document {index} is empty")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"priors must be positive, got alpha={alpha}, beta={beta}")
    total_tokens = sum(len(tokens) for tokens in token_lists)
    if k > total_tokens:
        raise ValueError(f"k={k} exceeds the corpus size of {total_tokens} tokens")

    vocabulary = tuple(sorted(set(chain.from_iterable(token_lists))))
    term_index = {term: i for i, term in enumerate(vocabulary)}
    n_docs = len(token_lists)
    doc_ids = np.fromiter(
        (d for d, tokens in enumerate(token_lists) for _ in tokens),
        dtype=np.int32,
        count=total_tokens,
    )
    word_ids = np.fromiter(
        (term_index[t] for tokens in token_lists for t in tokens),
        dtype=np.int32,
        count=total_tokens,
    )

    z = np.asarray(
        _kernel.sample_topics(
            doc_ids,
            word_ids,
            n_docs,
            len(vocabulary),
            int(k),
            float(alpha),
            float(beta),
            int(iterations),
            int(seed),
        ),
        dtype=np.int32,
    )

    n_kw = np.zeros((k, len(vocabulary)), dtype=np.int64)
    np.add.at(n_kw, (z, word_ids), 1)
    n_dk = np.zeros((n_docs, k), dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)

    topic_term = (n_kw + beta) / (n_kw.sum(axis=1, keepdims=True) + len(vocabulary) * beta)
    coverage = (n_dk + alpha) / (n_dk.sum(axis=1, keepdims=True) + k * alpha)
    topic_term.setflags(write=False)
    coverage.setflags(write=False)
    return TopicModelResult(
        k=int(k),
        vocabulary=vocabulary,
        topic_term=topic_term,
        coverage=coverage,
        seed=int(seed),
    )
