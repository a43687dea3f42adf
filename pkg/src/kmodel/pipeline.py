"""End-to-end ingest: events -> sessions -> topic shares -> history records.

Each surviving session gets its viewed-page text attached, multi-word
concepts merged, the text tokenized and topic-modeled, and one learning
record appended per matched knowledge point.  All records of a run are
staged first and committed with a single store write, so a failure
anywhere leaves the store untouched.  Sessions already in the store
(same stop time and duration) are skipped, which makes re-running a log
a no-op.
"""

from __future__ import annotations

import logging
import zipfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .config import PipelineConfig
from .events import (
    ActivityEvent,
    LearningSession,
    discriminate_sessions,
    filter_sessions,
    merge_sessions,
)
from .history import HistoryStore, LearningRecord
from .lda import fit_lda
from .shares import knowledge_point_shares
from .textprep import merge_multiword_terms, tokenize
from .tree import KnowledgeTree

log = logging.getLogger(__name__)


class PageTextSource:
    """Per-document page text from a directory or a zip archive.

    Layout is <root>/<doc_id>/<page>.txt either way.  Returns None for
    pages without a text file.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._zip: zipfile.ZipFile | None = None
        self._names: set[str] | None = None
        if self.path.is_file() and self.path.suffix == ".zip":
            self._zip = zipfile.ZipFile(self.path)
            self._names = set(self._zip.namelist())
        elif not self.path.is_dir():
            raise FileNotFoundError(f"page text source not found: {self.path}")

    def page_text(self, doc_id: str, page: int) -> str | None:
        if self._zip is not None:
            name = f"{doc_id}/{page}.txt"
            if name not in (self._names or ()):
                return None
            return self._zip.read(name).decode("utf-8")
        target = self.path / doc_id / f"{page}.txt"
        if not target.is_file():
            return None
        return target.read_text(encoding="utf-8")


@dataclass
class IngestReport:
    """Counts and totals from one ingest run."""

    events: int = 0
    sessions_raw: int = 0
    sessions_merged: int = 0
    sessions_kept: int = 0
    sessions_truncated: int = 0
    sessions_skipped_duplicate: int = 0
    sessions_skipped_no_text: int = 0
    sessions_skipped_few_tokens: int = 0
    sessions_ingested: int = 0
    records_written: int = 0
    total_session_seconds: float = 0.0
    allocated_seconds: float = 0.0  # share-weighted seconds actually recorded

    def summary(self) -> str:
        lines = [
            f"events parsed            {self.events}",
            f"raw sessions             {self.sessions_raw}",
            f"after merging            {self.sessions_merged}",
            f"after filtering          {self.sessions_kept}",
            f"  truncated tail kept    {self.sessions_truncated}",
            f"skipped: already stored  {self.sessions_skipped_duplicate}",
            f"skipped: missing text    {self.sessions_skipped_no_text}",
            f"skipped: too few tokens  {self.sessions_skipped_few_tokens}",
            f"sessions ingested        {self.sessions_ingested}",
            f"records written          {self.records_written}",
            f"session seconds          {self.total_session_seconds:.0f}",
            f"allocated seconds        {self.allocated_seconds:.2f}",
        ]
        return "\n".join(lines)


def reconstruct_sessions(
    events: Sequence[ActivityEvent], config: PipelineConfig
) -> tuple[list[LearningSession], int, int]:
    """Discriminate, merge, and filter sessions; returns (kept, raw, merged counts)."""
    raw = discriminate_sessions(events, config.idle_threshold_s)
    merged = merge_sessions(raw, config.merge_gap_s)
    if not config.include_tail:
        merged = [s for s in merged if not s.truncated]
    kept = filter_sessions(merged, config.min_page_dwell_s, config.min_session_s)
    return kept, len(raw), len(merged)


def _attach_text(session: LearningSession, source: PageTextSource) -> LearningSession | None:
    views = []
    for view in session.page_views:
        text = source.page_text(session.doc_id, view.page)
        if text is None:
            log.warning(
                "session %s on %s: no text for page %d; session skipped",
                session.session_id,
                session.doc_id,
                view.page,
            )
            return None
        views.append(replace(view, text=text))
    if not views:
        log.warning(
            "session %s on %s: no pages left after filtering; session skipped",
            session.session_id,
            session.doc_id,
        )
        return None
    return replace(session, page_views=tuple(views))


def ingest(
    events: Sequence[ActivityEvent],
    text_source: PageTextSource,
    person: str,
    store: HistoryStore,
    tree: KnowledgeTree,
    config: PipelineConfig,
    lexicon: Iterable[str] = (),
    stopwords: Iterable[str] = (),
) -> IngestReport:
    """Run the full pipeline over parsed events and commit new records."""
    report = IngestReport(events=len(events))
    sessions, report.sessions_raw, report.sessions_merged = reconstruct_sessions(events, config)
    report.sessions_kept = len(sessions)
    report.sessions_truncated = sum(1 for s in sessions if s.truncated)

    lexicon = list(lexicon)
    stopwords = list(stopwords)
    seen = store.session_keys(person)
    staged: list[tuple[LearningSession, str, float]] = []
    for session in sessions:
        key = (session.stop_time.isoformat(), float(session.duration_seconds))
        if key in seen:
            report.sessions_skipped_duplicate += 1
            continue
        with_text = _attach_text(session, text_source)
        if with_text is None:
            report.sessions_skipped_no_text += 1
            continue
        text = with_text.text
        if lexicon:
            text = merge_multiword_terms(text, lexicon)
        content = tokenize(text, stopwords)
        if len(content.tokens) < config.topics:
            log.warning(
                "session %s on %s: %d tokens cannot support %d topics; session skipped",
                session.session_id,
                session.doc_id,
                len(content.tokens),
                config.topics,
            )
            report.sessions_skipped_few_tokens += 1
            continue
        result = fit_lda(
            [content],
            k=config.topics,
            alpha=config.alpha,
            beta=config.beta,
            iterations=config.iterations,
            seed=config.seed,
        )
        allocation = knowledge_point_shares(result, 0, tree, m=config.top_m)
        report.sessions_ingested += 1
        report.total_session_seconds += session.duration_seconds
        for point in sorted(allocation.shares):
            staged.append((session, point, allocation.shares[point]))
        seen.add(key)

    next_sequence: dict[str, int] = {}
    entries = []
    for session, point, share in staged:
        sequence_id = next_sequence.get(point, store.next_sequence_id(person, point))
        next_sequence[point] = sequence_id + 1
        entries.append(
            (
                person,
                point,
                LearningRecord(
                    sequence_id=sequence_id,
                    stop_time=session.stop_time,
                    duration_seconds=session.duration_seconds,
                    proportion=share,
                ),
            )
        )
        report.allocated_seconds += session.duration_seconds * share
    report.records_written = store.append_many(entries)
    return report
