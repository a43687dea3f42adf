"""Activity event logs and learning session reconstruction.

An event log is one JSON object per line with the fields ``timestamp``
(ISO-8601, second precision), ``kind``, and depending on the kind
``doc_id`` and ``page``.  Replaying the events through the start/stop
rules rebuilds the learning sessions:

* a session opens on DocOpen, FocusToDoc, or InputAfterIdle with a
  document in the foreground;
* it closes on DocClose, FocusToOtherApp, or IdleTimeout;
* PageSwitch accrues dwell time to the page active so far and makes the
  new page active.

Sessions on the same document separated by a short gap are then merged,
and short page views / short sessions are filtered out as noise.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable

from .errors import EventLogError

log = logging.getLogger(__name__)

DOC_OPEN = "DocOpen"
DOC_CLOSE = "DocClose"
FOCUS_TO_DOC = "FocusToDoc"
FOCUS_TO_OTHER_APP = "FocusToOtherApp"
INPUT_AFTER_IDLE = "InputAfterIdle"
IDLE_TIMEOUT = "IdleTimeout"
PAGE_SWITCH = "PageSwitch"

EVENT_KINDS = frozenset(
    {
        DOC_OPEN,
        DOC_CLOSE,
        FOCUS_TO_DOC,
        FOCUS_TO_OTHER_APP,
        INPUT_AFTER_IDLE,
        IDLE_TIMEOUT,
        PAGE_SWITCH,
    }
)

# Kinds that must name a document; InputAfterIdle may name the
# foreground document, IdleTimeout and FocusToOtherApp never do.
_DOC_REQUIRED = frozenset({DOC_OPEN, DOC_CLOSE, FOCUS_TO_DOC})
_PAGE_ALLOWED = frozenset({PAGE_SWITCH, DOC_OPEN, FOCUS_TO_DOC, INPUT_AFTER_IDLE})
_ALLOWED_FIELDS = frozenset({"timestamp", "kind", "doc_id", "page"})


@dataclass(frozen=True)
class ActivityEvent:
    timestamp: datetime
    kind: str
    doc_id: str | None = None
    page: int | None = None


@dataclass(frozen=True)
class PageView:
    """A page and how long it was active within one session."""

    page: int
    dwell_seconds: float
    text: str | None = None


@dataclass(frozen=True)
class LearningSession:
    """A contiguous interval of reading activity on one document."""

    session_id: int
    doc_id: str
    start_time: datetime
    stop_time: datetime
    page_views: tuple[PageView, ...] = ()
    truncated: bool = False  # log ended while the session was still open

    @property
    def duration_seconds(self) -> float:
        return (self.stop_time - self.start_time).total_seconds()

    @property
    def text(self) -> str:
        """Concatenated text of the viewed pages (empty until attached)."""
        return "\n".join(pv.text for pv in self.page_views if pv.text)


# -- parsing -----------------------------------------------------------


def _parse_event(obj: dict, number: int) -> ActivityEvent:
    unknown = set(obj) - _ALLOWED_FIELDS
    if unknown:
        raise EventLogError(f"unknown field {sorted(unknown)[0]!r}", number)
    kind = obj.get("kind")
    if kind not in EVENT_KINDS:
        raise EventLogError(f"unknown kind {kind!r}", number)
    raw_ts = obj.get("timestamp")
    if not isinstance(raw_ts, str):
        raise EventLogError("missing or non-string timestamp", number)
    try:
        timestamp = datetime.fromisoformat(raw_ts)
    except ValueError as exc:
        raise EventLogError(f"bad timestamp {raw_ts!r} ({exc})", number) from exc
    doc_id = obj.get("doc_id")
    if doc_id is not None and (not isinstance(doc_id, str) or not doc_id):
        raise EventLogError(f"doc_id must be a non-empty string, got {doc_id!r}", number)
    if kind in _DOC_REQUIRED and doc_id is None:
        raise EventLogError(f"{kind} requires a doc_id", number)
    page = obj.get("page")
    if page is not None:
        if not isinstance(page, int) or isinstance(page, bool) or page < 1:
            raise EventLogError(f"page must be an integer >= 1, got {page!r}", number)
        if kind not in _PAGE_ALLOWED:
            raise EventLogError(f"{kind} must not carry a page", number)
    if kind == PAGE_SWITCH and page is None:
        raise EventLogError("PageSwitch requires a page", number)
    return ActivityEvent(timestamp=timestamp, kind=kind, doc_id=doc_id, page=page)


def parse_event_log(lines: Iterable[str]) -> list[ActivityEvent]:
    """Parse a line-delimited event log, validating order and fields.

    Raises EventLogError naming the offending line for malformed records
    and for timestamps that decrease.
    """
    events: list[ActivityEvent] = []
    previous: datetime | None = None
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EventLogError(f"invalid JSON ({exc.msg})", number) from exc
        if not isinstance(obj, dict):
            raise EventLogError("each line must be a JSON object", number)
        event = _parse_event(obj, number)
        if previous is not None and event.timestamp < previous:
            raise EventLogError(
                f"timestamp {event.timestamp} decreases from {previous}", number
            )
        previous = event.timestamp
        events.append(event)
    return events


def read_event_log(path: str | Path) -> list[ActivityEvent]:
    with open(path, encoding="utf-8") as fh:
        return parse_event_log(fh)


# -- session discrimination --------------------------------------------


class _OpenSession:
    __slots__ = ("doc_id", "start", "page", "page_since", "dwell", "order", "last_seen")

    def __init__(self, doc_id: str, start: datetime, page: int | None):
        self.doc_id = doc_id
        self.start = start
        self.page = page if page is not None else 1
        self.page_since = start
        self.dwell: dict[int, float] = {}
        self.order: list[int] = []
        self.last_seen = start

    def _accrue(self, until: datetime) -> None:
        seconds = (until - self.page_since).total_seconds()
        if self.page not in self.dwell:
            self.dwell[self.page] = 0.0
            self.order.append(self.page)
        self.dwell[self.page] += seconds
        self.page_since = until

    def switch_page(self, page: int, at: datetime) -> None:
        self._accrue(at)
        if page not in self.dwell:
            self.dwell[page] = 0.0
            self.order.append(page)
        self.page = page
        self.last_seen = at

    def close(self, at: datetime, truncated: bool = False) -> LearningSession:
        self._accrue(at)
        views = tuple(PageView(page=p, dwell_seconds=self.dwell[p]) for p in self.order)
        return LearningSession(
            session_id=0,
            doc_id=self.doc_id,
            start_time=self.start,
            stop_time=at,
            page_views=views,
            truncated=truncated,
        )


def discriminate_sessions(
    events: Iterable[ActivityEvent], idle_threshold_s: float = 300.0
) -> list[LearningSession]:
    """Rebuild learning sessions by replaying the start/stop rules.

    IdleTimeout events close the open session at their own timestamp.
    As a fallback for logs without explicit idle markers, an
    InputAfterIdle arriving more than *idle_threshold_s* after the last
    activity closes the open session retroactively at last activity +
    threshold (the moment a poller would have declared idleness) before
    the start rule is applied.

    Stop events with nothing open are ignored with a warning.  If the
    log ends with a session open, the session is closed at the last
    event's timestamp and flagged as truncated.
    """
    if idle_threshold_s <= 0:
        raise ValueError(f"idle_threshold_s must be positive, got {idle_threshold_s}")
    sessions: list[LearningSession] = []
    open_session: _OpenSession | None = None
    last_timestamp: datetime | None = None

    def close(at: datetime, truncated: bool = False) -> None:
        nonlocal open_session
        assert open_session is not None
        sessions.append(open_session.close(at, truncated))
        open_session = None

    for event in events:
        last_timestamp = event.timestamp
        kind = event.kind

        if kind in (DOC_OPEN, FOCUS_TO_DOC):
            if open_session is not None:
                if open_session.doc_id == event.doc_id:
                    log.warning(
                        "%s for %s at %s ignored: session already open",
                        kind,
                        event.doc_id,
                        event.timestamp,
                    )
                    open_session.last_seen = event.timestamp
                    continue
                # Focus moved straight to another document.
                close(event.timestamp)
            open_session = _OpenSession(event.doc_id, event.timestamp, event.page)

        elif kind == INPUT_AFTER_IDLE:
            if open_session is not None:
                gap = (event.timestamp - open_session.last_seen).total_seconds()
                if gap > idle_threshold_s:
                    close(open_session.last_seen + timedelta(seconds=idle_threshold_s))
                else:
                    open_session.last_seen = event.timestamp
                    continue
            if event.doc_id is not None:
                open_session = _OpenSession(event.doc_id, event.timestamp, event.page)

        elif kind == PAGE_SWITCH:
            if open_session is None:
                log.debug("PageSwitch at %s outside any session ignored", event.timestamp)
                continue
            if event.doc_id is not None and event.doc_id != open_session.doc_id:
                log.warning(
                    "PageSwitch for %s at %s ignored: open session is on %s",
                    event.doc_id,
                    event.timestamp,
                    open_session.doc_id,
                )
                continue
            open_session.switch_page(event.page, event.timestamp)

        elif kind == DOC_CLOSE:
            if open_session is not None and open_session.doc_id == event.doc_id:
                close(event.timestamp)
            else:
                log.warning(
                    "DocClose for %s at %s ignored: no matching open session",
                    event.doc_id,
                    event.timestamp,
                )

        elif kind in (FOCUS_TO_OTHER_APP, IDLE_TIMEOUT):
            if open_session is not None:
                close(event.timestamp)
            else:
                log.warning("%s at %s ignored: no open session", kind, event.timestamp)

    if open_session is not None and last_timestamp is not None:
        log.warning(
            "event log ended with an open session on %s; closing at %s (flagged)",
            open_session.doc_id,
            last_timestamp,
        )
        close(last_timestamp, truncated=True)

    return [replace(s, session_id=i) for i, s in enumerate(sessions, start=1)]


def merge_sessions(
    sessions: Iterable[LearningSession], merge_gap_s: float = 1800.0
) -> list[LearningSession]:
    """Merge consecutive same-document sessions separated by a short gap.

    Consecutive sessions with the same doc_id whose gap (next start minus
    previous stop) is strictly below *merge_gap_s* become one session
    spanning both, with page views (and so text) concatenated.  Applied
    left to right, so a chain of close sessions collapses to one.
    """
    merged: list[LearningSession] = []
    for session in sessions:
        previous = merged[-1] if merged else None
        if (
            previous is not None
            and session.doc_id == previous.doc_id
            and (session.start_time - previous.stop_time).total_seconds() < merge_gap_s
        ):
            merged[-1] = replace(
                previous,
                stop_time=max(previous.stop_time, session.stop_time),
                page_views=previous.page_views + session.page_views,
                truncated=session.truncated,
            )
        else:
            merged.append(session)
    return [replace(s, session_id=i) for i, s in enumerate(merged, start=1)]


def filter_sessions(
    sessions: Iterable[LearningSession],
    min_page_dwell_s: float = 30.0,
    min_session_s: float = 150.0,
) -> list[LearningSession]:
    """Drop noise: page views dwelt under *min_page_dwell_s* (their text
    with them) and sessions shorter than *min_session_s*."""
    if min_page_dwell_s < 0 or min_session_s < 0:
        raise ValueError("filter thresholds must be >= 0")
    kept = []
    for session in sessions:
        views = tuple(pv for pv in session.page_views if pv.dwell_seconds >= min_page_dwell_s)
        if session.duration_seconds >= min_session_s:
            kept.append(replace(session, page_views=views))
    return kept
