"""Per-person learning histories and the append-only record store.

A history is the ordered list of learning records for one knowledge
point: (sequence id, stop time, duration, proportion).  The store keeps
every person's histories in one line-delimited file; records are only
ever appended, and a batch is written with a single flush so a crash can
tear at most the final line.  A torn final line is ignored on load and
truncated away before the next append.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator

from .errors import NotFoundError, OrderingError, StoreError
from .tree import KnowledgeTree

log = logging.getLogger(__name__)

_FIELDS = 6  # person, knowledge_point, sequence_id, stop_time, duration_s, proportion


@dataclass(frozen=True)
class LearningRecord:
    """One learning experience of one knowledge point."""

    sequence_id: int
    stop_time: datetime
    duration_seconds: float
    proportion: float

    def __post_init__(self) -> None:
        if self.sequence_id < 1:
            raise ValueError(f"sequence_id must be >= 1, got {self.sequence_id}")
        if self.duration_seconds < 0:
            raise ValueError(f"duration_seconds must be >= 0, got {self.duration_seconds}")
        if not 0.0 <= self.proportion <= 1.0:
            raise ValueError(f"proportion must be in [0, 1], got {self.proportion}")


@dataclass(frozen=True)
class LearningHistory:
    """Ordered records of one knowledge point for one person."""

    knowledge_point: str
    records: tuple[LearningRecord, ...] = ()

    def __post_init__(self) -> None:
        for previous, current in zip(self.records, self.records[1:]):
            _check_order(previous, current, self.knowledge_point)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[LearningRecord]:
        return iter(self.records)

    def with_record(self, record: LearningRecord) -> "LearningHistory":
        """A new history with *record* appended (ordering enforced)."""
        if self.records:
            _check_order(self.records[-1], record, self.knowledge_point)
        return LearningHistory(self.knowledge_point, self.records + (record,))

    def cumulative_seconds(self) -> float:
        return sum(r.duration_seconds for r in self.records)

    def latest_stop(self) -> datetime | None:
        return self.records[-1].stop_time if self.records else None


def _check_order(previous: LearningRecord, current: LearningRecord, point: str) -> None:
    if current.sequence_id <= previous.sequence_id:
        raise OrderingError(
            f"{point}: sequence_id {current.sequence_id} does not follow "
            f"{previous.sequence_id}"
        )
    if current.stop_time < previous.stop_time:
        raise OrderingError(
            f"{point}: stop_time {current.stop_time} precedes {previous.stop_time}"
        )


def history_window(history: LearningHistory, t0: datetime, t1: datetime) -> LearningHistory:
    """Records with t0 <= stop_time <= t1, order preserved."""
    if t0 > t1:
        raise ValueError(f"window start {t0} is after window end {t1}")
    kept = tuple(r for r in history.records if t0 <= r.stop_time <= t1)
    return LearningHistory(history.knowledge_point, kept)


def _format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


class HistoryStore:
    """Append-only, tab-separated record store for learning histories.

    One record per line with the fields person, knowledge_point,
    sequence_id, stop_time (ISO-8601), duration_s, proportion.  When a
    tree is attached, appended knowledge points must be leaves of it.
    """

    def __init__(self, path: str | Path, tree: KnowledgeTree | None = None):
        self.path = Path(path)
        self._tree = tree
        self._data: dict[str, dict[str, LearningHistory]] = {}
        self._repair_offset: int | None = None
        if self.path.exists():
            self._load()

    # -- reading -----------------------------------------------------

    def _load(self) -> None:
        data = self.path.read_bytes()
        if data and not data.endswith(b"\n"):
            keep = data.rfind(b"\n") + 1
            log.warning("%s: ignoring torn final line", self.path)
            self._repair_offset = keep
            data = data[:keep]
        for number, raw in enumerate(data.split(b"\n")[:-1], start=1):
            person, point, record = self._parse_line(raw, number)
            history = self._data.setdefault(person, {}).get(point)
            if history is None:
                history = LearningHistory(point)
            try:
                self._data[person][point] = history.with_record(record)
            except OrderingError as exc:
                raise StoreError(f"{self.path}: line {number}: {exc}") from exc

    def _parse_line(self, raw: bytes, number: int) -> tuple[str, str, LearningRecord]:
        try:
            line = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise StoreError(f"{self.path}: line {number}: not valid UTF-8") from exc
        parts = line.split("\t")
        if len(parts) != _FIELDS:
            raise StoreError(
                f"{self.path}: line {number}: expected {_FIELDS} fields, got {len(parts)}"
            )
        person, point, seq, stop, duration, proportion = parts
        try:
            record = LearningRecord(
                sequence_id=int(seq),
                stop_time=datetime.fromisoformat(stop),
                duration_seconds=float(duration),
                proportion=float(proportion),
            )
        except ValueError as exc:
            raise StoreError(f"{self.path}: line {number}: bad record ({exc})") from exc
        return person, point, record

    def is_empty(self) -> bool:
        return not self._data

    def persons(self) -> list[str]:
        return sorted(self._data)

    def has_person(self, person: str) -> bool:
        return person in self._data

    def points(self, person: str) -> list[str]:
        return sorted(self._data.get(person, {}))

    def history(self, person: str, point: str) -> LearningHistory:
        return self._data.get(person, {}).get(point, LearningHistory(point))

    def histories(self, person: str) -> dict[str, LearningHistory]:
        return dict(self._data.get(person, {}))

    def next_sequence_id(self, person: str, point: str) -> int:
        return len(self.history(person, point).records) + 1

    def session_keys(self, person: str) -> set[tuple[str, float]]:
        """(stop_time ISO, duration) pairs already recorded for *person*.

        Sessions of one person never overlap, so the pair identifies the
        session a record came from; ingest uses this to skip sessions it
        has already written.
        """
        keys = set()
        for history in self._data.get(person, {}).values():
            for record in history.records:
                keys.add((record.stop_time.isoformat(), float(record.duration_seconds)))
        return keys

    # -- writing -----------------------------------------------------

    def _check_entry(
        self,
        person: str,
        point: str,
        record: LearningRecord,
        staged: dict[tuple[str, str], LearningHistory],
    ) -> None:
        for name, value in (("person", person), ("knowledge point", point)):
            if not value or "\t" in value or "\n" in value:
                raise StoreError(f"invalid {name} {value!r} (empty or contains tab/newline)")
        if self._tree is not None and point not in self._tree.leaves:
            raise NotFoundError(f"knowledge point {point!r} is not a leaf of the tree")
        key = (person, point)
        history = staged.get(key, self.history(person, point))
        staged[key] = history.with_record(record)

    def _line(self, person: str, point: str, record: LearningRecord) -> str:
        return "\t".join(
            (
                person,
                point,
                str(record.sequence_id),
                record.stop_time.isoformat(),
                _format_number(record.duration_seconds),
                repr(float(record.proportion)),
            )
        ) + "\n"

    def _commit(self, payload: bytes) -> None:
        if self._repair_offset is not None:
            with open(self.path, "r+b") as fh:
                fh.truncate(self._repair_offset)
                fh.seek(self._repair_offset)
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())
            self._repair_offset = None
        else:
            with open(self.path, "ab") as fh:
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())

    def append_many(self, entries: Iterable[tuple[str, str, LearningRecord]]) -> int:
        """Validate then append a batch of (person, point, record) entries.

        Validation happens before any byte is written: a failing entry
        leaves the store file untouched.
        """
        staged: dict[tuple[str, str], LearningHistory] = {}
        lines = []
        for person, point, record in entries:
            self._check_entry(person, point, record, staged)
            lines.append(self._line(person, point, record))
        if not lines:
            return 0
        self._commit("".join(lines).encode("utf-8"))
        for (person, point), history in staged.items():
            self._data.setdefault(person, {})[point] = history
        return len(lines)

    def append(self, person: str, point: str, record: LearningRecord) -> None:
        """Append one record (see :meth:`append_many`)."""
        self.append_many([(person, point, record)])


def append_record(
    store: HistoryStore, person: str, point: str, record: LearningRecord
) -> LearningHistory:
    """Append *record* to the store and return the updated history."""
    store.append(person, point, record)
    return store.history(person, point)
