"""Report rendering: aligned text tables or line-delimited JSON records."""

from __future__ import annotations

import json
from datetime import datetime
from typing import Mapping, Sequence

from .familiarity import DEFAULT_RETENTION, RetentionParams, familiarity
from .history import HistoryStore
from .lda import TopicModelResult

FORMAT_TABLE = "table"
FORMAT_RECORDS = "records"


def render_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [[str(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(values: Sequence[str]) -> str:
        return "  ".join(v.ljust(w) for v, w in zip(values, widths)).rstrip()
    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in cells)
    return "\n".join(out)


def render_records(rows: Sequence[Mapping[str, object]]) -> str:
    return "\n".join(json.dumps(dict(row), sort_keys=True) for row in rows)


def render(headers: Sequence[str], rows: Sequence[Mapping[str, object]], fmt: str) -> str:
    """Render rows (dicts keyed like *headers*) in the chosen format."""
    if fmt == FORMAT_RECORDS:
        return render_records(rows)
    return render_table(headers, [[row[h] for h in headers] for row in rows])


def familiarity_rows(
    store: HistoryStore,
    person: str,
    at: datetime,
    params: RetentionParams = DEFAULT_RETENTION,
    points: Sequence[str] | None = None,
) -> list[dict[str, object]]:
    """Per-point statistics rows: frequency, cumulative time, latest date, measure."""
    rows = []
    for point in points if points is not None else store.points(person):
        history = store.history(person, point)
        if not history.records:
            continue
        latest = history.latest_stop()
        rows.append(
            {
                "knowledge_point": point,
                "learning_frequency": len(history),
                "cumulative_seconds": int(history.cumulative_seconds()),
                "latest_learning": latest.isoformat() if latest else "",
                "familiarity": round(familiarity(history, at, params).value, 2),
            }
        )
    rows.sort(key=lambda r: (-float(r["familiarity"]), r["knowledge_point"]))
    return rows


def render_topics(result: TopicModelResult, top: int = 10) -> str:
    """Structured text dump of a fitted topic model."""
    lines = [f"seed\t{result.seed}", f"topics\t{result.k}"]
    for topic in range(result.k):
        terms = "  ".join(f"{t}:{p:.6f}" for t, p in result.top_terms(topic, top))
        lines.append(f"topic {topic}\t{terms}")
    for index in range(result.n_docs):
        coverage = " ".join(f"{v:.6f}" for v in result.coverage[index])
        lines.append(f"coverage {index}\t{coverage}")
    return "\n".join(lines)
