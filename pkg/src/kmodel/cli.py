"""Command-line interface: kmodel ingest | report | tree.

Exit codes: 0 success, 1 usage or general failure, 2 person/point/file
not found, 3 undefined math (for example relative scores that are all
zero).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime
from pathlib import Path

from . import analytics, report as rendering
from .config import PipelineConfig
from .errors import KmodelError, MathDomainError, NotFoundError
from .events import read_event_log
from .familiarity import (
    LogisticParams,
    RetentionParams,
    familiarity_by_point,
    relative_familiarity,
)
from .history import HistoryStore
from .pipeline import PageTextSource, ingest
from .textprep import default_stopwords, load_word_list, tokenize
from .tree import load_tree

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_FOUND = 2
EXIT_MATH = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_time(raw: str) -> datetime:
    try:
        return datetime.fromisoformat(raw)
    except ValueError:
        raise KmodelError(f"bad timestamp {raw!r}; use ISO-8601 like 2016-03-29 19:24:00")


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    return config.override(
        idle_threshold_s=args.idle_threshold,
        merge_gap_s=args.merge_gap,
        min_page_dwell_s=args.min_page_dwell,
        min_session_s=args.min_session,
        include_tail=False if args.drop_tail else None,
        topics=args.topics,
        alpha=args.alpha,
        beta=args.beta,
        iterations=args.iterations,
        seed=args.seed,
        top_m=args.top_m,
    )


def _stopwords(args) -> list[str]:
    if getattr(args, "no_stopwords", False):
        return []
    if getattr(args, "stopwords", None):
        return load_word_list(args.stopwords)
    return default_stopwords()


def _retention(args) -> RetentionParams:
    return RetentionParams(k=args.retention_k, c=args.retention_c)


def _open_store(args, tree=None) -> HistoryStore:
    path = Path(args.store)
    if not path.exists() and not getattr(args, "create_store", False):
        raise NotFoundError(f"history store not found: {path}")
    return HistoryStore(path, tree=tree)


def _require_person(store: HistoryStore, person: str) -> None:
    if not store.is_empty() and not store.has_person(person):
        raise NotFoundError(f"person {person!r} has no records in the store")


def _person_scores(store, person, at, params) -> dict[str, float]:
    return familiarity_by_point(store.histories(person), at, params)


def _lock_path(store_path: Path) -> Path:
    return store_path.with_name(store_path.name + ".lock")


def _emit(text: str) -> None:
    if text:
        print(text)


# -- commands ------------------------------------------------------------


def cmd_ingest(args) -> int:
    config = _load_config(args)
    tree_path = args.tree or config.tree
    store_location = args.store or config.store
    lexicon_path = args.lexicon or config.lexicon
    stopword_path = args.stopwords or config.stopwords
    if tree_path is None or store_location is None:
        raise KmodelError("a knowledge tree and a store are required (flag or config [paths])")
    tree = load_tree(tree_path)
    events = read_event_log(args.log)
    source = PageTextSource(args.text)
    lexicon = load_word_list(lexicon_path) if lexicon_path else []
    if args.no_stopwords:
        stopwords = []
    elif stopword_path:
        stopwords = load_word_list(stopword_path)
    else:
        stopwords = default_stopwords()

    store_path = Path(store_location)
    lock = _lock_path(store_path)
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise KmodelError(f"another ingest holds the lock {lock}; remove it if stale")
    try:
        os.close(fd)
        store = HistoryStore(store_path, tree=tree)
        result = ingest(
            events, source, args.person, store, tree, config,
            lexicon=lexicon, stopwords=stopwords,
        )
    finally:
        lock.unlink(missing_ok=True)
    _emit(result.summary())
    return EXIT_OK


def _report_common(sub: argparse.ArgumentParser, with_at: bool = True) -> None:
    sub.add_argument("--store", required=True, help="history store file")
    sub.add_argument("--format", choices=(rendering.FORMAT_TABLE, rendering.FORMAT_RECORDS),
                     default=rendering.FORMAT_TABLE)
    sub.add_argument("--retention-k", type=float, default=1.84)
    sub.add_argument("--retention-c", type=float, default=1.25)
    if with_at:
        sub.add_argument("--at", required=True, help="evaluation time (ISO-8601)")


def _warn_if_locked(args) -> None:
    lock = _lock_path(Path(args.store))
    if lock.exists():
        log.warning("ingest lock %s present; the store may be behind one batch", lock)


def cmd_report_familiarity(args) -> int:
    store = _open_store(args)
    _warn_if_locked(args)
    _require_person(store, args.person)
    at = _parse_time(args.at)
    if args.point:
        known = set(store.points(args.person))
        for point in args.point:
            if point not in known:
                raise NotFoundError(f"no records of {point!r} for {args.person!r}")
    rows = rendering.familiarity_rows(
        store, args.person, at, _retention(args), points=args.point or None
    )
    headers = ["knowledge_point", "learning_frequency", "cumulative_seconds",
               "latest_learning", "familiarity"]
    _emit(rendering.render(headers, rows, args.format))
    return EXIT_OK


def cmd_report_relative(args) -> int:
    store = _open_store(args)
    _warn_if_locked(args)
    _require_person(store, args.person)
    at = _parse_time(args.at)
    scores = _person_scores(store, args.person, at, _retention(args))
    if not scores:
        return EXIT_OK
    relative = relative_familiarity(scores)
    rows = [
        {"knowledge_point": point, "relative_familiarity": round(value, 4)}
        for point, value in sorted(relative.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    _emit(rendering.render(["knowledge_point", "relative_familiarity"], rows, args.format))
    return EXIT_OK


def cmd_report_concentrations(args) -> int:
    store = _open_store(args)
    _warn_if_locked(args)
    _require_person(store, args.person)
    window = (_parse_time(args.window_start), _parse_time(args.window_end))
    result = analytics.research_concentrations(
        store, args.person, window, _parse_time(args.at), args.top, _retention(args)
    )
    rows = [
        {"knowledge_point": point, "familiarity": round(value, 2)}
        for point, value in result.ranked
    ]
    _emit(rendering.render(["knowledge_point", "familiarity"], rows, args.format))
    return EXIT_OK


def cmd_report_common_topics(args) -> int:
    store = _open_store(args)
    _warn_if_locked(args)
    _require_person(store, args.person)
    _require_person(store, args.other)
    at = _parse_time(args.at)
    params = _retention(args)
    tree = load_tree(args.tree) if args.tree else None
    ranked = analytics.common_topics(
        _person_scores(store, args.person, at, params),
        _person_scores(store, args.other, at, params),
        min_f=args.min_f,
        branch=args.branch,
        tree=tree,
    )
    rows = [{"knowledge_point": p, "shared_familiarity": round(v, 2)} for p, v in ranked]
    _emit(rendering.render(["knowledge_point", "shared_familiarity"], rows, args.format))
    return EXIT_OK


def cmd_report_pool(args) -> int:
    if args.type in ("tf", "idf"):
        directory = Path(args.corpus)
        if not directory.is_dir():
            raise NotFoundError(f"corpus directory not found: {directory}")
        stopwords = _stopwords(args)
        corpus = [
            tokenize(path.read_text(encoding="utf-8"), stopwords)
            for path in sorted(directory.glob("*.txt"))
        ]
        if args.type == "tf":
            pool = analytics.pool_tf(corpus, args.min_tf)
        else:
            pool = analytics.pool_idf(corpus, args.max_idf)
    else:
        store = _open_store(args)
        _warn_if_locked(args)
        at = _parse_time(args.at)
        params = _retention(args)
        if args.type == "person":
            _require_person(store, args.person)
            scores = _person_scores(store, args.person, at, params)
            pool = analytics.pool_person(scores, args.min_f)
        else:
            persons = [p.strip() for p in args.persons.split(",") if p.strip()]
            for person in persons:
                _require_person(store, person)
            per_person = {p: _person_scores(store, p, at, params) for p in persons}
            pool = analytics.pool_group(per_person, args.min_f, args.quorum)
    rows = [{"concept": c} for c in sorted(pool.members)]
    _emit(rendering.render(["concept"], rows, args.format))
    return EXIT_OK


def cmd_report_lecture(args) -> int:
    store = _open_store(args)
    _warn_if_locked(args)
    _require_person(store, args.person)
    at = _parse_time(args.at)
    points = [p.strip() for p in args.points.split(",") if p.strip()]
    weights = None
    if args.params:
        raw = json.loads(Path(args.params).read_text(encoding="utf-8"))
        weights = LogisticParams(
            alpha0=float(raw["alpha0"]), alphas=tuple(float(a) for a in raw["alphas"])
        )
    scores = _person_scores(store, args.person, at, _retention(args))
    value = analytics.lecture_comprehension(scores, points, weights)
    _emit(rendering.render(
        ["comprehension"], [{"comprehension": round(value, 4)}], args.format
    ))
    return EXIT_OK


def cmd_report_referees(args) -> int:
    store = _open_store(args)
    _warn_if_locked(args)
    shares = {
        str(k): float(v)
        for k, v in json.loads(Path(args.paper_shares).read_text(encoding="utf-8")).items()
    }
    window = (_parse_time(args.window_start), _parse_time(args.window_end))
    at = _parse_time(args.at)
    params = _retention(args)
    candidates = [p.strip() for p in args.candidates.split(",") if p.strip()]
    reports = {}
    for person in candidates:
        _require_person(store, person)
        reports[person] = analytics.research_concentrations(
            store, person, window, at, args.top, params
        )
    match = analytics.match_referees(shares, reports)
    rows = [{"referee": r, "similarity": round(s, 4)} for r, s in match.ranked_referees]
    _emit(rendering.render(["referee", "similarity"], rows, args.format))
    return EXIT_OK


def cmd_report_expertise(args) -> int:
    store = _open_store(args)
    _warn_if_locked(args)
    _require_person(store, args.person)
    tree = load_tree(args.tree)
    scores = _person_scores(store, args.person, _parse_time(args.at), _retention(args))
    mastered, average = analytics.discipline_expertise(scores, tree, args.branch, args.min_f)
    _emit(rendering.render(
        ["branch", "mastered", "average_familiarity"],
        [{"branch": args.branch, "mastered": mastered, "average_familiarity": round(average, 2)}],
        args.format,
    ))
    return EXIT_OK


def cmd_tree_validate(args) -> int:
    tree = load_tree(args.tree)
    print(f"{args.tree}: {len(tree)} nodes, {len(tree.leaves)} knowledge points, root {tree.root!r}")
    return EXIT_OK


# -- parser wiring --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kmodel", description="Reading-log knowledge analytics.")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    commands = parser.add_subparsers(dest="command", required=True)

    p_ingest = commands.add_parser("ingest", help="ingest an event log into the history store")
    p_ingest.add_argument("--log", required=True, help="activity event log (JSON lines)")
    p_ingest.add_argument("--text", required=True, help="page text directory or .zip")
    p_ingest.add_argument("--person", required=True)
    p_ingest.add_argument("--store", help="history store file (or config [paths])")
    p_ingest.add_argument("--tree", help="knowledge tree definition (or config [paths])")
    p_ingest.add_argument("--lexicon", help="multi-word concept list, one per line")
    p_ingest.add_argument("--stopwords", help="stopword list (default: packaged list)")
    p_ingest.add_argument("--no-stopwords", action="store_true")
    p_ingest.add_argument("--config", help="INI configuration file")
    p_ingest.add_argument("--idle-threshold", type=float)
    p_ingest.add_argument("--merge-gap", type=float)
    p_ingest.add_argument("--min-page-dwell", type=float)
    p_ingest.add_argument("--min-session", type=float)
    p_ingest.add_argument("--drop-tail", action="store_true",
                          help="drop the flagged session left open at end of log")
    p_ingest.add_argument("--topics", type=int)
    p_ingest.add_argument("--alpha", type=float)
    p_ingest.add_argument("--beta", type=float)
    p_ingest.add_argument("--iterations", type=int)
    p_ingest.add_argument("--seed", type=int)
    p_ingest.add_argument("--top-m", type=int)
    p_ingest.set_defaults(func=cmd_ingest, create_store=True)

    p_report = commands.add_parser("report", help="read-only reports over the store")
    reports = p_report.add_subparsers(dest="subcommand", required=True)

    sub = reports.add_parser("familiarity", help="per-point statistics and measures")
    _report_common(sub)
    sub.add_argument("--person", required=True)
    sub.add_argument("--point", action="append", help="restrict to a point (repeatable)")
    sub.set_defaults(func=cmd_report_familiarity)

    sub = reports.add_parser("relative", help="measures divided by their mean")
    _report_common(sub)
    sub.add_argument("--person", required=True)
    sub.set_defaults(func=cmd_report_relative)

    sub = reports.add_parser("concentrations", help="top points over a time window")
    _report_common(sub)
    sub.add_argument("--person", required=True)
    sub.add_argument("--window-start", required=True)
    sub.add_argument("--window-end", required=True)
    sub.add_argument("--top", type=int, default=10)
    sub.set_defaults(func=cmd_report_concentrations)

    sub = reports.add_parser("common-topics", help="points familiar to two persons")
    _report_common(sub)
    sub.add_argument("--person", required=True)
    sub.add_argument("--other", required=True)
    sub.add_argument("--min-f", type=float, default=0.0)
    sub.add_argument("--branch")
    sub.add_argument("--tree")
    sub.set_defaults(func=cmd_report_common_topics)

    sub = reports.add_parser("pool", help="concept pools by corpus or familiarity")
    sub.add_argument("--type", choices=("tf", "idf", "person", "group"), required=True)
    sub.add_argument("--corpus", help="directory of .txt documents (tf/idf)")
    sub.add_argument("--min-tf", type=int, default=1)
    sub.add_argument("--max-idf", type=float, default=0.0)
    sub.add_argument("--person")
    sub.add_argument("--persons", default="", help="comma-separated group (group)")
    sub.add_argument("--quorum", type=float, default=1.0)
    sub.add_argument("--min-f", type=float, default=0.0)
    sub.add_argument("--at")
    sub.add_argument("--stopwords")
    sub.add_argument("--no-stopwords", action="store_true")
    sub.add_argument("--store")
    sub.add_argument("--format", choices=(rendering.FORMAT_TABLE, rendering.FORMAT_RECORDS),
                     default=rendering.FORMAT_TABLE)
    sub.add_argument("--retention-k", type=float, default=1.84)
    sub.add_argument("--retention-c", type=float, default=1.25)
    sub.set_defaults(func=cmd_report_pool)

    sub = reports.add_parser("lecture", help="predicted comprehension from poster points")
    _report_common(sub)
    sub.add_argument("--person", required=True)
    sub.add_argument("--points", required=True, help="comma-separated poster points")
    sub.add_argument("--params", help="JSON file with alpha0 and alphas")
    sub.set_defaults(func=cmd_report_lecture)

    sub = reports.add_parser("referees", help="rank candidate referees for a paper")
    _report_common(sub)
    sub.add_argument("--paper-shares", required=True, help="JSON point->share map")
    sub.add_argument("--candidates", required=True, help="comma-separated persons")
    sub.add_argument("--window-start", required=True)
    sub.add_argument("--window-end", required=True)
    sub.add_argument("--top", type=int, default=100)
    sub.set_defaults(func=cmd_report_referees)

    sub = reports.add_parser("expertise", help="mastery of a discipline subtree")
    _report_common(sub)
    sub.add_argument("--person", required=True)
    sub.add_argument("--tree", required=True)
    sub.add_argument("--branch", required=True)
    sub.add_argument("--min-f", type=float, default=0.0)
    sub.set_defaults(func=cmd_report_expertise)

    p_tree = commands.add_parser("tree", help="knowledge tree utilities")
    tree_commands = p_tree.add_subparsers(dest="subcommand", required=True)
    sub = tree_commands.add_parser("validate", help="load and validate a tree definition")
    sub.add_argument("tree")
    sub.set_defaults(func=cmd_tree_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (NotFoundError, FileNotFoundError) as exc:
        print(f"kmodel: not found: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except MathDomainError as exc:
        print(f"kmodel: undefined: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (KmodelError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"kmodel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
