"""Text preparation: phrase merging, tokenization, and name normalization.

Knowledge point names and text tokens share one canonical form (lowercase
words joined by hyphens), so topic terms can be matched against tree
leaves by plain string equality.  Multi-word concept names are merged
into single hyphenated tokens before tokenization so they survive the
unigram topic analysis intact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Collection, Iterable

# Word units: unicode word characters (minus underscore) with inner
# hyphens or apostrophes kept, so "inverse-document-frequency" and
# "don't" stay whole while trailing possessive apostrophes drop off.
_WORD_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*", re.UNICODE)

# Separator between phrase words in running text: an optional possessive
# apostrophe, then whitespace or hyphens ("Bayes' rule", "bayes-rule").
_PHRASE_SEP = r"['’]?[\s\-]+"


@dataclass(frozen=True)
class TokenizedContent:
    """Ordered lowercase tokens plus their distinct-term vocabulary."""

    tokens: tuple[str, ...]
    vocabulary: frozenset[str]


def words(text: str) -> list[str]:
    """Lowercase word units of *text* in order of appearance."""
    return _WORD_RE.findall(text.lower())


def normalize_name(name: str) -> str:
    """Canonical concept name: lowercase word units joined by hyphens.

    "Bayes' rule" and "bayes-rule" normalize to the same string, as do
    "Expectation-maximization algorithm" and its space-separated form.
    """
    return "-".join(piece for w in words(name) for piece in w.split("-") if piece)


def _phrase_units(phrase: str) -> list[str]:
    return [piece for w in words(phrase) for piece in w.split("-") if piece]


def merge_multiword_terms(text: str, lexicon: Iterable[str]) -> str:
    """Replace each lexicon phrase in *text* with its hyphen-joined token.

    Matching is case-insensitive and tolerates hyphens or possessive
    apostrophes between the phrase words.  All phrases are matched in a
    single left-to-right pass with longer phrases tried first, so on
    overlap the longest match wins and re-running the merge is a no-op.

    Raises ValueError for a lexicon entry of fewer than two words.
    """
    units_seen: set[tuple[str, ...]] = set()
    entries: list[list[str]] = []
    for raw in lexicon:
        units = _phrase_units(raw)
        if len(units) < 2:
            raise ValueError(f"lexicon entry {raw!r} must have at least two words")
        key = tuple(units)
        if key not in units_seen:
            units_seen.add(key)
            entries.append(units)
    if not entries:
        return text
    entries.sort(key=lambda u: (-len(u), u))
    alternation = "|".join(
        r"\b" + _PHRASE_SEP.join(re.escape(u) for u in units) + r"\b"
        for units in entries
    )
    pattern = re.compile(alternation, re.IGNORECASE | re.UNICODE)
    return pattern.sub(lambda match: normalize_name(match.group(0)), text)


def tokenize(text: str, stopwords: Collection[str] = ()) -> TokenizedContent:
    """Lowercased, punctuation-stripped unigrams with stopwords removed.

    Tokens produced by :func:`merge_multiword_terms` keep their inner
    hyphens and come through as single terms.
    """
    stop = {s.lower() for s in stopwords}
    tokens = tuple(t for t in words(text) if t not in stop)
    return TokenizedContent(tokens=tokens, vocabulary=frozenset(tokens))


def load_word_list(path: str | Path) -> list[str]:
    """Read a one-entry-per-line UTF-8 word or phrase list.

    Blank lines and lines starting with '#' are skipped.
    """
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        entry = line.strip()
        if entry and not entry.startswith("#"):
            entries.append(entry)
    return entries


def default_stopwords() -> list[str]:
    """The stopword list shipped with the package."""
    return load_word_list(Path(__file__).parent / "data" / "stopwords.txt")
