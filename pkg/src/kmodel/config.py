"""Pipeline configuration: thresholds, priors, and file locations.

Values live in an INI file and can be overridden per run by CLI flags.
The packaged data/default.ini documents every knob.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError

_SECTION_OF = {
    "idle_threshold_s": "sessions",
    "merge_gap_s": "sessions",
    "min_page_dwell_s": "sessions",
    "min_session_s": "sessions",
    "include_tail": "sessions",
    "topics": "lda",
    "alpha": "lda",
    "beta": "lda",
    "iterations": "lda",
    "seed": "lda",
    "top_m": "lda",
    "retention_k": "retention",
    "retention_c": "retention",
    "worker_factor": "normalization",
    "tree": "paths",
    "lexicon": "paths",
    "stopwords": "paths",
    "store": "paths",
}
_INI_KEY = {"retention_k": "k", "retention_c": "c"}


@dataclass
class PipelineConfig:
    # session reconstruction
    idle_threshold_s: float = 300.0
    merge_gap_s: float = 1800.0
    min_page_dwell_s: float = 30.0
    min_session_s: float = 150.0
    include_tail: bool = True
    # topic model
    topics: int = 2
    alpha: float = 0.1
    beta: float = 0.01
    iterations: int = 1000
    seed: int = 13
    top_m: int = 10
    # retention curve
    retention_k: float = 1.84
    retention_c: float = 1.25
    # normalization
    worker_factor: float = 1.0
    complexity_factors: dict[str, float] = field(default_factory=dict)
    # file locations
    tree: Path | None = None
    lexicon: Path | None = None
    stopwords: Path | None = None
    store: Path | None = None

    def validate(self) -> "PipelineConfig":
        if min(self.merge_gap_s, self.min_page_dwell_s, self.min_session_s) < 0:
            raise ConfigError("session thresholds must be >= 0")
        if self.idle_threshold_s <= 0:
            raise ConfigError(f"idle_threshold_s must be positive, got {self.idle_threshold_s}")
        if self.topics < 1:
            raise ConfigError(f"topics must be >= 1, got {self.topics}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError(f"priors must be positive, got alpha={self.alpha}, beta={self.beta}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.top_m < 1:
            raise ConfigError(f"top_m must be >= 1, got {self.top_m}")
        if self.retention_k <= 0 or self.retention_c <= 0:
            raise ConfigError("retention constants must be positive")
        if self.worker_factor <= 0:
            raise ConfigError(f"worker_factor must be positive, got {self.worker_factor}")
        for point, factor in self.complexity_factors.items():
            if factor <= 0:
                raise ConfigError(f"complexity factor for {point!r} must be positive")
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        config = cls()
        base = Path(path).parent
        for f in fields(cls):
            if f.name == "complexity_factors":
                continue
            section = _SECTION_OF[f.name]
            key = _INI_KEY.get(f.name, f.name)
            if not parser.has_option(section, key):
                continue
            raw = parser.get(section, key)
            try:
                if f.name in ("tree", "lexicon", "stopwords", "store"):
                    value: object = (base / raw).resolve() if raw else None
                elif f.type == "bool" or isinstance(getattr(config, f.name), bool):
                    value = parser.getboolean(section, key)
                elif isinstance(getattr(config, f.name), int):
                    value = int(raw)
                else:
                    value = float(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
            setattr(config, f.name, value)
        if parser.has_section("complexity"):
            for point, raw in parser.items("complexity"):
                try:
                    config.complexity_factors[point] = float(raw)
                except ValueError as exc:
                    raise ConfigError(f"bad complexity factor for {point!r}: {raw!r}") from exc
        return config.validate()

    def override(self, **changes) -> "PipelineConfig":
        """A copy with the given non-None fields replaced."""
        clean = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **clean).validate() if clean else self
