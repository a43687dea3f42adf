"""Familiarity arithmetic: retention decay, score accumulation, scaling.

A familiarity score is the sum, over all learning experiences of a
concept, of duration x content share x memory retention, where retention
decays with the calendar time elapsed since each experience stopped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError, MathDomainError
from .history import LearningHistory

MINUTE_SECONDS = 60.0


@dataclass(frozen=True)
class RetentionParams:
    """Constants of the retention curve b = k / ((log10 t)^c + k)."""

    k: float = 1.84
    c: float = 1.25

    def __post_init__(self) -> None:
        if self.k <= 0 or self.c <= 0:
            raise ConfigError(f"retention constants must be positive, got k={self.k}, c={self.c}")


DEFAULT_RETENTION = RetentionParams()


@dataclass(frozen=True)
class FamiliarityScore:
    """Time-decayed familiarity of one knowledge point or topic."""

    knowledge_point: str
    value: float
    evaluated_at: datetime


@dataclass(frozen=True)
class NormalizationConfig:
    """Multiplicative factors for concept complexity and the person."""

    complexity_factors: Mapping[str, float] = field(default_factory=dict)
    worker_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.worker_factor <= 0:
            raise ConfigError(f"worker_factor must be positive, got {self.worker_factor}")
        for point, factor in self.complexity_factors.items():
            if factor <= 0:
                raise ConfigError(f"complexity factor for {point!r} must be positive, got {factor}")


@dataclass(frozen=True)
class LogisticParams:
    """Intercept and per-concept coefficients of the understanding model."""

    alpha0: float
    alphas: tuple[float, ...]
    points: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.points is not None and len(self.points) != len(self.alphas):
            raise ValueError(
                f"{len(self.alphas)} coefficients for {len(self.points)} points"
            )


def minutes_between(start: datetime, end: datetime) -> float:
    """Calendar minutes from *start* to *end* (may be fractional)."""
    return (end - start).total_seconds() / MINUTE_SECONDS


# Either curve constants or a custom curve minutes -> retained fraction;
# alternative decay models plug in as plain callables.
RetentionLike = Union[RetentionParams, Callable[[float], float]]


def _retention_of(params: RetentionLike) -> Callable[[float], float]:
    if isinstance(params, RetentionParams):
        return lambda minutes: retention(minutes, params)
    if callable(params):
        return params
    raise TypeError(f"expected RetentionParams or a callable, got {type(params).__name__}")


def retention(minutes_elapsed: float, params: RetentionParams = DEFAULT_RETENTION) -> float:
    """Proportion of memory retained *minutes_elapsed* after learning stops.

    The curve is evaluated at t = minutes_elapsed + 1, so retention is
    exactly 1.0 at the moment the learning session ends and strictly
    decreases afterwards.
    """
    if minutes_elapsed < 0:
        raise ValueError(
            f"cannot evaluate retention {minutes_elapsed} minutes before the learning stop"
        )
    t = max(minutes_elapsed + 1.0, 1.0)
    return params.k / (math.log10(t) ** params.c + params.k)


def familiarity(
    history: LearningHistory | Iterable,
    at: datetime,
    params: RetentionLike = DEFAULT_RETENTION,
) -> FamiliarityScore:
    """Familiarity of one knowledge point at time *at*.

    Sums duration x proportion x retention over the history's records.
    Raises ValueError if *at* precedes any record's stop time.
    """
    if isinstance(history, LearningHistory):
        name, records = history.knowledge_point, history.records
    else:
        name, records = "", tuple(history)
    curve = _retention_of(params)
    total = 0.0
    for record in records:
        elapsed = minutes_between(record.stop_time, at)
        if elapsed < 0:
            raise ValueError(
                f"evaluation time {at} precedes record stop {record.stop_time}"
            )
        total += record.duration_seconds * record.proportion * curve(elapsed)
    return FamiliarityScore(knowledge_point=name, value=total, evaluated_at=at)


def topic_familiarity(
    sessions: Iterable[tuple[float, float, datetime]],
    at: datetime,
    params: RetentionLike = DEFAULT_RETENTION,
    topic: str = "",
) -> FamiliarityScore:
    """Familiarity of a topic from (duration, topic share, stop time) sessions."""
    curve = _retention_of(params)
    total = 0.0
    for duration, share, stop_time in sessions:
        elapsed = minutes_between(stop_time, at)
        if elapsed < 0:
            raise ValueError(f"evaluation time {at} precedes session stop {stop_time}")
        total += duration * share * curve(elapsed)
    return FamiliarityScore(knowledge_point=topic, value=total, evaluated_at=at)


def familiarity_by_point(
    histories: Mapping[str, LearningHistory],
    at: datetime,
    params: RetentionLike = DEFAULT_RETENTION,
) -> dict[str, float]:
    """Familiarity value per knowledge point for a set of histories."""
    return {point: familiarity(hist, at, params).value for point, hist in histories.items()}


def relative_familiarity(scores: Mapping[str, float]) -> dict[str, float]:
    """Each score divided by the mean of all scores (mean becomes 1)."""
    if not scores:
        raise MathDomainError("relative familiarity needs at least one score")
    mean = sum(scores.values()) / len(scores)
    if mean <= 0:
        raise MathDomainError("relative familiarity is undefined for all-zero scores")
    return {point: value / mean for point, value in scores.items()}


def normalize(scores: Mapping[str, float], config: NormalizationConfig) -> dict[str, float]:
    """Scores scaled by per-point complexity factors and the worker factor."""
    return {
        point: value * config.complexity_factors.get(point, 1.0) * config.worker_factor
        for point, value in scores.items()
    }


def standardize(scores: Mapping[str, float]) -> dict[str, float]:
    """Z-scores against the population mean and standard deviation."""
    if len(scores) < 2:
        raise MathDomainError("standardize needs at least two scores")
    values = list(scores.values())
    mean = sum(values) / len(values)
    variance = sum((v - mean) ** 2 for v in values) / len(values)
    if variance <= 0:
        raise MathDomainError("standardize is undefined for zero standard deviation")
    sigma = math.sqrt(variance)
    return {point: (value - mean) / sigma for point, value in scores.items()}


def understanding_logit(familiarities: Sequence[float], params: LogisticParams) -> float:
    """Affine combination alpha0 + sum(alpha_j * F_j)."""
    if len(familiarities) != len(params.alphas):
        raise ValueError(
            f"{len(familiarities)} familiarity values for {len(params.alphas)} coefficients"
        )
    return params.alpha0 + sum(a * f for a, f in zip(params.alphas, familiarities))


def understanding_probability(theta: float) -> float:
    """Logistic transform of the understanding logit, in (0, 1)."""
    if not math.isfinite(theta):
        raise ValueError(f"logit must be finite, got {theta}")
    if theta >= 0:
        return 1.0 / (1.0 + math.exp(-theta))
    e = math.exp(theta)
    return e / (1.0 + e)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    positive = x >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    e = np.exp(x[~positive])
    out[~positive] = e / (1.0 + e)
    return out


def fit_logistic(
    feature_rows: Sequence[Sequence[float]],
    labels: Sequence[bool],
    *,
    learning_rate: float = 0.05,
    tolerance: float = 1e-8,
    max_iterations: int = 10_000,
) -> LogisticParams:
    """Maximum-likelihood logistic coefficients via gradient ascent.

    Calibration utility for when labeled (familiarity vector, understood)
    observations are available; coefficients are otherwise supplied as
    input.  Stops when the mean-gradient norm falls below *tolerance* or
    after *max_iterations* sweeps.
    """
    X = np.asarray(feature_rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError("feature rows and labels must be non-empty and aligned")
    X = np.hstack([np.ones((X.shape[0], 1)), X])
    weights = np.zeros(X.shape[1])
    for _ in range(max_iterations):
        predictions = _sigmoid(X @ weights)
        gradient = X.T @ (y - predictions) / len(y)
        weights += learning_rate * gradient
        if np.max(np.abs(gradient)) < tolerance:
            break
    return LogisticParams(
        alpha0=float(weights[0]),
        alphas=tuple(float(w) for w in weights[1:]),
    )
