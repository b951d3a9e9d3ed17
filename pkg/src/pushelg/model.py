"""Domain types shared by ingestion, scoring, analysis and reporting.

All times are epoch milliseconds (UTC). Days are window-relative:
day ``k`` covers ``[start + k * DAY_MS, start + (k + 1) * DAY_MS)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional

DAY_MS = 86_400_000
MINUTE_MS = 60_000


class PushElgError(Exception):
    """Base class for data errors (CLI exit code 1)."""


class ParseError(PushElgError):
    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}:{line}: " if line is not None else f"{source}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class ConsistencyError(PushElgError):
    pass


class ScoringError(PushElgError):
    pass


def check_topic(topic: str) -> str:
    if not topic or any(ch.isspace() for ch in topic):
        raise ValueError(f"invalid topic id {topic!r}")
    return topic


class GainGrade(enum.Enum):
    NON_RELEVANT = 0
    RELEVANT = 1
    HIGHLY_RELEVANT = 2

    @property
    def gain(self) -> float:
        return _GAINS[self]

    @property
    def is_relevant(self) -> bool:
        return self is not GainGrade.NON_RELEVANT

    @classmethod
    def from_gain(cls, gain: float) -> "GainGrade":
        for grade, value in _GAINS.items():
            if value == gain:
                return grade
        raise ValueError(f"no grade carries gain {gain!r}")


_GAINS = {
    GainGrade.NON_RELEVANT: 0.0,
    GainGrade.RELEVANT: 0.5,
    GainGrade.HIGHLY_RELEVANT: 1.0,
}


class SilentMode(enum.Enum):
    """How a topic-day with no relevant tweets is scored."""

    REWARD_ONE = "elg1"
    ZERO = "elg0"


class LatencyMode(enum.Enum):
    OFFICIAL = "official"
    NONE = "none"
    FIRST_IN_CLUSTER = "first-in-cluster"


@dataclass(frozen=True)
class PushRecord:
    topic: str
    tweet: int
    push_time: int
    run_tag: str

    def __post_init__(self):
        check_topic(self.topic)
        if self.tweet < 0:
            raise ValueError(f"negative tweet id {self.tweet}")
        if self.push_time < 0:
            raise ValueError(f"negative push time {self.push_time}")
        if not self.run_tag:
            raise ValueError("empty run tag")


@dataclass(frozen=True)
class Cluster:
    id: str
    topic: str
    members: frozenset
    earliest_creation: int

    @property
    def is_singleton(self) -> bool:
        return len(self.members) == 1


@dataclass(frozen=True)
class EvaluationWindow:
    start: int
    num_days: int

    def __post_init__(self):
        if self.num_days < 1:
            raise ValueError("num_days must be >= 1")

    @property
    def end(self) -> int:
        return self.start + self.num_days * DAY_MS

    def day_index(self, t: int) -> Optional[int]:
        return day_index(t, self)


def day_index(t: int, window: EvaluationWindow) -> Optional[int]:
    """Day of ``t`` within ``window``, or None when ``t`` falls outside it."""
    idx = (t - window.start) // DAY_MS
    if 0 <= idx < window.num_days:
        return idx
    return None


@dataclass(frozen=True)
class JudgmentSet:
    """Graded, clustered judgment pool.

    ``grades`` maps topic -> tweet id -> grade, ``clusters`` maps topic to its
    clusters, ``creation_times`` maps tweet id -> creation time. Use
    :func:`pushelg.validate.build_judgments` to construct one from raw parts
    with full consistency checking.
    """

    grades: Mapping[str, Mapping[int, GainGrade]]
    clusters: Mapping[str, tuple]
    creation_times: Mapping[int, int] = field(default_factory=dict)

    @cached_property
    def topics(self) -> tuple:
        return tuple(sorted(set(self.grades) | set(self.clusters)))

    @cached_property
    def _cluster_index(self) -> dict:
        index = {}
        for topic, clusters in self.clusters.items():
            by_tweet = {}
            for cluster in clusters:
                for tweet in cluster.members:
                    by_tweet[tweet] = cluster
            index[topic] = by_tweet
        return index

    def grade(self, topic: str, tweet: int) -> Optional[GainGrade]:
        """Grade of ``tweet`` for ``topic``; None when unjudged."""
        return self.grades.get(topic, {}).get(tweet)

    def cluster_of(self, topic: str, tweet: int) -> Optional[Cluster]:
        return self._cluster_index.get(topic, {}).get(tweet)

    def relevant_creation_times(self, topic: str) -> list:
        """Creation times of every relevant tweet pooled for ``topic``."""
        tweets = {t for c in self.clusters.get(topic, ()) for t in c.members}
        tweets.update(t for t, g in self.grades.get(topic, {}).items() if g.is_relevant)
        return sorted(self.creation_times[t] for t in tweets if t in self.creation_times)

    def silent_days(self, topic: str, window: EvaluationWindow) -> frozenset:
        """Days of ``window`` on which no relevant tweet was created for ``topic``."""
        active = {window.day_index(t) for t in self.relevant_creation_times(topic)}
        return frozenset(d for d in range(window.num_days) if d not in active)


@dataclass(frozen=True)
class MetricConfig:
    silent_mode: SilentMode
    latency_mode: LatencyMode
    window: EvaluationWindow
    horizon_minutes: int = 100
    # A first push of a cluster with penalty 0 still uses up that cluster's credit.
    late_push_consumes_credit: bool = True
    max_pushes_per_day: Optional[int] = None

    def __post_init__(self):
        if self.horizon_minutes < 1:
            raise ValueError("horizon_minutes must be >= 1")
        if self.max_pushes_per_day is not None and self.max_pushes_per_day < 0:
            raise ValueError("max_pushes_per_day must be >= 0")

    @property
    def label(self) -> str:
        return f"{self.silent_mode.value}/{self.latency_mode.value}"


@dataclass(frozen=True)
class ScoredPush:
    record: PushRecord
    grade: GainGrade
    cluster_id: Optional[str]
    day: int
    delay_minutes: int
    penalty: float
    credited: bool
    contributed_gain: float
    judged: bool = True


@dataclass
class Diagnostics:
    """Per-report counters.

    The first four flag suspect input. ``late_credit_consumed`` counts
    zero-penalty pushes that used up their cluster's credit and ``capped``
    counts pushes dropped by a per-day cap; both are informational.
    """

    out_of_window: int = 0
    unjudged: int = 0
    clamped_delays: int = 0
    unknown_topic: int = 0
    late_credit_consumed: int = 0
    capped: int = 0

    ANOMALIES = ("out_of_window", "unjudged", "clamped_delays", "unknown_topic")

    def as_dict(self) -> dict:
        return dict(self.__dict__)

    def anomalies(self) -> dict:
        return {k: getattr(self, k) for k in self.ANOMALIES if getattr(self, k)}


@dataclass(frozen=True)
class ScoreReport:
    run_tag: str
    config: MetricConfig
    cells: Mapping[tuple, float]
    topic_means: Mapping[str, float]
    overall: float
    diagnostics: Diagnostics
    pushes: tuple = ()
