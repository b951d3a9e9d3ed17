"""Diagnostic analyses over scored runs and judgment pools."""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Sequence

from .ingest import RunFile
from .model import JudgmentSet, LatencyMode, MetricConfig, SilentMode
from .scoring import score_run

log = logging.getLogger(__name__)

ELG1_OFFICIAL = (SilentMode.REWARD_ONE, LatencyMode.OFFICIAL)
ELG0_OFFICIAL = (SilentMode.ZERO, LatencyMode.OFFICIAL)

# (x variant, y variant) pairs behind the standard scatter plots
DEFAULT_PAIRS = (
    (ELG1_OFFICIAL, ELG0_OFFICIAL),
    (ELG1_OFFICIAL, (SilentMode.REWARD_ONE, LatencyMode.NONE)),
    (ELG0_OFFICIAL, (SilentMode.ZERO, LatencyMode.NONE)),
    (ELG1_OFFICIAL, (SilentMode.REWARD_ONE, LatencyMode.FIRST_IN_CLUSTER)),
    (ELG0_OFFICIAL, (SilentMode.ZERO, LatencyMode.FIRST_IN_CLUSTER)),
)

EMPTY_RUN_TAG = "EMPTY_RUN"


def variant_name(variant) -> str:
    silent, latency = variant
    return f"{silent.value}-{latency.value}"


@dataclass(frozen=True)
class DelayStats:
    run_tag: str
    mode: LatencyMode
    mean_minutes: Optional[float]
    median_minutes: Optional[float]
    count: int


@dataclass(frozen=True)
class PushVolume:
    run_tag: str
    relevant_pushed: int
    gain_contributing: int
    wasted: int


@dataclass(frozen=True)
class TopicClusterCount:
    topic: str
    clusters: int
    singletons: int

    @property
    def percentage(self) -> Optional[float]:
        if self.clusters == 0:
            return None
        return 100.0 * self.singletons / self.clusters


@dataclass(frozen=True)
class ClusterStats:
    topics: tuple
    mean_clusters: float
    mean_singletons: float
    mean_percentage: float
    pooled_percentage: float

    @property
    def average_row(self) -> tuple:
        """The table's rounded average row: (clusters, singletons, percent).

        The percentage is computed from the rounded averages, exactly like
        every per-topic row is computed from its own counts.
        """
        clusters = round_half_up(self.mean_clusters)
        singletons = round_half_up(self.mean_singletons)
        percent = round_half_up(100.0 * singletons / clusters) if clusters else 0
        return clusters, singletons, percent


@dataclass(frozen=True)
class CorrelationResult:
    kendall_tau: float
    r_squared: float
    n: int


@dataclass(frozen=True)
class ScatterPoint:
    run_tag: str
    x: float
    y: float
    is_empty_run: bool = False


@dataclass(frozen=True)
class VariantComparison:
    x_variant: tuple
    y_variant: tuple
    points: tuple
    correlation: CorrelationResult
    correlation_with_empty: Optional[CorrelationResult] = None

    @property
    def name(self) -> str:
        return f"{variant_name(self.x_variant)}_vs_{variant_name(self.y_variant)}"


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def _official(config: MetricConfig) -> MetricConfig:
    return replace(config, latency_mode=LatencyMode.OFFICIAL)


def delay_stats(run: RunFile, judgments: JudgmentSet, config: MetricConfig) -> DelayStats:
    """Mean and median push delay over the pushes that earned gain.

    Which pushes earned gain is decided under the official metric; their
    delays are then measured against the pushed tweet (OFFICIAL or NONE) or
    against the first tweet of the cluster (FIRST_IN_CLUSTER).
    """
    contributing = [p for p in score_run(run, judgments, _official(config)).pushes
                    if p.contributed_gain > 0]
    if config.latency_mode is LatencyMode.FIRST_IN_CLUSTER:
        delays = []
        for push in contributing:
            cluster = judgments.cluster_of(push.record.topic, push.record.tweet)
            delays.append(max(0, push.record.push_time - cluster.earliest_creation) // 60_000)
    else:
        delays = [p.delay_minutes for p in contributing]
    if not delays:
        return DelayStats(run.run_tag or "", config.latency_mode, None, None, 0)
    return DelayStats(
        run_tag=run.run_tag or "",
        mode=config.latency_mode,
        mean_minutes=statistics.fmean(delays),
        median_minutes=float(statistics.median(delays)),
        count=len(delays),
    )


def push_volume(run: RunFile, judgments: JudgmentSet, config: MetricConfig) -> PushVolume:
    """Relevant tweets pushed, split into gain-earning and wasted (redundant or too late)."""
    relevant = [p for p in score_run(run, judgments, config).pushes if p.grade.is_relevant]
    contributing = sum(1 for p in relevant if p.contributed_gain > 0)
    return PushVolume(
        run_tag=run.run_tag or "",
        relevant_pushed=len(relevant),
        gain_contributing=contributing,
        wasted=len(relevant) - contributing,
    )


def cluster_stats(judgments: JudgmentSet) -> ClusterStats:
    rows = []
    for topic in judgments.topics:
        clusters = judgments.clusters.get(topic, ())
        rows.append(TopicClusterCount(topic, len(clusters), sum(c.is_singleton for c in clusters)))
    n = len(rows)
    with_clusters = [r for r in rows if r.clusters]
    total_clusters = sum(r.clusters for r in rows)
    return ClusterStats(
        topics=tuple(rows),
        mean_clusters=sum(r.clusters for r in rows) / n if n else 0.0,
        mean_singletons=sum(r.singletons for r in rows) / n if n else 0.0,
        mean_percentage=(sum(r.percentage for r in with_clusters) / len(with_clusters)
                         if with_clusters else 0.0),
        pooled_percentage=(100.0 * sum(r.singletons for r in rows) / total_clusters
                           if total_clusters else 0.0),
    )


def _check_pair(x: Sequence[float], y: Sequence[float]):
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least 2 paired samples")


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Kendall's tau-b. NaN when either side is entirely tied."""
    _check_pair(x, y)
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (x[i] > x[j]) - (x[i] < x[j])
            dy = (y[i] > y[j]) - (y[i] < y[j])
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            if dx and dy:
                if dx == dy:
                    concordant += 1
                else:
                    discordant += 1
    pairs = n * (n - 1) // 2
    denom = math.sqrt((pairs - ties_x) * (pairs - ties_y))
    if denom == 0:
        return math.nan
    return (concordant - discordant) / denom


def linear_r2(x: Sequence[float], y: Sequence[float]) -> float:
    """R^2 of the least-squares fit of ``y`` on ``x``.

    Raises ValueError for constant ``x``. Constant ``y`` gives 0.
    """
    _check_pair(x, y)
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    if sxx == 0:
        raise ValueError("x is constant; regression undefined")
    if syy == 0:
        log.warning("y is constant; reporting R^2 = 0")
        return 0.0
    return min(1.0, sxy * sxy / (sxx * syy))


def correlate(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    try:
        r2 = linear_r2(x, y)
    except ValueError:
        r2 = math.nan
    return CorrelationResult(kendall_tau(x, y), r2, len(x))


def compare_variants(matrices: Mapping[str, Mapping], pairs=DEFAULT_PAIRS,
                     empty_run: Optional[Mapping] = None) -> list:
    """Scatter data and correlations for each (x variant, y variant) pair.

    ``matrices`` maps run tag to a :func:`score_matrix` result. The optional
    ``empty_run`` matrix is added as a flagged point; correlations are given
    both without it and with it.
    """
    if len(matrices) < 2:
        raise ValueError(f"need >= 2 runs to compare variants, got {len(matrices)}")
    comparisons = []
    for xv, yv in pairs:
        points = [ScatterPoint(tag, matrices[tag][xv].overall, matrices[tag][yv].overall)
                  for tag in sorted(matrices)]
        result = correlate([p.x for p in points], [p.y for p in points])
        with_empty = None
        if empty_run is not None:
            points.append(ScatterPoint(EMPTY_RUN_TAG, empty_run[xv].overall,
                                       empty_run[yv].overall, True))
            with_empty = correlate([p.x for p in points], [p.y for p in points])
        comparisons.append(VariantComparison(xv, yv, tuple(points), result, with_empty))
    return comparisons
