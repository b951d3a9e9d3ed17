"""Seeded synthetic judgment pools and archetypal push behaviors.

Randomness comes from :class:`CounterRNG`, a counter-based SplitMix64
construction (see ``docs/formats.md``), so that generated datasets can be
reproduced bit-for-bit by any implementation.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .analysis import round_half_up
from .ingest import (
    SNOWFLAKE_EPOCH_MS,
    RunFile,
    build_judgments,
    creation_time,
    format_clusters,
    format_gains,
    format_run,
    snowflake_id,
)
from .model import (
    DAY_MS,
    MINUTE_MS,
    EvaluationWindow,
    GainGrade,
    JudgmentSet,
    PushElgError,
    PushRecord,
)

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
DEFAULT_START = 1_437_350_400_000  # 2015-07-20T00:00:00Z
# sequence bits at or above this mark ids that never enter a judgment pool
UNJUDGED_SEQUENCE_BASE = 1 << 21
MAX_SPREAD_MS = 6 * 3_600_000


class InfeasibleParameters(PushElgError, ValueError):
    pass


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class CounterRNG:
    """Draw ``i`` (1-based) of stream ``s`` under seed ``k`` is
    ``mix64(key + i * GAMMA)`` with ``key = mix64(k ^ mix64(s + GAMMA))``."""

    def __init__(self, seed: int, stream: int = 0):
        self.key = mix64((seed & MASK64) ^ mix64(stream + GAMMA))
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.key + self.counter * GAMMA)

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        return int(self.uniform() * n)

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def shuffle(self, items: list) -> list:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


def topic_name(index: int) -> str:
    return f"SYN{index + 1:03d}"


def gen_judgments(topics: int, days: int, *, seed: int = 0, start: int = DEFAULT_START,
                  silent_fraction: float = 0.3, singleton_fraction: float = 0.75,
                  max_cluster_size: int = 4, clusters_per_day: tuple = (1, 3),
                  highly_relevant_fraction: float = 0.5, nonrelevant_per_day: int = 2,
                  require_clusters: bool = False) -> JudgmentSet:
    """Deterministic synthetic pool over ``topics`` x ``days`` cells.

    Exactly ``round(silent_fraction * topics * days)`` cells get no relevant
    tweets. Every other cell gets between ``clusters_per_day[0]`` and
    ``clusters_per_day[1]`` clusters whose members are all created that day.
    A cluster is a singleton with probability ``singleton_fraction``; otherwise
    its size is uniform in ``[2, max_cluster_size]``. With ``require_clusters``
    every topic keeps at least one non-silent day.
    """
    if topics < 1 or days < 1:
        raise InfeasibleParameters("topics and days must be >= 1")
    for name, value in (("silent_fraction", silent_fraction),
                        ("singleton_fraction", singleton_fraction),
                        ("highly_relevant_fraction", highly_relevant_fraction)):
        if not 0.0 <= value <= 1.0:
            raise InfeasibleParameters(f"{name} must be in [0, 1]")
    lo, hi = clusters_per_day
    if lo < 1 or hi < lo:
        raise InfeasibleParameters("clusters_per_day must satisfy 1 <= lo <= hi")
    if max_cluster_size < 1 or (singleton_fraction < 1.0 and max_cluster_size < 2):
        raise InfeasibleParameters("max_cluster_size too small for non-singleton clusters")
    if nonrelevant_per_day < 0:
        raise InfeasibleParameters("nonrelevant_per_day must be >= 0")
    if start < SNOWFLAKE_EPOCH_MS:
        raise InfeasibleParameters("window start precedes the Snowflake epoch")

    cells = [(t, d) for t in range(topics) for d in range(days)]
    n_silent = round_half_up(silent_fraction * len(cells))
    rng = CounterRNG(seed, 0)
    candidates = list(cells)
    if require_clusters:
        reserved = {(t, rng.below(days)) for t in range(topics)}
        candidates = [c for c in cells if c not in reserved]
        if n_silent > len(candidates):
            raise InfeasibleParameters(
                f"silent fraction {silent_fraction} leaves a topic without clusters"
            )
    silent = set(rng.shuffle(candidates)[:n_silent])

    gains: dict = {}
    raw_clusters: dict = {}
    sequence = 0
    for t in range(topics):
        topic = topic_name(t)
        trng = CounterRNG(seed, t + 1)
        topic_gains = gains.setdefault(topic, {})
        topic_clusters = raw_clusters.setdefault(topic, [])
        for d in range(days):
            day_start = start + d * DAY_MS
            if (t, d) not in silent:
                for _ in range(trng.between(lo, hi)):
                    size = 1
                    if trng.uniform() >= singleton_fraction:
                        size = trng.between(2, max_cluster_size)
                    first = day_start + trng.below(DAY_MS)
                    spread = min(MAX_SPREAD_MS, day_start + DAY_MS - 1 - first)
                    members = []
                    for k in range(size):
                        created = first if k == 0 else first + trng.below(spread + 1)
                        tweet = snowflake_id(created, sequence)
                        sequence += 1
                        members.append(tweet)
                        hr = trng.uniform() < highly_relevant_fraction
                        topic_gains[tweet] = GainGrade.HIGHLY_RELEVANT if hr else GainGrade.RELEVANT
                    topic_clusters.append((f"{topic}.{len(topic_clusters)}", members))
            for _ in range(nonrelevant_per_day):
                tweet = snowflake_id(day_start + trng.below(DAY_MS), sequence)
                sequence += 1
                topic_gains[tweet] = GainGrade.NON_RELEVANT
    if sequence >= UNJUDGED_SEQUENCE_BASE:
        raise InfeasibleParameters("pool too large for synthetic id allocation")
    return build_judgments(gains, raw_clusters)


class BehaviorKind(enum.Enum):
    IMMEDIATE = "immediate"
    FIXED_DELAY = "fixed-delay"
    SPAMMER = "spammer"
    SILENT = "silent"
    PROBABILISTIC = "probabilistic"


@dataclass(frozen=True)
class BehaviorProfile:
    """A push archetype.

    ``minutes`` is the FIXED_DELAY shift, ``rate`` the SPAMMER pushes per topic
    per day, ``probability`` and ``mean_delay_minutes`` the PROBABILISTIC push
    chance per judged tweet and mean of its exponential delay.
    """

    kind: BehaviorKind
    minutes: int = 0
    rate: int = 0
    probability: float = 0.0
    mean_delay_minutes: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.minutes < 0 or self.rate < 0 or self.mean_delay_minutes < 0:
            raise InfeasibleParameters("behavior parameters must be non-negative")
        if not 0.0 <= self.probability <= 1.0:
            raise InfeasibleParameters("probability must be in [0, 1]")

    @classmethod
    def immediate(cls):
        return cls(BehaviorKind.IMMEDIATE)

    @classmethod
    def fixed_delay(cls, minutes: int):
        return cls(BehaviorKind.FIXED_DELAY, minutes=minutes)

    @classmethod
    def spammer(cls, rate: int, seed: int = 0):
        return cls(BehaviorKind.SPAMMER, rate=rate, seed=seed)

    @classmethod
    def silent(cls):
        return cls(BehaviorKind.SILENT)

    @classmethod
    def probabilistic(cls, probability: float, mean_delay_minutes: float = 0.0, seed: int = 0):
        return cls(BehaviorKind.PROBABILISTIC, probability=probability,
                   mean_delay_minutes=mean_delay_minutes, seed=seed)

    @property
    def tag(self) -> str:
        if self.kind is BehaviorKind.FIXED_DELAY:
            return f"delay{self.minutes}"
        if self.kind is BehaviorKind.SPAMMER:
            return f"spammer{self.rate}-s{self.seed}"
        if self.kind is BehaviorKind.PROBABILISTIC:
            return f"prob{self.probability:g}-mean{self.mean_delay_minutes:g}-s{self.seed}"
        return self.kind.value

    @classmethod
    def parse(cls, text: str, default_seed: int = 0) -> "BehaviorProfile":
        """Parse ``immediate``, ``silent``, ``delay:30``, ``spammer:5[:seed]``
        or ``prob:0.5:10[:seed]``; a missing seed is ``default_seed``."""
        name, *args = text.split(":")
        try:
            if name == "immediate" and not args:
                return cls.immediate()
            if name == "silent" and not args:
                return cls.silent()
            if name == "delay" and len(args) == 1:
                return cls.fixed_delay(int(args[0]))
            if name == "spammer" and len(args) in (1, 2):
                return cls.spammer(int(args[0]), int(args[1]) if len(args) > 1 else default_seed)
            if name == "prob" and len(args) in (2, 3):
                return cls.probabilistic(float(args[0]), float(args[1]),
                                         int(args[2]) if len(args) > 2 else default_seed)
        except ValueError:
            pass
        raise ValueError(f"bad behavior {text!r}")


def gen_run(behavior: BehaviorProfile, judgments: JudgmentSet, window: EvaluationWindow,
            run_tag: Optional[str] = None) -> RunFile:
    """Pushes produced by ``behavior`` against ``judgments``.

    Pushes landing outside ``window`` are dropped. Records come out in push
    order (ties by topic, then tweet id).
    """
    tag = run_tag or behavior.tag
    kind = behavior.kind
    pushes = []
    if kind is BehaviorKind.SILENT:
        return RunFile((), tag)
    for t_index, topic in enumerate(judgments.topics):
        rng = CounterRNG(behavior.seed, 1_000_003 * (t_index + 1))
        if kind is BehaviorKind.SPAMMER:
            for d in range(window.num_days):
                day_start = window.start + d * DAY_MS
                for _ in range(behavior.rate):
                    at = day_start + rng.below(DAY_MS)
                    seq = UNJUDGED_SEQUENCE_BASE + rng.below(UNJUDGED_SEQUENCE_BASE)
                    pushes.append((at, topic, snowflake_id(at, seq)))
            continue
        relevant = sorted(
            (judgments.creation_times[tweet], tweet)
            for cluster in judgments.clusters.get(topic, ())
            for tweet in cluster.members
        )
        if kind is BehaviorKind.IMMEDIATE:
            pushes.extend((created, topic, tweet) for created, tweet in relevant)
        elif kind is BehaviorKind.FIXED_DELAY:
            shift = behavior.minutes * MINUTE_MS
            pushes.extend((created + shift, topic, tweet) for created, tweet in relevant)
        elif kind is BehaviorKind.PROBABILISTIC:
            judged = sorted(
                (creation_time(tweet, judgments.creation_times), tweet)
                for tweet in judgments.grades.get(topic, {})
            )
            for created, tweet in judged:
                if rng.uniform() >= behavior.probability:
                    continue
                delay = -behavior.mean_delay_minutes * math.log(1.0 - rng.uniform())
                pushes.append((created + int(delay * MINUTE_MS), topic, tweet))
    records = tuple(
        PushRecord(topic, tweet, at, tag)
        for at, topic, tweet in sorted(pushes)
        if window.day_index(at) is not None
    )
    return RunFile(records, tag)


def write_dataset(out_dir, judgments: JudgmentSet, window: EvaluationWindow, runs,
                  parameters: dict) -> dict:
    """Write a self-contained dataset directory and return its manifest."""
    out = Path(out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    (out / "gains.tsv").write_text(format_gains(judgments.grades), encoding="utf-8")
    (out / "clusters.json").write_text(format_clusters(judgments.clusters), encoding="utf-8")
    run_files = []
    for run in runs:
        name = f"runs/{run.run_tag}.tsv"
        (out / name).write_text(format_run(run), encoding="utf-8")
        run_files.append(name)
    manifest = {
        "parameters": parameters,
        "window": {"start": window.start, "num_days": window.num_days},
        "topics": list(judgments.topics),
        "cells": len(judgments.topics) * window.num_days,
        "files": {"gains": "gains.tsv", "clusters": "clusters.json", "runs": run_files},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    return manifest
