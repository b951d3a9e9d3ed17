"""Expected latency-discounted gain (ELG) over push notification runs.

A run is scored per (topic, day) cell. On a day with relevant tweets the cell
is the mean, over every tweet pushed that day, of gain times latency penalty,
where only the first push from each cluster earns anything. On a silent day
(no relevant tweets created) the cell is 1 for staying quiet under ELG-1 and
0 otherwise; under ELG-0 it is always 0.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional, Sequence

from .ingest import RunFile, creation_time
from .model import (
    MINUTE_MS,
    Diagnostics,
    GainGrade,
    JudgmentSet,
    LatencyMode,
    MetricConfig,
    PushRecord,
    ScoredPush,
    ScoreReport,
    ScoringError,
    SilentMode,
)

SILENT_MODES = (SilentMode.REWARD_ONE, SilentMode.ZERO)
LATENCY_MODES = (LatencyMode.OFFICIAL, LatencyMode.NONE, LatencyMode.FIRST_IN_CLUSTER)


def latency_penalty(d: int, horizon: int = 100, mode: LatencyMode = LatencyMode.OFFICIAL) -> float:
    """Linear credit decay: ``max(0, (horizon - d) / horizon)``, or 1 with no penalty."""
    if mode is LatencyMode.NONE:
        return 1.0
    return max(0.0, (horizon - d) / horizon)


def delay_minutes(push_time: int, reference_time: int, diagnostics: Optional[Diagnostics] = None) -> int:
    """Whole minutes from ``reference_time`` to ``push_time``, rounded down.

    A push before its reference time is clamped to 0 and counted in
    ``diagnostics.clamped_delays``.
    """
    raw = push_time - reference_time
    if raw < 0:
        if diagnostics is not None:
            diagnostics.clamped_delays += 1
        return 0
    return raw // MINUTE_MS


def reference_time(push: PushRecord, judgments: JudgmentSet, mode: LatencyMode) -> int:
    """Time a push's delay is measured from under ``mode``."""
    if mode is LatencyMode.FIRST_IN_CLUSTER:
        cluster = judgments.cluster_of(push.topic, push.tweet)
        if cluster is not None:
            return cluster.earliest_creation
    if push.tweet in judgments.creation_times:
        return judgments.creation_times[push.tweet]
    try:
        return creation_time(push.tweet)
    except ValueError:
        raise ScoringError(f"cannot resolve creation time of tweet {push.tweet} "
                           f"(topic {push.topic})") from None


def score_pushes(pushes: Sequence[PushRecord], days: Sequence[int], judgments: JudgmentSet,
                 config: MetricConfig, silent_days=frozenset(), already_credited=(),
                 diagnostics: Optional[Diagnostics] = None) -> list:
    """Score one topic's pushes, which must be in push order, with cluster credit.

    ``days[i]`` is the window day of ``pushes[i]``. Pushes on ``silent_days``
    still use up their cluster's credit but contribute no gain.
    """
    if diagnostics is None:
        diagnostics = Diagnostics()
    for earlier, later in zip(pushes, pushes[1:]):
        if later.push_time < earlier.push_time:
            raise ValueError("pushes must be ordered by push time")
    credited_clusters = set(already_credited)
    scored = []
    for push, day in zip(pushes, days):
        grade = judgments.grade(push.topic, push.tweet)
        judged = grade is not None
        if not judged:
            diagnostics.unjudged += 1
            grade = GainGrade.NON_RELEVANT
        cluster = judgments.cluster_of(push.topic, push.tweet) if grade.is_relevant else None
        try:
            ref = reference_time(push, judgments, config.latency_mode)
            delay = delay_minutes(push.push_time, ref, diagnostics)
        except ScoringError:
            if grade.is_relevant:
                raise
            delay = 0
        penalty = latency_penalty(delay, config.horizon_minutes, config.latency_mode)

        credited = False
        if cluster is not None and cluster.id not in credited_clusters:
            if penalty > 0 or config.late_push_consumes_credit:
                credited_clusters.add(cluster.id)
                credited = day not in silent_days
                if penalty == 0:
                    diagnostics.late_credit_consumed += 1
        gain = grade.gain * penalty if credited else 0.0
        scored.append(ScoredPush(
            record=push,
            grade=grade,
            cluster_id=cluster.id if cluster is not None else None,
            day=day,
            delay_minutes=delay,
            penalty=penalty,
            credited=credited,
            contributed_gain=gain,
            judged=judged,
        ))
    return scored


def cell_score(silent: bool, scored: Sequence[ScoredPush], silent_mode: SilentMode) -> float:
    if silent:
        if silent_mode is SilentMode.REWARD_ONE and not scored:
            return 1.0
        return 0.0
    if not scored:
        return 0.0
    total = 0.0
    for push in scored:
        total += push.contributed_gain
    return total / len(scored)


def score_day(topic: str, day: int, pushes: Sequence[PushRecord], judgments: JudgmentSet,
              config: MetricConfig, already_credited: Iterable[str] = ()) -> float:
    """Score one (topic, day) cell from that cell's pushes in push order.

    ``already_credited`` holds cluster ids credited by the run on earlier days.
    """
    silent = day in judgments.silent_days(topic, config.window)
    scored = score_pushes(pushes, [day] * len(pushes), judgments, config,
                          silent_days={day} if silent else frozenset(),
                          already_credited=already_credited)
    return cell_score(silent, scored, config.silent_mode)


def _mean(values) -> float:
    total = 0.0
    count = 0
    for value in values:
        total += value
        count += 1
    return total / count if count else 0.0


def score_run(run: RunFile, judgments: JudgmentSet, config: MetricConfig) -> ScoreReport:
    """Score every (topic, day) cell of ``run`` and aggregate.

    Each topic's score is the mean over all window days; the overall score is
    the mean over all judged topics.
    """
    window = config.window
    diagnostics = Diagnostics()
    topics = set(judgments.topics)
    by_topic = {t: [] for t in topics}
    for index, record in enumerate(run.records):
        if record.topic not in topics:
            diagnostics.unknown_topic += 1
            continue
        day = window.day_index(record.push_time)
        if day is None:
            diagnostics.out_of_window += 1
            continue
        by_topic[record.topic].append((index, record, day))

    cells = {}
    topic_means = {}
    all_scored = []
    for topic in sorted(topics):
        entries = sorted(by_topic[topic], key=lambda e: (e[1].push_time, e[0], e[1].tweet))
        if config.max_pushes_per_day is not None:
            kept, per_day = [], {}
            for entry in entries:
                per_day[entry[2]] = per_day.get(entry[2], 0) + 1
                if per_day[entry[2]] > config.max_pushes_per_day:
                    diagnostics.capped += 1
                else:
                    kept.append(entry)
            entries = kept
        silent_days = judgments.silent_days(topic, window)
        scored = score_pushes([e[1] for e in entries], [e[2] for e in entries], judgments,
                              config, silent_days=silent_days, diagnostics=diagnostics)
        all_scored.extend(scored)
        per_day = {d: [] for d in range(window.num_days)}
        for push in scored:
            per_day[push.day].append(push)
        for day in range(window.num_days):
            cells[(topic, day)] = cell_score(day in silent_days, per_day[day], config.silent_mode)
        topic_means[topic] = _mean(cells[(topic, d)] for d in range(window.num_days))

    overall = _mean(topic_means[t] for t in sorted(topic_means))
    return ScoreReport(
        run_tag=run.run_tag or "",
        config=config,
        cells=cells,
        topic_means=topic_means,
        overall=overall,
        diagnostics=diagnostics,
        pushes=tuple(all_scored),
    )


def variant_configs(base: MetricConfig, silent_modes=SILENT_MODES, latency_modes=LATENCY_MODES):
    """Configs for every (silent mode, latency mode) pair sharing ``base``'s window and horizon."""
    return {
        (s, l): replace(base, silent_mode=s, latency_mode=l)
        for s in silent_modes
        for l in latency_modes
    }


def score_matrix(run: RunFile, judgments: JudgmentSet, base: MetricConfig,
                 silent_modes=SILENT_MODES, latency_modes=LATENCY_MODES) -> dict:
    """``{(SilentMode, LatencyMode): ScoreReport}`` over all requested variants."""
    return {
        key: score_run(run, judgments, config)
        for key, config in variant_configs(base, silent_modes, latency_modes).items()
    }


def empty_run_score(judgments: JudgmentSet, config: MetricConfig) -> float:
    """Overall score of a run that pushes nothing."""
    return score_run(RunFile((), "empty"), judgments, config).overall
