"""TSV/CSV/JSON emitters for score reports and analyses.

Floats are written with ``repr`` (shortest round-trip form), so output is
bit-exact across platforms.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from typing import Iterable, Sequence

from .analysis import ClusterStats, VariantComparison, variant_name
from .model import ScoreReport

SCORE_COLUMNS = ("run_tag", "silent_mode", "latency_mode", "topic", "day", "score")


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def table(header: Sequence[str], rows: Iterable[Sequence], delimiter: str = "\t") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def score_rows(report: ScoreReport):
    cfg = report.config
    for topic, day in sorted(report.cells):
        yield (report.run_tag, cfg.silent_mode.value, cfg.latency_mode.value,
               topic, day, report.cells[(topic, day)])


def scores_tsv(reports: Iterable[ScoreReport]) -> str:
    rows = [row for report in reports for row in score_rows(report)]
    return table(SCORE_COLUMNS, rows)


def report_digest(report: ScoreReport) -> str:
    return hashlib.sha256(scores_tsv([report]).encode("utf-8")).hexdigest()


def config_doc(config) -> dict:
    return {
        "silent_mode": config.silent_mode.value,
        "latency_mode": config.latency_mode.value,
        "horizon_minutes": config.horizon_minutes,
        "window_start": config.window.start,
        "num_days": config.window.num_days,
        "late_push_consumes_credit": config.late_push_consumes_credit,
        "max_pushes_per_day": config.max_pushes_per_day,
    }


def report_doc(report: ScoreReport) -> dict:
    return {
        "run_tag": report.run_tag,
        "config": config_doc(report.config),
        "overall": report.overall,
        "topic_means": {t: report.topic_means[t] for t in sorted(report.topic_means)},
        "cells": [
            {"topic": topic, "day": day, "score": report.cells[(topic, day)]}
            for topic, day in sorted(report.cells)
        ],
        "diagnostics": report.diagnostics.as_dict(),
    }


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def scatter_csv(comparison: VariantComparison) -> str:
    return table(("run_tag", "x", "y", "is_empty_run"),
                 ((p.run_tag, p.x, p.y, p.is_empty_run) for p in comparison.points),
                 delimiter=",")


CORRELATION_COLUMNS = ("x_variant", "y_variant", "includes_empty_run", "n", "kendall_tau", "r_squared")


def correlation_rows(comparisons: Iterable[VariantComparison]):
    for c in comparisons:
        x, y = variant_name(c.x_variant), variant_name(c.y_variant)
        r = c.correlation
        yield (x, y, False, r.n, r.kendall_tau, r.r_squared)
        if c.correlation_with_empty is not None:
            r = c.correlation_with_empty
            yield (x, y, True, r.n, r.kendall_tau, r.r_squared)


CLUSTER_COLUMNS = ("topic", "clusters", "singletons", "percent", "percent_exact")


def cluster_rows(stats: ClusterStats):
    from .analysis import round_half_up

    for row in stats.topics:
        pct = row.percentage
        yield (row.topic, row.clusters, row.singletons,
               None if pct is None else round_half_up(pct), pct)
    clusters, singletons, percent = stats.average_row
    yield ("Average", clusters, singletons, percent, None)


def cluster_doc(stats: ClusterStats) -> dict:
    clusters, singletons, percent = stats.average_row
    return {
        "topics": [
            {"topic": r.topic, "clusters": r.clusters, "singletons": r.singletons,
             "percent": r.percentage}
            for r in stats.topics
        ],
        "average": {"clusters": clusters, "singletons": singletons, "percent": percent},
        "mean_clusters": stats.mean_clusters,
        "mean_singletons": stats.mean_singletons,
        "mean_topic_percentage": stats.mean_percentage,
        "pooled_percentage": stats.pooled_percentage,
    }
