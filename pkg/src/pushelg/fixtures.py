"""Bundled fixture datasets and golden score digests.

Regenerate everything under ``src/pushelg/data`` with::

    python -m pushelg.fixtures
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .ingest import RunFile, format_creation_times, format_gains, format_run, snowflake_id
from .model import (
    DAY_MS,
    MINUTE_MS,
    EvaluationWindow,
    GainGrade,
    LatencyMode,
    MetricConfig,
    PushRecord,
    SilentMode,
)
from .report import report_digest
from .scoring import score_run
from .synthgen import DEFAULT_START, BehaviorProfile, gen_judgments, gen_run, write_dataset
from .validate import Dataset

DATA = resources.files("pushelg") / "data"

WORKED_TOPIC = "WX001"
TWEET_A = 1
TWEET_B = 2
# tweet A is posted an hour into the window; B joins A's cluster three hours later
CREATED_A = DEFAULT_START + 60 * MINUTE_MS
CREATED_B = CREATED_A + 180 * MINUTE_MS

SYNTHETIC_BEHAVIORS = ("immediate", "delay:30", "prob:0.5:40:1", "spammer:2:1", "silent")


def fixture_path(name: str) -> Path:
    return Path(str(DATA / name))


def worked_example() -> Dataset:
    return Dataset.open(fixture_path("worked_example"))


def cluster_tally_counts() -> list:
    """(topic, clusters, singletons, percent) rows of the per-topic cluster tally."""
    rows = []
    text = (DATA / "cluster_tally_counts.tsv").read_text(encoding="utf-8")
    for line in text.splitlines()[1:]:
        topic, clusters, singletons, percent = line.split("\t")
        rows.append((topic, int(clusters), int(singletons), int(percent)))
    return rows


def cluster_tally_judgments():
    return Dataset.open(fixture_path("cluster_tally")).judgments()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _manifest(path: Path, doc: dict) -> None:
    _write(path / "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_cluster_tally(out_dir, start: int = DEFAULT_START) -> None:
    """A gains/clusters pair whose cluster structure matches :func:`cluster_tally_counts`.

    Singletons come first in each topic; the rest alternate between 2 and 3
    members. Every tweet is highly relevant, one minute after the previous one.
    """
    out = Path(out_dir)
    gains, clusters = {}, {}
    minute = 0
    for topic, n_clusters, n_singletons, _ in cluster_tally_counts():
        topic_clusters = []
        for i in range(n_clusters):
            size = 1 if i < n_singletons else 2 + i % 2
            members = []
            for _ in range(size):
                tweet = snowflake_id(start + minute * MINUTE_MS)
                minute += 1
                gains.setdefault(topic, {})[tweet] = GainGrade.HIGHLY_RELEVANT
                members.append(tweet)
            topic_clusters.append(members)
        clusters[topic] = topic_clusters
    _write(out / "gains.tsv", format_gains(gains))
    _write(out / "clusters.json", json.dumps(clusters, separators=(",", ":")) + "\n")
    _manifest(out, {
        "description": "cluster structure of the per-topic cluster/singleton tally",
        "files": {"gains": "gains.tsv", "clusters": "clusters.json", "runs": []},
        "window": {"start": start, "num_days": minute * MINUTE_MS // DAY_MS + 1},
    })


def write_worked_example(out_dir) -> None:
    """Systems P and Q on one two-tweet cluster.

    P pushes A, the cluster's first tweet, 120 minutes after it was posted.
    Q pushes B the instant it is posted, 180 minutes after A. Day 1 is silent.
    """
    out = Path(out_dir)
    gains = {WORKED_TOPIC: {TWEET_A: GainGrade.HIGHLY_RELEVANT, TWEET_B: GainGrade.HIGHLY_RELEVANT}}
    _write(out / "gains.tsv", format_gains(gains))
    _write(out / "clusters.json", json.dumps({WORKED_TOPIC: {"AB": [TWEET_A, TWEET_B]}}, indent=1) + "\n")
    _write(out / "creation_times.tsv",
           format_creation_times({TWEET_A: CREATED_A, TWEET_B: CREATED_B}))
    runs = {
        "P": PushRecord(WORKED_TOPIC, TWEET_A, CREATED_A + 120 * MINUTE_MS, "P"),
        "Q": PushRecord(WORKED_TOPIC, TWEET_B, CREATED_B, "Q"),
    }
    for tag, record in runs.items():
        _write(out / "runs" / f"{tag}.tsv", format_run(RunFile((record,), tag)))
    _manifest(out, {
        "description": "late push of a cluster's first tweet (P) vs instant push of a later member (Q)",
        "files": {
            "gains": "gains.tsv",
            "clusters": "clusters.json",
            "creation_times": "creation_times.tsv",
            "runs": ["runs/P.tsv", "runs/Q.tsv"],
        },
        "window": {"start": DEFAULT_START, "num_days": 2},
    })


def write_synthetic(out_dir) -> None:
    judgments = gen_judgments(4, 3, seed=7, silent_fraction=0.25)
    window = EvaluationWindow(DEFAULT_START, 3)
    behaviors = [BehaviorProfile.parse(b) for b in SYNTHETIC_BEHAVIORS]
    runs = [gen_run(b, judgments, window) for b in behaviors]
    write_dataset(out_dir, judgments, window, runs, {"topics": 4, "days": 3, "seed": 7,
                                                     "silent_fraction": 0.25,
                                                     "behaviors": list(SYNTHETIC_BEHAVIORS)})


@dataclass(frozen=True)
class GoldenCase:
    name: str
    dataset: str
    run: str
    silent_mode: str
    latency_mode: str
    expected_overall: float
    expected_digest: str
    provenance: str

    def config(self, window: EvaluationWindow) -> MetricConfig:
        return MetricConfig(SilentMode(self.silent_mode), LatencyMode(self.latency_mode), window)

    def compute(self):
        ds = Dataset.open(fixture_path(self.dataset))
        run = next(r for r in ds.runs() if r.run_tag == self.run)
        return score_run(run, ds.judgments(), self.config(ds.window))


PROVENANCE = {
    "worked_example": "[PUBLISHED] two-system late/early push scenario; P earns nothing under "
                      "either latency reference, Q earns full credit only against its own tweet",
    "synthetic": "[DERIVED] frozen from a scoring pass cross-checked cell by cell "
                 "against the brute-force scorer in tests/oracle.py",
}


def golden_cases() -> list:
    doc = json.loads((DATA / "goldens.json").read_text(encoding="utf-8"))
    return [GoldenCase(**case) for case in doc["cases"]]


def compute_goldens(data: Path) -> list:
    cases = []
    for dataset in ("worked_example", "synthetic"):
        ds = Dataset.open(data / dataset)
        judgments = ds.judgments()
        for run in ds.runs():
            for silent in SilentMode:
                for latency in LatencyMode:
                    config = MetricConfig(silent, latency, ds.window)
                    report = score_run(run, judgments, config)
                    cases.append(GoldenCase(
                        name=f"{dataset}/{run.run_tag}/{silent.value}-{latency.value}",
                        dataset=dataset,
                        run=run.run_tag,
                        silent_mode=silent.value,
                        latency_mode=latency.value,
                        expected_overall=report.overall,
                        expected_digest=report_digest(report),
                        provenance=PROVENANCE[dataset],
                    ))
    return cases


def regenerate(data_dir=None) -> None:
    data = Path(data_dir) if data_dir else fixture_path("")
    write_worked_example(data / "worked_example")
    write_cluster_tally(data / "cluster_tally")
    write_synthetic(data / "synthetic")
    cases = [case.__dict__ for case in compute_goldens(data)]
    _write(data / "goldens.json", json.dumps({"cases": cases}, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    regenerate(sys.argv[1] if len(sys.argv) > 1 else None)
