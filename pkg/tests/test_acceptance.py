"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
The checks against the official TREC 2015 judgments only run when
PUSHELG_TREC2015_QRELS and PUSHELG_TREC2015_CLUSTERS point at the files.
"""

import os
import random
import time
from pathlib import Path

import pytest

from conftest import ACCEPTANCE
from oracle import brute_force, config_for, random_instance
from pushelg.analysis import cluster_stats, kendall_tau, linear_r2
from pushelg.cli import main
from pushelg.fixtures import fixture_path, cluster_tally_counts, cluster_tally_judgments, worked_example
from pushelg.ingest import RunFile, load_judgments
from pushelg.model import DAY_MS, EvaluationWindow, LatencyMode, MetricConfig, SilentMode
from pushelg.scoring import latency_penalty, score_day, score_run
from pushelg.synthgen import DEFAULT_START, BehaviorProfile, CounterRNG, gen_judgments, gen_run

OFFICIAL, NONE, FIC = LatencyMode.OFFICIAL, LatencyMode.NONE, LatencyMode.FIRST_IN_CLUSTER
ELG1, ELG0 = SilentMode.REWARD_ONE, SilentMode.ZERO

QRELS = os.environ.get("PUSHELG_TREC2015_QRELS")
CLUSTERS = os.environ.get("PUSHELG_TREC2015_CLUSTERS")
# evaluation period of the 2015 track: July 20 to 29, 2015 (UTC)
TREC2015_WINDOW = EvaluationWindow(1_437_350_400_000, 10)


def record(number, title, ok, detail):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE.setdefault(number, []).append(line)
    print(line)
    return ok


def record_skip(number, title, reason):
    ACCEPTANCE.setdefault(number, []).append(f"criterion {number} SKIP: {title} ({reason})")


def test_1_penalty_formula():
    worst = 0.0
    for d in (0, 1, 37, 99, 100, 150):
        worst = max(worst, abs(latency_penalty(d, 100, OFFICIAL) - max(0.0, (100 - d) / 100)))
    assert record(1, "penalty formula", worst <= 1e-12, f"max abs error {worst:.3g}, tol 1e-12")


BEHAVIORS = ("silent", "immediate", "delay:30", "delay:150", "spammer:2", "prob:0.5:30", "prob:0.9:5")


def test_2_silent_days():
    window = EvaluationWindow(DEFAULT_START, 4)
    checked = violations = 0
    for seed in range(10):
        j = gen_judgments(5, 4, seed=seed, silent_fraction=0.3)
        for text in BEHAVIORS:
            run = gen_run(BehaviorProfile.parse(text, default_seed=seed), j, window)
            pushed = {(r.topic, window.day_index(r.push_time)) for r in run.records}
            elg1 = score_run(run, j, MetricConfig(ELG1, OFFICIAL, window)).cells
            elg0 = score_run(run, j, MetricConfig(ELG0, OFFICIAL, window)).cells
            for topic in j.topics:
                for day in j.silent_days(topic, window):
                    checked += 1
                    expected = 0.0 if (topic, day) in pushed else 1.0
                    if text == "silent" and expected != 1.0:
                        violations += 1
                    if elg1[(topic, day)] != expected or elg0[(topic, day)] != 0.0:
                        violations += 1
    ok = checked > 0 and violations == 0
    assert record(2, "silent-day scoring", ok, f"{checked} (silent cell, behavior) checks over 10 "
                                               f"pools, {violations} violations")


def _silent_days_by_counting(j, window):
    """Days on which no relevant tweet of the topic was created."""
    out = {}
    for topic in j.topics:
        busy = set()
        for cluster in j.clusters.get(topic, ()):
            for tweet in cluster.members:
                busy.add((j.creation_times[tweet] - window.start) // DAY_MS)
        out[topic] = sum(1 for d in range(window.num_days) if d not in busy)
    return out


def test_3_empty_run_identity():
    mismatches = []
    for seed in range(25):
        rng = CounterRNG(seed, 5)
        topics, days = 1 + rng.below(12), 1 + rng.below(10)
        window = EvaluationWindow(DEFAULT_START, days)
        j = gen_judgments(topics, days, seed=seed, silent_fraction=rng.uniform())
        counts = _silent_days_by_counting(j, window)
        expected = sum(counts[t] / days for t in sorted(counts)) / len(counts)
        got = score_run(RunFile((), "empty"), j, MetricConfig(ELG1, OFFICIAL, window)).overall
        if got != expected:
            mismatches.append((seed, got, expected))
    assert record(3, "empty-run identity", not mismatches,
                  f"25 seeded datasets, exact equality, {len(mismatches)} mismatches")


@pytest.mark.skipif(not (QRELS and CLUSTERS), reason="official TREC 2015 judgments not provided")
def test_3_empty_run_official():
    j = load_judgments(Path(QRELS), Path(CLUSTERS))
    got = score_run(RunFile((), "empty"), j, MetricConfig(ELG1, OFFICIAL, TREC2015_WINDOW)).overall
    assert record(3, "empty-run ELG-1 on official judgments", abs(got - 0.2471) <= 0.0005,
                  f"{got:.4f} vs 0.2471 +/- 0.0005")


@pytest.mark.skipif(bool(QRELS and CLUSTERS), reason="official judgments provided")
@pytest.mark.parametrize("number, title", [(3, "empty-run ELG-1 on official judgments"),
                                           (6, "cluster table on official clusters")])
def test_official_checks_not_run(number, title):
    record_skip(number, title, "set PUSHELG_TREC2015_QRELS and PUSHELG_TREC2015_CLUSTERS")


def test_4_variant_dominance():
    started = time.perf_counter()
    rng = random.Random(2015)
    violations = 0
    pairs = 0
    for i in range(200):
        days = rng.randint(1, 5)
        window = EvaluationWindow(DEFAULT_START, days)
        j = gen_judgments(rng.randint(1, 6), days, seed=i, silent_fraction=rng.random(),
                          singleton_fraction=rng.random())
        behavior = BehaviorProfile.parse(rng.choice(BEHAVIORS + ("delay:90", "prob:0.3:200")),
                                         default_seed=i)
        run = gen_run(behavior, j, window)
        pairs += 1
        s = {(sm, lm): score_run(run, j, MetricConfig(sm, lm, window)).overall
             for sm in SilentMode for lm in LatencyMode}
        for sm in SilentMode:
            if not s[(sm, NONE)] >= s[(sm, OFFICIAL)] >= s[(sm, FIC)]:
                violations += 1
        for lm in LatencyMode:
            if not s[(ELG1, lm)] >= s[(ELG0, lm)]:
                violations += 1
    elapsed = time.perf_counter() - started
    ok = violations == 0 and elapsed < 10
    assert record(4, "variant dominance", ok,
                  f"{pairs} (dataset, behavior) pairs, {violations} violations, {elapsed:.2f}s of 10s")


def test_5_oracle_equivalence():
    started = time.perf_counter()
    rng = random.Random(5)
    mismatches = cells_checked = 0
    for _ in range(1000):
        inst = random_instance(rng, max_clusters=5, max_pushes=8, max_days=3)
        silent, latency = rng.choice(list(SilentMode)), rng.choice(list(LatencyMode))
        expected, credits = brute_force(inst, silent, latency)
        j = inst.judgments()
        config = config_for(inst.window, silent, latency)
        records = inst.run().records
        run_cells = score_run(inst.run(), j, config).cells
        for (topic, day), value in expected.items():
            # the cell's pushes in push order, ties by file order
            cell = sorted((at, order) for order, (t, tw, at) in enumerate(inst.pushes)
                          if t == topic and inst.window.day_index(at) == day)
            pushes = [records[order] for _, order in cell]
            earlier = set().union(*(credits.get((topic, d), set()) for d in range(day)))
            got = score_day(topic, day, pushes, j, config, already_credited=earlier)
            cells_checked += 1
            if got != value or run_cells[(topic, day)] != value:
                mismatches += 1
    elapsed = time.perf_counter() - started
    ok = mismatches == 0 and elapsed < 10
    assert record(5, "brute-force oracle equivalence", ok,
                  f"1000 instances, {cells_checked} cells, {mismatches} mismatches, {elapsed:.2f}s of 10s")


def _tally_check(stats, rows):
    got = {r.topic: (r.clusters, r.singletons, round(r.percentage)) for r in stats.topics}
    bad = [topic for topic, c, s, p in rows if got.get(topic) != (c, s, p)]
    return bad, stats.average_row


def test_6_cluster_tally():
    bad, average = _tally_check(cluster_stats(cluster_tally_judgments()), cluster_tally_counts())
    ok = not bad and average == (66, 49, 74)
    assert record(6, "cluster table reproduction", ok,
                  f"{len(cluster_tally_counts()) - len(bad)}/{len(cluster_tally_counts())} rows exact, average row {average}")


@pytest.mark.skipif(not (QRELS and CLUSTERS), reason="official TREC 2015 judgments not provided")
def test_6_cluster_tally_official():
    bad, average = _tally_check(cluster_stats(load_judgments(Path(QRELS), Path(CLUSTERS))), cluster_tally_counts())
    ok = not bad and average == (66, 49, 74)
    assert record(6, "cluster table on official clusters", ok, f"{len(bad)} rows differ, average row {average}")


def test_7_correlations():
    checks = {
        "identical": (kendall_tau([1, 2, 3, 4], [1, 2, 3, 4]), 1.0),
        "reversed": (kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]), -1.0),
        "one swap": (kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]), 2 / 3),
        "r2": (linear_r2([0, 1, 2], [0, 1, 1]), 0.75),
    }
    worst = max(abs(got - want) for got, want in checks.values())
    assert record(7, "correlation sanity", worst <= 1e-9, f"max abs error {worst:.3g}, tol 1e-9")


def test_8_worked_example():
    ds = worked_example()
    j = ds.judgments()
    runs = {r.run_tag: r for r in ds.runs()}
    penalty = {}
    for mode in (OFFICIAL, FIC):
        for tag in ("P", "Q"):
            (push,) = score_run(runs[tag], j, MetricConfig(ELG1, mode, ds.window)).pushes
            penalty[(tag, mode)] = push.penalty
    expected = {("P", OFFICIAL): 0.0, ("Q", OFFICIAL): 1.0, ("P", FIC): 0.0, ("Q", FIC): 0.0}
    ok = penalty == expected
    detail = ", ".join(f"{t}/{m.value}={v:g}" for (t, m), v in sorted(penalty.items(), key=str))
    assert record(8, "worked P/Q example", ok, detail)


def _tree(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_9_determinism(tmp_path):
    dataset = str(fixture_path("synthetic"))
    for name in ("first", "second"):
        out = str(tmp_path / name)
        assert main(["score", "--dataset", dataset, "--out", out, "--include-empty-run-baseline"]) == 0
        assert main(["analyze", "--dataset", dataset, "--out", out]) == 0
    first, second = _tree(tmp_path / "first"), _tree(tmp_path / "second")
    ok = bool(first) and first == second
    assert record(9, "byte-identical score + analyze", ok, f"{len(first)} files compared")
