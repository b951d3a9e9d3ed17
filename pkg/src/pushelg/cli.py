"""``pushelg`` command line: score, analyze, generate, validate.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis, report
from .ingest import RunFile, load_judgments, read_run
from .model import Diagnostics, EvaluationWindow, LatencyMode, MetricConfig, PushElgError, SilentMode
from .scoring import LATENCY_MODES, SILENT_MODES, score_matrix
from .synthgen import DEFAULT_START, BehaviorProfile, gen_judgments, gen_run, write_dataset
from .validate import Dataset, validate_dataset

log = logging.getLogger("pushelg")

DEFAULT_BEHAVIORS = ("immediate", "delay:30", "prob:0.5:20", "silent")


class UsageError(Exception):
    pass


def _variant(text: str):
    try:
        silent, latency = text.split("-", 1)
        return SilentMode(silent), LatencyMode(latency)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad variant {text!r}, e.g. elg1-official") from None


def _add_data_args(p: argparse.ArgumentParser, runs: bool = True) -> None:
    p.add_argument("--dataset", type=Path,
                   help="dataset directory with manifest.json; supplies defaults for the file and window flags")
    p.add_argument("--gains", type=Path, help="gains file: topic, tweet id, grade 0/1/2")
    p.add_argument("--clusters", type=Path, help="cluster document (JSON)")
    p.add_argument("--creation-times", type=Path, help="tweet id -> creation epoch ms overrides")
    if runs:
        p.add_argument("--runs", type=Path, nargs="+", help="run files")
        p.add_argument("--window-start", type=int, help="evaluation window start, epoch ms")
        p.add_argument("--days", type=int, help="number of days in the window")
        p.add_argument("--horizon", type=int, default=100, help="latency horizon in minutes")
        p.add_argument("--late-push-frees-credit", action="store_true",
                       help="a first push with zero penalty does not use up its cluster's credit")
        p.add_argument("--max-pushes-per-day", type=int,
                       help="ignore pushes beyond this many per topic per day")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--format", choices=("tsv", "doc", "csv"), default="tsv")


def _resolve_inputs(args):
    ds = Dataset.open(args.dataset) if args.dataset else None
    gains = args.gains or (ds and ds.path("gains"))
    clusters = args.clusters or (ds and ds.path("clusters"))
    creation = args.creation_times or (ds and ds.path("creation_times"))
    if gains is None or clusters is None:
        raise UsageError("--gains and --clusters are required (or --dataset)")
    resolved = {"gains": gains, "clusters": clusters, "creation_times": creation}
    if hasattr(args, "runs"):
        runs = args.runs or (ds.run_paths if ds else None)
        start = args.window_start if args.window_start is not None else (ds and ds.window.start)
        days = args.days if args.days is not None else (ds and ds.window.num_days)
        if not runs:
            raise UsageError("--runs is required (or --dataset)")
        if start is None or days is None:
            raise UsageError("--window-start and --days are required (or --dataset)")
        if days < 1 or args.horizon < 1:
            raise UsageError("--days and --horizon must be >= 1")
        resolved.update(runs=runs, window=EvaluationWindow(start, days))
    return resolved


def _base_config(args, window) -> MetricConfig:
    return MetricConfig(
        SilentMode.REWARD_ONE, LatencyMode.OFFICIAL, window,
        horizon_minutes=args.horizon,
        late_push_consumes_credit=not args.late_push_frees_credit,
        max_pushes_per_day=args.max_pushes_per_day,
    )


def _load_runs(paths) -> list:
    runs = [read_run(p) for p in paths]
    tags = [r.run_tag for r in runs]
    dupes = sorted({t for t in tags if tags.count(t) > 1})
    if dupes:
        raise PushElgError(f"duplicate run tags: {', '.join(dupes)}")
    return runs


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _modes(value: str, all_modes, enum_cls):
    return tuple(all_modes) if value == "all" else (enum_cls(value),)


def _report_diagnostics(out: Path, matrices: dict) -> None:
    rows = []
    for tag in sorted(matrices):
        for key in sorted(matrices[tag], key=_variant_order):
            diag = matrices[tag][key].diagnostics
            rows.append((tag, analysis.variant_name(key), *diag.as_dict().values()))
            if diag.anomalies():
                nonzero = ", ".join(f"{k}={v}" for k, v in diag.anomalies().items())
                print(f"diagnostic: {tag} {analysis.variant_name(key)}: {nonzero}", file=sys.stderr)
    fields = list(Diagnostics().as_dict())
    _write(out / "diagnostics.tsv", report.table(("run_tag", "variant", *fields), rows))


def _variant_order(key):
    silent, latency = key
    return SILENT_MODES.index(silent), LATENCY_MODES.index(latency)


def _summary(matrices: dict, variants: list, headline) -> tuple:
    header = ("run_tag", *(analysis.variant_name(v) for v in variants))
    order = sorted(matrices, key=lambda t: (-matrices[t][headline].overall, t))
    rows = [(t, *(matrices[t][v].overall for v in variants)) for t in order]
    return header, rows


def _print_table(header, rows) -> None:
    cells = [list(header)] + [
        [r[0]] + [f"{v:.4f}" for v in r[1:]] for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    for row in cells:
        print("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                        for i, (c, w) in enumerate(zip(row, widths))))


def cmd_score(args) -> int:
    inputs = _resolve_inputs(args)
    judgments = load_judgments(inputs["gains"], inputs["clusters"], inputs["creation_times"])
    runs = _load_runs(inputs["runs"])
    base = _base_config(args, inputs["window"])
    silent_modes = _modes(args.silent_mode, SILENT_MODES, SilentMode)
    latency_modes = _modes(args.latency_mode, LATENCY_MODES, LatencyMode)
    headline = args.headline
    if headline[0] not in silent_modes or headline[1] not in latency_modes:
        headline = (silent_modes[0], latency_modes[0])
    if args.include_empty_run_baseline:
        runs.append(RunFile((), analysis.EMPTY_RUN_TAG))

    matrices = {run.run_tag: score_matrix(run, judgments, base, silent_modes, latency_modes)
                for run in runs}
    variants = sorted(next(iter(matrices.values())), key=_variant_order)

    out = args.out
    ext = {"tsv": "tsv", "csv": "csv", "doc": "json"}[args.format]
    for tag in sorted(matrices):
        for key in variants:
            rep = matrices[tag][key]
            path = out / "scores" / tag / f"{analysis.variant_name(key)}.{ext}"
            if args.format == "doc":
                _write(path, report.dumps(report.report_doc(rep)))
            else:
                delim = "\t" if args.format == "tsv" else ","
                _write(path, report.table(report.SCORE_COLUMNS, report.score_rows(rep), delim))
    header, rows = _summary(matrices, variants, headline)
    _write(out / "summary.tsv", report.table(header, rows))
    _report_diagnostics(out, matrices)
    _print_table(header, rows)
    return 0


def cmd_analyze(args) -> int:
    inputs = _resolve_inputs(args)
    judgments = load_judgments(inputs["gains"], inputs["clusters"], inputs["creation_times"])
    runs = _load_runs(inputs["runs"])
    if len(runs) < 2 and not args.no_correlations:
        raise PushElgError(f"need >= 2 runs for correlations, got {len(runs)} "
                           "(use --no-correlations)")
    base = _base_config(args, inputs["window"])
    matrices = {run.run_tag: score_matrix(run, judgments, base) for run in runs}
    empty = score_matrix(RunFile((), analysis.EMPTY_RUN_TAG), judgments, base)
    out = args.out
    doc = {}

    by_elg1 = sorted(matrices, key=lambda t: (-matrices[t][analysis.ELG1_OFFICIAL].overall, t))
    by_elg0 = sorted(matrices, key=lambda t: (-matrices[t][analysis.ELG0_OFFICIAL].overall, t))
    run_by_tag = {r.run_tag: r for r in runs}
    official = base
    fic = replace(base, latency_mode=LatencyMode.FIRST_IN_CLUSTER)

    delay_rows = []
    for tag in by_elg1:
        for config in (official, fic):
            s = analysis.delay_stats(run_by_tag[tag], judgments, config)
            delay_rows.append((tag, s.mode.value, s.mean_minutes, s.median_minutes, s.count))
    delay_header = ("run_tag", "reference", "mean_minutes", "median_minutes", "count")

    volumes = {tag: analysis.push_volume(run_by_tag[tag], judgments, official) for tag in matrices}
    volume_header = ("rank", "run_tag", "score", "relevant_pushed", "gain_contributing", "wasted")

    def volume_rows(order, key):
        return [(i + 1, tag, matrices[tag][key].overall, volumes[tag].relevant_pushed,
                 volumes[tag].gain_contributing, volumes[tag].wasted)
                for i, tag in enumerate(order)]

    stats = analysis.cluster_stats(judgments)
    tables = {
        "delay_stats": (delay_header, delay_rows),
        "push_volume_by_elg1": (volume_header, volume_rows(by_elg1, analysis.ELG1_OFFICIAL)),
        "push_volume_by_elg0": (volume_header, volume_rows(by_elg0, analysis.ELG0_OFFICIAL)),
        "cluster_stats": (report.CLUSTER_COLUMNS, list(report.cluster_rows(stats))),
    }

    if not args.no_correlations:
        comparisons = analysis.compare_variants(matrices, empty_run=empty)
        for c in comparisons:
            _write(out / "scatter" / f"{c.name}.csv", report.scatter_csv(c))
        tables["correlations"] = (report.CORRELATION_COLUMNS,
                                  list(report.correlation_rows(comparisons)))

    if args.format == "doc":
        for name, (header, rows) in tables.items():
            doc[name] = [dict(zip(header, row)) for row in rows]
        doc["cluster_stats"] = report.cluster_doc(stats)
        _write(out / "analysis.json", report.dumps(doc))
    else:
        delim, ext = ("\t", "tsv") if args.format == "tsv" else (",", "csv")
        for name, (header, rows) in tables.items():
            _write(out / f"{name}.{ext}", report.table(header, rows, delim))
    _report_diagnostics(out, matrices)
    print(f"analyzed {len(runs)} runs over {len(judgments.topics)} topics -> {out}")
    return 0


def cmd_generate(args) -> int:
    try:
        lo, hi = (int(v) for v in args.clusters_per_day.split(","))
        behaviors = [BehaviorProfile.parse(b, default_seed=args.seed) for b in args.behaviors]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params = {
        "topics": args.topics,
        "days": args.days,
        "seed": args.seed,
        "window_start": args.window_start,
        "silent_fraction": args.silent_fraction,
        "singleton_fraction": args.singleton_fraction,
        "max_cluster_size": args.max_cluster_size,
        "clusters_per_day": [lo, hi],
        "highly_relevant_fraction": args.highly_relevant_fraction,
        "nonrelevant_per_day": args.nonrelevant_per_day,
        "require_clusters": args.require_clusters,
        "behaviors": [b.tag for b in behaviors],
    }
    judgments = gen_judgments(
        args.topics, args.days, seed=args.seed, start=args.window_start,
        silent_fraction=args.silent_fraction, singleton_fraction=args.singleton_fraction,
        max_cluster_size=args.max_cluster_size, clusters_per_day=(lo, hi),
        highly_relevant_fraction=args.highly_relevant_fraction,
        nonrelevant_per_day=args.nonrelevant_per_day, require_clusters=args.require_clusters,
    )
    window = EvaluationWindow(args.window_start, args.days)
    runs = [gen_run(b, judgments, window) for b in behaviors]
    manifest = write_dataset(args.out, judgments, window, runs, params)
    print(f"wrote {manifest['cells']} topic-day cells and {len(runs)} runs to {args.out}")
    return 0


def cmd_validate(args) -> int:
    inputs = _resolve_inputs(args)
    problems = validate_dataset(inputs["gains"], inputs["clusters"], inputs["creation_times"])
    for problem in problems:
        print(problem)
    if problems:
        print(f"{len(problems)} violation(s)", file=sys.stderr)
        return 1
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pushelg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score runs under ELG variants")
    _add_data_args(p)
    p.add_argument("--latency-mode", choices=("official", "none", "first-in-cluster", "all"),
                   default="all")
    p.add_argument("--silent-mode", choices=("elg1", "elg0", "all"), default="all")
    p.add_argument("--headline", type=_variant, default="elg1-official",
                   help="variant the summary is sorted by (default elg1-official)")
    p.add_argument("--include-empty-run-baseline", action="store_true",
                   help=f"also score an empty run named {analysis.EMPTY_RUN_TAG}")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("analyze", help="delay, push volume, cluster and correlation analyses")
    _add_data_args(p)
    p.add_argument("--no-correlations", action="store_true",
                   help="skip scatter data and correlations (allows a single run)")
    p.add_argument("--include-empty-run-baseline", action="store_true",
                   help="accepted for symmetry with score; the baseline point is always emitted")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("--topics", type=int, required=True)
    p.add_argument("--days", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window-start", type=int, default=DEFAULT_START)
    p.add_argument("--silent-fraction", type=float, default=0.3)
    p.add_argument("--singleton-fraction", type=float, default=0.75)
    p.add_argument("--max-cluster-size", type=int, default=4)
    p.add_argument("--clusters-per-day", default="1,3", help="lo,hi clusters per non-silent day")
    p.add_argument("--highly-relevant-fraction", type=float, default=0.5)
    p.add_argument("--nonrelevant-per-day", type=int, default=2)
    p.add_argument("--require-clusters", action="store_true",
                   help="every topic keeps at least one non-silent day")
    p.add_argument("--behaviors", nargs="+", default=list(DEFAULT_BEHAVIORS),
                   help="immediate | silent | delay:MIN | spammer:RATE[:SEED] | prob:P:MEAN[:SEED]")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="check a dataset's structural invariants")
    _add_data_args(p, runs=False)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pushelg: error: {exc}", file=sys.stderr)
        return 2
    except (PushElgError, ValueError) as exc:
        print(f"pushelg: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
