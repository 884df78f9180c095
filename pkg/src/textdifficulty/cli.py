"""Command-line entry point: ``textdifficulty {analyze,stats,evolve,synth}``.

Exit codes: 0 success, 2 usage or input error, 1 internal failure.
Every flag can also be given in a JSON file passed with ``--config``
(keys are flag names without dashes, e.g. ``"cap_words": "off"``); flags on
the command line win.  ``TEXTDIFFICULTY_SEED`` sets the default seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .corpus import FORMATS, IngestOptions, Split, load_dataset, write_dataset
from .errors import AlignmentError, ConfigError, TextDifficultyError
from .evolve import (
    EvolutionConfig,
    ScoreMatrix,
    StatMatrix,
    aggregate_selection_frequency,
    align,
    evolve,
    expand_statistics,
    load_ablation_file,
    read_score_csv,
    run_ablations,
)
from .measure import load_baseline, report, resolve_measure
from .stats import StatsConfig, compute_all, write_stat_csv
from .synth import MODES, synthetic_rows

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("TEXTDIFFICULTY_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"TEXTDIFFICULTY_SEED must be an integer, got {raw!r}") from None


def _cap(value: str):
    if str(value).lower() in ("off", "none", "0"):
        return None
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'off'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer or 'off'")
    return n


def _corpus_flags(p: argparse.ArgumentParser, seed: int) -> None:
    g = p.add_argument_group("corpus")
    g.add_argument("--format", choices=FORMATS, help="input format (default: from file extension)")
    g.add_argument("--cap-words", type=_cap, default=100, metavar="N|off",
                   help="truncate items to N words (default 100)")
    g.add_argument("--split-validation", type=float, default=None, metavar="FRAC",
                   help="sample FRAC of train as validation (e.g. 0.15)")
    g.add_argument("--all-splits", action="store_true",
                   help="compute statistics over all splits instead of train only")
    g.add_argument("--seed", type=int, default=seed)


def build_parser(seed: int = 0) -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="textdifficulty", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON file with flag values")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["analyze"] = sub.add_parser("analyze", help="difficulty report for one dataset")
    p.add_argument("dataset")
    _corpus_flags(p, seed)
    p.add_argument("--measure", default="d2", help="d1, d2 or a measure JSON file (default d2)")
    p.add_argument("--baseline", help="baseline JSON (default: embedded published values)")
    p.add_argument("--out", action="append", metavar="PATH",
                   help="report file, .json or .md; repeatable (default report.json and report.md)")
    p.add_argument("--stats-out", metavar="PATH", help="also write the full statistic vector as JSON")
    p.add_argument("--context", action="store_true", help="include published reference measures")
    p.add_argument("--band-threshold", type=float, default=4.0)

    p = subs["stats"] = sub.add_parser("stats", help="statistic matrix CSV for many datasets")
    p.add_argument("datasets", nargs="+")
    _corpus_flags(p, seed)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--jobs", type=int, default=1)

    p = subs["evolve"] = sub.add_parser("evolve", help="genetic search for a difficulty measure")
    p.add_argument("--stats", required=True, help="stat matrix CSV")
    p.add_argument("--scores", required=True, help="score matrix CSV")
    p.add_argument("--holdout-model", action="append", default=[], metavar="NAME")
    p.add_argument("--exclude", action="append", default=[], metavar="STAT",
                   help="statistic or group name to leave out; repeatable")
    p.add_argument("--ablation-file", help="JSON mapping mask names to excluded statistics")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--parent-pairs", type=int, default=400)
    p.add_argument("--population-size", type=int, default=200)
    p.add_argument("--mutation-rate", type=float, default=0.01)
    p.add_argument("--stagnation-limit", type=int, default=15)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="result JSON path (default stdout)")

    p = subs["synth"] = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--items-per-class", "--items", dest="items_per_class", type=int, required=True)
    p.add_argument("--mode", choices=MODES, default="identical")
    p.add_argument("--words", type=int, default=5, help="words per generated string")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", required=True)
    return parser, subs


def _apply_config(argv, parser, subs):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    command = next((a for a in rest if a in subs), None)
    if command is None:
        return
    sp = subs[command]
    dests = {a.dest: a for a in sp._actions}
    values = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in dests:
            raise UsageError(f"config key {key!r} is not a flag of {command!r}")
        action = dests[dest]
        if action.type is not None and isinstance(val, str):
            val = action.type(val)
        values[dest] = val
    sp.set_defaults(**values)
    # required flags satisfied by the config file
    for dest in values:
        dests[dest].required = False


def _ingest(args, path) -> IngestOptions:
    return IngestOptions(format=args.format, cap_words=args.cap_words,
                         split_validation=args.split_validation, seed=args.seed)


def _stats_config(args) -> StatsConfig:
    return StatsConfig(split=Split.ALL if args.all_splits else Split.TRAIN)


def cmd_analyze(args) -> int:
    dataset = load_dataset(args.dataset, options=_ingest(args, args.dataset))
    genome = resolve_measure(args.measure)
    baseline = load_baseline(args.baseline)
    vector = compute_all(dataset, _stats_config(args))
    rep = report(vector, genome, baseline, band_threshold=args.band_threshold, context=args.context)
    outs = args.out or ["report.json", "report.md"]
    for out in outs:
        suffix = Path(out).suffix.lower()
        text = rep.to_markdown() if suffix in (".md", ".markdown") else rep.to_json() + "\n"
        Path(out).write_text(text, encoding="utf-8")
    if args.stats_out:
        Path(args.stats_out).write_text(json.dumps(vector.to_json_obj(), indent=2) + "\n", encoding="utf-8")
    print(f"dataset: {rep.dataset}")
    print(f"measure: {rep.measure}")
    print(f"difficulty: {rep.difficulty:.6f}")
    print(f"band: {rep.band.value}")
    for r in rep.rows:
        z = "" if r.z is None else f" z={r.z:+.2f}"
        flag = " NOTABLE" if r.notable else ""
        print(f"  {r.statistic}: {r.value:.6f}{z}{flag}")
    for w in rep.warnings:
        print(f"warning: {w}")
    return EXIT_OK


def _stats_job(job):
    path, opts, cfg = job
    return compute_all(load_dataset(path, options=opts), cfg)


def cmd_stats(args) -> int:
    cfg = _stats_config(args)
    jobs = [(p, _ingest(args, p), cfg) for p in args.datasets]
    vectors = []
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            futures = [ex.submit(_stats_job, j) for j in jobs]
            for (path, _, _), fut in zip(jobs, futures):
                try:
                    vectors.append(fut.result())
                except TextDifficultyError as exc:
                    raise UsageError(f"{path}: {exc}") from None
    else:
        for job in jobs:
            try:
                vectors.append(_stats_job(job))
            except (TextDifficultyError, OSError) as exc:
                raise UsageError(f"{job[0]}: {exc}") from None
    names = [v.dataset_name for v in vectors]
    if len(set(names)) != len(names):
        raise UsageError("dataset names (file stems) must be unique")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_stat_csv(fh, vectors)
    else:
        write_stat_csv(sys.stdout, vectors)
    return EXIT_OK


def cmd_evolve(args) -> int:
    stats = StatMatrix.read_csv(args.stats)
    scores = read_score_csv(args.scores, holdout=args.holdout_model)
    try:
        align(stats, scores)
    except AlignmentError as exc:
        raise UsageError(f"stat and score matrices do not align: {exc}") from None
    try:
        excluded = expand_statistics(args.exclude)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    cfg = EvolutionConfig(
        parent_pairs=args.parent_pairs,
        population_size=args.population_size,
        mutation_rate=args.mutation_rate,
        stagnation_limit=args.stagnation_limit,
        restarts=args.restarts,
        seed=args.seed,
        excluded_statistics=excluded,
        n_jobs=args.jobs,
    )
    if args.ablation_file:
        masks = load_ablation_file(args.ablation_file)
        results = run_ablations(cfg, stats, scores, masks)
        payload = {
            "ablations": {name: res.to_json_obj() for name, res in results.items()},
            "best_fitness": {name: res.best_fitness for name, res in results.items()},
            "selection_frequency": aggregate_selection_frequency(results),
        }
        summary = [f"{name}: fitness {res.best_fitness:.4f}" for name, res in results.items()]
    else:
        res = evolve(cfg, stats, scores)
        payload = res.to_json_obj()
        summary = [f"best fitness: {res.best_fitness:.6f}", "best measure: " + " + ".join(res.best_genome.names)]
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        for line in summary:
            print(line)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.classes < 1 or args.items_per_class < 1 or args.words < 1:
        raise UsageError("--classes, --items-per-class and --words must be >= 1")
    write_dataset(args.out, synthetic_rows(args.classes, args.items_per_class, args.mode, args.seed, args.words),
                  args.format)
    print(f"wrote {args.classes * args.items_per_class} items to {args.out}")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "stats": cmd_stats, "evolve": cmd_evolve, "synth": cmd_synth}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser, subs = build_parser(_default_seed())
        _apply_config(argv, parser, subs)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"textdifficulty: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, TextDifficultyError, ConfigError, FileNotFoundError, IsADirectoryError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"textdifficulty: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"textdifficulty: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"textdifficulty: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
