"""Command-line entry point: ``labelguard run|filter|synth|extract``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from labelguard.config import ConfigError, ExperimentConfig, load_config
from labelguard.dataset import read_feature_csv, write_feature_csv
from labelguard.experiment import generate_synthetic, load_ecg_beats, run_matrix
from labelguard.filter import (
    NoiseSpec,
    apply_standard,
    detection_metrics,
    ensemble_votes,
    inject_noise,
    remove_flagged,
    write_filter_reports,
)
from labelguard.ingest import DataError
from labelguard.reports import emit_reports

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_SCENARIO = 0, 1, 2, 3

log = logging.getLogger("labelguard")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


def _cmd_run(args) -> int:
    config = load_config(args.config)
    config = config.with_overrides(levels=args.levels, standards=args.standards, seed=args.seed,
                                   reps=args.reps, out_dir=args.out, format=args.format)
    result = run_matrix(config)
    paths = emit_reports(result, config.out_dir, config.format)
    for p in paths:
        print(p)
    failures = result.failures
    for f in failures:
        print(f"scenario failed: level={f.noise_level} condition={f.condition} "
              f"classifier={f.classifier.value} rep={f.rep}: {f.error}", file=sys.stderr)
    return EXIT_SCENARIO if failures else EXIT_OK


def _cmd_filter(args) -> int:
    config = load_config(args.config, check_paths=False) if args.config else ExperimentConfig()
    train = read_feature_csv(args.train)
    if len(train) < args.folds:
        raise DataError(f"{len(train)} samples cannot be split into {args.folds} folds")
    tally = ensemble_votes(train, args.folds, args.seed, config.classifier_config,
                           config.voters, config.stratified_folds)
    flagged = apply_standard(tally, args.standard)
    cleaned = remove_flagged(train, flagged)
    write_feature_csv(cleaned, args.out)
    print(f"flagged {len(flagged)} of {len(train)} samples; kept {len(cleaned)}")
    if args.report:
        report = detection_metrics(flagged, train, args.standard)
        write_filter_reports(args.report, [(args.noise_level, report, args.seed)])
    return EXIT_OK


def _cmd_synth(args) -> int:
    train, test = generate_synthetic(args.classes, args.per_class, args.dim, args.separation, args.seed)
    if args.noise:
        train = inject_noise(train, NoiseSpec(args.noise, args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_feature_csv(train, out / "train.csv")
    write_feature_csv(test, out / "test.csv")
    print(out / "train.csv")
    print(out / "test.csv")
    return EXIT_OK


def _cmd_extract(args) -> int:
    config = load_config(args.config)
    if config.source != "wfdb":
        raise ConfigError("extract needs source = wfdb")
    samples = load_ecg_beats(config)
    write_feature_csv(samples, args.out)
    counts = ", ".join(f"{label.name}={n}" for label, n in samples.class_counts().items())
    print(f"{len(samples)} beats ({counts})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelguard",
                                     description="Detect and remove mislabeled training samples.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the noise-level x condition matrix from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--levels", type=_floats)
    run.add_argument("--standards", type=_ints)
    run.add_argument("--seed", type=int)
    run.add_argument("--reps", type=int)
    run.add_argument("--out")
    run.add_argument("--format", choices=("csv", "markdown"))
    run.set_defaults(func=_cmd_run)

    flt = sub.add_parser("filter", help="clean one feature CSV with the ensemble filter")
    flt.add_argument("--train", required=True)
    flt.add_argument("--standard", type=int, choices=(1, 2, 3), default=2)
    flt.add_argument("--out", required=True)
    flt.add_argument("--folds", type=int, default=10)
    flt.add_argument("--seed", type=int, default=0)
    flt.add_argument("--config", help="config file supplying classifier hyperparameters")
    flt.add_argument("--report", help="write detection metrics against the noise_flag column")
    flt.add_argument("--noise-level", type=float, default=0.0, help="level recorded in --report")
    flt.set_defaults(func=_cmd_filter)

    syn = sub.add_parser("synth", help="write synthetic Gaussian-blob train/test CSVs")
    syn.add_argument("--classes", type=int, default=6)
    syn.add_argument("--per-class", type=int, default=850)
    syn.add_argument("--dim", type=int, default=10)
    syn.add_argument("--separation", type=float, default=8.0)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--noise", type=float, default=0.0, help="inject this label-noise level into train")
    syn.add_argument("--out", required=True)
    syn.set_defaults(func=_cmd_synth)

    ext = sub.add_parser("extract", help="write beat features of the configured records to CSV")
    ext.add_argument("--config", required=True)
    ext.add_argument("--out", required=True)
    ext.set_defaults(func=_cmd_extract)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
