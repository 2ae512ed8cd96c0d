"""Command line interface.

Subcommands: ``generate``, ``audit``, ``degeneration``, ``correlate``.
Exit codes: 0 ok, 2 usage, 3 data error, 4 runtime/training error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .evaluation import PredictionSet
from .experiments import (
    PRESETS,
    TrainSettings,
    audit_binned,
    fit_predict,
    run_correlation,
    run_degeneration,
)
from .io import (
    CsvDatasetSpec,
    DataError,
    abalone_like_dataset,
    dumps_report,
    load_csv_dataset,
    load_predictions,
    report_meta,
    write_report,
)
from .learner import TrainingError
from .measures import MeasureError, UniformRelevance, measure_from_json
from .synth import BimodalSpec, generate_bimodal, train_test_split

log = logging.getLogger("regimbalance")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _csv_list(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="base random seed (default 0)")
    p.add_argument("--out", default=d("."), help="output directory (default: current directory)")
    p.add_argument(
        "--format",
        choices=("json", "tsv", "text"),
        default=d("json"),
        help="what to print on stdout; report files are always written",
    )


def _data_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--data", required=required, help="CSV dataset")
    p.add_argument("--target", help="target column name or index")
    p.add_argument("--features", help="comma-separated feature columns (default: all but target)")
    p.add_argument("--categorical", help="comma-separated columns to one-hot encode")
    p.add_argument("--no-header", action="store_true", help="CSV has no header row")
    p.add_argument("--columns", help="comma-separated column names (for header-less files)")


def _train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes for runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regimbalance", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic bimodal dataset as CSV")
    _common(g, suppress=True)
    g.add_argument("--imbalance", type=float, default=1.0, help="imbalance factor I >= 1")
    g.add_argument("--n-minority", type=int, default=BimodalSpec.n_minority)
    g.add_argument("--mode-std", type=float, default=BimodalSpec.mode_std)
    g.add_argument("--feature-dim", type=int, default=BimodalSpec.feature_dim)
    g.add_argument("--spread", type=float, default=BimodalSpec.feature_cluster_spread)
    g.add_argument("--name", default="bimodal.csv", help="output file name inside --out")

    a = sub.add_parser("audit", help="histogram, imbalance scores and binned MAE of a dataset")
    _common(a, suppress=True)
    _data_args(a, required=True)
    m = a.add_mutually_exclusive_group()
    m.add_argument("--measure-json", help="relevance measure as inline JSON")
    m.add_argument("--measure-file", help="relevance measure JSON file")
    a.add_argument("--bins", type=int, default=20)
    a.add_argument("--predictions", help="CSV with y_true,y_pred columns to audit")
    a.add_argument("--fit", action="store_true", help="train a regressor on a split and audit its test error")
    _train_args(a)

    d = sub.add_parser("degeneration", help="degeneration versus imbalance factor")
    _common(d, suppress=True)
    d.add_argument("--imbalances", type=_float_list, default=[1.0, 3.0, 10.0, 20.0])
    d.add_argument("--runs", type=int, default=10)
    d.add_argument("--n-minority", type=int, default=BimodalSpec.n_minority)
    d.add_argument("--mode-std", type=float, default=BimodalSpec.mode_std)
    d.add_argument("--feature-dim", type=int, default=BimodalSpec.feature_dim)
    d.add_argument("--spread", type=float, default=BimodalSpec.feature_cluster_spread)
    _train_args(d)

    c = sub.add_parser("correlate", help="correlation of imbalance scores with model quality")
    _common(c, suppress=True)
    _data_args(c, required=False)
    c.add_argument("--preset", choices=sorted(PRESETS), help="named sweep endpoint")
    c.add_argument("--endpoint", type=_float_list, help="sweep endpoint MEAN,STD")
    c.add_argument("--runs", type=int, default=10)
    c.add_argument("--points", type=int, default=20)
    c.add_argument("--bins", type=int, default=20)
    c.add_argument("--t-rel", type=float, default=0.5)
    c.add_argument("--t-err", type=float, default=10.0)
    c.add_argument("--beta", type=float, default=1.0)
    c.add_argument("--k", type=float, default=1.0, help="recorded for provenance; unused")
    _train_args(c)
    return parser


def _settings(args) -> TrainSettings:
    if args.epochs < 1 or args.batch_size < 1 or args.lr < 0:
        raise UsageError("--epochs and --batch-size must be >= 1 and --lr >= 0")
    if not 0 < args.test_fraction < 1:
        raise UsageError("--test-fraction must lie in (0, 1)")
    return TrainSettings(args.lr, args.epochs, args.batch_size)


def _load_data(args):
    target = args.target
    if target is None:
        raise UsageError("--target is required with --data")
    spec = CsvDatasetSpec(
        path=args.data,
        target_column=target,
        feature_columns=_csv_list(args.features) or None,
        categorical_columns=tuple(_csv_list(args.categorical)),
        has_header=not args.no_header,
        column_names=_csv_list(args.columns) or None,
    )
    return spec, load_csv_dataset(spec)


def _emit(args, text_by_format: dict) -> None:
    sys.stdout.write(text_by_format.get(args.format) or text_by_format["json"])


def cmd_generate(args) -> int:
    if not args.imbalance >= 1:
        raise UsageError(f"--imbalance must be >= 1, got {args.imbalance}")
    try:
        spec = BimodalSpec(
            n_minority=args.n_minority,
            imbalance_factor=args.imbalance,
            mode_std=args.mode_std,
            feature_dim=args.feature_dim,
            feature_cluster_spread=args.spread,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = generate_bimodal(spec)
    out = Path(args.out) / args.name
    out.parent.mkdir(parents=True, exist_ok=True)
    data.to_csv(out)
    log.info("wrote %d rows to %s", len(data), out)
    meta = report_meta(args.seed, {"command": "generate", **spec.to_dict()})
    body = {"path": str(out), "rows": len(data), "mode_counts": [spec.n_majority, spec.n_minority]}
    _emit(args, {"json": dumps_report(meta, body), "text": f"{out}\t{len(data)} rows\n"})
    return EXIT_OK


def _read_measure(args, targets):
    try:
        if args.measure_json:
            return measure_from_json(args.measure_json)
        if args.measure_file:
            return measure_from_json(Path(args.measure_file).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read measure file: {exc}") from None
    except MeasureError as exc:
        raise UsageError(str(exc)) from None
    lo, hi = float(np.min(targets)), float(np.max(targets))
    return UniformRelevance(lo, hi if hi > lo else lo + 1.0)


def cmd_audit(args) -> int:
    if args.bins < 1:
        raise UsageError("--bins must be >= 1")
    if args.fit and args.predictions:
        raise UsageError("--fit and --predictions are mutually exclusive")
    spec, data = _load_data(args)
    targets = data.targets
    preds = None
    config = {"command": "audit", "data": str(spec.path), "target": str(spec.target_column), "bins": args.bins}
    if args.predictions:
        preds = load_predictions(args.predictions)
        config["predictions"] = str(args.predictions)
    elif args.fit:
        settings = _settings(args)
        tr, te = train_test_split(data, args.test_fraction, args.seed)
        targets = tr.targets
        preds = PredictionSet(te.targets, fit_predict(tr, te, "mae", settings, args.seed))
        config.update({"fit": True, "test_fraction": args.test_fraction, "train": settings.to_dict()})
    measure = _read_measure(args, targets)
    config["measure"] = measure.to_dict()
    report = audit_binned(targets, measure, preds, args.bins)
    meta = report_meta(args.seed, config)
    out = Path(args.out)
    write_report(out / "audit.json", meta, report.to_dict())
    tsv = report.to_tsv()
    (out / "audit.tsv").write_text(tsv, encoding="utf-8")
    imb = report.imbalance
    text = f"kolmogorov\t{imb.kolmogorov:.6f}\nwasserstein\t{imb.wasserstein:.6f}\nn_samples\t{imb.n_samples}\n"
    _emit(args, {"json": dumps_report(meta, report.to_dict()), "tsv": tsv, "text": text})
    return EXIT_OK


def cmd_degeneration(args) -> int:
    settings = _settings(args)
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if not args.imbalances or min(args.imbalances) < 1:
        raise UsageError("--imbalances must be a list of factors >= 1")
    try:
        base = BimodalSpec(
            n_minority=args.n_minority,
            mode_std=args.mode_std,
            feature_dim=args.feature_dim,
            feature_cluster_spread=args.spread,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_degeneration(
        args.imbalances, args.runs, base, settings, args.seed, args.test_fraction, args.jobs
    )
    config = {
        "command": "degeneration",
        "imbalances": args.imbalances,
        "runs": args.runs,
        "data": {k: v for k, v in base.to_dict().items() if k not in ("seed", "imbalance_factor")},
        "train": settings.to_dict(),
        "test_fraction": args.test_fraction,
        "run_seeds": "seed + run_index",
    }
    meta = report_meta(args.seed, config)
    out = Path(args.out)
    write_report(out / "degeneration.json", meta, report.to_dict())
    text = report.to_text()
    (out / "degeneration.txt").write_text(text, encoding="utf-8")
    _emit(args, {"json": dumps_report(meta, report.to_dict()), "text": text, "tsv": text})
    return EXIT_OK


def cmd_correlate(args) -> int:
    settings = _settings(args)
    if args.preset and args.endpoint:
        raise UsageError("give either --preset or --endpoint, not both")
    if args.preset:
        endpoint = PRESETS[args.preset]
    elif args.endpoint:
        if len(args.endpoint) != 2 or args.endpoint[1] <= 0:
            raise UsageError("--endpoint needs MEAN,STD with STD > 0")
        endpoint = tuple(args.endpoint)
    else:
        raise UsageError("a sweep endpoint is required: --preset or --endpoint MEAN,STD")
    if args.runs < 1 or args.points < 2:
        raise UsageError("--runs must be >= 1 and --points >= 2")
    if args.data:
        spec, data = _load_data(args)
        source = {"data": str(spec.path), "target": str(spec.target_column)}
    else:
        data = abalone_like_dataset(args.seed)
        source = {"data": "synthetic-abalone-like", "target": "rings"}
        log.warning("no --data given; using the synthetic abalone-like dataset")
    report = run_correlation(
        data,
        endpoint,
        runs=args.runs,
        n_points=args.points,
        seed=args.seed,
        settings=settings,
        test_fraction=args.test_fraction,
        t_rel=args.t_rel,
        t_err=args.t_err,
        beta=args.beta,
        k=args.k,
        n_bins=args.bins,
        n_jobs=args.jobs,
    )
    config = {
        "command": "correlate",
        **source,
        "preset": args.preset,
        "endpoint": list(endpoint),
        "runs": args.runs,
        "points": args.points,
        "t_rel": args.t_rel,
        "t_err": args.t_err,
        "beta": args.beta,
        "k": args.k,
        "bins": args.bins,
        "test_fraction": args.test_fraction,
        "train": settings.to_dict(),
    }
    meta = report_meta(args.seed, config)
    out = Path(args.out)
    write_report(out / "correlation.json", meta, report.to_dict())
    text = report.to_text()
    (out / "correlation.txt").write_text(text, encoding="utf-8")
    _emit(args, {"json": dumps_report(meta, report.to_dict()), "text": text, "tsv": text})
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "audit": cmd_audit,
    "degeneration": cmd_degeneration,
    "correlate": cmd_correlate,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"regimbalance {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
