"""Command-line interface: extract / rank / evaluate / reproduce / dump.

Every command is a pure function of its inputs and the seed: reruns on
identical data produce byte-identical artifacts. Exit codes: 0 ok,
2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from .classify_eval import (
    KFoldPatients,
    KnnConfig,
    LeaveOnePatientOut,
    RfTrainConfig,
    SvmTrainConfig,
    cross_validate,
)
from .dataset import load_manifest, split_learning_evaluation
from .errors import ConfigError, DataError
from .matrix import FeatureMatrix
from .pipeline import PipelineConfig, extract_features
from .selection import mrmr_rank, t_filter, threshold_determination

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

# best-performing classifier per record family, after hyperparameter search
PRESET_CLASSIFIER = {
    "ch4": "svm-rbf",
    "ch5": "knn",
    "ch6": "svm-linear",
}
PRESET_CV = {"ch4": "lopo", "ch5": "lopo", "ch6": "kfold:10"}


def _classifier_config(name: str, preset: str, window_s: float):
    if name == "knn":
        return KnnConfig(k=5, p=math.inf)
    if name == "svm-linear":
        return SvmTrainConfig(c=1.6, kernel="linear", kernel_scale=1.0)
    if name == "svm-rbf":
        scale = 10.0 if window_s >= 300 else 5.0
        return SvmTrainConfig(c=2.0, kernel="gaussian", kernel_scale=scale)
    if name == "rf":
        return RfTrainConfig(n_trees=64, min_leaf=4)
    raise ConfigError(f"unknown classifier {name!r}")


def _cv_scheme(spec: str, seed: int):
    if spec == "lopo":
        return LeaveOnePatientOut()
    if spec.startswith("kfold:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad --cv value {spec!r}") from None
        return KFoldPatients(k, seed)
    raise ConfigError(f"unknown --cv scheme {spec!r}")


def _data_dir_override() -> str | None:
    return os.environ.get("HRVKIT_DATA_DIR") or None


def _write_ranking_csv(path: Path, ranked, config: dict) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("# hrvkit-config " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "feature", "score"])
        for i, (name, score) in enumerate(zip(ranked.names, ranked.scores), start=1):
            writer.writerow([i, name, repr(float(score))])


def _read_ranking_csv(path: Path) -> list[str]:
    names = []
    with path.open("r", newline="", encoding="utf-8") as fh:
        rows = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader, None)
    if header is None or header[:2] != ["rank", "feature"]:
        raise DataError(f"{path}: not a ranking CSV")
    for row in reader:
        names.append(row[1])
    return names


def _write_curve_csv(path: Path, curve: list[float]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "accuracy"])
        for k, acc in enumerate(curve, start=1):
            writer.writerow([k, repr(float(acc))])


def _write_roc_csv(path: Path, roc) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fpr", "tpr", "threshold"])
        for fpr, tpr, thr in roc:
            writer.writerow([repr(float(fpr)), repr(float(tpr)),
                             "inf" if math.isinf(thr) else repr(float(thr))])


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        preset=args.preset,
        seed=args.seed,
        window_s=float(args.window),
        guard_s=args.guard,
    )


def cmd_extract(args) -> int:
    config = _pipeline_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(args.manifest, base_dir=_data_dir_override())
    matrix, skipped = extract_features(manifest, config, jobs=args.jobs)
    matrix.to_csv(out_dir / "features.csv", config=config.echo())
    for record_id, reason in skipped.items():
        print(f"skipped {record_id}: {reason}", file=sys.stderr)
    print(f"wrote {out_dir / 'features.csv'}: {matrix.n_records} records x "
          f"{len(matrix.feature_names)} features ({len(skipped)} skipped)")
    return EXIT_OK


def _rank_on(matrix: FeatureMatrix, args, out_dir: Path, config_echo: dict):
    filtered, removed = t_filter(matrix, args.alpha)
    ranked = mrmr_rank(filtered)
    _write_ranking_csv(out_dir / "ranking.csv", ranked, config_echo)
    classifier = _classifier_config(args.classifier, args.preset, float(args.window))
    scheme = _cv_scheme(args.cv, args.seed)
    k_star, curve = threshold_determination(ranked, filtered, classifier, scheme,
                                            k_max=args.kmax)
    _write_curve_csv(out_dir / "threshold_curve.csv", curve)
    report = {
        "removed_by_t_test": {k: v for k, v in sorted(removed.items())},
        "survivors": len(ranked.names),
        "classifier": args.classifier,
        "threshold_k": k_star,
        "selected": ranked.top(k_star),
    }
    (out_dir / "threshold.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return ranked, k_star


def cmd_rank(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix = FeatureMatrix.from_csv(args.features)
    config_echo = {"command": "rank", "alpha": args.alpha, "seed": args.seed,
                   "classifier": args.classifier, "cv": args.cv}
    ranked, k_star = _rank_on(matrix, args, out_dir, config_echo)
    print(f"{len(ranked.names)} features survive the t filter; "
          f"threshold k* = {k_star} for {args.classifier}")
    return EXIT_OK


def _print_report(report) -> None:
    print(f"{'':<12}{'SN':>8}{'SP':>8}{'ACC':>8}{'AUC':>8}")
    print(f"{report.scheme:<12}{report.sensitivity:>8.3f}{report.specificity:>8.3f}"
          f"{report.accuracy:>8.3f}{report.auc:>8.3f}")


def cmd_evaluate(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix = FeatureMatrix.from_csv(args.features)
    subset = None
    if args.ranking_csv:
        names = _read_ranking_csv(Path(args.ranking_csv))
        subset = names[:args.k] if args.k else names
    classifier = _classifier_config(args.classifier, args.preset, float(args.window))
    scheme = _cv_scheme(args.cv, args.seed)
    config_echo = {"command": "evaluate", "classifier": args.classifier,
                   "cv": args.cv, "seed": args.seed, "k": args.k}
    report = cross_validate(matrix, scheme, classifier, feature_subset=subset,
                            seed=args.seed, config_echo=config_echo)
    report.to_json(out_dir / "report.json")
    _write_roc_csv(out_dir / "roc.csv", report.roc)
    _print_report(report)
    return EXIT_OK


def cmd_dump(args) -> int:
    """Debug dumps for one record: preprocessed series, |B| grid, KDE grid."""
    from .features import estimate_bispectrum, kde_bivariate
    from .features.paf import difference_map
    from .pipeline import prepare_record

    config = _pipeline_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(args.manifest, base_dir=_data_dir_override())
    record = next((r for r in manifest.records if r.record_id == args.record), None)
    if record is None:
        raise DataError(f"record {args.record!r} not in manifest")
    ihr = prepare_record(record.load_series(manifest.base_dir), config)

    with (out_dir / "preprocessed.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time_s", "ihr_bpm"])
        for t, v in zip(ihr.sample_times, ihr.values):
            writer.writerow([repr(float(t)), repr(float(v))])

    grid = estimate_bispectrum(ihr.values, config.bispectrum_max_lag,
                               config.bispectrum_grid)
    mag = abs(grid.values)
    with (out_dir / "bispectrum.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["f1"] + [repr(float(f)) for f in grid.freqs])
        for i, f in enumerate(grid.freqs):
            writer.writerow([repr(float(f))] + [repr(float(v)) for v in mag[i]])

    if config.task == "paf":
        dmap = difference_map(60000.0 / ihr.values)
        density = kde_bivariate(dmap)
        with (out_dir / "density.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x"] + [repr(float(v)) for v in density.grid_y])
            for i, gx in enumerate(density.grid_x):
                writer.writerow([repr(float(gx))]
                                + [repr(float(v)) for v in density.density[i]])
    print(f"wrote debug dumps for {args.record} to {out_dir}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    """Chain extract, rank and evaluate with the preset's published flow."""
    config = _pipeline_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(args.manifest, base_dir=_data_dir_override())
    matrix, skipped = extract_features(manifest, config, jobs=args.jobs)
    matrix.to_csv(out_dir / "features.csv", config=config.echo())
    for record_id, reason in skipped.items():
        print(f"skipped {record_id}: {reason}", file=sys.stderr)

    classifier = _classifier_config(args.classifier, args.preset, float(args.window))
    scheme = _cv_scheme(args.cv, args.seed)
    config_echo = {**config.echo(), "classifier": args.classifier, "cv": args.cv}

    if args.preset == "ch5":
        # split, rank and pick the threshold on the learning patients,
        # evaluate the chosen prefix on the held-out patients
        split = split_learning_evaluation(manifest, args.seed)
        (out_dir / "split.json").write_text(json.dumps({
            "learning": sorted(split.learning_patients),
            "evaluation": sorted(split.evaluation_patients),
            "seed": args.seed}, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        learning = matrix.rows_for_patients(split.learning_patients)
        evaluation = matrix.rows_for_patients(split.evaluation_patients)
        ranked, k_star = _rank_on(learning, args, out_dir, config_echo)
        report = cross_validate(evaluation, scheme, classifier,
                                feature_subset=ranked.top(k_star),
                                seed=args.seed, config_echo=config_echo)
    else:
        # ch4 and ch6 evaluate the full feature set of their task
        report = cross_validate(matrix, scheme, classifier,
                                seed=args.seed, config_echo=config_echo)

    report.to_json(out_dir / "report.json")
    _write_roc_csv(out_dir / "roc.csv", report.roc)
    _print_report(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hrvkit",
        description="HRV feature extraction, ranking and arrhythmia-prediction evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_manifest: bool):
        if needs_manifest:
            p.add_argument("--manifest", required=True, help="manifest JSON path")
            p.add_argument("--jobs", type=int, default=1,
                           help="parallel workers for per-record extraction")
        p.add_argument("--preset", choices=["ch4", "ch5", "ch6"], default="ch5")
        p.add_argument("--window", type=float, choices=[60.0, 300.0], default=300.0,
                       help="analysis window before the guard, seconds")
        p.add_argument("--guard", type=float, default=10.0,
                       help="seconds between the window end and the event onset")
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--out", required=True, help="output directory")

    def selection_flags(p):
        p.add_argument("--ranking", dest="ranking_method",
                       choices=["ttest+mrmr"], default="ttest+mrmr")
        p.add_argument("--alpha", type=float, default=0.005,
                       help="t-test p-value cut-off")
        p.add_argument("--kmax", type=int, default=None,
                       help="cap on the threshold search depth")

    def classifier_flags(p, default=None):
        p.add_argument("--classifier",
                       choices=["knn", "svm-linear", "svm-rbf", "rf"], default=default)
        p.add_argument("--cv", default=None, help="lopo or kfold:K")

    p_extract = sub.add_parser("extract", help="feature CSV from a manifest")
    common(p_extract, needs_manifest=True)
    p_extract.set_defaults(func=cmd_extract)

    p_rank = sub.add_parser("rank", help="t-filter + mRMR ranking of a feature CSV")
    common(p_rank, needs_manifest=False)
    p_rank.add_argument("--features", required=True, help="features.csv from extract")
    selection_flags(p_rank)
    classifier_flags(p_rank, default="knn")
    p_rank.set_defaults(func=cmd_rank)

    p_eval = sub.add_parser("evaluate", help="cross-validated evaluation")
    common(p_eval, needs_manifest=False)
    p_eval.add_argument("--features", required=True)
    p_eval.add_argument("--ranking-csv", dest="ranking_csv", default=None,
                        help="ranking.csv to subset features")
    p_eval.add_argument("--k", type=int, default=None, help="use the top-k ranked features")
    classifier_flags(p_eval, default="knn")
    p_eval.set_defaults(func=cmd_evaluate)

    p_rep = sub.add_parser("reproduce", help="extract + rank + evaluate per preset")
    common(p_rep, needs_manifest=True)
    selection_flags(p_rep)
    classifier_flags(p_rep)
    p_rep.set_defaults(func=cmd_reproduce)

    p_dump = sub.add_parser("dump", help="debug CSVs for one record")
    common(p_dump, needs_manifest=True)
    p_dump.add_argument("--record", required=True, help="record_id to dump")
    p_dump.set_defaults(func=cmd_dump)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "classifier", None) is None:
        args.classifier = PRESET_CLASSIFIER[args.preset]
    if getattr(args, "cv", None) is None:
        args.cv = PRESET_CV.get(args.preset, "lopo")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
