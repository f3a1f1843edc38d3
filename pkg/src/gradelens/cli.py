"""Command-line front end.

Each subcommand maps onto one library operation: ingest/synth manage
datasets, train builds similarity models, evaluate runs the hold-out MAE
grid, predict/recommend answer single queries, serve starts the HTTP
service. Read commands take --output json|csv for machine consumption.

Exit status: 0 success, 1 data or domain error (diagnostic on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import (
    GradeScale,
    RatingsMatrix,
    load_ratings_csv,
    load_scale_csv,
    write_records_csv,
)
from .errors import GradeLensError
from .evaluation import (
    ExperimentConfig,
    SplitSpec,
    emit_report,
    report_to_csv_lines,
    run_experiment,
    synthesize_dataset,
)
from .predict import ALGORITHM_KIND, NeighborhoodConfig, predict as predict_cell
from .similarity import WeightingParams, build_similarity_model
from .store import Store

_ALGORITHM_ALIASES = {
    "user": "user_based",
    "item": "item_based",
    "user_based": "user_based",
    "item_based": "item_based",
}

PREDICTION_CSV_HEADER = (
    "student_id,course_id,value,raw_value,fallback_level,neighborhood_size_used,clamped"
)


def _algorithm(token: str) -> str:
    try:
        return _ALGORITHM_ALIASES[token.strip()]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"algorithm must be user or item, got {token!r}"
        ) from None


def _algorithm_list(raw: str) -> list:
    return [_algorithm(tok) for tok in raw.split(",") if tok.strip()]


def _k_value(token: str):
    token = token.strip()
    if token == "all":
        return "all"
    try:
        value = int(token)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f'k must be a positive integer or "all", got {token!r}'
        ) from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"k must be >= 1, got {value}")
    return value


def _k_list(raw: str) -> list:
    values = [_k_value(tok) for tok in raw.split(",") if tok.strip()]
    if not values:
        raise argparse.ArgumentTypeError("empty k list")
    return values


def _int_list(raw: str) -> list:
    try:
        return [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from None


def _add_data_dir(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data-dir",
        default=None,
        help="data directory (default: $GRADELENS_DATA_DIR or ~/.gradelens)",
    )


def _add_scale(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scale-file",
        default=None,
        help="symbol,points CSV overriding the default letter-grade scale",
    )


def _add_weighting(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--significance-threshold",
        type=int,
        default=None,
        help="devalue similarities built on fewer than this many co-ratings",
    )
    parser.add_argument(
        "--amplification",
        type=float,
        default=None,
        metavar="RHO",
        help="case amplification exponent (1 is a no-op)",
    )
    parser.add_argument(
        "--min-corated",
        type=int,
        default=2,
        help="co-ratings required before a similarity counts at all (default 2)",
    )


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output", choices=("json", "csv"), default=None, help="machine-readable output"
    )


def _scale_from_args(args) -> GradeScale:
    if args.scale_file:
        return load_scale_csv(args.scale_file)
    return GradeScale.default()


def _weighting_from_args(args) -> WeightingParams:
    return WeightingParams(
        significance_threshold=args.significance_threshold,
        amplification_exponent=args.amplification,
        min_corated=args.min_corated,
    )


def _prediction_row(p) -> dict:
    return {
        "student_id": p.student_id,
        "course_id": p.course_id,
        "value": p.value,
        "raw_value": p.raw_value,
        "fallback_level": p.fallback_level,
        "neighborhood_size_used": p.neighborhood_size_used,
        "clamped": p.clamped,
    }


def _emit_predictions(preds, output) -> None:
    if output == "json":
        print(json.dumps([_prediction_row(p) for p in preds], indent=2))
    elif output == "csv":
        print(PREDICTION_CSV_HEADER)
        for p in preds:
            print(
                f"{p.student_id},{p.course_id},{p.value!r},{p.raw_value!r},"
                f"{p.fallback_level},{p.neighborhood_size_used},{p.clamped}"
            )
    else:
        for p in preds:
            note = f"fallback={p.fallback_level}, neighbors={p.neighborhood_size_used}"
            if p.clamped:
                note += ", clamped"
            print(f"{p.student_id} {p.course_id}: {p.value:.4f} ({note})")


def _resolve_model(store: Store, args, matrix: RatingsMatrix):
    """Stored model (fingerprint-checked) or an ad-hoc build, per flags."""
    if args.model:
        model, _handle = store.load_model(args.model)
        store.check_model_current(model, matrix)
        return model
    kind = ALGORITHM_KIND[args.algorithm]
    return build_similarity_model(matrix, kind, _weighting_from_args(args))


# -- subcommand implementations --------------------------------------------


def _cmd_ingest(args) -> int:
    store = Store(args.data_dir)
    matrix = load_ratings_csv(args.input, _scale_from_args(args))
    ds_id = store.save_dataset(matrix, args.dataset)
    print(
        f"stored dataset {ds_id}: {len(matrix.students)} students x "
        f"{len(matrix.courses)} courses, {matrix.n_ratings} ratings "
        f"(fingerprint {matrix.fingerprint()[:12]})"
    )
    return 0


def _cmd_synth(args) -> int:
    scale = _scale_from_args(args)
    records = synthesize_dataset(
        students=args.students,
        courses_per_term=args.terms,
        scale=scale,
        noise_sd=args.noise_sd,
        latent_dim=args.latent_dim,
        seed=args.seed,
        quantize=not args.continuous,
    )
    if args.dataset:
        store = Store(args.data_dir)
        ds_id = store.save_dataset(RatingsMatrix(records, scale), args.dataset)
        print(f"stored dataset {ds_id}: {len(records)} synthetic ratings")
    else:
        write_records_csv(records, args.out)
        print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_train(args) -> int:
    store = Store(args.data_dir)
    matrix = store.load_dataset(args.dataset)
    model = build_similarity_model(
        matrix, ALGORITHM_KIND[args.algorithm], _weighting_from_args(args)
    )
    handle = store.save_model(model, args.dataset, args.model_id)
    print(
        f"trained {handle.model_id} ({handle.kind}, {model.n_pairs} pairs) "
        f"on dataset {args.dataset}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    if args.dataset:
        store = Store(args.data_dir)
        matrix = store.load_dataset(args.dataset)
        records, scale = matrix.to_records(), matrix.scale
    else:
        scale = _scale_from_args(args)
        records = load_ratings_csv(args.input, scale).to_records()
    cfg = ExperimentConfig(
        splits=(SplitSpec(args.held_out_students, args.term, args.seed),),
        algorithms=tuple(args.algorithms),
        k_values=tuple(args.k),
        weighting=_weighting_from_args(args),
        scale=scale,
    )
    report = run_experiment(records, cfg)
    written = emit_report(report, args.out)
    if args.output == "json":
        rows = [
            {
                "algorithm": r.algorithm,
                "k": r.k,
                "x": r.x,
                "seed": r.seed,
                "mae": r.mae,
                "mae_genuine": r.mae_genuine,
                "coverage": r.coverage,
                "fallback_histogram": dict(r.fallback_histogram),
                "clamp_count": r.clamp_count,
                "n_pairs": r.n_pairs,
            }
            for r in report.rows
        ]
        print(json.dumps(rows, indent=2))
    elif args.output == "csv":
        for line in report_to_csv_lines(report):
            print(line)
    else:
        first = report.rows[0]
        test_rows = int(round(first.x * len(records)))
        print(f"x = {first.x:.6f} ({test_rows} test / {len(records)} total rows), seed {args.seed}")
        print(f"{'algorithm':<12} {'k':>4} {'mae':>8} {'coverage':>8} {'n_pairs':>8}")
        for r in report.rows:
            print(
                f"{r.algorithm:<12} {str(r.k):>4} {r.mae:>8.4f} "
                f"{r.coverage:>8.3f} {r.n_pairs:>8}"
            )
        print("report files: " + ", ".join(str(p) for p in written))
    return 0


def _cmd_predict(args) -> int:
    store = Store(args.data_dir)
    matrix = store.load_dataset(args.dataset)
    model = _resolve_model(store, args, matrix)
    cfg = NeighborhoodConfig(k=args.k)
    courses = [c for chunk in args.course for c in chunk.split(",") if c]
    preds = [predict_cell(matrix, model, args.student, cid, cfg) for cid in courses]
    _emit_predictions(preds, args.output)
    return 0


def _cmd_recommend(args) -> int:
    store = Store(args.data_dir)
    matrix = store.load_dataset(args.dataset)
    model = _resolve_model(store, args, matrix)
    cfg = NeighborhoodConfig(k=args.k)
    rated = set(matrix.ratings_of(args.student))
    candidates = [c for c in sorted(matrix.courses) if c not in rated]
    ranked = [(cid, predict_cell(matrix, model, args.student, cid, cfg)) for cid in candidates]
    ranked.sort(key=lambda pair: (-pair[1].value, pair[0]))
    top = [p for _, p in ranked[: args.n]]
    if args.output:
        _emit_predictions(top, args.output)
    else:
        for rank, p in enumerate(top, start=1):
            note = f"fallback={p.fallback_level}, neighbors={p.neighborhood_size_used}"
            print(f"{rank:>2}. {p.course_id}  {p.value:.4f}  ({note})")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = Store(args.data_dir)
    app = create_app(store, dataset_id=args.dataset)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# -- parser wiring ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradelens",
        description="Neighborhood collaborative filtering over student grades.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and store a ratings CSV")
    p.add_argument("input", help="CSV with header student_id,course_id,term,grade")
    p.add_argument("--dataset", default=None, help="dataset id (default: derived from content)")
    _add_scale(p)
    _add_data_dir(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic grade dataset")
    p.add_argument("--students", type=int, required=True)
    p.add_argument(
        "--terms",
        type=_int_list,
        required=True,
        metavar="N,N,...",
        help="courses per term, e.g. 9,9,7",
    )
    p.add_argument("--noise-sd", type=float, default=0.3)
    p.add_argument("--latent-dim", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--continuous",
        action="store_true",
        help="skip snapping grades to the scale (oracle tests)",
    )
    p.add_argument("--out", default="synthetic.csv", help="output CSV path")
    p.add_argument("--dataset", default=None, help="store under this dataset id instead")
    _add_scale(p)
    _add_data_dir(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="build and store a similarity model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--algorithm", type=_algorithm, required=True, help="user or item")
    p.add_argument("--model-id", default=None)
    _add_weighting(p)
    _add_data_dir(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="run the held-out MAE grid and emit report files")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", help="stored dataset id")
    src.add_argument("--input", help="ratings CSV path")
    p.add_argument("--algorithms", type=_algorithm_list, default=["user_based", "item_based"])
    p.add_argument("--k", type=_k_list, default=[5, 10, 15, 20, "all"])
    p.add_argument("--held-out-students", type=int, default=25)
    p.add_argument("--term", type=int, default=3, help="term to withhold")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="results", help="directory for report files")
    _add_weighting(p)
    _add_scale(p)
    _add_output(p)
    _add_data_dir(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", help="predict one student's grade in given courses")
    p.add_argument("--dataset", required=True)
    p.add_argument("--student", required=True)
    p.add_argument(
        "--course",
        action="append",
        required=True,
        help="course id (repeatable, or comma-separated)",
    )
    p.add_argument("--model", default=None, help="stored model id")
    p.add_argument("--algorithm", type=_algorithm, default="user_based")
    p.add_argument("--k", type=_k_value, default=10)
    _add_weighting(p)
    _add_output(p)
    _add_data_dir(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("recommend", help="rank a student's untaken courses")
    p.add_argument("--dataset", required=True)
    p.add_argument("--student", required=True)
    p.add_argument("-n", type=int, default=5, help="how many courses to list")
    p.add_argument("--model", default=None, help="stored model id")
    p.add_argument("--algorithm", type=_algorithm, default="user_based")
    p.add_argument("--k", type=_k_value, default=10)
    _add_weighting(p)
    _add_output(p)
    _add_data_dir(p)
    p.set_defaults(func=_cmd_recommend)

    p = sub.add_parser("serve", help="start the HTTP prediction service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--dataset", default=None, help="preload this stored dataset")
    _add_data_dir(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except GradeLensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
