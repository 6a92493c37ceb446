"""Command-line entry point exposing the full pipeline.

Subcommands: synth, dist, ph0, dim, box-dim, compare-dims, train, grid,
corr, bound, robustness. Exit codes: 0 success, 2 validation/usage
error, 3 numeric failure. Every file artifact gets a sidecar
<output>.manifest.json recording the resolved configuration, so a run
can be reproduced bit-exactly.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bounds import bound_table
from .dimest import (
    DEFAULT_TRIALS,
    compare_dims,
    estimate_box_dim,
    estimate_ph_dim,
    rho_subsample_robustness,
)
from .errors import NumericFailure, ValidationError
from .matrix_io import (
    DenseMatrix,
    LossMatrix,
    load_distance_matrix,
    load_matrix,
    save_distance_matrix,
    save_matrix,
)
from .metric import (
    KIND_EUCLIDEAN,
    KIND_LOSS,
    KIND_LOSS_SUB,
    MetricSpec,
    build_distance_matrix,
)
from .ph0 import persistence0, save_diagram
from .stats import GridRecord, correlation_report
from .synth import FractalSpec, generate
from .trainer import (
    EstimatorOptions,
    StopRule,
    TrainConfig,
    grid_from_csv,
    grid_to_csv,
    run_grid,
    synthetic_classification,
    synthetic_regression,
    train,
)

_METRIC_FLAG = {"euclid": KIND_EUCLIDEAN, "rho-s": KIND_LOSS, "rho-t": KIND_LOSS_SUB}


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _write_manifest(args: argparse.Namespace, outputs: list[str]) -> None:
    if not outputs:
        return
    resolved = {
        k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None
    }
    manifest = {
        "subcommand": args.subcommand,
        "version": __version__,
        "arguments": resolved,
        "outputs": outputs,
    }
    for out in outputs:
        with open(out + ".manifest.json", "w", encoding="ascii") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _emit_json(payload: dict, args: argparse.Namespace) -> list[str]:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="ascii") as fh:
            fh.write(text)
        return [args.output]
    sys.stdout.write(text)
    return []


def _emit_csv(header: str, rows, args: argparse.Namespace) -> list[str]:
    lines = [header] + [",".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="ascii") as fh:
            fh.write(text)
        return [args.output]
    sys.stdout.write(text)
    return []


def _metric_spec_from_args(args) -> MetricSpec:
    kind = _METRIC_FLAG[args.metric]
    if kind == KIND_LOSS_SUB:
        if args.fraction is None:
            raise ValidationError("--metric rho-t needs --fraction")
        seed = args.metric_seed
        if seed is None:
            seed = getattr(args, "seed", None)
        if seed is None:
            raise ValidationError("--metric rho-t needs --metric-seed or --seed")
        return MetricSpec(kind=kind, fraction=args.fraction, seed=seed)
    return MetricSpec(kind=kind)


def _load_input_for_metric(args):
    m = load_matrix(args.input, args.input_format)
    if _METRIC_FLAG[args.metric] == KIND_EUCLIDEAN:
        return m
    return LossMatrix(m)


# --------------------------------------------------------------- handlers


def _cmd_synth(args) -> list[str]:
    spec = FractalSpec(
        kind=args.kind, depth_or_dim=args.depth, n_points=args.n, seed=args.seed
    )
    save_matrix(generate(spec), args.output, args.format)
    return [args.output]


def _cmd_dist(args) -> list[str]:
    data = _load_input_for_metric(args)
    d = build_distance_matrix(data, _metric_spec_from_args(args))
    save_distance_matrix(d, args.output, args.format)
    return [args.output]


def _cmd_ph0(args) -> list[str]:
    d = load_distance_matrix(args.input, args.input_format)
    pd = persistence0(d)
    if args.output:
        save_diagram(pd, args.output)
        return [args.output]
    for v in pd.deaths.tolist():
        sys.stdout.write(repr(v) + "\n")
    return []


def _cmd_dim(args) -> list[str]:
    data = _load_input_for_metric(args)
    d = build_distance_matrix(data, _metric_spec_from_args(args))
    est = estimate_ph_dim(
        d, alpha=args.alpha, sizes=args.sizes, trials=args.trials, seed=args.seed
    )
    outputs = _emit_json(est.to_dict(), args)
    if args.records_csv:
        kept = [s for s in est.sizes if s not in est.dropped_sizes]
        with open(args.records_csv, "w", encoding="ascii") as fh:
            fh.write("n,mean_log_e\n")
            for n_i, (_, le) in zip(kept, est.log_e_records):
                fh.write(f"{n_i},{le!r}\n")
        outputs.append(args.records_csv)
    return outputs


def _cmd_box_dim(args) -> list[str]:
    data = _load_input_for_metric(args)
    d = build_distance_matrix(data, _metric_spec_from_args(args))
    est = estimate_box_dim(d, deltas=args.deltas)
    return _emit_json(est.to_dict(), args)


def _cmd_compare_dims(args) -> list[str]:
    data = _load_input_for_metric(args)
    d = build_distance_matrix(data, _metric_spec_from_args(args))
    cmp = compare_dims(
        d,
        alpha=args.alpha,
        sizes=args.sizes,
        trials=args.trials,
        deltas=args.deltas,
        seed=args.seed,
    )
    return _emit_json(cmp.to_dict(), args)


def _dataset_from_args(args):
    if args.synthetic:
        if args.synthetic == "regression":
            return synthetic_regression(
                args.n_samples, args.in_dim, args.data_seed, noise=args.noise
            )
        return synthetic_classification(
            args.n_samples, args.in_dim, args.n_classes, args.data_seed
        )
    if not args.features or not args.targets:
        raise ValidationError("either --synthetic or both --features and --targets")
    return (
        load_matrix(args.features, args.data_format),
        load_matrix(args.targets, args.data_format),
    )


def _train_config_from_args(args) -> TrainConfig:
    if args.stop == "fixed":
        rule = StopRule(kind="fixed_iterations")
    else:
        rule = StopRule(
            kind="relative_loss_change",
            threshold=args.stop_threshold,
            check_period=args.stop_period,
        )
    return TrainConfig(
        layer_widths=tuple(args.layers),
        task=(
            "regression_mse" if args.task == "regression" else "classification_crossentropy"
        ),
        learning_rate=args.lr,
        batch_size=args.batch_size,
        max_iterations=args.max_iterations,
        tail_length=args.tail,
        stop_rule=rule,
        seed=args.seed,
    )


def _cmd_train(args) -> list[str]:
    cfg = _train_config_from_args(args)
    traj = train(
        cfg, _dataset_from_args(args), args.holdout, track_params=bool(args.params_out)
    )
    outputs = []
    if args.losses_out:
        save_matrix(traj.losses.inner, args.losses_out, args.format)
        outputs.append(args.losses_out)
    if args.params_out:
        save_matrix(traj.params, args.params_out, args.format)
        outputs.append(args.params_out)
    summary = {
        "train_risk": traj.train_risk,
        "test_risk": traj.test_risk,
        "gen_gap": traj.gen_gap,
        "gen_gap_sup": traj.gen_gap_sup,
        "iterations_before_tail": traj.iterations_before_tail,
        "tail_length": cfg.tail_length,
    }
    outputs.extend(_emit_json(summary, args))
    return outputs


def _cmd_grid(args) -> list[str]:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    ds_spec = cfg["dataset"]
    if "synthetic_regression" in ds_spec:
        s = ds_spec["synthetic_regression"]
        dataset = synthetic_regression(
            s["n"], s["in_dim"], s["seed"], noise=s.get("noise", 0.1)
        )
    elif "synthetic_classification" in ds_spec:
        s = ds_spec["synthetic_classification"]
        dataset = synthetic_classification(
            s["n"], s["in_dim"], s.get("n_classes", 2), s["seed"]
        )
    else:
        fmt = ds_spec.get("format", "csv")
        dataset = (
            load_matrix(ds_spec["features"], fmt),
            load_matrix(ds_spec["targets"], fmt),
        )
    stop = cfg.get("stop_rule", {})
    base = TrainConfig(
        layer_widths=tuple(cfg["layer_widths"]),
        task=cfg.get("task", "regression_mse"),
        learning_rate=cfg["lrs"][0],
        batch_size=cfg["batch_sizes"][0],
        max_iterations=cfg.get("max_iterations", 50_000),
        tail_length=cfg.get("tail_length", 2000),
        stop_rule=StopRule(
            kind=stop.get("kind", "relative_loss_change"),
            threshold=stop.get("threshold", 0.005),
            check_period=stop.get("check_period", 2000),
        ),
        seed=cfg["seeds"][0],
    )
    est = cfg.get("estimator", {})
    records = run_grid(
        base,
        dataset,
        cfg["lrs"],
        cfg["batch_sizes"],
        cfg["seeds"],
        holdout_fraction=cfg.get("holdout_fraction", 0.2),
        estimator=EstimatorOptions(
            alpha=est.get("alpha", 1.0),
            trials=est.get("trials", DEFAULT_TRIALS),
            seed=est.get("seed", 0),
        ),
        threads=args.threads,
    )
    grid_to_csv(records, args.output)
    return [args.output]


def _stats_records(args) -> list[GridRecord]:
    runs = grid_from_csv(args.input)
    col = "dim_rho_s" if args.dim_column == "rho_s" else "dim_euclid"
    return [
        GridRecord(
            lr=r.lr,
            batch_size=r.batch_size,
            seed=r.seed,
            gen_gap=r.gen_gap,
            dim=getattr(r, col),
            status=r.status,
        )
        for r in runs
    ]


def _cmd_corr(args) -> list[str]:
    return _emit_json(correlation_report(_stats_records(args)), args)


def _cmd_bound(args) -> list[str]:
    records = _stats_records(args)
    if args.b_from_data:
        if not args.losses:
            raise ValidationError("--b-from-data needs at least one --losses file")
        b = max(
            float(load_matrix(p, args.input_format).data.max()) for p in args.losses
        )
    elif args.B is not None:
        b = args.B
    else:
        raise ValidationError("either --B or --b-from-data is required")
    rows = bound_table(records, B=b, delta=args.delta, eta=args.eta, n=args.n)
    return _emit_csv("gen_gap,bound", rows, args)


def _cmd_robustness(args) -> list[str]:
    losses = LossMatrix(load_matrix(args.input, args.input_format))
    rows = rho_subsample_robustness(
        losses,
        args.fractions,
        metric_seed=args.metric_seed,
        alpha=args.alpha,
        trials=args.trials,
        seed=args.seed,
    )
    return _emit_csv("fraction,dim,relative_error", rows, args)


# ----------------------------------------------------------------- parser


def _add_io_flags(p, needs_input=True, output_required=False):
    if needs_input:
        p.add_argument("--input", required=True, help="input matrix file")
        p.add_argument(
            "--input-format", choices=["binary", "csv"], default="binary"
        )
    if output_required:
        p.add_argument("-o", "--output", required=True)
    else:
        p.add_argument("-o", "--output", default=None, help="output path (default: stdout)")


def _add_metric_flags(p):
    p.add_argument("--metric", choices=["euclid", "rho-s", "rho-t"], required=True)
    p.add_argument("--fraction", type=float, default=None, help="column fraction for rho-t")
    p.add_argument("--metric-seed", type=int, default=None, help="seed for the rho-t column draw")


def _add_estimator_flags(p):
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--sizes", type=_int_list, default=None, help="comma list of subset sizes")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, required=True, help="subset-draw seed")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="fracdim",
        description="Data-dependent fractal dimension of hypothesis-set point clouds.",
    )
    top.add_argument("--version", action="version", version=f"fracdim {__version__}")
    sub = top.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate a known-dimension point cloud")
    p.add_argument("--kind", required=True, choices=["cantor_line", "cantor_dust_2d", "sierpinski_triangle", "uniform_cube"])
    p.add_argument("--depth", type=int, required=True, help="construction depth, or ambient dimension for uniform_cube")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=["binary", "csv"], default="binary")
    _add_io_flags(p, needs_input=False, output_required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("dist", help="build a distance matrix")
    _add_io_flags(p, output_required=True)
    _add_metric_flags(p)
    p.add_argument("--format", choices=["binary", "csv"], default="binary")
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("ph0", help="degree-0 persistence diagram of a distance matrix")
    _add_io_flags(p)
    p.set_defaults(func=_cmd_ph0)

    p = sub.add_parser("dim", help="persistence-based dimension estimate")
    _add_io_flags(p)
    _add_metric_flags(p)
    _add_estimator_flags(p)
    p.add_argument("--records-csv", default=None, help="also write (log n, mean log E) pairs")
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser("box-dim", help="greedy-covering box dimension estimate")
    _add_io_flags(p)
    _add_metric_flags(p)
    p.add_argument("--deltas", type=_float_list, default=None, help="comma list, strictly decreasing")
    p.set_defaults(func=_cmd_box_dim)

    p = sub.add_parser("compare-dims", help="run both dimension estimators")
    _add_io_flags(p)
    _add_metric_flags(p)
    _add_estimator_flags(p)
    p.add_argument("--deltas", type=_float_list, default=None)
    p.set_defaults(func=_cmd_compare_dims)

    p = sub.add_parser("train", help="train the built-in MLP and record a trajectory")
    _add_io_flags(p, needs_input=False)
    p.add_argument("--features", default=None)
    p.add_argument("--targets", default=None)
    p.add_argument("--data-format", choices=["binary", "csv"], default="csv")
    p.add_argument("--synthetic", choices=["regression", "classification"], default=None)
    p.add_argument("--n-samples", type=int, default=512)
    p.add_argument("--in-dim", type=int, default=4)
    p.add_argument("--n-classes", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--layers", type=_int_list, required=True, help="comma list incl. input and output widths")
    p.add_argument("--task", choices=["regression", "classification"], default="regression")
    p.add_argument("--lr", type=float, required=True)
    p.add_argument("--batch-size", type=int, required=True)
    p.add_argument("--max-iterations", type=int, default=50_000)
    p.add_argument("--tail", type=int, default=2000)
    p.add_argument("--stop", choices=["fixed", "relative"], default="relative")
    p.add_argument("--stop-threshold", type=float, default=0.005)
    p.add_argument("--stop-period", type=int, default=2000)
    p.add_argument("--holdout", type=float, default=0.2)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--losses-out", default=None)
    p.add_argument("--params-out", default=None)
    p.add_argument("--format", choices=["binary", "csv"], default="binary")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("grid", help="hyperparameter sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, default=1)
    _add_io_flags(p, needs_input=False, output_required=True)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("corr", help="rank correlations from a grid CSV")
    _add_io_flags(p)
    p.add_argument("--dim-column", choices=["rho_s", "euclid"], default="rho_s")
    p.set_defaults(func=_cmd_corr)

    p = sub.add_parser("bound", help="computable bound values for a grid CSV")
    _add_io_flags(p)
    p.add_argument("--dim-column", choices=["rho_s", "euclid"], default="rho_s")
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--b-from-data", action="store_true")
    p.add_argument("--losses", nargs="+", default=None, help="loss matrices for --b-from-data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("robustness", help="dimension stability under column subsampling")
    _add_io_flags(p)
    p.add_argument("--fractions", type=_float_list, required=True)
    p.add_argument("--metric-seed", type=int, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, required=True, help="subset-draw seed")
    p.set_defaults(func=_cmd_robustness)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        outputs = args.func(args)
        _write_manifest(args, outputs)
    except NumericFailure as exc:
        print(f"fracdim: numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"fracdim: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
