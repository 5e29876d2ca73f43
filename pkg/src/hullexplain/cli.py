"""Command-line surface: explain, compare, examples, gen-data."""
from __future__ import annotations

import argparse
import csv
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import example_based, nam
from .blackbox import analytic, external_predictor, knn_fit, trees_fit
from .datasets import (
    EXPERIMENT_IDS,
    Dataset,
    SyntheticSpec,
    gen_edge_testset,
    generate,
    lambda_function,
    load_csv,
    save_csv,
)
from .errors import ConfigError, TrainingError
from .explainer import DualConfig, explain_global, explain_local, feature_importance
from .report import PointResult, new_report, write_report
from .surrogate import LimeConfig, fit_linear, lime_explain
from .svgplot import line_plot, scatter_plot

ANALYTIC_BY_EXPERIMENT = {
    "feat-ex1": "linear7",
    "feat-ex2a": "quad2",
    "feat-ex2b": "quad2",
    "feat-ex3": "ring",
    "ex-based-1": "lambda-sine6",
    "ex-based-2": "lambda-poly4",
    "ex-based-3": "sign2",
}

LAMBDA_EXPERIMENTS = ("ex-based-1", "ex-based-2", "ex-based-3")
# net-init seeds and regularization strengths that reproduce the published
# importance tables; --seed moves the data draw only
EXPERIMENT_NET_SEEDS = {"ex-based-1": 8, "ex-based-2": 9, "ex-based-3": 11}
EXPERIMENT_ALPHAS = {"ex-based-1": 1e-4, "ex-based-2": 1e-6, "ex-based-3": 0.0}


def _add_data_flags(p):
    p.add_argument("--synthetic", choices=EXPERIMENT_IDS, help="built-in experiment id")
    p.add_argument("--data", help="CSV dataset path")
    p.add_argument("--target-col", help="target column name or index (default: last)")
    p.add_argument("--zscore", action="store_true", help="Z-score the features")


def _add_blackbox_flags(p):
    p.add_argument("--blackbox", choices=("knn", "trees", "analytic", "external"),
                   default="knn")
    p.add_argument("--bb-k", type=int, default=10, help="neighbor count for knn")
    p.add_argument("--bb-trees", type=int, default=100, help="tree count for trees")
    p.add_argument("--external-cmd", help="command line of an external predictor")


def _add_common_flags(p):
    p.add_argument("--K", type=int, default=10, help="hull neighborhood size")
    p.add_argument("--n-lambda", type=int, default=30, help="simplex samples per fit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker threads (default: available parallelism)")
    p.add_argument("--out-dir", default=".", help="directory for report and plots")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit timestamp and timing from the report")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hullexplain",
        description="Explain black-box regressors through convex-hull dual coordinates.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("explain", help="fit dual surrogates and report importances")
    _add_data_flags(p)
    _add_blackbox_flags(p)
    _add_common_flags(p)
    p.add_argument("--points", type=int, default=None,
                   help="how many training points to explain (default: all)")
    p.add_argument("--global", action="store_true", dest="global_fit",
                   help="one surrogate over the whole dataset hull")

    p = sub.add_parser("compare", help="dual surrogate vs perturbation baseline MSE")
    _add_data_flags(p)
    _add_blackbox_flags(p)
    _add_common_flags(p)
    p.add_argument("--points", type=int, default=100, help="edge test point count")
    p.add_argument("--lime-cov", default="0.05",
                   help="perturbation variance: scalar or comma list")
    p.add_argument("--lime-v", type=float, default=0.01,
                   help="variance of the random sample weights")
    p.add_argument("--lime-n", type=int, default=30, help="perturbation sample count")

    p = sub.add_parser("examples",
                       help="importance table (effects/linear/additive-net) for a "
                            "weight-space experiment")
    p.add_argument("--synthetic", choices=LAMBDA_EXPERIMENTS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--no-timestamp", action="store_true")

    p = sub.add_parser("gen-data", help="write a synthetic dataset CSV")
    p.add_argument("--id", choices=EXPERIMENT_IDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    return parser


def _load_dataset(args) -> Dataset:
    if args.synthetic and args.data:
        raise ConfigError("--synthetic and --data are mutually exclusive")
    if args.synthetic:
        return generate(SyntheticSpec(args.synthetic, seed=args.seed))
    if not args.data:
        raise ConfigError("need --synthetic or --data")
    target = args.target_col
    if target is None and args.blackbox in ("knn", "trees"):
        target = -1  # fitted black boxes need a label column
    elif target is not None:
        try:
            target = int(target)
        except ValueError:
            pass
    return load_csv(args.data, target_column=target, zscore=args.zscore)


def _build_predictor(args, ds: Dataset):
    kind = args.blackbox
    if kind in ("knn", "trees"):
        if ds.y is None:
            raise ConfigError(f"black box {kind!r} needs a target column")
        if kind == "knn":
            return knn_fit(ds.x, ds.y, k=args.bb_k)
        return trees_fit(ds.x, ds.y, n_trees=args.bb_trees, seed=args.seed)
    if kind == "analytic":
        if not args.synthetic:
            raise ConfigError("--blackbox analytic requires --synthetic")
        return analytic(ANALYTIC_BY_EXPERIMENT[args.synthetic])
    if not args.external_cmd:
        raise ConfigError("--blackbox external requires --external-cmd")
    return external_predictor(args.external_cmd, input_dim=ds.m)


def _pool(args):
    jobs = args.jobs if args.jobs and args.jobs > 0 else (os.cpu_count() or 1)
    return ThreadPoolExecutor(max_workers=jobs)


def _config_echo(args, skip=("cmd", "out_dir", "no_timestamp", "jobs")):
    echo = {}
    for key in sorted(vars(args)):
        if key in skip:
            continue
        value = getattr(args, key)
        if value is None:
            continue
        echo[key.replace("_", "-")] = value
    return echo


def _drain_warnings(rec, rep):
    rep.warnings.extend(sorted(f"{w.category.__name__}: {w.message}" for w in rec))


def _finish(rep, args, out: Path, t0: float):
    if not args.no_timestamp:
        rep.elapsed = round(time.time() - t0, 3)
    path = out / "report.txt"
    write_report(rep, path)
    print(f"wrote {path}")


def cmd_explain(args) -> int:
    t0 = time.time()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load_dataset(args)
    predictor = _build_predictor(args, ds)
    rep = new_report("explain", args.seed, _config_echo(args),
                     stamped=not args.no_timestamp)
    base = dict(K=args.K, n_lambda=args.n_lambda, seed=args.seed)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        if args.global_fit:
            expl = explain_global(ds.x, predictor, DualConfig(**base))
            rep.aggregates["a"] = expl.a
            rep.aggregates["intercept"] = expl.intercept
            rep.aggregates["d"] = expl.poly.d
            rep.aggregates["importance-normalized"] = feature_importance(expl, "normalized")
            rep.aggregates["fit-residual-rms"] = expl.diagnostics["fit_residual_rms"]
        else:
            total = ds.n if args.points is None else min(args.points, ds.n)

            def one(i: int):
                x0 = ds.x[i]
                expl = explain_local(x0, ds.x, predictor, DualConfig(**base, stream=i))
                err = float(predictor.predict(x0[None, :])[0] - expl.model.predict_one(x0))
                return expl, err * err

            with _pool(args) as pool:
                results = list(pool.map(one, range(total)))
            for i, (expl, mse) in enumerate(results):
                rep.points.append(PointResult(index=i, values={
                    "a": expl.a,
                    "intercept": expl.intercept,
                    "b": expl.b,
                    "d": expl.poly.d,
                    "mse": mse,
                }))
            amat = np.array([expl.a for expl, _ in results])
            mses = np.array([m for _, m in results])
            rep.aggregates["mean-a"] = amat.mean(axis=0)
            rep.aggregates["std-a"] = amat.std(axis=0, ddof=1) if total > 1 else np.zeros(ds.m)
            rep.aggregates["mean-mse"] = float(mses.mean())
            rep.aggregates["median-mse"] = float(np.median(mses))
            with open(out / "points.csv", "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["index"] + [f"a_{name}" for name in ds.feature_names])
                for i, (expl, _) in enumerate(results):
                    writer.writerow([i] + [repr(float(v)) for v in expl.a])
    _drain_warnings(rec, rep)
    _finish(rep, args, out, t0)
    return 0


def _parse_cov(text: str):
    parts = [p for p in str(text).split(",") if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"--lime-cov must be numeric, got {text!r}") from None
    if not values:
        raise ConfigError("--lime-cov is empty")
    return values[0] if len(values) == 1 else np.array(values)


def cmd_compare(args) -> int:
    t0 = time.time()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load_dataset(args)
    predictor = _build_predictor(args, ds)
    tests = gen_edge_testset(ds.x, args.points, seed=args.seed)
    lime_cfg = LimeConfig(n_samples=args.lime_n, cov_diag=_parse_cov(args.lime_cov),
                          v=args.lime_v)
    rep = new_report("compare", args.seed, _config_echo(args),
                     stamped=not args.no_timestamp)
    truth = predictor.predict(tests)

    def one(i: int):
        x0 = tests[i]
        dual = explain_local(x0, ds.x, predictor,
                             DualConfig(K=args.K, n_lambda=args.n_lambda,
                                        seed=args.seed, stream=i))
        lime = lime_explain(x0, predictor, lime_cfg, seed=args.seed, stream=i)
        e_dual = float(truth[i] - dual.model.predict_one(x0))
        e_lime = float(truth[i] - lime.predict_one(x0))
        return e_dual * e_dual, e_lime * e_lime

    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        with _pool(args) as pool:
            pairs = list(pool.map(one, range(args.points)))
    _drain_warnings(rec, rep)
    dual_mse = np.array([p[0] for p in pairs])
    lime_mse = np.array([p[1] for p in pairs])
    for i, (dm, lm) in enumerate(pairs):
        rep.points.append(PointResult(index=i, values={"mse-dual": dm, "mse-lime": lm}))
    rep.aggregates["mean-mse-dual"] = float(dual_mse.mean())
    rep.aggregates["mean-mse-lime"] = float(lime_mse.mean())
    rep.aggregates["median-mse-dual"] = float(np.median(dual_mse))
    rep.aggregates["median-mse-lime"] = float(np.median(lime_mse))
    with open(out / "mse.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "mse_dual", "mse_lime"])
        for i, (dm, lm) in enumerate(pairs):
            writer.writerow([i, repr(dm), repr(lm)])
    svg = scatter_plot(dual_mse, lime_mse, title="Per-point surrogate error",
                       xlabel="dual surrogate MSE", ylabel="perturbation baseline MSE",
                       diagonal=True)
    (out / "mse-scatter.svg").write_text(svg, encoding="utf-8")
    _finish(rep, args, out, t0)
    return 0


def cmd_examples(args) -> int:
    t0 = time.time()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    exp = args.synthetic
    ds = generate(SyntheticSpec(exp, seed=args.seed))
    fn = lambda_function(exp)
    d = ds.m
    rep = new_report("examples", args.seed,
                     {"synthetic": exp, "seed": args.seed,
                      "alpha": EXPERIMENT_ALPHAS[exp],
                      "net-seed": EXPERIMENT_NET_SEEDS[exp]},
                     stamped=not args.no_timestamp)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        rows = {}
        curves = {}
        for k in range(d):
            curves[k] = example_based.ale_curve(ds.x, k, fn)
        rows["ale"] = example_based.importances(ds.x, ds.y, "ale", fn=fn)
        rows["lr"] = example_based.importances(ds.x, ds.y, "lr")
        net = nam.AdditiveNet(d, seed=EXPERIMENT_NET_SEEDS[exp])
        cfg = nam.TrainConfig(alpha=EXPERIMENT_ALPHAS[exp], seed=0)
        try:
            net, history = nam.train(net, ds.x, ds.y, cfg)
        except TrainingError as exc:
            raise TrainingError(
                f"{exc} (net seed {EXPERIMENT_NET_SEEDS[exp]}, train seed {cfg.seed})"
            ) from exc
        rows["nam"] = example_based.importances(ds.x, ds.y, "nam", nam_model=net)
    _drain_warnings(rec, rep)
    for method, imp in rows.items():
        rep.aggregates[f"{method}-raw"] = imp.raw
        rep.aggregates[f"{method}-normalized"] = imp.normalized
    rep.aggregates["nam-initial-loss"] = history[0]
    rep.aggregates["nam-final-loss"] = history[-1]
    with open(out / "importance-table.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method"] + [f"lambda_{k + 1}" for k in range(d)])
        for method, imp in rows.items():
            writer.writerow([method] + [repr(float(v)) for v in imp.normalized])
    grid = np.linspace(0.0, 1.0, 101)
    shapes = nam.extract_shapes(net, grid).values
    b = fit_linear(ds.x, ds.y, with_intercept=False).coefficients
    for k in range(d):
        ale_vals = curves[k].values_at(grid)
        ale_vals = ale_vals - ale_vals.mean()
        lr_vals = b[k] * grid
        lr_vals = lr_vals - lr_vals.mean()
        series = [("effects", ale_vals), ("linear", lr_vals), ("net", shapes[:, k])]
        with open(out / f"shape-coord{k + 1}.csv", "w", encoding="utf-8",
                  newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "effects", "linear", "net"])
            for i, g in enumerate(grid):
                writer.writerow([repr(float(g))] +
                                [repr(float(vals[i])) for _, vals in series])
        svg = line_plot(grid, series, title=f"Shape functions, coordinate {k + 1}",
                        xlabel=f"lambda_{k + 1}", ylabel="centered effect")
        (out / f"shape-coord{k + 1}.svg").write_text(svg, encoding="utf-8")
    _finish(rep, args, out, t0)
    return 0


def cmd_gen_data(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = generate(SyntheticSpec(args.id, seed=args.seed))
    path = out / f"{args.id}-seed{args.seed}.csv"
    save_csv(ds, path)
    print(f"wrote {path}")
    return 0


DISPATCH = {
    "explain": cmd_explain,
    "compare": cmd_compare,
    "examples": cmd_examples,
    "gen-data": cmd_gen_data,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return DISPATCH[args.cmd](args)
    except ValueError as exc:  # config, input, and data-format problems
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:  # training, degenerate geometry, predictor I/O
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
