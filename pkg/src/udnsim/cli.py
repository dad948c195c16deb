"""Command-line front end: dataset generation, training, simulation, campaigns.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
Every data output is byte-reproducible from its inputs and seeds; the
manifest written next to each output records the resolved configuration
(manifests carry timestamps and are the one non-reproducible sidecar).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

import udnsim
from udnsim.campaign import (PREDICTOR_KINDS, aggregate_rows, read_results_csv,
                             run_campaign, run_simulation, summary_table,
                             write_aggregate_csv, write_results_csv)
from udnsim.config import load_config
from udnsim.errors import ConfigurationError
from udnsim.mobility import generate_dataset, TrajectoryDataset
from udnsim.ml import (MODEL_KINDS, evaluate, load_model, make_classifier,
                       save_model, split_dataset)
from udnsim.ml.metrics import METRICS_CSV_HEADER
from udnsim.seeding import iteration_seed

log = logging.getLogger("udnsim")


def _write_manifest(out_path: Path, command: str, args_snapshot: dict,
                    config_snapshot: dict | None, seed, outputs: list[str]) -> None:
    manifest = {
        "tool": "udnsim",
        "version": udnsim.__version__,
        "command": command,
        "arguments": args_snapshot,
        "config": config_snapshot,
        "master_seed": seed,
        "outputs": outputs,
        "created_unix": time.time(),
    }
    path = out_path.with_suffix(out_path.suffix + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def _config_snapshot(config) -> dict:
    snap = asdict(config)
    snap["demands"] = [{"period_label": d.period_label, "counts": d.counts}
                       for d in config.demands]
    return snap


def cmd_generate_data(args) -> int:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.master_seed
    dataset = generate_dataset(
        config.network(), list(config.demands), config.velocity_kmh,
        config.sample_every_tics, seed, jitter_sigma_m=config.jitter_sigma_m,
        horizon_ms=config.horizon_ms, tic_ms=config.tic_ms,
        period_duration_ms=config.period_duration_ms)
    out = Path(args.out)
    dataset.save_csv(out)
    _write_manifest(out, "generate-data", {"config": args.config, "out": args.out},
                    _config_snapshot(config), seed, [str(out)])
    print(f"wrote {dataset.n_rows} rows to {out}")
    return 0


def cmd_train(args) -> int:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.master_seed
    dataset = TrajectoryDataset.load_csv(args.data)
    train, test = split_dataset(dataset, config.ml.train_fraction, seed)
    hyper = _hyper_from(config, args)
    model = make_classifier(args.model, seed=seed, **hyper)
    model.fit(train.features(), train.labels())
    out = Path(args.out)
    save_model(model, out)
    metrics = evaluate(model, train, test)
    row = metrics.csv_row(args.model)
    if args.metrics:
        path = Path(args.metrics)
        if not path.exists():
            path.write_text(METRICS_CSV_HEADER + "\n")
        with open(path, "a") as fh:
            fh.write(row + "\n")
    _write_manifest(out, "train",
                    {"data": args.data, "model": args.model, "hyper": hyper},
                    _config_snapshot(config), seed, [str(out)])
    print(METRICS_CSV_HEADER)
    print(row)
    return 0


def _hyper_from(config, args) -> dict:
    ml = config.ml
    if args.model == "svm":
        hyper = {"epochs": ml.svm_epochs, "learning_rate": ml.svm_learning_rate,
                 "regularization": ml.svm_regularization}
        if args.epochs is not None:
            hyper["epochs"] = args.epochs
        if args.learning_rate is not None:
            hyper["learning_rate"] = args.learning_rate
        if args.regularization is not None:
            hyper["regularization"] = args.regularization
        return hyper
    if args.model == "dtc":
        hyper = {"max_depth": ml.dtc_max_depth,
                 "min_samples_leaf": ml.dtc_min_samples_leaf}
        if args.max_depth is not None:
            hyper["max_depth"] = None if args.max_depth < 0 else args.max_depth
        if args.min_samples_leaf is not None:
            hyper["min_samples_leaf"] = args.min_samples_leaf
        return hyper
    if args.model == "rfc":
        hyper = {"n_trees": ml.rfc_n_trees, "max_depth": ml.rfc_max_depth,
                 "min_samples_leaf": ml.rfc_min_samples_leaf,
                 "feature_subsample": ml.rfc_feature_subsample}
        if args.n_trees is not None:
            hyper["n_trees"] = args.n_trees
        if args.max_depth is not None:
            hyper["max_depth"] = None if args.max_depth < 0 else args.max_depth
        if args.min_samples_leaf is not None:
            hyper["min_samples_leaf"] = args.min_samples_leaf
        return hyper
    raise ConfigurationError(f"unknown model kind {args.model!r}")


def _load_predictor(kind: str, model_paths: dict):
    if kind == "none":
        return None
    if kind == "oracle":
        from udnsim.ml.oracle import OracleRoutePredictor
        return OracleRoutePredictor()
    if kind not in model_paths:
        raise ConfigurationError(f"predictor {kind!r} needs a model file "
                                 f"(--model {kind}=path)")
    path = model_paths[kind]
    if not Path(path).exists():
        raise ConfigurationError(f"model file for {kind!r} not found: {path}")
    return load_model(path)


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    kind = args.predictor or config.predictor
    model_paths = _parse_model_paths(args.model or [])
    predictor = _load_predictor(kind, model_paths)
    seed = args.seed if args.seed is not None else iteration_seed(config.master_seed, 0)
    trace_rows = []
    engine = "reference" if (args.trace or args.link_trace) else "fast"
    trace_cb = None
    if args.trace:
        trace_cb = lambda *row: trace_rows.append(row)   # noqa: E731
    res = run_simulation(config, seed, predictor,
                         velocity_kmh=args.velocity, ttt=args.ttt,
                         engine=engine, trace=trace_cb)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("tic,vue_id,serving,target,best_sinr,avg_sinr,event\n")
            for tic, vue, serving, target, best, avg, event in trace_rows:
                fh.write(f"{tic},{vue},{serving},{target},{best!r},{avg!r},{event}\n")
    if args.link_trace:
        _write_link_trace(config, seed, args)
    report = {
        "predictor": kind,
        "seed": seed,
        "velocity_kmh": args.velocity or config.velocity_kmh,
        "ttt_tics": args.ttt or config.ttt_tics,
        "ho_times": res.ho_times,
        "rlf_count": res.rlf_count,
        "ho_avg_sinr_db": res.ho_avg_sinr_db,
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        _write_manifest(Path(args.out), "simulate", {"predictor": kind},
                        _config_snapshot(config), seed, [args.out])
    print(text)
    return 0


def _write_link_trace(config, seed, args) -> None:
    """Per-tic link budgets for every in-range VUE-SCN pair (debug sizes only)."""
    from udnsim.campaign import sample_iteration_plans, _TAG_DEPLOY
    from udnsim.deployment import sample_ppp_deployment
    from udnsim.engine import build_tables
    from udnsim.radio import linear_to_db
    from udnsim.seeding import derive_seed

    velocity = args.velocity or config.velocity_kmh
    sites = sample_ppp_deployment(
        config.density_per_km2, config.area, derive_seed(seed, _TAG_DEPLOY),
        height=config.scn_height_m, tx_power=config.radio.tx_power_dbm,
        antenna_gain=config.radio.scn_antenna_gain_dbi)
    tables = build_tables(sites, config.network(), velocity, config.horizon_ms,
                          config.tic_ms, config.radio)
    plans = sample_iteration_plans(config, seed, velocity)
    noise_mw = config.engine_params(velocity_kmh=velocity).noise_mw
    with open(args.link_trace, "w") as fh:
        fh.write("tic,vue_id,scn_id,ground_distance_m,rx_dbm,sinr_db\n")
        for t in range(1, tables.n_tics + 1):
            for plan in plans:
                r = plan.route_id
                for s in range(len(sites)):
                    if not tables.in_range[r, t, s]:
                        continue
                    p = tables.rx_lin[r, t, s]
                    sinr = 10.0 * np.log10(
                        p / (noise_mw + tables.total_in_range[r, t] - p))
                    fh.write(f"{t},{plan.vue_id},{s},"
                             f"{tables.ground_dist[r, t, s]!r},"
                             f"{linear_to_db(p)!r},{sinr!r}\n")


def _parse_model_paths(entries) -> dict:
    paths = {}
    for entry in entries:
        if "=" not in entry:
            raise ConfigurationError(f"--model expects kind=path, got {entry!r}")
        kind, path = entry.split("=", 1)
        if kind not in MODEL_KINDS:
            raise ConfigurationError(f"unknown model kind {kind!r} in --model")
        paths[kind] = path
    return paths


def _csv_list(text: str, caster):
    return [caster(t.strip()) for t in text.split(",") if t.strip()]


def cmd_campaign(args) -> int:
    config = load_config(args.config)
    velocities = _csv_list(args.velocities, float) if args.velocities \
        else [config.velocity_kmh]
    ttts = _csv_list(args.ttt, int) if args.ttt else [config.ttt_tics]
    predictors = _csv_list(args.predictors, str) if args.predictors \
        else [config.predictor]
    for kind in predictors:
        if kind not in PREDICTOR_KINDS:
            raise ConfigurationError(f"unknown predictor {kind!r}")
    model_paths = _parse_model_paths(args.model or [])
    models = {k: _load_predictor(k, model_paths)
              for k in predictors if k not in ("none", "oracle")}
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = run_campaign(config, ttt_values=ttts, velocities=velocities,
                        predictors=predictors, models=models,
                        iterations=args.iterations)
    results_path = out_dir / "results.csv"
    aggregate_path = out_dir / "aggregate.csv"
    write_results_csv(rows, results_path)
    aggregates = aggregate_rows(rows)
    write_aggregate_csv(aggregates, aggregate_path)
    _write_manifest(results_path, "campaign",
                    {"velocities": velocities, "ttt": ttts,
                     "predictors": predictors, "iterations": args.iterations,
                     "models": model_paths},
                    _config_snapshot(config), config.master_seed,
                    [str(results_path), str(aggregate_path)])
    print(summary_table(aggregates))
    return 0


def cmd_report(args) -> int:
    rows = read_results_csv(args.results)
    aggregates = aggregate_rows(rows)
    if args.out:
        write_aggregate_csv(aggregates, args.out)
    print(summary_table(aggregates))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udnsim",
        description="Ultra-dense network handover simulator with ML route prediction")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", help="simulate VUEs and write the dataset CSV")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_data)

    p = sub.add_parser("train", help="train a route classifier on a dataset CSV")
    p.add_argument("--config", default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, choices=MODEL_KINDS)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--metrics", default=None, help="append a metrics CSV row here")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--regularization", type=float, default=None)
    p.add_argument("--max-depth", type=int, default=None,
                   help="negative means unlimited")
    p.add_argument("--min-samples-leaf", type=int, default=None)
    p.add_argument("--n-trees", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="run one seeded simulation iteration")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--velocity", type=float, default=None)
    p.add_argument("--ttt", type=int, default=None)
    p.add_argument("--predictor", choices=PREDICTOR_KINDS, default=None)
    p.add_argument("--model", action="append", default=None, metavar="KIND=PATH")
    p.add_argument("--out", default=None)
    p.add_argument("--trace", default=None,
                   help="write a per-tic handover event trace (slow engine)")
    p.add_argument("--link-trace", default=None,
                   help="write per-tic link budgets (large; debug scales only)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("campaign", help="run the full grid and write result tables")
    p.add_argument("--config", default=None)
    p.add_argument("--velocities", default=None, help="comma list, km/h")
    p.add_argument("--ttt", default=None, help="comma list, tics")
    p.add_argument("--predictors", default=None, help="comma list of kinds")
    p.add_argument("--model", action="append", default=None, metavar="KIND=PATH")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("report", help="aggregate an existing results.csv")
    p.add_argument("--results", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:   # runtime failures
        log.debug("unhandled failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
