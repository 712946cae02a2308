"""workload-lab command line.

Subcommands run one pipeline stage each and exchange CSV/JSON files:

    synth -> ingest -> series -> train -> predict
                    \\-> cluster -> evaluate -> report
"""

from __future__ import annotations

import argparse
import csv
import gzip
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, evalx, nnet, pipeline, plots, trace
from .birch import ClusterModel, Dendrogram
from .series import (FIVE_MINUTES_US, aggregate_requests, apply, feature_matrix, interarrival_series,
                     read_series_csv, write_series_csv)

SEED_ENV = "WORKLOAD_LAB_SEED"


class CommandError(Exception):
    """Runtime failure reported as a one-line diagnostic with exit status 1."""


# -- file helpers ------------------------------------------------------------------

def _open_in(path, binary=False):
    p = Path(path)
    if not p.exists():
        raise CommandError(f"input file not found: {p}")
    if p.suffix == ".gz":
        return gzip.open(p, "rb") if binary else gzip.open(p, "rt", encoding="utf-8", newline="")
    return open(p, "rb") if binary else open(p, encoding="utf-8", newline="")


def _open_out(path):
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    return open(p, "w", encoding="utf-8", newline="")


def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars/arrays to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _write_json(path, obj) -> None:
    with _open_out(path) as fh:
        json.dump(_clean(obj), fh, sort_keys=True, indent=1)
        fh.write("\n")


def _read_json(path) -> dict:
    with _open_in(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise CommandError(f"{path}: invalid JSON ({exc})") from None


def _read_jobs(path):
    with _open_in(path) as fh:
        jobs = trace.read_jobs_csv(fh)
    if not jobs:
        raise CommandError(f"{path}: no jobs")
    return jobs


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- subcommands ----------------------------------------------------------------------

def cmd_synth(args) -> None:
    cfg = trace.SynthConfig(args.jobs, args.clusters, args.rate, args.seed)
    st = trace.synth_trace(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with _open_out(out / "job_events.csv") as fh:
        trace.write_job_events_csv(st.job_events, fh)
    with _open_out(out / "task_events.csv") as fh:
        trace.write_task_events_csv(st.task_events, fh)
    with _open_out(out / "labels.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["job_id", "label"])
        w.writerows(sorted(st.labels.items()))
    _log(f"synth: {len(st.job_events)} job events, {len(st.task_events)} task events -> {out}")


def _schema(path, default):
    if path is None:
        return default
    if not Path(path).exists():
        raise CommandError(f"schema file not found: {path}")
    return trace.SchemaConfig.from_file(path, default)


def cmd_ingest(args) -> None:
    job_schema = _schema(args.job_schema, trace.SchemaConfig.job_events())
    task_schema = _schema(args.task_schema, trace.SchemaConfig.task_events())
    job_events, task_events, dropped = [], [], [0, 0]
    for path in args.job_events:
        with _open_in(path, binary=True) as fh:
            res = trace.parse_job_events(fh, job_schema)
        job_events.extend(res.events)
        dropped[0] += res.dropped
    for path in args.task_events:
        with _open_in(path, binary=True) as fh:
            res = trace.parse_task_events(fh, task_schema)
        task_events.extend(res.events)
        dropped[1] += res.dropped
    asm = trace.assemble_jobs(job_events, task_events, args.aggregate)
    jobs = trace.sample_jobs(asm.jobs, args.fraction, args.seed) if asm.jobs else []
    with _open_out(args.out) as fh:
        trace.write_jobs_csv(jobs, fh)
    _log(f"ingest: {len(job_events)} job events ({dropped[0]} dropped), "
         f"{len(task_events)} task events ({dropped[1]} dropped), "
         f"{len(asm.jobs)} jobs ({asm.excluded} excluded), {len(jobs)} written")


def cmd_series(args) -> None:
    jobs = _read_jobs(args.jobs)
    if args.kind == "interarrival":
        s = interarrival_series(jobs)
    else:
        s = aggregate_requests(jobs, args.slot_us)
    with _open_out(args.out) as fh:
        write_series_csv(s, fh)
    _log(f"series: {args.kind}, {len(s)} rows -> {args.out}")


def _load_series(path):
    with _open_in(path) as fh:
        try:
            return read_series_csv(fh)
        except ValueError as exc:
            raise CommandError(f"{path}: {exc}") from None


def cmd_train(args) -> None:
    s = _load_series(args.series)
    variant = args.variant or (nnet.UNIVARIATE if s.dims == 1 else nnet.MULTIVARIATE)
    multi = variant == nnet.MULTIVARIATE
    spec = nnet.NetworkSpec(
        variant=variant, lookback=args.lookback, hidden=tuple(args.hidden), activation=args.activation,
        dropout=args.dropout, conv_width=args.conv_width if multi else None,
        conv_channels=args.conv_channels if multi else None,
    )
    cfg = nnet.TrainConfig(epochs=args.epochs, learning_rate=args.lr, batch_size=args.batch_size,
                           seed=args.seed, validation_fraction=args.validation_fraction,
                           optimizer=args.optimizer)
    progress = None
    if args.verbose:
        progress = lambda e, h: _log(f"epoch {e + 1}: train {h[0]:.6g} val {h[1]:.6g}")
    params, history, scaler = pipeline.train_forecaster(s, spec, cfg, args.train_fraction, progress)
    with _open_out(args.out) as fh:
        nnet.save_checkpoint(fh, spec, params, scaler, history,
                             extra={"train_fraction": args.train_fraction, "train": _clean(vars_of(cfg))})
    if args.loss_plot:
        plots.emit_plot("loss", history, args.loss_plot)
    _log(f"train: {variant}, {cfg.epochs} epochs, final loss {history[-1][0]:.6g} -> {args.out}")


def vars_of(cfg) -> dict:
    return {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}


def _load_model(path) -> nnet.Checkpoint:
    with _open_in(path) as fh:
        try:
            return nnet.load_checkpoint(fh)
        except (ValueError, KeyError) as exc:
            raise CommandError(f"{path}: not a model checkpoint ({exc})") from None


def _comparison(ckpt, series, ar_order):
    frac = ckpt.extra.get("train_fraction", 0.8)
    return pipeline.forecast_comparison(series.values, ckpt.spec, ckpt.params, ckpt.scaler, frac, ar_order)


def cmd_predict(args) -> None:
    ckpt = _load_model(args.model)
    s = _load_series(args.series)
    cmp = _comparison(ckpt, s, args.ar_order)
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["index"]
        for name in s.names:
            header += [f"{name}_truth", f"{name}_lstm", f"{name}_ar"]
        w.writerow(header)
        for i in range(cmp["truth"].shape[0]):
            row = [cmp["split"] + i]
            for j in range(s.dims):
                row += [repr(float(cmp["truth"][i, j])), repr(float(cmp["lstm_pred"][i, j])),
                        repr(float(cmp["ar_pred"][i, j]))]
            w.writerow(row)
    if args.plot:
        plots.emit_plot("lines", {"series": {"truth": cmp["truth"][:, 0], "lstm": cmp["lstm_pred"][:, 0],
                                             "ar": cmp["ar_pred"][:, 0]},
                                  "title": f"one-step forecast: {s.names[0]}"}, args.plot)
    for name, d in zip(s.names, cmp["dims"]):
        _log(f"predict: {name} rmse lstm {d['lstm']['rmse']:.6g} ar {d['ar']['rmse']:.6g}")


def _parse_k_range(text):
    if text is None:
        return None
    lo, sep, hi = text.partition(":")
    try:
        return range(int(lo), int(hi) + 1) if sep else [int(lo)]
    except ValueError:
        raise CommandError(f"bad --k-range {text!r}; expected LO:HI") from None


def _parse_threshold(text):
    if text in (None, "default"):
        return None
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise CommandError(f"bad --threshold {text!r}") from None


def cmd_cluster(args) -> None:
    jobs = _read_jobs(args.jobs)
    features = feature_matrix(jobs)
    run = pipeline.cluster_features(features, args.k, _parse_k_range(args.k_range), args.branching,
                                    args.leaf_capacity, _parse_threshold(args.threshold), args.seed)
    report = pipeline.cluster_report(run, features, args.min_cluster_size, args.silhouette_mode)
    doc = report.to_dict()
    doc["job_ids"] = [j.job_id for j in jobs]
    doc["threshold"] = run.tree.threshold
    doc["n_entries"] = len(run.entries)
    doc["model"] = run.model.to_dict()
    doc["dendrogram"] = {"pairs": run.dendrogram.pairs.tolist(), "distances": run.dendrogram.distances.tolist(),
                         "n_leaves": run.dendrogram.n_leaves}
    doc["entry_weights"] = [e.n for e in run.entries]
    _write_json(args.out, doc)
    if args.labels:
        with _open_out(args.labels) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["job_id", "label"])
            w.writerows((j.job_id, int(l)) for j, l in zip(jobs, run.labels))
    if args.dendrogram:
        with _open_out(args.dendrogram) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["left", "right", "distance", "new_id"])
            w.writerows((l, r, repr(d), n) for l, r, d, n in run.dendrogram.rows())
    _log(f"cluster: {len(jobs)} jobs, {len(run.entries)} CF entries, k={run.k}, dbi={report.dbi:.4g}")


def _cluster_doc(path):
    doc = _read_json(path)
    for key in ("labels", "model", "dendrogram", "job_ids"):
        if key not in doc:
            raise CommandError(f"{path}: not a cluster report (missing {key!r})")
    return doc


def cmd_evaluate(args) -> None:
    doc = _cluster_doc(args.cluster)
    jobs = _read_jobs(args.jobs)
    if [j.job_id for j in jobs] != doc["job_ids"]:
        raise CommandError(f"{args.jobs} does not match the jobs clustered in {args.cluster}")
    model = ClusterModel.from_dict(doc["model"])
    features = feature_matrix(jobs)
    scaled = apply(model.scaler, features) if model.scaler is not None else features
    labels = np.asarray(doc["labels"])
    out: dict = {"k": doc["k"], "n_jobs": len(jobs)}
    if np.unique(labels).size >= 2:
        try:
            out["dbi"] = evalx.davies_bouldin(scaled, labels)
        except evalx.DegenerateClustersError as exc:
            out["dbi"], out["dbi_error"] = None, str(exc)
        sil = {}
        for mode in (evalx.EUCLIDEAN, evalx.HAMMING):
            res = evalx.silhouette(scaled, labels, mode)
            sil[mode] = {"mean": res.mean, "bands": {str(k): v for k, v in res.bands().items()}}
        out["silhouette"] = sil
    summaries = evalx.cluster_summary(features, labels, args.min_cluster_size)
    out["table"] = [{"cluster": c, "count": n, "features": f} for c, n, f in evalx.summary_table(summaries)]
    out["outliers"] = [s.label for s in summaries if s.outlier]

    if args.task_events:
        with _open_in(args.task_events, binary=True) as fh:
            parsed = trace.parse_task_events(fh, keep_incomplete=True)
        subtasks = [t for t in parsed.events if t.event_type == trace.EventType.SUBMIT]
        parent = {j.job_id: int(l) for j, l in zip(jobs, labels)}
        subtasks = [t for t in subtasks if t.job_id in parent]
        rel = evalx.subtask_relevance(subtasks, model, parent_labels=parent)
        out["subtasks"] = rel.to_dict()
        rows = rel.scatter_rows()
        stride = max(1, len(rows) // args.scatter_limit)
        out["subtask_scatter"] = [list(r) for r in rows[::stride]]
        if args.scatter:
            with _open_out(args.scatter) as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["feature_x", "feature_y", "feature_z", "cluster"])
                w.writerows((repr(a), repr(b), repr(c), k) for a, b, c, k in rows)

    if args.model:
        if not args.series:
            raise CommandError("--model needs --series")
        ckpt = _load_model(args.model)
        s = _load_series(args.series)
        cmp = _comparison(ckpt, s, args.ar_order)
        out["forecast"] = {"names": list(s.names), "split": cmp["split"], "ar_order": cmp["ar_order"],
                           "dims": cmp["dims"], "truth": cmp["truth"][:, 0], "lstm": cmp["lstm_pred"][:, 0],
                           "ar": cmp["ar_pred"][:, 0]}
    _write_json(args.out, out)
    _log(f"evaluate: -> {args.out}")


def cmd_report(args) -> None:
    doc = _cluster_doc(args.cluster)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    figures = []

    def fig(kind, data, name):
        plots.emit_plot(kind, data, out_dir / name)
        figures.append(name)

    d = doc["dendrogram"]
    dendro = Dendrogram(np.asarray(d["pairs"]).reshape(-1, 2), d["distances"], d["n_leaves"])
    fig("dendrogram", {"dendrogram": dendro, "last": 30, "weights": doc.get("entry_weights")}, "dendrogram.svg")
    if doc.get("sweep"):
        sw = doc["sweep"]
        fig("dbi", {"k": sw["k"], "dbi": [math.inf if v is None else v for v in sw["dbi"]],
                    "best_k": sw["best_k"]}, "dbi.svg")
    if len(set(doc["labels"])) >= 2 and doc.get("silhouette"):
        labels = np.asarray(doc["labels"])
        vals = np.asarray(doc["silhouette"], dtype=float)
        bands = {int(c): sorted(vals[labels == c].tolist(), reverse=True) for c in np.unique(labels)}
        fig("silhouette", bands, "silhouette.svg")
    if args.jobs:
        jobs = _read_jobs(args.jobs)
        pts = feature_matrix(jobs)[:, 2:5]
        fig("scatter", {"points": pts, "labels": doc["labels"], "title": "jobs by cluster"}, "clusters.svg")

    summary = {
        "clustering": {"k": doc["k"], "dbi": doc.get("dbi"), "silhouette_mean": doc.get("silhouette_mean"),
                       "n_entries": doc.get("n_entries"), "threshold": doc.get("threshold"),
                       "outliers": doc.get("outliers", []), "sweep": doc.get("sweep"),
                       "summaries": doc.get("summaries")},
    }
    if args.evaluation:
        ev = _read_json(args.evaluation)
        summary["evaluation"] = {k: v for k, v in ev.items() if k not in ("subtask_scatter", "forecast")}
        if ev.get("subtask_scatter"):
            rows = np.asarray(ev["subtask_scatter"], dtype=float)
            fig("scatter", {"points": rows[:, :3], "labels": rows[:, 3].astype(int),
                            "title": "subtasks by assigned cluster"}, "subtasks.svg")
        if ev.get("forecast"):
            f = ev["forecast"]
            summary["forecast"] = {k: f[k] for k in ("names", "split", "ar_order", "dims")}
            fig("lines", {"series": {"truth": f["truth"], "lstm": f["lstm"], "ar": f["ar"]},
                          "title": f"one-step forecast: {f['names'][0]}"}, "prediction.svg")
    if args.model:
        ckpt = _load_model(args.model)
        summary["model"] = {"spec": ckpt.spec.to_dict(), "epochs": len(ckpt.history),
                            "final_loss": list(ckpt.history[-1]) if ckpt.history else None}
        if ckpt.history:
            fig("loss", ckpt.history, "loss.svg")
    summary["figures"] = figures
    _write_json(out_dir / "report.json", summary)
    _log(f"report: {len(figures)} figures -> {out_dir}")


# -- argument parsing -----------------------------------------------------------------------

def _hidden(text):
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated widths, got {text!r}") from None
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("exactly two LSTM widths are required")
    return parts


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="workload-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="key=value file with defaults for the subcommand's flags")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    seed_help = f"random seed (default: ${SEED_ENV} or 0)"

    s = sub.add_parser("synth", help="generate synthetic job/task event tables")
    s.add_argument("--jobs", type=int, default=1000)
    s.add_argument("--clusters", type=int, default=3)
    s.add_argument("--rate", type=float, default=0.05, help="job arrivals per second")
    s.add_argument("--seed", type=int, default=_default_seed(), help=seed_help)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest", help="parse event tables into a jobs CSV")
    s.add_argument("--job-events", nargs="+", required=True)
    s.add_argument("--task-events", nargs="+", required=True)
    s.add_argument("--job-schema")
    s.add_argument("--task-schema")
    s.add_argument("--fraction", type=float, default=1.0, help="subsample fraction in (0, 1]")
    s.add_argument("--aggregate", choices=("sum", "max"), default="sum")
    s.add_argument("--seed", type=int, default=_default_seed(), help=seed_help)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("series", help="build the inter-arrival or per-slot request series")
    s.add_argument("--jobs", required=True)
    s.add_argument("--kind", choices=("interarrival", "requests"), required=True)
    s.add_argument("--slot-us", type=int, default=FIVE_MINUTES_US)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_series)

    s = sub.add_parser("train", help="train the LSTM forecaster on a series")
    s.add_argument("--series", required=True)
    s.add_argument("--variant", choices=(nnet.UNIVARIATE, nnet.MULTIVARIATE))
    s.add_argument("--lookback", type=int, default=24)
    s.add_argument("--hidden", type=_hidden, default=[64, 64])
    s.add_argument("--activation", choices=("relu", "tanh", "identity"), default="relu")
    s.add_argument("--dropout", type=float, default=0.2)
    s.add_argument("--conv-width", type=int, default=3)
    s.add_argument("--conv-channels", type=int, default=16)
    s.add_argument("--epochs", type=int, default=150)
    s.add_argument("--lr", type=float, default=1e-3)
    s.add_argument("--batch-size", type=int, default=32)
    s.add_argument("--validation-fraction", type=float, default=0.2)
    s.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    s.add_argument("--train-fraction", type=float, default=0.8)
    s.add_argument("--seed", type=int, default=_default_seed(), help=seed_help)
    s.add_argument("--loss-plot")
    s.add_argument("--verbose", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="one-step forecasts of the test range, with the AR baseline")
    s.add_argument("--model", required=True)
    s.add_argument("--series", required=True)
    s.add_argument("--ar-order", type=int, default=5)
    s.add_argument("--plot")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("cluster", help="BIRCH clustering of job feature vectors")
    s.add_argument("--jobs", required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--k-range", help="LO:HI cluster counts for the dbi sweep (default 2:31)")
    s.add_argument("--branching", type=int, default=50)
    s.add_argument("--leaf-capacity", type=int, default=50)
    s.add_argument("--threshold", default="default", help="CF radius threshold: a number, 'auto' or 'default'")
    s.add_argument("--min-cluster-size", type=int, default=2)
    s.add_argument("--silhouette-mode", choices=(evalx.EUCLIDEAN, evalx.HAMMING), default=evalx.EUCLIDEAN)
    s.add_argument("--seed", type=int, default=_default_seed(), help=seed_help)
    s.add_argument("--labels")
    s.add_argument("--dendrogram")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("evaluate", help="validity indices, cluster table, subtask relevance, forecast errors")
    s.add_argument("--cluster", required=True)
    s.add_argument("--jobs", required=True)
    s.add_argument("--task-events")
    s.add_argument("--model")
    s.add_argument("--series")
    s.add_argument("--ar-order", type=int, default=5)
    s.add_argument("--min-cluster-size", type=int, default=2)
    s.add_argument("--scatter")
    s.add_argument("--scatter-limit", type=int, default=2000)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("report", help="collect results into report.json and SVG figures")
    s.add_argument("--cluster", required=True)
    s.add_argument("--evaluation")
    s.add_argument("--model")
    s.add_argument("--jobs")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_report)
    return p


def _read_config(path) -> dict[str, str]:
    if not Path(path).exists():
        raise CommandError(f"config file not found: {path}")
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line or line.startswith("["):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CommandError(f"{path}:{lineno}: expected key = value")
            out[key.strip().replace("-", "_")] = value.strip().strip('"')
    return out


def _apply_config(parser: argparse.ArgumentParser, argv, config: dict[str, str]) -> argparse.Namespace:
    """Parse with config values as subcommand defaults; explicit flags still win."""
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in subparsers.choices), None)
    if command is None:
        return parser.parse_args(argv)
    sp = subparsers.choices[command]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, raw in config.items():
        action = actions.get(key)
        if action is None or key in ("help", "func"):
            sp.error(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.nargs == "+":
            value = raw.split()
        else:
            try:
                value = action.type(raw) if action.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                sp.error(f"config key {key}: {exc}")
            if action.choices is not None and value not in action.choices:
                sp.error(f"config key {key}: {value!r} is not one of {list(action.choices)}")
        defaults[key] = value
        action.required = False
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def run(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if _wants_config(argv):
            pre = argparse.ArgumentParser(add_help=False)
            pre.add_argument("--config")
            known, rest = pre.parse_known_args(argv)
            args = _apply_config(parser, rest, _read_config(known.config))
        else:
            args = parser.parse_args(argv)
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (CommandError, OSError, ValueError, KeyError) as exc:
        msg = str(exc) if not isinstance(exc, KeyError) else f"missing field {exc}"
        print(f"workload-lab: error: {msg}", file=sys.stderr)
        return 1
    return 0


def _wants_config(argv) -> bool:
    return any(a == "--config" or a.startswith("--config=") for a in argv)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
