"""Experiment driver CLI.

Subcommands: synth, wpt, cluster, select-subband, mera, oos, eval, and run
(the full pipeline from a JSON config). ``run`` writes report.json,
metrics.csv, and trace.csv into the output directory; report.json is
byte-identical across reruns with the same config and seeds.

Exit codes: 0 ok, 2 config error, 3 data error, 4 convergence error.
"""

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bundle import load_bundle, save_bundle, save_matrix
from .datasets import Dataset, SplitSpec, UosSpec, column_normalize, generate_uos, load_idx, load_pgm_dir, split
from .errors import ConfigError, ConvergenceError, DataError, Error
from .graph import Partition, affinity_from_representation, ipd_threshold, spectral_clustering
from .mera import FIVE_VIEW_ORDER, choose_grid, unify_views
from .metrics import evaluate
from .pipeline import (
    SingleViewPipeline,
    WpMeraPipeline,
    five_views,
    multiview_models,
    assign_multiview_batch,
    run_wp_mera,
    unit_columns,
)
from .selection import Grid, grid_search, select_subband
from .solvers import SolverSpec
from .subspace import assign_oos_batch, average_affinity, estimate_bases, mean_principal_angle
from .wavelet import node_matrix, wp_decompose

METRICS_HEADER = ["dataset", "pipeline", "subband", "seed", "phase",
                  "acc", "nmi", "rand", "f", "purity", "ce", "seconds"]
PIPELINES = ("single", "wp-single", "wp-mera")
MERA_SUBBAND_TAG = "O+A+H+V+D"


@dataclass
class ExperimentConfig:
    """Validated experiment description (see README for the JSON schema)."""

    dataset: dict
    pipeline: str
    solver: SolverSpec | None = None
    levels: int = 2
    d: int = 9
    ipd: bool = False
    split: SplitSpec = field(default_factory=lambda: SplitSpec(1.0, 0))
    mera: dict = field(default_factory=dict)
    grid: Grid | None = None
    seeds: tuple = (0,)
    output_dir: str = "out"
    normalize: bool = True
    export_bundles: bool = False

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        known = {"dataset", "pipeline", "solver", "levels", "d", "ipd",
                 "split", "mera", "grid", "seeds", "output_dir",
                 "normalize", "export_bundles"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "dataset" not in raw:
            raise ConfigError("config needs a 'dataset' section")
        pipeline = raw.get("pipeline", "single")
        if pipeline not in PIPELINES:
            raise ConfigError(f"pipeline must be one of {PIPELINES}")
        solver = None
        if "solver" in raw:
            s = dict(raw["solver"])
            try:
                solver = SolverSpec(kind=s.pop("kind"), params=s.pop("params", {}),
                                    **s)
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"bad solver spec: {exc}") from exc
        if pipeline in ("single", "wp-single") and solver is None:
            raise ConfigError(f"pipeline {pipeline!r} needs a solver spec")
        mera = dict(raw.get("mera", {}))
        if pipeline == "wp-mera":
            for key in ("lambda", "R"):
                if key not in mera:
                    raise ConfigError(f"wp-mera pipeline needs mera.{key}")
        sp = raw.get("split", {"in_fraction": 1.0, "seed": 0})
        split_spec = SplitSpec(in_fraction=sp.get("in_fraction", 1.0),
                               seed=sp.get("seed", 0))
        grid = None
        if "grid" in raw:
            g = dict(raw["grid"])
            try:
                grid = Grid(values=g.pop("values"), **g)
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"bad grid spec: {exc}") from exc
        seeds = tuple(raw.get("seeds", (0,)))
        if not seeds:
            raise ConfigError("seeds must be nonempty")
        return cls(dataset=dict(raw["dataset"]), pipeline=pipeline, solver=solver,
                   levels=int(raw.get("levels", 2)), d=int(raw.get("d", 9)),
                   ipd=bool(raw.get("ipd", False)), split=split_spec, mera=mera,
                   grid=grid, seeds=seeds, output_dir=raw.get("output_dir", "out"),
                   normalize=bool(raw.get("normalize", True)),
                   export_bundles=bool(raw.get("export_bundles", False)))

    def validate_against(self, ds):
        """Fail fast on config/dataset inconsistencies (before any solve)."""
        if ds.labels is None:
            raise ConfigError("experiments need a labeled dataset")
        if self.levels < 1:
            raise ConfigError("levels must be >= 1")
        counts = np.bincount(ds.labels)
        n_in = int(sum(math.ceil(self.split.in_fraction * c) for c in counts))
        if self.pipeline == "wp-mera":
            choose_grid(n_in)  # raises NoGridError on e.g. prime N
        if min(ds.img_h, ds.img_w) < 2 ** (self.levels if "wp" in self.pipeline else 0):
            raise ConfigError(
                f"{ds.img_h}x{ds.img_w} images too small for levels={self.levels}"
            )

    def echo(self):
        """JSON-serializable canonical form for the report."""
        out = {
            "dataset": self.dataset,
            "pipeline": self.pipeline,
            "levels": self.levels,
            "d": self.d,
            "ipd": self.ipd,
            "split": {"in_fraction": self.split.in_fraction, "seed": self.split.seed},
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
            "normalize": self.normalize,
            "export_bundles": self.export_bundles,
        }
        if self.solver is not None:
            out["solver"] = {"kind": self.solver.kind, "params": self.solver.params,
                             "tol": self.solver.tol, "max_iter": self.solver.max_iter}
        if self.mera:
            out["mera"] = self.mera
        if self.grid is not None:
            out["grid"] = {"values": self.grid.values,
                           "n_val_subsets": self.grid.n_val_subsets,
                           "val_size_per_cluster": self.grid.val_size_per_cluster,
                           "seed": self.grid.seed}
        return out


def load_dataset(spec):
    """Materialize the dataset named by a config 'dataset' section."""
    kind = spec.get("kind")
    if kind == "synthetic":
        u = spec.get("uos", {})
        try:
            uspec = UosSpec(C=u["C"], d=u["d"], D=u["D"],
                            n_per_cluster=u["n_per_cluster"],
                            noise_sigma=u.get("noise_sigma", 0.0),
                            seed=u.get("seed", 0))
        except KeyError as exc:
            raise ConfigError(f"synthetic dataset needs uos.{exc.args[0]}") from exc
        ds = generate_uos(uspec)
        return ds if "name" not in spec else Dataset(
            data=ds.data, img_h=ds.img_h, img_w=ds.img_w, labels=ds.labels,
            name=spec["name"])
    if kind == "bundle":
        return load_bundle(spec["path"], name=spec.get("name"))
    if kind == "idx":
        return load_idx(spec["images"], spec.get("labels"), name=spec.get("name"))
    if kind == "pgm_dir":
        if "class_regex" not in spec:
            raise ConfigError("pgm_dir dataset needs class_regex")
        return load_pgm_dir(spec["path"], spec["class_regex"],
                            name=spec.get("name"))
    raise ConfigError(f"unknown dataset kind {kind!r}")


def _mera_pipeline(cfg, ds, params=None):
    p = dict(cfg.mera)
    if params:
        p.update(params)
    return WpMeraPipeline(img_h=ds.img_h, img_w=ds.img_w, lam=p["lambda"],
                          R=int(p["R"]), tol=p.get("tol", 1e-6),
                          max_iter=int(p.get("max_iter", 200)),
                          sweeps=int(p.get("sweeps", 2)))


def _single_pipeline(cfg, params=None):
    solver = cfg.solver
    if params:
        solver = SolverSpec(kind=solver.kind, params={**solver.params, **params},
                            tol=solver.tol, max_iter=solver.max_iter)
    return SingleViewPipeline(solver=solver, ipd_d=cfg.d if cfg.ipd else None)


def _metrics_dict(truth, pred):
    rep = evaluate(truth, pred)
    d = rep.as_dict()
    d["ce"] = 1.0 - rep.acc
    return d


def _run_seed(cfg, ds, seed):
    """One full experiment run; returns (report record, csv rows, trace rows)."""
    t0 = time.perf_counter()
    rec = {"seed": seed, "pipeline": cfg.pipeline}
    trace_rows = []
    in_ds, out_ds = split(ds, SplitSpec(cfg.split.in_fraction, cfg.split.seed + seed))
    rec["split"] = {"in": in_ds.N, "out": out_ds.N}

    grid_params = None
    if cfg.grid is not None:
        if cfg.pipeline == "wp-mera":
            make = lambda p: _mera_pipeline(cfg, ds, p)
        else:
            make = lambda p: _single_pipeline(cfg, p)
        grid = Grid(values=cfg.grid.values, n_val_subsets=cfg.grid.n_val_subsets,
                    val_size_per_cluster=cfg.grid.val_size_per_cluster,
                    seed=cfg.grid.seed + seed)
        grid_params, table = grid_search(in_ds, grid, make)
        rec["grid"] = {"best_params": grid_params, "table": table}

    C = ds.C
    subband = ""
    if cfg.pipeline == "single":
        pipe = _single_pipeline(cfg, grid_params)
        in_labels = pipe.run(in_ds.data, C, seed)
        in_X = unit_columns(in_ds.data)
        out_X = unit_columns(out_ds.data) if out_ds.N else None
    elif cfg.pipeline == "wp-single":
        pipe = _single_pipeline(cfg, grid_params)
        sel = select_subband(in_ds, cfg.levels, pipe, seed)
        subband = sel.chosen
        rec["selection"] = {"evaluated": [[p, ce] for p, ce in sel.evaluated],
                            "stopped_reason": sel.stopped_reason}
        trace_rows += [{"seed": seed, "order": i, "subband": p, "ce": ce}
                       for i, (p, ce) in enumerate(sel.evaluated)]
        in_X = unit_columns(node_matrix(in_ds, subband))
        in_labels = pipe.run(in_X, C, seed)
        out_X = unit_columns(node_matrix(out_ds, subband)) if out_ds.N else None
    else:  # wp-mera
        mera_pipe = _mera_pipeline(cfg, ds, grid_params)
        mtrace = []
        part, tensor, views = run_wp_mera(
            in_ds, C, lam=mera_pipe.lam, R=mera_pipe.R, seed=seed,
            tol=mera_pipe.tol, max_iter=mera_pipe.max_iter,
            sweeps=mera_pipe.sweeps, trace=mtrace)
        in_labels = part.labels
        subband = MERA_SUBBAND_TAG
        rec["convergence"] = {"iterations": len(mtrace),
                              "final_residual": max(mtrace[-1]["view_residuals"]),
                              "final_fit_error": mtrace[-1]["fit_error"],
                              "lambda": mera_pipe.lam, "R": mera_pipe.R}
        for t in mtrace:
            row = {"seed": seed, "iteration": t["iteration"],
                   "fit_error": t["fit_error"], "mu": t["mu"]}
            for v, name in enumerate(FIVE_VIEW_ORDER):
                row[f"res_{name}"] = t["view_residuals"][v]
            trace_rows.append(row)
        in_X = views[0]
    rec["subband"] = subband
    part = Partition(labels=in_labels, C=C)
    metrics = {"in": _metrics_dict(in_ds.labels, in_labels)}
    if cfg.export_bundles:
        out_dir = Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        save_bundle(in_ds, out_dir / f"in_s{seed}.wpsc")
        if cfg.pipeline == "wp-single":
            save_bundle(in_ds.with_data(in_X),
                        out_dir / f"{in_ds.name}__{subband}_s{seed}.wpsc")
        elif cfg.pipeline == "wp-mera":
            save_matrix(unify_views(tensor), out_dir / f"unified_s{seed}.wpsc")

    # out-of-sample assignment by point-to-subspace distance
    if cfg.pipeline == "wp-mera":
        models = multiview_models(views, part, cfg.d)
        if out_ds.N:
            out_views = five_views(out_ds)
            out_labels = assign_multiview_batch(out_views, models)
        ambient_model = models[0]
        wp_models = models[1:]
        diag = {
            "affinity_ambient": average_affinity(ambient_model),
            "affinity_views": {name: average_affinity(m)
                               for name, m in zip(FIVE_VIEW_ORDER[1:], wp_models)},
        }
        diag["angle_ambient"] = mean_principal_angle(diag["affinity_ambient"])
    else:
        model = estimate_bases(in_X, part, cfg.d)
        if out_ds.N:
            out_labels = assign_oos_batch(out_X, model)
        ambient_model = (model if cfg.pipeline == "single"
                         else estimate_bases(unit_columns(in_ds.data), part, cfg.d))
        diag = {"affinity_ambient": average_affinity(ambient_model),
                "angle_ambient": mean_principal_angle(
                    average_affinity(ambient_model))}
        if cfg.pipeline == "wp-single":
            diag["affinity_subband"] = average_affinity(model)
            diag["angle_subband"] = mean_principal_angle(diag["affinity_subband"])
    if out_ds.N:
        metrics["out"] = _metrics_dict(out_ds.labels, out_labels)
    rec["metrics"] = metrics
    rec["diagnostics"] = diag
    seconds = time.perf_counter() - t0

    csv_rows = []
    for phase in ("in", "out"):
        if phase not in metrics:
            continue
        m = metrics[phase]
        csv_rows.append([ds.name, cfg.pipeline, subband, seed, phase,
                         f"{m['acc']:.6f}", f"{m['nmi']:.6f}", f"{m['rand']:.6f}",
                         f"{m['f']:.6f}", f"{m['purity']:.6f}", f"{m['ce']:.6f}",
                         f"{seconds:.3f}"])
    return rec, csv_rows, trace_rows


def _stage(name, fn, *args, **kwargs):
    """Run one pipeline stage; on failure, name the stage in the error."""
    try:
        return fn(*args, **kwargs)
    except Error as exc:
        exc.args = (f"[stage: {name}] {exc}",) + exc.args[1:]
        raise


def run_experiment(cfg):
    """Execute a validated config: all seeds, in -> OOS -> diagnostics.

    Returns the results dict that :func:`emit_report` serializes. On a
    mid-run failure the error names the failing stage and carries the
    completed seeds as ``exc.partial_results`` so callers can flush them.
    """
    ds = _stage("load", load_dataset, cfg.dataset)
    _stage("validate", cfg.validate_against, ds)
    if cfg.normalize:
        ds = _stage("normalize", column_normalize, ds)
    runs, csv_rows, trace_rows = [], [], []

    def results():
        report = {
            "config": cfg.echo(),
            "dataset": {"name": ds.name, "D": ds.D, "N": ds.N, "C": ds.C,
                        "img_h": ds.img_h, "img_w": ds.img_w},
            "runs": runs,
        }
        return {"report": report, "metrics_rows": csv_rows,
                "trace_rows": trace_rows, "pipeline": cfg.pipeline,
                "output_dir": cfg.output_dir}

    for seed in sorted(cfg.seeds):
        try:
            rec, rows, trows = _stage(f"pipeline[seed={seed}]",
                                      _run_seed, cfg, ds, seed)
        except Error as exc:
            exc.partial_results = results()
            raise
        runs.append(rec)
        csv_rows.extend(rows)
        trace_rows.extend(trows)
    return results()


def emit_report(results, append=False):
    """Write report.json, metrics.csv, and trace.csv; returns the paths."""
    out_dir = Path(results["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(
        json.dumps(results["report"], indent=2, sort_keys=True) + "\n")

    metrics_path = out_dir / "metrics.csv"
    write_header = not (append and metrics_path.exists())
    mode = "a" if append else "w"
    with open(metrics_path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if write_header:
            writer.writerow(METRICS_HEADER)
        writer.writerows(results["metrics_rows"])

    trace_path = out_dir / "trace.csv"
    rows = results["trace_rows"]
    if results["pipeline"] == "wp-mera":
        header = ["seed", "iteration"] + [f"res_{n}" for n in FIVE_VIEW_ORDER] + \
                 ["fit_error", "mu"]
    else:
        header = ["seed", "order", "subband", "ce"]
    with open(trace_path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if not (append and trace_path.stat().st_size > 0):
            writer.writerow(header)
        for row in rows:
            writer.writerow([row.get(k, "") for k in header])

    paths = [report_path, metrics_path, trace_path]
    grid_rows = [(run["seed"], row)
                 for run in results["report"]["runs"] if "grid" in run
                 for row in run["grid"]["table"]]
    if grid_rows:
        grid_path = out_dir / "grid.csv"
        with open(grid_path, mode, newline="") as fh:
            writer = csv.writer(fh)
            if not (append and grid_path.stat().st_size > 0):
                writer.writerow(["seed", "params", "mean_acc", "accs"])
            for seed, row in grid_rows:
                writer.writerow([seed, json.dumps(row["params"], sort_keys=True),
                                 f"{row['mean_acc']:.6f}",
                                 ";".join(f"{a:.6f}" for a in row["accs"])])
        paths.append(grid_path)
    return tuple(paths)


# ---------------------------------------------------------------------------
# subcommand implementations

def _read_labels_csv(path):
    vals = [int(line) for line in Path(path).read_text().split()]
    return np.asarray(vals, dtype=np.int64)


def _write_labels_csv(path, labels):
    Path(path).write_text("\n".join(str(int(v)) for v in labels) + "\n")


def _cmd_synth(args):
    spec = UosSpec(C=args.C, d=args.d, D=args.D, n_per_cluster=args.n_per_cluster,
                   noise_sigma=args.sigma, seed=args.seed)
    ds = generate_uos(spec)
    save_bundle(ds, args.out)
    print(f"wrote {args.out}: D={ds.D} N={ds.N} C={ds.C} ({ds.img_h}x{ds.img_w})")


def _cmd_wpt(args):
    ds = load_bundle(args.data)
    wp = wp_decompose(ds, args.levels)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in wp.paths():
        node_ds = ds.with_data(wp[path])
        save_bundle(node_ds, out_dir / f"{ds.name}__{path}.wpsc")
    print(f"wrote {len(wp.paths())} node bundles to {out_dir}")


def _solver_from_args(args):
    params = {}
    for item in args.param or []:
        key, _, val = item.partition("=")
        if not val:
            raise ConfigError(f"--param needs key=value, got {item!r}")
        try:
            params[key] = json.loads(val)
        except json.JSONDecodeError:
            params[key] = val
    return SolverSpec(kind=args.solver, params=params)


def _cmd_cluster(args):
    ds = column_normalize(load_bundle(args.data))
    if ds.labels is None and args.C is None:
        raise ConfigError("unlabeled data: pass --C")
    C = args.C or ds.C
    pipe = SingleViewPipeline(solver=_solver_from_args(args), ipd_d=args.ipd_d)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.export_matrix:
        M = pipe.solver.solve(unit_columns(ds.data))
        if pipe.ipd_d is not None:
            M = ipd_threshold(M, pipe.ipd_d)
        save_matrix(M, out_dir / "representation.wpsc")
        W = affinity_from_representation(M)
        save_matrix(W, out_dir / "affinity.wpsc")
        labels = spectral_clustering(W, C, args.seed).labels
    else:
        labels = pipe.run(ds.data, C, args.seed)
    _write_labels_csv(out_dir / "labels.csv", labels)
    if ds.labels is not None:
        m = _metrics_dict(ds.labels, labels)
        (out_dir / "metrics.json").write_text(json.dumps(m, indent=2, sort_keys=True) + "\n")
        print(json.dumps(m, sort_keys=True))
    else:
        print(f"wrote {out_dir / 'labels.csv'}")


def _cmd_select_subband(args):
    from .selection import scan_all_subbands

    ds = column_normalize(load_bundle(args.data))
    pipe = SingleViewPipeline(solver=_solver_from_args(args), ipd_d=args.ipd_d)
    chooser = scan_all_subbands if args.exhaustive else select_subband
    sel = chooser(ds, args.levels, pipe, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "selection.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["order", "subband", "ce"])
        for i, (p, ce) in enumerate(sel.evaluated):
            writer.writerow([i, p, f"{ce:.6f}"])
    print(f"chosen subband: {sel.chosen!r} ({sel.stopped_reason}); "
          f"{len(sel.evaluated)} evaluations")


def _cmd_mera(args):
    ds = column_normalize(load_bundle(args.data))
    if ds.labels is None and args.C is None:
        raise ConfigError("unlabeled data: pass --C")
    C = args.C or ds.C
    trace = []
    part, tensor, _ = run_wp_mera(ds, C, lam=args.lam, R=args.rank,
                                  seed=args.seed, trace=trace)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_labels_csv(out_dir / "labels.csv", part.labels)
    with open(out_dir / "trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration"] + [f"res_{n}" for n in FIVE_VIEW_ORDER]
                        + ["fit_error", "mu"])
        for t in trace:
            writer.writerow([t["iteration"], *t["view_residuals"],
                             t["fit_error"], t["mu"]])
    if ds.labels is not None:
        print(json.dumps(_metrics_dict(ds.labels, part.labels), sort_keys=True))


def _cmd_oos(args):
    in_ds = column_normalize(load_bundle(args.in_data))
    out_ds = column_normalize(load_bundle(args.out_data))
    labels = _read_labels_csv(args.labels) if args.labels else in_ds.labels
    if labels is None:
        raise ConfigError("need in-sample labels (--labels or labeled bundle)")
    part = Partition(labels=labels, C=int(np.max(labels)) + 1)
    model = estimate_bases(in_ds.data, part, args.d)
    oos_labels = assign_oos_batch(out_ds.data, model)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_labels_csv(out_dir / "oos_labels.csv", oos_labels)
    if out_ds.labels is not None:
        print(json.dumps(_metrics_dict(out_ds.labels, oos_labels), sort_keys=True))
    else:
        print(f"wrote {out_dir / 'oos_labels.csv'}")


def _cmd_eval(args):
    truth = _read_labels_csv(args.truth)
    pred = _read_labels_csv(args.pred)
    m = _metrics_dict(truth, pred)
    text = json.dumps(m, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    print(json.dumps(m, sort_keys=True))


_RUN_OVERRIDES = ("pipeline", "levels", "d", "output_dir")


def _cmd_run(args):
    raw = json.loads(Path(args.config).read_text())
    for key in _RUN_OVERRIDES:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            raw[key] = val
    if args.seed is not None:
        raw["seeds"] = args.seed
    if args.ipd is not None:
        raw["ipd"] = args.ipd
    cfg = ExperimentConfig.from_dict(raw)
    try:
        results = run_experiment(cfg)
    except Error as exc:
        partial = getattr(exc, "partial_results", None)
        if partial is not None and partial["report"]["runs"]:
            paths = emit_report(partial, append=args.append)
            print(f"flushed {len(partial['report']['runs'])} completed run(s) "
                  f"to {paths[0].parent}", file=sys.stderr)
        raise
    paths = emit_report(results, append=args.append)
    for p in paths:
        print(f"wrote {p}")


def build_parser():
    ap = argparse.ArgumentParser(prog="wpsc",
                                 description="wavelet-packet-domain subspace clustering")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic UoS dataset bundle")
    p.add_argument("--C", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--n-per-cluster", type=int, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("wpt", help="decompose a bundle into subband bundles")
    p.add_argument("--data", required=True)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=_cmd_wpt)

    for name, fn in (("cluster", _cmd_cluster), ("select-subband", _cmd_select_subband)):
        p = sub.add_parser(name)
        p.add_argument("--data", required=True)
        p.add_argument("--solver", required=True, choices=["SSC", "LRR", "NSN", "RTSC"])
        p.add_argument("--param", action="append",
                       help="solver parameter key=value (repeatable)")
        p.add_argument("--ipd-d", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default="out")
        if name == "cluster":
            p.add_argument("--C", type=int, default=None)
            p.add_argument("--export-matrix", action="store_true",
                           help="also write representation/affinity bundles")
        else:
            p.add_argument("--levels", type=int, default=2)
            p.add_argument("--exhaustive", action="store_true",
                           help="scan every node instead of the greedy descent")
        p.set_defaults(func=fn)

    p = sub.add_parser("mera", help="five-view MERA clustering")
    p.add_argument("--data", required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--C", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=_cmd_mera)

    p = sub.add_parser("oos", help="assign out-of-sample points to subspaces")
    p.add_argument("--in-data", required=True)
    p.add_argument("--out-data", required=True)
    p.add_argument("--labels", default=None,
                   help="CSV of in-sample labels (default: bundle labels)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=_cmd_oos)

    p = sub.add_parser("eval", help="score predicted labels against truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("run", help="full experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--pipeline", choices=PIPELINES, default=None)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--seed", type=int, action="append", default=None,
                   help="override config seeds (repeatable)")
    p.add_argument("--ipd", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--output-dir", dest="output_dir", default=None)
    p.add_argument("--append", action="store_true",
                   help="append metric/trace rows instead of overwriting")
    p.set_defaults(func=_cmd_run)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"convergence error: {exc} residuals={exc.residuals}", file=sys.stderr)
        return 4
    except Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
