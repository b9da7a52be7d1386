"""Config-driven experiment runner and command line entry point.

A single JSON config describes the simulation, contamination, selection
settings, and run mode; results land in a stable CSV whose first column
carries a schema version. Identical config and seed reproduce the CSV
byte for byte except for the timing column.

Modes
-----
fit
    Replicated simulate / contaminate / fit / evaluate runs. When the
    config carries ``data_csv`` the mode instead fits a user CSV and
    writes a model JSON (see :func:`fit_csv`); with a ``predict`` section
    it scores a saved model on new rows (see :func:`predict_csv`).
sweep-k
    The fit loop repeated over a grid of ensemble sizes.
sweep-contamination
    The fit loop repeated over scenario/rate combinations.
benchmark
    Full-factorial (n, p) timing grid; per-replication rows plus a
    ``*_medians.csv`` summary of the median fit time per cell.
selftest
    Runs the built-in property suites; exits nonzero on failure.

Exit codes: 0 success, 1 config error, 2 runtime error, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import selfcheck
from .data import dataset_from_csv
from .errors import CellensError, DegenerateColumn, InvalidConfig, ShapeMismatch
from .metrics import EvalReport, mspe, selection_scores, timed
from .pipeline import fit_ensemble
from .robustfit import model_from_json, model_to_json, predict
from .selection import SelectionConfig
from .simulate import (SCENARIOS, ContaminationSpec, SimConfig,
                       block_covariance, contaminate, generate_clean,
                       make_test_set)
from .rng import split_seed

CSV_SCHEMA_VERSION = 1
RESULT_COLUMNS = [
    "schema_version", "mode", "scenario", "n", "p", "sparsity", "snr",
    "alpha", "K", "tau", "rep", "seed", "mspe", "recall", "precision",
    "selected_count", "cpu_seconds",
]

MODES = ("fit", "sweep-k", "sweep-contamination", "benchmark", "selftest")


@dataclass
class ExperimentConfig:
    """Resolved run settings (defaults mirror the headline simulation)."""

    mode: str = "fit"
    sim: SimConfig = SimConfig()
    contamination: ContaminationSpec = ContaminationSpec()
    selection: SelectionConfig = SelectionConfig()
    replications: int = 50
    test_size: int = 5000
    output_path: str = "results.csv"
    seed: int = 0
    threads: int = 1
    impute: bool = True
    k_grid: tuple[int, ...] = tuple(range(1, 21))
    scenario_grid: tuple[str, ...] = SCENARIOS
    alpha_grid: tuple[float, ...] = (0.05, 0.1)
    n_grid: tuple[int, ...] = (50, 100)
    p_grid: tuple[int, ...] = (250, 500, 1000)
    benchmark_reps: int = 3
    data_csv: Optional[str] = None
    model_out: Optional[str] = None
    predict_spec: Optional[dict] = None

    def validate(self) -> None:
        if self.mode not in MODES:
            raise InvalidConfig(f"mode {self.mode!r} not one of {MODES}")
        if self.replications < 1:
            raise InvalidConfig("replications must be >= 1")
        if self.test_size < 1:
            raise InvalidConfig("test_size must be >= 1")
        if self.threads < 1:
            raise InvalidConfig("threads must be >= 1")


def _build_config(doc: dict) -> ExperimentConfig:
    """Translate a JSON document into an ExperimentConfig with defaults."""
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    alias = {"predict": "predict_spec", "output": "output_path"}
    cfg = ExperimentConfig()
    sim = dict(n=50, p=500, sparsity=50, snr=1.0, block_size=25,
               rho_within=0.8, rho_background=0.2,
               coef_range=(0.0, 5.0), seed=0)
    cont = dict(scenario="Clean", alpha=0.0, alpha2=0.0, leverage_c=2.0,
                marginal_shift=10.0, gamma_corr=3.0, beta_distort=100.0)
    sel = dict(K=10, tau=0.01, cv_folds=5, max_vars=None, intercept=True, seed=0)
    fields = {}
    for key, value in doc.items():
        key = alias.get(key, key)
        if key == "sim":
            bad = set(value) - set(sim)
            if bad:
                raise InvalidConfig(f"unknown sim fields: {sorted(bad)}")
            sim.update(value)
        elif key == "contamination":
            bad = set(value) - set(cont)
            if bad:
                raise InvalidConfig(f"unknown contamination fields: {sorted(bad)}")
            cont.update(value)
        elif key == "selection":
            bad = set(value) - set(sel)
            if bad:
                raise InvalidConfig(f"unknown selection fields: {sorted(bad)}")
            sel.update(value)
        elif key in known:
            fields[key] = tuple(value) if isinstance(value, list) else value
        else:
            raise InvalidConfig(f"unknown config field {key!r}")
    sim["coef_range"] = tuple(sim["coef_range"])
    cfg = replace(
        cfg,
        sim=SimConfig(**sim),
        contamination=ContaminationSpec(**cont),
        selection=SelectionConfig(**sel),
        **fields,
    )
    return cfg


def load_config(path: str) -> ExperimentConfig:
    """Parse a JSON config file with line-precise error messages."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise InvalidConfig(f"{path}: top-level JSON value must be an object")
    return _build_config(doc)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_single(sim: SimConfig, cont: ContaminationSpec, sel: SelectionConfig,
               rep_seed: int, test_size: int, impute: bool) -> EvalReport:
    """One replication: generate, contaminate, fit, evaluate.

    Timing covers imputation, selection, and the final robust fits; data
    generation and evaluation are excluded.
    """
    sim = replace(sim, seed=split_seed(rep_seed, 1))
    clean = generate_clean(sim)
    sigma = block_covariance(sim)
    observed = contaminate(clean, cont, sigma, seed=split_seed(rep_seed, 2))
    sel = replace(sel, seed=split_seed(rep_seed, 3))
    result, seconds = timed(lambda: fit_ensemble(observed.y, observed.X, sel,
                                                 impute=impute))
    test = make_test_set(sim, test_size, clean.truth.beta,
                         clean.truth.noise_sd, seed=split_seed(rep_seed, 4))
    yhat = result.predict(test.X)
    noise_var = clean.truth.noise_sd ** 2
    err = mspe(test.y, yhat, noise_var=noise_var)
    selected = result.selected_union()
    recall, precision = selection_scores(clean.truth.active_set, selected)
    return EvalReport(mspe=err, recall=recall, precision=precision,
                      cpu_seconds=seconds, selected_count=len(selected))


def _row(cfg: ExperimentConfig, sim: SimConfig, cont: ContaminationSpec,
         sel: SelectionConfig, rep: int, seed: int, report: EvalReport) -> list:
    return [
        CSV_SCHEMA_VERSION, cfg.mode, cont.scenario, sim.n, sim.p,
        sim.sparsity, _fmt(float(sim.snr)), _fmt(float(cont.alpha)), sel.K,
        _fmt(float(sel.tau)), rep, seed, _fmt(report.mspe),
        _fmt(report.recall), _fmt(report.precision), report.selected_count,
        _fmt(report.cpu_seconds),
    ]


def _run_grid(cfg: ExperimentConfig, cells: list[tuple[SimConfig,
                                                       ContaminationSpec,
                                                       SelectionConfig]],
              reps: int, writer) -> list[list]:
    """Run replications for every grid cell, writing rows in stable order."""
    jobs = []
    for cell_idx, (sim, cont, sel) in enumerate(cells):
        for rep in range(reps):
            rep_seed = split_seed(split_seed(cfg.seed, cell_idx), rep)
            jobs.append((cell_idx, rep, rep_seed, sim, cont, sel))
    results: dict[tuple[int, int], EvalReport] = {}
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {
                (cell_idx, rep): pool.submit(run_single, sim, cont, sel,
                                             rep_seed, cfg.test_size, cfg.impute)
                for cell_idx, rep, rep_seed, sim, cont, sel in jobs
            }
            for key, fut in futures.items():
                results[key] = fut.result()
    else:
        for cell_idx, rep, rep_seed, sim, cont, sel in jobs:
            results[(cell_idx, rep)] = run_single(sim, cont, sel, rep_seed,
                                                  cfg.test_size, cfg.impute)
    rows = []
    for cell_idx, rep, rep_seed, sim, cont, sel in jobs:
        report = results[(cell_idx, rep)]
        row = _row(cfg, sim, cont, sel, rep, rep_seed, report)
        writer.writerow(row)
        rows.append(row)
    return rows


def run_experiment(cfg: ExperimentConfig) -> str:
    """Execute the configured mode; returns the results path."""
    cfg.validate()
    cfg.sim.validate()
    cfg.contamination.validate()

    if cfg.mode == "selftest":
        ok = selfcheck.run_all(verbose=True)
        if not ok:
            raise CellensError("selftest failed")
        return cfg.output_path

    if cfg.mode == "fit" and cfg.data_csv is not None:
        fit_csv(cfg.data_csv, cfg.selection, cfg.model_out or "model.json")
        return cfg.model_out or "model.json"
    if cfg.mode == "fit" and cfg.predict_spec is not None:
        spec = cfg.predict_spec
        for key in ("model", "X", "out"):
            if key not in spec:
                raise InvalidConfig(f"predict section missing {key!r}")
        predict_csv(spec["model"], spec["X"], spec["out"])
        return spec["out"]

    out = Path(cfg.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        if cfg.mode == "fit":
            cells = [(cfg.sim, cfg.contamination, cfg.selection)]
            _run_grid(cfg, cells, cfg.replications, writer)
        elif cfg.mode == "sweep-k":
            cells = [(cfg.sim, cfg.contamination, replace(cfg.selection, K=k))
                     for k in cfg.k_grid]
            _run_grid(cfg, cells, cfg.replications, writer)
        elif cfg.mode == "sweep-contamination":
            cells = []
            for scen in cfg.scenario_grid:
                if scen == "Clean":
                    cells.append((cfg.sim, ContaminationSpec(scenario="Clean"),
                                  cfg.selection))
                    continue
                for alpha in cfg.alpha_grid:
                    spec = replace(cfg.contamination, scenario=scen, alpha=alpha)
                    if scen.startswith("Mixture") and spec.alpha2 <= 0:
                        spec = replace(spec, alpha2=0.05)
                    cells.append((cfg.sim, spec, cfg.selection))
            _run_grid(cfg, cells, cfg.replications, writer)
        elif cfg.mode == "benchmark":
            cells = []
            for n in cfg.n_grid:
                for p in cfg.p_grid:
                    sim = replace(cfg.sim, n=n, p=p)
                    cells.append((sim, cfg.contamination, cfg.selection))
            rows = _run_grid(cfg, cells, cfg.benchmark_reps, writer)
            _write_benchmark_medians(out, rows)
    return str(out)


def _write_benchmark_medians(out: Path, rows: list[list]) -> None:
    """Companion CSV with the median fit time per (n, p) cell."""
    cells: dict[tuple, list[float]] = {}
    idx_n = RESULT_COLUMNS.index("n")
    idx_p = RESULT_COLUMNS.index("p")
    idx_k = RESULT_COLUMNS.index("K")
    idx_t = RESULT_COLUMNS.index("cpu_seconds")
    for row in rows:
        key = (row[idx_n], row[idx_p], row[idx_k])
        cells.setdefault(key, []).append(float(row[idx_t]))
    med_path = out.with_name(out.stem + "_medians.csv")
    with open(med_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema_version", "mode", "n", "p", "K",
                         "median_cpu_seconds"])
        for (n, p, k), times in cells.items():
            writer.writerow([CSV_SCHEMA_VERSION, "benchmark", n, p, k,
                             repr(float(np.median(times)))])


def fit_csv(data_path: str, sel: SelectionConfig, model_out: str) -> str:
    """Fit the full pipeline on a ``y,x1..xp`` CSV and save the model JSON.

    Returns a human-readable selection summary (also printed).

    Raises
    ------
    ShapeMismatch
        On malformed CSV input or fewer than 10 rows.
    DegenerateColumn
        Naming the offending constant column.
    """
    data = dataset_from_csv(data_path)
    if data.n < 10:
        raise ShapeMismatch(f"{data_path}: need at least 10 rows, found {data.n}")
    try:
        result = fit_ensemble(data.y, data.X, sel)
    except DegenerateColumn as exc:
        name = "y" if exc.column == 0 else f"x{exc.column}"
        raise DegenerateColumn(exc.column, name) from None
    doc = model_to_json(result.model)
    Path(model_out).write_text(doc)
    lines = [f"fitted {sel.K} sub-models on {data.n}x{data.p} data"]
    for k, subset in enumerate(result.model.sets):
        cols = ", ".join(f"x{j + 1}" for j in subset) if subset else "(empty)"
        lines.append(f"  model {k}: {cols}")
    lines.append(f"trace length: {len(result.selection.trace)} rounds "
                 f"(stop: {result.selection.stop_reason})")
    summary = "\n".join(lines)
    print(summary)
    return summary


def predict_csv(model_path: str, X_path: str, out_path: str) -> None:
    """Score a saved model on predictor rows, one prediction per row.

    The predictor CSV uses a ``x1..xp`` header (a leading ``y`` column is
    also accepted and ignored).

    Raises
    ------
    ShapeMismatch
        With explicit expected-vs-found column counts.
    """
    model = model_from_json(Path(model_path).read_text())
    with open(X_path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        skip_first = header and header[0] == "y"
        width = len(header) - (1 if skip_first else 0)
        if width != model.p:
            raise ShapeMismatch(
                f"{X_path}: expected {model.p} predictor columns, found {width}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ShapeMismatch(
                    f"{X_path}:{lineno}: expected {len(header)} fields, "
                    f"found {len(row)}"
                )
            vals = row[1:] if skip_first else row
            rows.append([float(v) for v in vals])
    X = np.asarray(rows, dtype=float)
    preds = predict(model, X)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prediction"])
        for v in preds:
            writer.writerow([repr(float(v))])


def main(argv: Optional[list[str]] = None) -> int:
    """Command line entry: see module docstring for modes and exit codes."""
    parser = argparse.ArgumentParser(
        prog="cellens",
        description="Cellwise-robust ensemble regression experiment runner",
    )
    parser.add_argument("--config", help="JSON config path")
    parser.add_argument("--mode", choices=MODES, help="run mode")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="results path")
    parser.add_argument("--threads", type=int, help="parallel replications")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.mode:
            cfg = replace(cfg, mode=args.mode)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.out:
            cfg = replace(cfg, output_path=args.out)
        if args.threads:
            cfg = replace(cfg, threads=args.threads)
        cfg.validate()
        cfg.sim.validate()
        cfg.contamination.validate()
    except (InvalidConfig, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if cfg.mode == "selftest":
        ok = selfcheck.run_all(verbose=True)
        return 0 if ok else 3
    try:
        path = run_experiment(cfg)
    except CellensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"results written to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
