"""Command-line pipelines.

Usage::

    robust-koopman simulate --config run.json
    robust-koopman fit      --config run.json [--data traj.csv]
    robust-koopman spectrum --estimates out/estimate_edmd.json ... --dt 0.01
    robust-koopman predict  --config run.json --estimate out/estimate_edmd.json
    robust-koopman bench    --config bench.json [--workers 4]

A run is described by one JSON file (see ``CONFIG_KEYS``); command-line
flags override its fields.  Exit codes: 0 success, 2 usage or config error,
3 numerical failure, 4 I/O error.  Outputs go to ``output_dir`` (config),
``--out``, or ``$ROBUST_KOOPMAN_OUTPUT_DIR``, in that order of precedence
from flag to environment, defaulting to ``./output``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import experiments as ex
from .dictionary import dictionary_from_config
from .edmd import OperatorEstimate, complex_to_json
from .errors import ConfigError, KoopmanError, NumericalError, UnsupportedDictionaryError
from .robust import RobustConfig
from .simulators import (BurgersParams, LinearParams, RotationParams, StuartLandauParams,
                         simulate_burgers, simulate_linear, simulate_rotation,
                         simulate_stuart_landau, stable_linear_system, streams)
from .snapshots import SnapshotMatrix, read_csv
from .spectrum import analyze

log = logging.getLogger("robust_koopman")

ENV_OUTPUT = "ROBUST_KOOPMAN_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

CONFIG_KEYS = {
    "experiment", "params", "dictionary", "data", "estimators", "train", "horizon",
    "seed", "seeds", "steps", "output_dir", "tolerances", "train_sizes", "workers",
}
TOLERANCE_KEYS = {"solver_tol", "lasso_tol", "rcond", "max_iter", "spectrum_tol", "k_dominant"}

#: params accepted by each experiment when building trials (fit / predict / bench)
TRIAL_PARAMS = {
    "rotation": {"theta", "noise_halfwidth", "x0", "n_min", "n_max", "n_reference"},
    "stuart_landau": {f.name for f in fields(StuartLandauParams)},
    "burgers": {f.name for f in fields(BurgersParams)} | {"obs_halfwidth"},
    "linear_synthetic": {"dim", "dt", "obs_halfwidth", "system_seed"},
    "from_csv": set(),
}
SIM_PARAMS = {
    "rotation": {f.name for f in fields(RotationParams)},
    "stuart_landau": {f.name for f in fields(StuartLandauParams)},
    "burgers": {f.name for f in fields(BurgersParams)},
    "linear_synthetic": {f.name for f in fields(LinearParams)},
}
DEFAULT_TRAIN = {"rotation": 51, "stuart_landau": 30, "burgers": 100, "linear_synthetic": 25}
DEFAULT_HORIZON = {"rotation": 0, "stuart_landau": 10, "burgers": 15, "linear_synthetic": 0}


# -- config handling -------------------------------------------------------------
def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def validate(cfg: dict, command: str) -> dict:
    """Schema check before any computation; returns a normalized copy."""
    cfg = dict(cfg)
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    exp = cfg.get("experiment")
    if exp is None:
        raise ConfigError("missing required field 'experiment'")
    if exp not in TRIAL_PARAMS:
        raise ConfigError(f"unknown experiment {exp!r}")
    params = cfg.setdefault("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    allowed = SIM_PARAMS.get(exp, set()) if command == "simulate" else TRIAL_PARAMS[exp]
    bad = set(params) - allowed
    if bad:
        raise ConfigError(f"unknown params for {exp}: {sorted(bad)}")
    tol = cfg.setdefault("tolerances", {})
    if set(tol) - TOLERANCE_KEYS:
        raise ConfigError(f"unknown tolerance keys: {sorted(set(tol) - TOLERANCE_KEYS)}")

    if "seed" in cfg and "seeds" in cfg:
        raise ConfigError("give either seed or seeds, not both")
    seeds = cfg.pop("seeds", None) or [cfg.pop("seed", 0)]
    if not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds):
        raise ConfigError("seeds must be nonnegative integers")
    cfg["seeds"] = list(seeds)
    cfg.pop("seed", None)

    if command == "simulate":
        if exp == "from_csv":
            raise ConfigError("simulate needs a synthetic experiment")
        if exp != "burgers":
            if "steps" not in cfg:
                raise ConfigError("missing required field 'steps'")
            if not isinstance(cfg["steps"], int) or cfg["steps"] < 2:
                raise ConfigError("steps must be an integer >= 2")
    if command in ("fit", "predict", "bench"):
        cfg["estimators"] = ex.check_estimators(cfg.get("estimators"))
        if exp == "from_csv":
            if "dictionary" not in cfg:
                raise ConfigError("from_csv needs a dictionary")
            cfg["dictionary"] = dictionary_from_config(cfg["dictionary"]).to_config()
        elif "dictionary" in cfg:
            raise ConfigError(f"the {exp} experiment fixes its own dictionary")
    for key in ("train", "horizon"):
        if key in cfg and (not isinstance(cfg[key], int) or cfg[key] < 0):
            raise ConfigError(f"{key} must be a nonnegative integer")
    if command == "bench":
        sizes = cfg.get("train_sizes") or [cfg.get("train", DEFAULT_TRAIN.get(exp, 0))]
        if not all(isinstance(n, int) and n >= 4 for n in sizes):
            raise ConfigError("train_sizes must be integers >= 4")
        cfg["train_sizes"] = list(sizes)
        w = cfg.get("workers", 1)
        if not isinstance(w, int) or w < 1:
            raise ConfigError("workers must be a positive integer")
    return cfg


def robust_config(cfg: dict) -> RobustConfig:
    tol = cfg.get("tolerances", {})
    kw = {k: tol[k] for k in ("solver_tol", "lasso_tol", "rcond", "max_iter") if k in tol}
    try:
        return RobustConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def output_dir(cfg: dict, flag: str | None) -> Path:
    return Path(flag or cfg.get("output_dir") or os.environ.get(ENV_OUTPUT) or "output")


# -- atomic writer ------------------------------------------------------------------
class Outputs:
    """Collects artifacts in memory and commits them atomically (temp file + rename)."""

    def __init__(self, root: Path):
        self.root = root
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def commit(self) -> list[Path]:
        self.root.mkdir(parents=True, exist_ok=True)
        written = []
        for name in sorted(self.files):
            dest = self.root / name
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{name}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                    fh.write(self.files[name])
                os.replace(tmp, dest)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            written.append(dest)
        return written


def _f(v) -> str:
    v = float(v)
    return repr(v) if np.isfinite(v) else str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def states_csv(states: np.ndarray) -> str:
    X = np.atleast_2d(states)
    return _csv([f"x{j}" for j in range(X.shape[1])], [[_f(v) for v in row] for row in X])


def observations_csv(Y: np.ndarray) -> str:
    """Complex observations (rows = time) as ``[re, im]`` column pairs."""
    Y = np.atleast_2d(Y)
    header = [f"{p}{j}" for j in range(Y.shape[1]) for p in ("re", "im")]
    rows = [[_f(x) for z in row for x in (z.real, z.imag)] for row in Y]
    return _csv(header, rows)


# -- commands -----------------------------------------------------------------------
def cmd_simulate(cfg: dict, out: Outputs) -> None:
    exp, p, seed = cfg["experiment"], cfg["params"], cfg["seeds"][0]
    meta = {"experiment": exp, "seed": seed, "params": p}
    if exp == "rotation":
        snap = simulate_rotation(RotationParams(**p), cfg["steps"], seed)
    elif exp == "stuart_landau":
        snap, Y = simulate_stuart_landau(StuartLandauParams(**p), cfg["steps"], seed)
        out.add("observations.csv", observations_csv(Y.T))
    elif exp == "burgers":
        snap = simulate_burgers(BurgersParams(**p), seed)
    else:
        lp = LinearParams(**p)
        Ad = stable_linear_system(lp.dim, lp.dt, lp.system_seed)
        x0 = streams(seed, 3)[2].normal(size=lp.dim)
        snap, obs = simulate_linear(Ad, x0, cfg["steps"], seed, lp.proc_halfwidth,
                                    lp.obs_halfwidth, lp.dt)
        out.add("observations.csv", states_csv(obs.states))
    meta.update(dt=snap.dt, n_snapshots=snap.n_snapshots, state_dim=snap.state_dim)
    out.add("trajectory.csv", states_csv(snap.states))
    out.add("metadata.json", _json(meta))


def build_trial(cfg: dict, seed: int, n_train: int | None = None) -> ex.Trial:
    exp, p = cfg["experiment"], dict(cfg["params"])
    n = n_train if n_train is not None else cfg.get("train", DEFAULT_TRAIN.get(exp))
    h = cfg.get("horizon", DEFAULT_HORIZON.get(exp, 0))
    if exp == "from_csv":
        if "data" not in cfg:
            raise ConfigError("from_csv needs a data path (config 'data' or --data)")
        try:
            snap = read_csv(cfg["data"])
        except OSError as exc:
            raise IOError(f"cannot read {cfg['data']}: {exc}") from exc
        return ex.features_trial(dictionary_from_config(cfg["dictionary"]), snap, n, h)
    if exp == "stuart_landau":
        return ex.stuart_landau_trial(seed, n, h, StuartLandauParams(**p))
    if exp == "burgers":
        obs = p.pop("obs_halfwidth", 0.2)
        p.setdefault("t_end", (n + h) * p.get("dt", 0.02))
        return ex.burgers_trial(seed, n, h, BurgersParams(**p), obs)
    if exp == "rotation":
        return ex.rotation_trial(seed, n, h, **p)
    return ex.linear_trial(seed, n, h, **p)


def _estimate_doc_extra(cfg, trial, seed, n_train):
    extra = {"experiment": cfg["experiment"], "seed": seed, "train": n_train}
    if trial.dictionary is not None:
        extra["dictionary"] = trial.dictionary.to_config()
    return extra


def cmd_fit(cfg: dict, out: Outputs) -> None:
    seed = cfg["seeds"][0]
    trial = build_trial(cfg, seed)
    rc = robust_config(cfg)
    for spec in cfg["estimators"]:
        t0 = time.perf_counter()
        est = ex.fit_estimator(trial, spec, rc)
        if "lambda_from_rho" in est.info:
            log.info("%s: lambda set from rho=%g to %.17g", spec["label"], spec["rho"],
                     est.info["lambda_from_rho"])
        log.info("%s: residual %.6g, wall time %.3fs", spec["label"], est.residual,
                 time.perf_counter() - t0)
        extra = _estimate_doc_extra(cfg, trial, seed, len(trial.features))
        out.add(f"estimate_{spec['label']}.json", est.to_json(label=spec["label"], **extra))


def cmd_spectrum(paths, dt: float, tol: float, k: int, out: Outputs) -> None:
    columns = {}
    for path in paths:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise IOError(f"cannot read {path}: {exc}") from exc
        try:
            est = OperatorEstimate.from_json(text)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"{path} is not an estimate file: {exc}") from None
        rep = analyze(est, dt, tol, k)
        stem = Path(path).stem.removeprefix("estimate_")
        out.add(f"spectrum_{stem}.json", rep.to_json())
        columns[stem] = rep.discrete_eigs
    rows = [[label, i, _f(z.real), _f(z.imag)]
            for label, eigs in columns.items() for i, z in enumerate(eigs)]
    out.add("eigenvalues.csv", _csv(["label", "index", "re", "im"], rows))


def cmd_predict(cfg: dict, est_path, out: Outputs) -> None:
    seed = cfg["seeds"][0]
    trial = build_trial(cfg, seed)
    try:
        est = OperatorEstimate.from_json(Path(est_path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IOError(f"cannot read {est_path}: {exc}") from exc
    if est.dim != trial.features.shape[1]:
        raise ConfigError(f"estimate is {est.dim}-dimensional, features are {trial.features.shape[1]}")
    if not len(trial.truth):
        raise ConfigError("horizon is 0; nothing to predict")
    pred = ex.predict_trial(trial, est)
    row = ex.evaluate(trial, est)
    out.add("prediction.csv", states_csv(np.real(pred)))
    out.add("prediction_error.csv",
            _csv(["step", "error"], [[i + 1, _f(e)] for i, e in enumerate(row["per_step_error"])]))


def _bench_job(args):
    cfg, seed, n_train = args
    trial = build_trial(cfg, seed, n_train)
    rc = robust_config(cfg)
    rows = []
    for spec in cfg["estimators"]:
        est = ex.fit_estimator(trial, spec, rc)
        r = ex.evaluate(trial, est)
        rows.append([seed, n_train, spec["label"], _f(r["spectral_radius"]),
                     _f(r["spectral_distance"]), _f(r["mean_error"]), _f(r["final_error"])])
    return rows


def cmd_bench(cfg: dict, out: Outputs, workers: int = 1) -> None:
    jobs = [(cfg, s, n) for n in cfg["train_sizes"] for s in cfg["seeds"]]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_bench_job, jobs))
    else:
        results = [_bench_job(j) for j in jobs]
    rows = [r for chunk in results for r in chunk]
    header = ["seed", "train", "estimator", "spectral_radius", "spectral_distance",
              "mean_error", "final_error"]
    out.add("bench.csv", _csv(header, rows))
    out.add("bench_config.json", _json({k: v for k, v in cfg.items() if k != "workers"}))


# -- entry point ----------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robust-koopman",
                                 description="Robust Koopman / Perron-Frobenius estimation pipelines.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="run configuration (JSON)")
        p.add_argument("--out", help="output directory (overrides config and environment)")
        p.add_argument("--seed", type=int, help="override the seed")

    p = sub.add_parser("simulate", help="generate a trajectory")
    common(p)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("fit", help="fit the configured estimators")
    common(p)
    p.add_argument("--data", help="trajectory CSV (from_csv experiment)")
    p.add_argument("--train", type=int, help="number of training snapshots")

    p = sub.add_parser("spectrum", help="eigenvalue reports for fitted estimates")
    p.add_argument("--estimates", nargs="+", required=True)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--k", type=int, default=10, help="number of dominant eigenvalues")
    p.add_argument("--out")

    p = sub.add_parser("predict", help="lifted prediction with a fitted estimate")
    common(p)
    p.add_argument("--estimate", required=True)
    p.add_argument("--data")
    p.add_argument("--train", type=int)
    p.add_argument("--horizon", type=int)

    p = sub.add_parser("bench", help="multi-seed comparison")
    common(p)
    p.add_argument("--workers", type=int)
    return ap


def _apply_flags(cfg: dict, args) -> dict:
    cfg = dict(cfg)
    if getattr(args, "seed", None) is not None:
        cfg.pop("seeds", None)
        cfg["seed"] = args.seed
    for key in ("steps", "data", "train", "horizon", "workers"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    return cfg


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "spectrum":
            if not args.dt > 0 or args.tol < 0 or args.k < 0:
                raise ConfigError("need dt > 0, tol >= 0 and k >= 0")
            out = Outputs(output_dir({}, args.out))
            cmd_spectrum(args.estimates, args.dt, args.tol, args.k, out)
        else:
            cfg = validate(_apply_flags(load_config(args.config), args), args.command)
            out = Outputs(output_dir(cfg, args.out))
            if args.command == "simulate":
                cmd_simulate(cfg, out)
            elif args.command == "fit":
                cmd_fit(cfg, out)
            elif args.command == "predict":
                cmd_predict(cfg, args.estimate, out)
            else:
                cmd_bench(cfg, out, cfg.get("workers", 1))
        for path in out.commit():
            log.info("wrote %s", path)
        return EXIT_OK
    except (ConfigError, UnsupportedDictionaryError, TypeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except KoopmanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
