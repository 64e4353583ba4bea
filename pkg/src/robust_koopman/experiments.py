"""Experiment pipelines shared by the CLI, the acceptance suite and the demos.

A *trial* is one seeded realisation of an experiment: lifted training rows
(time along axis 0), the future ground truth, a readout rule that maps
propagated feature rows back to comparable quantities, and a reference
spectrum when one is known analytically.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dictionary import Dictionary, FourierCircleDictionary, LinearDictionary, gram
from .edmd import OperatorEstimate, dmd, edmd
from .errors import ConfigError
from .nsdmd import nsdmd_robust
from .predictor import fit_output_map, prediction_error
from .robust import RobustConfig, robust_lasso, robust_tikhonov, uncertainty_bound
from .simulators import (BurgersParams, RotationParams, StuartLandauParams, add_observation_noise,
                         simulate_burgers, simulate_linear, simulate_rotation,
                         simulate_stuart_landau, stable_linear_system, streams)
from .snapshots import SnapshotMatrix, assemble_features
from .spectrum import sort_dominant, spectral_distance
from .subspace import subspace_dmd_estimate

__all__ = ["Trial", "ESTIMATOR_PARAMS", "check_estimators", "fit_estimator", "fit_all",
           "predict_trial", "evaluate", "rotation_trial", "stuart_landau_trial",
           "burgers_trial", "linear_trial", "features_trial", "make_trial", "EXPERIMENTS"]

EXPERIMENTS = ("rotation", "stuart_landau", "burgers", "linear_synthetic")

#: accepted parameters per estimator name ("label" is accepted by all)
ESTIMATOR_PARAMS = {
    "edmd": {"rcond"},
    "dmd": {"rank", "rcond"},
    "robust_tikhonov": {"lam", "rho", "squared"},
    "robust_lasso": {"c", "rho"},
    "nsdmd": {"lam", "gram"},
    "subspace_dmd": {"rank", "rcond"},
}


@dataclass
class Trial:
    features: np.ndarray
    truth: np.ndarray
    readout: str = "identity"          # "identity", "output_map" or "angle:<column>"
    angle_columns: tuple = ()
    reference: np.ndarray | None = None
    dictionary: Dictionary | None = None
    states: SnapshotMatrix | None = None
    dt: float = 1.0
    meta: dict = field(default_factory=dict)
    C: np.ndarray | None = None


# -- estimators --------------------------------------------------------------------
def check_estimators(specs) -> list[dict]:
    """Validate an estimator list; returns copies with a ``label`` filled in."""
    if not isinstance(specs, list) or not specs:
        raise ConfigError("estimators must be a non-empty list")
    out, seen = [], set()
    for spec in specs:
        if not isinstance(spec, dict) or "name" not in spec:
            raise ConfigError(f"estimator entry needs a name: {spec!r}")
        name = spec["name"]
        if name not in ESTIMATOR_PARAMS:
            raise ConfigError(f"unknown estimator {name!r}")
        extra = set(spec) - ESTIMATOR_PARAMS[name] - {"name", "label"}
        if extra:
            raise ConfigError(f"unknown keys for {name}: {sorted(extra)}")
        if name == "robust_tikhonov" and ("lam" in spec) == ("rho" in spec):
            raise ConfigError("robust_tikhonov needs exactly one of lam, rho")
        if name == "robust_lasso" and ("c" in spec) == ("rho" in spec):
            raise ConfigError("robust_lasso needs exactly one of c, rho")
        if spec.get("gram", "empirical") not in ("empirical", "identity"):
            raise ConfigError("nsdmd gram must be 'empirical' or 'identity'")
        for key in ("lam", "rho", "c"):
            if key in spec and (not isinstance(spec[key], (int, float)) or spec[key] < 0):
                raise ConfigError(f"{name}.{key} must be a nonnegative number")
        label = spec.get("label", name)
        if label in seen:
            raise ConfigError(f"duplicate estimator label {label!r}")
        seen.add(label)
        out.append({**spec, "label": label})
    return out


def _radius(trial: Trial, rho: float) -> float:
    if trial.dictionary is None or trial.states is None:
        raise ConfigError("rho needs a dictionary over recorded states; give lam instead")
    return uncertainty_bound(trial.dictionary, trial.states, rho)


def fit_estimator(trial: Trial, spec: dict, cfg: RobustConfig | None = None) -> OperatorEstimate:
    """Fit one estimator described by ``spec`` on the trial's training rows."""
    Psi = trial.features
    gp = assemble_features(Psi[:-1], Psi[1:])
    did = None if trial.dictionary is None else trial.dictionary.kind
    name = spec["name"]
    if name == "edmd":
        return edmd(gp, rcond=spec.get("rcond", 1e-12), dict_id=did)
    if name == "dmd":
        return dmd(Psi.T, rank=spec.get("rank"), rcond=spec.get("rcond", 1e-12))
    if name == "robust_tikhonov":
        lam = spec["lam"] if "lam" in spec else _radius(trial, spec["rho"])
        c = replace(cfg or RobustConfig(), squared=bool(spec.get("squared", False)))
        est = robust_tikhonov(gp, lam, c, dict_id=did)
        if "rho" in spec:
            est.info["lambda_from_rho"] = lam
        return est
    if name == "robust_lasso":
        c_ = spec["c"] if "c" in spec else _radius(trial, spec["rho"])
        est = robust_lasso(gp, c_, cfg, dict_id=did)
        if "rho" in spec:
            est.info["lambda_from_rho"] = c_
        return est
    if name == "nsdmd":
        if spec.get("gram", "empirical") == "identity":
            Lam = np.eye(gp.dim)
        else:
            Lam = gp.G if trial.dictionary is None else gram(trial.dictionary, trial.states)
        return nsdmd_robust(gp, Lam, spec.get("lam", 0.0), cfg, trial.dictionary,
                            dict_id=did).estimate
    if name == "subspace_dmd":
        return subspace_dmd_estimate(Psi.T, spec.get("rank"), spec.get("rcond", 1e-12))
    raise ConfigError(f"unknown estimator {name!r}")


def fit_all(trial: Trial, specs, cfg: RobustConfig | None = None) -> dict[str, OperatorEstimate]:
    return {s["label"]: fit_estimator(trial, s, cfg) for s in check_estimators(specs)}


# -- prediction and scoring ----------------------------------------------------------
def _read(trial: Trial, Z: np.ndarray) -> np.ndarray:
    if trial.readout == "identity":
        X = Z
        if np.iscomplexobj(X) and not np.iscomplexobj(trial.truth):
            X = X.real
        return X
    if trial.readout == "output_map":
        X = Z @ trial.C.T
        if np.iscomplexobj(X) and np.abs(X.imag).max(initial=0.0) <= 1e-8 * max(np.abs(X).max(initial=0.0), 1e-300):
            X = X.real
        return X
    if trial.readout.startswith("angle:"):
        j = int(trial.readout.split(":", 1)[1])
        return np.angle(Z[:, j])[:, None]
    raise ConfigError(f"unknown readout {trial.readout!r}")


def predict_trial(trial: Trial, est: OperatorEstimate, horizon: int | None = None) -> np.ndarray:
    """Propagate the last training row ``horizon`` steps and read out."""
    h = len(trial.truth) if horizon is None else int(horizon)
    if h < 1:
        raise ConfigError("horizon must be >= 1")
    K = est.K_matrix
    z = trial.features[-1].astype(np.result_type(trial.features, K))
    Z = np.empty((h, K.shape[1]), dtype=z.dtype)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(h):
            z = z @ K
            Z[t] = z
    return _read(trial, Z)


def evaluate(trial: Trial, est: OperatorEstimate) -> dict:
    """Spectral radius, distance to the reference spectrum and prediction errors."""
    eigs = sort_dominant(est.eigenvalues())
    row = {"spectral_radius": float(np.abs(eigs).max())}
    if trial.reference is not None:
        k = min(len(trial.reference), len(eigs))
        row["spectral_distance"] = spectral_distance(eigs, trial.reference, k)
    else:
        row["spectral_distance"] = float("nan")
    if len(trial.truth):
        pred = predict_trial(trial, est)
        truth = trial.truth if trial.truth.ndim == 2 else trial.truth[:, None]
        with np.errstate(over="ignore", invalid="ignore"):
            per_step, mean = prediction_error(pred, truth, trial.angle_columns)
        row["mean_error"] = mean
        row["final_error"] = float(per_step[-1])
        row["per_step_error"] = per_step
    else:
        row["mean_error"] = row["final_error"] = float("nan")
        row["per_step_error"] = np.zeros(0)
    return row


# -- trial builders --------------------------------------------------------------
def rotation_trial(seed: int, n_train: int = 51, horizon: int = 0, theta: float = np.pi / 320,
                   noise_halfwidth: float = 0.7, n_min: int = -50, n_max: int = 50,
                   x0: float = 1.0, n_reference: int = 10) -> Trial:
    """Rotation on the circle with the Fourier dictionary ``exp(2 pi i k x)``, ``k = n_min..n_max``.

    ``n_train`` counts training snapshots (``n_train - 1`` pairs).  The
    reference spectrum is ``exp(2 pi i k theta)`` for ``|k| <= n_reference``;
    predictions read the phase ``2 pi x`` off the ``k = 1`` feature.
    """
    p = RotationParams(theta, noise_halfwidth, x0)
    snap = simulate_rotation(p, n_train + horizon, seed)
    d = FourierCircleDictionary(n_min, n_max, period=1.0)
    train = snap.window(0, n_train)
    k = np.arange(-n_reference, n_reference + 1)
    return Trial(d.eval_many(train.states), 2 * np.pi * snap.states[n_train:, :1],
                 f"angle:{1 - n_min}", (0,), np.exp(2j * np.pi * k * theta), d, train, 1.0,
                 {"experiment": "rotation", "seed": seed})


def stuart_landau_trial(seed: int, n_train: int = 30, horizon: int = 10,
                        params: StuartLandauParams | None = None) -> Trial:
    """Noisy ``exp(i n theta)`` observations used directly as features.

    Predictions read the angle off the ``n = +1`` observable and are scored
    with the chordal metric against the true phase.
    """
    p = params or StuartLandauParams()
    S, Y = simulate_stuart_landau(p, n_train + horizon, seed)
    k = np.arange(-p.n_obs, p.n_obs + 1)
    ref = np.exp(1j * k * (p.gamma - p.beta * p.mu) * p.dt)
    return Trial(Y[:, :n_train].T.copy(), S.states[n_train:, 1:2], f"angle:{p.n_obs + 1}", (0,),
                 ref, None, None, p.dt, {"experiment": "stuart_landau", "seed": seed})


def burgers_trial(seed: int, n_train: int = 100, horizon: int = 15,
                  params: BurgersParams | None = None, obs_halfwidth: float = 0.2) -> Trial:
    """Stochastic Burgers grid values plus uniform measurement noise.

    The reference spectrum is the EDMD spectrum of the noise-free run over
    the same window.
    """
    p = params or BurgersParams(t_end=(n_train + horizon) * 0.02)
    if p.n_steps + 1 < n_train + horizon:
        raise ConfigError("t_end too short for n_train + horizon")
    X = simulate_burgers(p, seed)
    Y = add_observation_noise(X, obs_halfwidth, seed) if obs_halfwidth else X
    clean = simulate_burgers(BurgersParams(p.k, 0.0, p.dx, p.dt, p.t_end), seed).states[:n_train]
    ref = edmd(assemble_features(clean[:-1], clean[1:])).eigenvalues()
    d = LinearDictionary(X.state_dim)
    train = Y.window(0, n_train)
    return Trial(train.states.copy(), X.states[n_train:n_train + horizon], "identity", (),
                 ref, d, train, p.dt, {"experiment": "burgers", "seed": seed})


def linear_trial(seed: int, n_train: int = 25, horizon: int = 0, dim: int = 21, dt: float = 0.2,
                 obs_halfwidth: float = 0.4, system_seed: int = 2024) -> Trial:
    """Stable linear system observed under uniform noise; ``x0`` is standard normal.

    ``x0`` comes from a third stream of ``seed`` so it is independent of
    the noise.  The reference spectrum is the true one.
    """
    Ad = stable_linear_system(dim, dt, system_seed)
    x0 = streams(seed, 3)[2].normal(size=dim)
    clean, obs = simulate_linear(Ad, x0, n_train + horizon, seed,
                                 obs_halfwidth=obs_halfwidth, dt=dt)
    d = LinearDictionary(dim)
    train = obs.window(0, n_train) if horizon else obs
    return Trial(train.states.copy(), clean.states[n_train:], "identity", (),
                 np.linalg.eigvals(Ad), d, train, dt, {"experiment": "linear_synthetic", "seed": seed})


def features_trial(dictionary: Dictionary, snap: SnapshotMatrix, n_train: int | None = None,
                   horizon: int = 0) -> Trial:
    """Trial from recorded states (``from_csv``): train on the first ``n_train`` rows."""
    n = snap.n_snapshots if n_train is None else int(n_train)
    if n < 2 or n + horizon > snap.n_snapshots:
        raise ConfigError("training window and horizon do not fit the data")
    train = snap.window(0, n)
    return Trial(dictionary.eval_many(train.states), snap.states[n:n + horizon], "output_map", (),
                 None, dictionary, train, snap.dt, {"experiment": "from_csv"},
                 fit_output_map(dictionary, train))


def make_trial(experiment: str, seed: int, **kw) -> Trial:
    builders = {"rotation": rotation_trial, "stuart_landau": stuart_landau_trial,
                "burgers": burgers_trial, "linear_synthetic": linear_trial}
    if experiment not in builders:
        raise ConfigError(f"unknown experiment {experiment!r}")
    return builders[experiment](seed, **kw)
