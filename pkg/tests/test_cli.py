import csv
import json
import logging

import numpy as np
import pytest

from robust_koopman.cli import run
from robust_koopman.edmd import OperatorEstimate
from robust_koopman.robust import uncertainty_bound
from robust_koopman.simulators import RotationParams, simulate_rotation
from robust_koopman.dictionary import FourierCircleDictionary
from robust_koopman.snapshots import write_csv


def _cfg(tmp_path, doc, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_simulate_deterministic(tmp_path):
    cfg = _cfg(tmp_path, {"experiment": "rotation", "seed": 7, "steps": 100})
    assert run(["simulate", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert run(["simulate", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for f in ("trajectory.csv", "metadata.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    rows = _rows(tmp_path / "a" / "trajectory.csv")
    np.testing.assert_array_equal(np.array(rows[1:], float)[:, 0],
                                  simulate_rotation(RotationParams(), 100, 7).states[:, 0])


def test_missing_field_writes_nothing(tmp_path):
    out = tmp_path / "out"
    cfg = _cfg(tmp_path, {"experiment": "rotation", "seed": 7})
    assert run(["simulate", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()
    cfg = _cfg(tmp_path, {"seed": 7, "steps": 10})
    assert run(["simulate", "--config", cfg, "--out", str(out)]) == 2
    cfg = _cfg(tmp_path, {"experiment": "rotation", "steps": 10, "colour": "red"})
    assert run(["simulate", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()


def test_bad_json_and_missing_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(["simulate", "--config", str(p)]) == 2
    assert run(["simulate", "--config", str(tmp_path / "nope.json")]) == 2
    assert run(["frobnicate"]) == 2


def test_burgers_has_100_columns(tmp_path):
    cfg = _cfg(tmp_path, {"experiment": "burgers", "seed": 0, "params": {"t_end": 0.2}})
    assert run(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "trajectory.csv")
    assert len(rows[0]) == 100 and len(rows) == 12


def test_stuart_landau_observations(tmp_path):
    cfg = _cfg(tmp_path, {"experiment": "stuart_landau", "seed": 0, "steps": 20})
    assert run(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "observations.csv")
    assert len(rows[0]) == 42 and len(rows) == 21


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("ROBUST_KOOPMAN_OUTPUT_DIR", str(tmp_path / "env"))
    cfg = _cfg(tmp_path, {"experiment": "rotation", "steps": 5})
    assert run(["simulate", "--config", cfg]) == 0
    assert (tmp_path / "env" / "trajectory.csv").exists()


def test_fit_lambda_zero_matches_edmd(tmp_path):
    cfg = _cfg(tmp_path, {"experiment": "linear_synthetic", "seed": 1,
                          "estimators": [{"name": "edmd"}, {"name": "robust_tikhonov", "lam": 0}]})
    assert run(["fit", "--config", cfg, "--out", str(tmp_path)]) == 0
    K1 = OperatorEstimate.from_json((tmp_path / "estimate_edmd.json").read_text()).K_matrix
    K2 = OperatorEstimate.from_json((tmp_path / "estimate_robust_tikhonov.json").read_text()).K_matrix
    assert np.linalg.norm(K1 - K2) <= 1e-8


def test_fit_rho_logs_lambda(tmp_path, caplog):
    traj = simulate_rotation(RotationParams(), 40, 3)
    write_csv(traj, tmp_path / "traj.csv")
    dcfg = {"kind": "fourier_circle", "n_min": -3, "n_max": 3}
    cfg = _cfg(tmp_path, {"experiment": "from_csv", "data": str(tmp_path / "traj.csv"),
                          "dictionary": dcfg,
                          "estimators": [{"name": "robust_tikhonov", "rho": 0.01}]})
    with caplog.at_level(logging.INFO, logger="robust_koopman"):
        assert run(["fit", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = FourierCircleDictionary(-3, 3)
    expected = uncertainty_bound(d, traj, 0.01)
    logged = [r.getMessage() for r in caplog.records if "from rho" in r.getMessage()]
    assert logged
    assert float(logged[0].rsplit(" ", 1)[1]) == pytest.approx(expected, rel=1e-14)


def test_nsdmd_complex_dictionary_exit_2(tmp_path):
    write_csv(simulate_rotation(RotationParams(), 30, 0), tmp_path / "traj.csv")
    cfg = _cfg(tmp_path, {"experiment": "from_csv", "data": str(tmp_path / "traj.csv"),
                          "dictionary": {"kind": "fourier_circle", "n_min": -2, "n_max": 2},
                          "estimators": [{"name": "nsdmd"}]})
    out = tmp_path / "out"
    assert run(["fit", "--config", cfg, "--out", str(out)]) == 2
    assert not out.exists()


def test_missing_data_file_exit_4(tmp_path):
    cfg = _cfg(tmp_path, {"experiment": "from_csv", "data": str(tmp_path / "none.csv"),
                          "dictionary": {"kind": "linear", "state_dim": 1},
                          "estimators": [{"name": "edmd"}]})
    assert run(["fit", "--config", cfg, "--out", str(tmp_path / "o")]) == 4


def _write_estimate(path, K):
    path.write_text(OperatorEstimate(np.asarray(K, float), "EDMD").to_json())


def test_spectrum_end_to_end(tmp_path):
    _write_estimate(tmp_path / "estimate_half.json", 0.5 * np.eye(2))
    _write_estimate(tmp_path / "estimate_diag.json", np.diag([1.1, 0.9]))
    out = tmp_path / "out"
    assert run(["spectrum", "--estimates", str(tmp_path / "estimate_half.json"),
                str(tmp_path / "estimate_diag.json"), "--out", str(out)]) == 0
    half = json.loads((out / "spectrum_half.json").read_text())
    assert half["spectral_radius"] == pytest.approx(0.5)
    assert half["unstable_count_discrete"] == 0
    diag = json.loads((out / "spectrum_diag.json").read_text())
    assert diag["unstable_count_discrete"] == 1
    rows = _rows(out / "eigenvalues.csv")
    assert rows[0] == ["label", "index", "re", "im"] and len(rows) == 5
    assert run(["spectrum", "--estimates", str(tmp_path / "missing.json"), "--out", str(out)]) == 4
    assert run(["spectrum", "--estimates", str(tmp_path / "estimate_half.json"), "--dt", "0"]) == 2


def test_predict_end_to_end(tmp_path):
    cfg = _cfg(tmp_path, {"experiment": "linear_synthetic", "seed": 0, "train": 40, "horizon": 8,
                          "params": {"obs_halfwidth": 0.0, "dim": 4},
                          "estimators": [{"name": "edmd"}]})
    assert run(["fit", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert run(["predict", "--config", cfg, "--estimate", str(tmp_path / "estimate_edmd.json"),
                "--out", str(tmp_path / "p")]) == 0
    err = np.array(_rows(tmp_path / "p" / "prediction_error.csv")[1:], float)
    assert err.shape == (8, 2) and err[:, 1].max() < 1e-6
    assert len(_rows(tmp_path / "p" / "prediction.csv")[0]) == 4


def test_bench_rows_and_determinism(tmp_path):
    doc = {"experiment": "rotation", "seeds": list(range(20)),
           "estimators": [{"name": "edmd"}, {"name": "robust_tikhonov", "lam": 1.0}]}
    cfg = _cfg(tmp_path, doc)
    assert run(["bench", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    rows = _rows(tmp_path / "a" / "bench.csv")
    assert len(rows) == 1 + 40
    assert rows[0][:4] == ["seed", "train", "estimator", "spectral_radius"]
    assert run(["bench", "--config", cfg, "--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    assert (tmp_path / "a" / "bench.csv").read_bytes() == (tmp_path / "b" / "bench.csv").read_bytes()


def test_bench_training_sweep(tmp_path):
    cfg = _cfg(tmp_path, {"experiment": "stuart_landau", "seeds": [0, 1],
                          "train_sizes": [10, 20, 30, 40],
                          "estimators": [{"name": "subspace_dmd"}, {"name": "robust_tikhonov", "lam": 0.1}]})
    assert run(["bench", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "bench.csv")[1:]
    assert len(rows) == 16
    assert sorted({int(r[1]) for r in rows}) == [10, 20, 30, 40]
