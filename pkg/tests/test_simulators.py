import warnings

import numpy as np
import pytest

from robust_koopman.dictionary import AngleExponentialDictionary
from robust_koopman.edmd import edmd
from robust_koopman.errors import ConfigError, NumericalError
from robust_koopman.simulators import (BurgersParams, RotationParams, StuartLandauParams,
                                       burgers_grid, simulate_burgers, simulate_linear,
                                       simulate_rotation, simulate_stuart_landau,
                                       stable_linear_system)
from robust_koopman.snapshots import assemble


def test_rotation_noise_free():
    s = simulate_rotation(RotationParams(np.pi / 320, 0.0, 1.0), 3, 0)
    np.testing.assert_allclose(s.states[:, 0], [1, 1 + np.pi / 320, 1 + 2 * np.pi / 320])


def test_rotation_determinism():
    p = RotationParams()
    a = simulate_rotation(p, 100, 7).states
    assert np.array_equal(a, simulate_rotation(p, 100, 7).states)
    b = simulate_rotation(p, 100, 8).states
    assert a[1, 0] != b[1, 0]


def test_rotation_mean_increment():
    h = 0.7
    s = simulate_rotation(RotationParams(np.pi / 320, h), 100001, 3)
    inc = np.diff(s.states[:, 0])
    assert abs(inc.mean() - np.pi / 320) <= 3 * h / np.sqrt(1e5)


def test_rotation_params():
    with pytest.raises(ConfigError):
        RotationParams(noise_halfwidth=-0.1)


def test_stuart_landau_fixed_point():
    p = StuartLandauParams(mu=1.0, gamma=1.3, beta=0.2, sigma_p=0.0, obs_halfwidth=0.0)
    S, Y = simulate_stuart_landau(p, 50, 0)
    np.testing.assert_allclose(S.states[:, 0], 1.0, atol=1e-15)
    np.testing.assert_allclose(np.diff(S.states[:, 1]), (1.3 - 0.2) * 0.01, atol=1e-14)
    assert Y.shape == (21, 50)
    np.testing.assert_allclose(Y[11], np.exp(1j * S.states[:, 1]))


def test_stuart_landau_radius_relaxes_monotonically():
    p = StuartLandauParams(mu=1.0, sigma_p=0.0, obs_halfwidth=0.0, r0=0.8)
    S, _ = simulate_stuart_landau(p, 400, 0)
    gap = np.abs(S.states[:, 0] - 1.0)
    assert np.all(np.diff(gap) < 0)


def test_stuart_landau_noise_free_spectrum_unit_circle():
    p = StuartLandauParams(sigma_p=0.0, obs_halfwidth=0.0)
    S, _ = simulate_stuart_landau(p, 700, 0)
    d = AngleExponentialDictionary(-10, 10, state_dim=2, coordinate=1)
    lam = edmd(assemble(d, S)).eigenvalues()
    assert np.abs(np.abs(lam) - 1).max() <= 1e-3


def test_stuart_landau_determinism_and_streams():
    p = StuartLandauParams()
    S1, Y1 = simulate_stuart_landau(p, 30, 5)
    S2, Y2 = simulate_stuart_landau(p, 30, 5)
    assert np.array_equal(S1.states, S2.states) and np.array_equal(Y1, Y2)
    # observation noise does not disturb the state stream
    S3, _ = simulate_stuart_landau(StuartLandauParams(obs_halfwidth=0.5), 30, 5)
    assert np.array_equal(S1.states, S3.states)


def test_stuart_landau_clamp_warns():
    p = StuartLandauParams(mu=-50.0, sigma_p=0.0, r0=0.5, dt=0.1)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        S, _ = simulate_stuart_landau(p, 5, 0)
    assert S.states[:, 0].min() >= 1e-6
    assert any("clamped" in str(w.message) for w in caught)


def test_stuart_landau_params():
    with pytest.raises(ConfigError):
        StuartLandauParams(dt=0.0)
    with pytest.raises(ConfigError):
        StuartLandauParams(r0=0.0)


def test_burgers_shape_and_initial_condition():
    p = BurgersParams()
    S = simulate_burgers(p, 0)
    assert S.states.shape == (51, 100)
    np.testing.assert_allclose(S.states[0], np.sin(2 * np.pi * burgers_grid(p)))


def test_burgers_energy_nonincreasing():
    S = simulate_burgers(BurgersParams(sigma_p=0.0, t_end=2.3), 0).states
    E = (S**2).sum(axis=1)
    assert np.diff(E).max() <= 1e-10


def test_burgers_grid_refinement():
    coarse = simulate_burgers(BurgersParams(sigma_p=0.0, t_end=0.5), 0).states[-1]
    fine = simulate_burgers(BurgersParams(sigma_p=0.0, dx=0.005, t_end=0.5), 0).states[-1]
    fine_on_coarse = fine.reshape(-1, 2).mean(axis=1)
    rel = np.sqrt(np.mean((coarse - fine_on_coarse) ** 2)) / np.sqrt(np.mean(fine_on_coarse**2))
    assert rel < 0.05


def test_burgers_determinism():
    p = BurgersParams(t_end=0.2)
    assert np.array_equal(simulate_burgers(p, 4).states, simulate_burgers(p, 4).states)
    assert not np.array_equal(simulate_burgers(p, 4).states, simulate_burgers(p, 5).states)


def test_burgers_divergence_detected():
    with pytest.raises(NumericalError):
        simulate_burgers(BurgersParams(k=0.0, sigma_p=0.0, dt=0.5, t_end=50.0), 0,
                         u0=50 * np.sin(2 * np.pi * burgers_grid(BurgersParams())))


def test_burgers_params():
    with pytest.raises(ConfigError):
        BurgersParams(dx=0.03)
    with pytest.raises(ConfigError):
        BurgersParams(dx=0.5)


def test_linear_system_stable_and_noise():
    Ad = stable_linear_system(21, 0.2, 2024)
    assert np.abs(np.linalg.eigvals(Ad)).max() < 1
    clean, obs = simulate_linear(Ad, np.ones(21), 25, 0, obs_halfwidth=0.4, dt=0.2)
    assert clean.states.shape == (25, 21)
    assert np.abs(obs.states - clean.states).max() <= 0.4
    np.testing.assert_allclose(clean.states[1], Ad @ np.ones(21))
