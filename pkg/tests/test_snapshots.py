import json

import numpy as np
import pytest

from robust_koopman.dictionary import FourierCircleDictionary, LinearDictionary, gram
from robust_koopman.edmd import edmd
from robust_koopman.errors import DimensionError, DomainError, EmptyDataError
from robust_koopman.snapshots import (SnapshotMatrix, assemble, concatenate, make_pairs,
                                      read_csv, write_csv)


def test_make_pairs_order():
    s = SnapshotMatrix(np.array([[1.0], [2.0], [3.0]]))
    pairs = make_pairs(s)
    assert len(pairs) == 2
    np.testing.assert_array_equal(pairs[0][0], [1.0])
    np.testing.assert_array_equal(pairs[0][1], [2.0])
    np.testing.assert_array_equal(pairs[1][1], [3.0])


def test_pair_counts():
    assert len(make_pairs(SnapshotMatrix(np.zeros((2, 1))))) == 1
    assert len(make_pairs(SnapshotMatrix(np.zeros((51, 1))))) == 50


def test_too_few_snapshots():
    with pytest.raises(EmptyDataError):
        SnapshotMatrix(np.zeros((1, 2)))


def test_invalid_states():
    with pytest.raises(DomainError):
        SnapshotMatrix(np.array([[1.0], [np.nan]]))
    with pytest.raises((DomainError, ValueError)):
        SnapshotMatrix(np.zeros((3, 1)), dt=0.0)


def test_assemble_scalar_hand_example():
    gp = assemble(LinearDictionary(1), SnapshotMatrix(np.array([[1.0], [0.5], [0.25]])))
    assert gp.M_pairs == 2
    np.testing.assert_allclose(gp.G, [[0.625]])
    np.testing.assert_allclose(gp.A, [[0.3125]])
    np.testing.assert_allclose(np.linalg.solve(gp.G, gp.A), [[0.5]])


def test_constant_trajectory_gives_A_equal_G():
    s = SnapshotMatrix(np.tile([[0.3, -0.2]], (6, 1)))
    gp = assemble(FourierCircleDictionary(-2, 2, state_dim=2), s)
    np.testing.assert_allclose(gp.A, gp.G)


def test_G_hermitian_psd_and_matches_gram(rng):
    d = FourierCircleDictionary(-3, 3)
    s = SnapshotMatrix(rng.uniform(0, 1, (40, 1)))
    gp = assemble(d, s)
    np.testing.assert_array_equal(gp.G, gp.G.conj().T)
    assert np.linalg.eigvalsh(gp.G).min() >= -1e-12
    np.testing.assert_array_equal(gp.G, gram(d, s.states[:-1]))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        assemble(LinearDictionary(2), SnapshotMatrix(np.zeros((4, 3))))


def test_linear_system_recovers_transpose(rng):
    Abar = rng.normal(size=(3, 3)) * 0.4
    X = np.empty((30, 3))
    X[0] = rng.normal(size=3)
    for t in range(29):
        X[t + 1] = Abar @ X[t]
    K = edmd(assemble(LinearDictionary(3), SnapshotMatrix(X))).K_matrix
    assert np.linalg.norm(K - Abar.T) <= 1e-8


def test_concatenate_breaks():
    a = SnapshotMatrix(np.array([[0.0], [1.0], [2.0]]))
    b = SnapshotMatrix(np.array([[10.0], [11.0]]))
    c = concatenate(a, b)
    pairs = make_pairs(c)
    assert len(pairs) == 3
    assert all(abs(q[0] - p[0]) == 1.0 for p, q in pairs)


def test_csv_roundtrip(tmp_path, rng):
    s = SnapshotMatrix(rng.normal(size=(5, 3)), dt=0.25, meta="demo")
    path = tmp_path / "traj.csv"
    write_csv(s, path)
    back = read_csv(path)
    np.testing.assert_array_equal(back.states, s.states)
    assert back.dt == 0.25
    assert json.loads((tmp_path / "traj.csv.json").read_text())["dt"] == 0.25
    assert read_csv(path, dt=2.0).dt == 2.0


def test_states_read_only():
    s = SnapshotMatrix(np.zeros((3, 1)))
    with pytest.raises(ValueError):
        s.states[0, 0] = 1.0
