import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robust_koopman.dictionary import FourierCircleDictionary
from robust_koopman.edmd import OperatorEstimate, edmd
from robust_koopman.errors import DimensionError
from robust_koopman.snapshots import SnapshotMatrix, assemble
from robust_koopman.spectrum import analyze, sort_dominant, spectral_distance, write_eigs_csv


def test_half_identity():
    rep = analyze(OperatorEstimate(0.5 * np.eye(3), "EDMD"), dt=1.0)
    np.testing.assert_allclose(rep.discrete_eigs, 0.5)
    np.testing.assert_allclose(rep.continuous_eigs, np.log(0.5))
    assert rep.spectral_radius == pytest.approx(0.5)
    assert rep.unstable_count_discrete == 0 and rep.unstable_count_continuous == 0


def test_unstable_count():
    rep = analyze(np.diag([1.1, 0.9]), tol=1e-3)
    assert rep.unstable_count_discrete == 1
    assert rep.unstable_count_continuous == 1


def test_zero_eigenvalue_sentinel():
    rep = analyze(np.diag([0.0, 2.0]), dt=0.5)
    assert np.isneginf(rep.continuous_eigs[-1].real)
    assert rep.unstable_count_continuous == 1
    doc = json.loads(rep.to_json())
    assert doc["continuous_eigs"][-1] is None


def test_clean_rotation_on_unit_circle():
    theta = np.pi / 320
    x = 1.0 + np.arange(200) * theta
    est = edmd(assemble(FourierCircleDictionary(-50, 50), SnapshotMatrix(x[:, None])))
    rep = analyze(est)
    assert abs(rep.spectral_radius - 1) <= 1e-6
    ref = np.exp(2j * np.pi * np.arange(-50, 51) * theta)
    assert spectral_distance(rep.discrete_eigs, ref) <= 1e-6


def test_sorted_and_dominant():
    rep = analyze(np.diag([0.2, -0.9, 0.5, 0.9]), k_dominant=2)
    np.testing.assert_allclose(rep.discrete_eigs, [0.9, -0.9, 0.5, 0.2])
    np.testing.assert_allclose(rep.dominant, [0.9, -0.9])
    assert rep.spectral_radius == np.abs(rep.discrete_eigs).max()


def test_sort_ties():
    z = np.array([1j, -1j, 1.0, -1.0])
    np.testing.assert_allclose(sort_dominant(z), [1.0, 1j, -1j, -1.0])


def test_conjugate_symmetry(rng):
    lam = analyze(rng.normal(size=(7, 7))).discrete_eigs
    assert spectral_distance(lam, lam.conj()) < 1e-10


def test_distance_basics(rng):
    a = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert spectral_distance(a, a) == 0
    assert spectral_distance(a, rng.permutation(a)) == 0
    assert spectral_distance([1.0], [1.0 + 1e-3]) == pytest.approx(1e-3)
    with pytest.raises(DimensionError):
        spectral_distance(a, a[:3], k=4)


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_distance_pseudometric(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.normal(size=4) + 1j * rng.normal(size=4) for _ in range(3))
    k = 3
    dab, dba = spectral_distance(a, b, k), spectral_distance(b, a, k)
    assert dab == pytest.approx(dba)
    assert spectral_distance(a, c, k) <= dab + spectral_distance(b, c, k) + 1e-12


def test_eigs_csv(tmp_path):
    write_eigs_csv(tmp_path / "e.csv", {"a": np.array([1 + 2j])})
    assert (tmp_path / "e.csv").read_text() == "label,index,re,im\na,0,1,2\n"


def test_bad_arguments():
    with pytest.raises(ValueError):
        analyze(np.eye(2), dt=0.0)
    with pytest.raises(ValueError):
        analyze(np.eye(2), tol=-1.0)
