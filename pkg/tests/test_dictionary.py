import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robust_koopman.dictionary import (AngleExponentialDictionary, FourierCircleDictionary,
                                       GaussianRBFDictionary, LinearDictionary, MonomialDictionary,
                                       dictionary_from_config, gram)
from robust_koopman.errors import ConfigError, DimensionError, DomainError, EmptyDataError
from robust_koopman.snapshots import SnapshotMatrix

DICTS = [
    LinearDictionary(3),
    MonomialDictionary(2, 3),
    FourierCircleDictionary(-3, 3, period=1.0),
    FourierCircleDictionary(-2, 2, period=2.5, state_dim=2, coordinate=1),
    AngleExponentialDictionary(-4, 4),
    GaussianRBFDictionary(np.array([[0.0, 0.0], [1.0, -0.5], [0.3, 0.7]]), 0.8),
]


def test_linear_eval():
    np.testing.assert_array_equal(LinearDictionary(2).eval([1.0, 2.0]), [1.0, 2.0])


def test_fourier_at_zero_is_ones():
    np.testing.assert_allclose(FourierCircleDictionary(-1, 1).eval([0.0]), [1, 1, 1])


def test_angle_exponential_at_pi():
    d = AngleExponentialDictionary(-10, 10)
    v = d.eval([np.pi])
    assert abs(v[11] - (-1.0)) < 1e-12  # index of n = +1


def test_feature_dims():
    assert FourierCircleDictionary(-50, 50).feature_dim == 101
    assert MonomialDictionary(2, 2).feature_dim == 6
    assert LinearDictionary(4).feature_dim == 4


def test_monomial_order():
    d = MonomialDictionary(2, 2)
    # constant, x, y, x^2, xy, y^2
    np.testing.assert_allclose(d.eval([2.0, 3.0]), [1, 2, 3, 4, 6, 9])


def test_linear_jacobian_identity():
    np.testing.assert_array_equal(LinearDictionary(3).jacobian([0.3, -1.0, 2.0]), np.eye(3))


def test_fourier_jacobian_value():
    J = FourierCircleDictionary(-1, 1).jacobian([0.0])
    assert abs(J[2, 0] - 2j * np.pi) < 1e-12


@pytest.mark.parametrize("d", DICTS, ids=lambda d: d.kind)
def test_jacobian_matches_central_differences(d, rng):
    h = 1e-6
    for _ in range(5):
        x = rng.uniform(-1, 1, d.state_dim)
        J = d.jacobian(x)
        Jfd = np.empty_like(J)
        for j in range(d.state_dim):
            e = np.zeros(d.state_dim)
            e[j] = h
            Jfd[:, j] = (d.eval(x + e) - d.eval(x - e)) / (2 * h)
        err = np.linalg.norm(J - Jfd) / max(np.linalg.norm(J), 1e-12)
        assert err < 1e-5


@pytest.mark.parametrize("d", DICTS, ids=lambda d: d.kind)
def test_eval_is_deterministic_and_many_agrees(d, rng):
    X = rng.uniform(-1, 1, (7, d.state_dim))
    P = d.eval_many(X)
    assert P.shape == (7, d.feature_dim)
    for i in range(7):
        np.testing.assert_array_equal(P[i], d.eval(X[i]))
    np.testing.assert_array_equal(P, d.eval_many(X))


@given(st.floats(-100, 100, allow_nan=False))
@settings(max_examples=50, deadline=None)
def test_fourier_periodic(x):
    d = FourierCircleDictionary(-5, 5, period=1.7)
    np.testing.assert_allclose(d.eval([x]), d.eval([x + 1.7]), atol=1e-12 * max(1, abs(x)) * 50)


def test_errors():
    d = LinearDictionary(2)
    with pytest.raises(DimensionError):
        d.eval([1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        d.eval([np.nan, 1.0])
    with pytest.raises(DomainError):
        d.jacobian([np.inf, 1.0])


def test_config_roundtrip():
    for d in DICTS:
        assert dictionary_from_config(d.to_config()) == d
    with pytest.raises(ConfigError):
        dictionary_from_config({"kind": "hermite"})


def test_gram_constant_observable():
    d = MonomialDictionary(1, 0)
    np.testing.assert_allclose(gram(d, np.array([[0.3], [1.2], [-4.0]])), [[1.0]])


def test_gram_fourier_uniform_samples():
    d = FourierCircleDictionary(-2, 2)
    x = (np.arange(1000) / 1000.0)[:, None]
    Lam = gram(d, x)
    off = Lam - np.diag(np.diag(Lam))
    np.testing.assert_allclose(np.diag(Lam), 1.0, atol=1e-12)
    assert np.abs(off).max() < 0.1


def test_gram_random_uniform_samples(rng):
    d = FourierCircleDictionary(-2, 2)
    Lam = gram(d, rng.uniform(0, 1, (1000, 1)))
    assert np.abs(Lam - np.eye(5)).max() < 0.1


def test_gram_linear_identity_rows():
    np.testing.assert_allclose(gram(LinearDictionary(4), np.eye(4)), np.eye(4) / 4)


@pytest.mark.parametrize("d", DICTS, ids=lambda d: d.kind)
def test_gram_hermitian_psd(d, rng):
    snap = SnapshotMatrix(rng.uniform(-1, 1, (30, d.state_dim)))
    Lam = gram(d, snap)
    np.testing.assert_array_equal(Lam, Lam.conj().T)
    assert np.linalg.eigvalsh(Lam).min() >= -1e-10


def test_gram_empty():
    with pytest.raises(EmptyDataError):
        gram(LinearDictionary(2), np.zeros((0, 2)))
