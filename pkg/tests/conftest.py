import numpy as np
import pytest

from robust_koopman.snapshots import GramPair


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_gp(rng, n, complex_=False, cond=None):
    """Random GramPair with G Hermitian PSD (optionally with a given condition number)."""
    if complex_:
        B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    else:
        B = rng.normal(size=(n, n))
        A = rng.normal(size=(n, n))
    if cond is None:
        G = B.conj().T @ B / n + 0.1 * np.eye(n)
    else:
        Q, _ = np.linalg.qr(B)
        G = Q @ np.diag(np.geomspace(1.0, 1.0 / cond, n)) @ Q.conj().T
    G = 0.5 * (G + G.conj().T)
    return GramPair(G, A, n)


@pytest.fixture
def make_gp():
    return random_gp
