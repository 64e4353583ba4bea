"""Observable dictionaries.

A dictionary maps a state ``x`` (length ``n``) to a row of ``K`` feature
values ``[psi_1(x), ..., psi_K(x)]``.  Every dictionary here has an analytic
Jacobian, which is what the perturbation bound in :mod:`robust_koopman.robust`
needs.
"""

from __future__ import annotations

import itertools
from typing import Any

import numpy as np

from .errors import ConfigError, DimensionError, DomainError, EmptyDataError

__all__ = [
    "Dictionary",
    "LinearDictionary",
    "MonomialDictionary",
    "FourierCircleDictionary",
    "AngleExponentialDictionary",
    "GaussianRBFDictionary",
    "dictionary_from_config",
    "gram",
]


class Dictionary:
    """Base class. Subclasses implement ``_eval_rows`` and ``_jacobian``."""

    kind: str = "base"
    #: True when every feature is real-valued for real input.
    is_real: bool = True

    def __init__(self, state_dim: int):
        if int(state_dim) < 1:
            raise ConfigError("state_dim must be a positive integer")
        self.state_dim = int(state_dim)

    @property
    def feature_dim(self) -> int:
        raise NotImplementedError

    # -- public API --------------------------------------------------------
    def eval(self, x) -> np.ndarray:
        """Feature vector ``Psi(x)`` of length ``feature_dim``."""
        x = self._check_state(x)
        return self._eval_rows(x[None, :])[0]

    def eval_many(self, X) -> np.ndarray:
        """Evaluate on each row of ``X`` (shape ``(N, n)``); returns ``(N, K)``."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1 and self.state_dim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[1] != self.state_dim:
            raise DimensionError(
                f"expected samples of shape (N, {self.state_dim}), got {X.shape}"
            )
        if not np.all(np.isfinite(X)):
            raise DomainError("samples contain non-finite values")
        return self._eval_rows(X)

    def jacobian(self, x) -> np.ndarray:
        """Analytic Jacobian, shape ``(K, n)``; row k is the gradient of psi_k."""
        x = self._check_state(x)
        return self._jacobian(x)

    def to_config(self) -> dict[str, Any]:
        raise NotImplementedError

    def __repr__(self):
        params = ", ".join(f"{k}={v!r}" for k, v in self.to_config().items())
        return f"{type(self).__name__}({params})"

    def __eq__(self, other):
        return isinstance(other, Dictionary) and self.to_config() == other.to_config()

    def __hash__(self):
        return hash(repr(self))

    # -- helpers -----------------------------------------------------------
    def _check_state(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.ndim != 1 or x.shape[0] != self.state_dim:
            raise DimensionError(
                f"expected a state of length {self.state_dim}, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise DomainError("state contains non-finite values")
        return x

    def _eval_rows(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _jacobian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class LinearDictionary(Dictionary):
    """Identity observables, ``Psi(x) = x``."""

    kind = "linear"

    @property
    def feature_dim(self):
        return self.state_dim

    def _eval_rows(self, X):
        return X.copy()

    def _jacobian(self, x):
        return np.eye(self.state_dim)

    def to_config(self):
        return {"kind": self.kind, "state_dim": self.state_dim}


class MonomialDictionary(Dictionary):
    """All monomials of total degree ``<= degree``, constant term first.

    Ordered by total degree, then lexicographically in the variable indices.
    """

    kind = "monomial"

    def __init__(self, state_dim: int, degree: int):
        super().__init__(state_dim)
        if int(degree) < 0:
            raise ConfigError("degree must be nonnegative")
        self.degree = int(degree)
        exps = []
        for d in range(self.degree + 1):
            for combo in itertools.combinations_with_replacement(range(self.state_dim), d):
                e = np.zeros(self.state_dim, dtype=int)
                for j in combo:
                    e[j] += 1
                exps.append(e)
        self.exponents = np.array(exps, dtype=int)

    @property
    def feature_dim(self):
        return len(self.exponents)

    def _eval_rows(self, X):
        return np.prod(X[:, None, :] ** self.exponents[None, :, :], axis=2)

    def _jacobian(self, x):
        E = self.exponents
        J = np.zeros((len(E), self.state_dim))
        for j in range(self.state_dim):
            lowered = E.copy()
            lowered[:, j] = np.maximum(E[:, j] - 1, 0)
            J[:, j] = E[:, j] * np.prod(x[None, :] ** lowered, axis=1)
        return J

    def to_config(self):
        return {"kind": self.kind, "state_dim": self.state_dim, "degree": self.degree}


class _IndexedExponential(Dictionary):
    """``exp(i * scale * k * x[coordinate])`` for integer k in ``[n_min, n_max]``."""

    is_real = False

    def __init__(self, n_min: int, n_max: int, state_dim: int = 1, coordinate: int = 0):
        super().__init__(state_dim)
        if int(n_max) < int(n_min):
            raise ConfigError("n_max must be >= n_min")
        if not 0 <= int(coordinate) < self.state_dim:
            raise ConfigError("coordinate out of range")
        self.n_min, self.n_max = int(n_min), int(n_max)
        self.coordinate = int(coordinate)
        self.indices = np.arange(self.n_min, self.n_max + 1)

    @property
    def _scale(self) -> float:
        raise NotImplementedError

    @property
    def feature_dim(self):
        return len(self.indices)

    def _eval_rows(self, X):
        u = X[:, self.coordinate]
        return np.exp(1j * self._scale * np.outer(u, self.indices))

    def _jacobian(self, x):
        J = np.zeros((self.feature_dim, self.state_dim), dtype=complex)
        w = 1j * self._scale * self.indices
        J[:, self.coordinate] = w * np.exp(w * x[self.coordinate])
        return J


class FourierCircleDictionary(_IndexedExponential):
    """``psi_k(x) = exp(2 pi i k x / period)``; periodic in x with the given period."""

    kind = "fourier_circle"

    def __init__(self, n_min: int, n_max: int, period: float = 1.0,
                 state_dim: int = 1, coordinate: int = 0):
        super().__init__(n_min, n_max, state_dim, coordinate)
        if not period > 0:
            raise ConfigError("period must be positive")
        self.period = float(period)

    @property
    def _scale(self):
        return 2.0 * np.pi / self.period

    def to_config(self):
        return {"kind": self.kind, "n_min": self.n_min, "n_max": self.n_max,
                "period": self.period, "state_dim": self.state_dim,
                "coordinate": self.coordinate}


class AngleExponentialDictionary(_IndexedExponential):
    """``psi_k(theta) = exp(i k theta)`` on an angle coordinate."""

    kind = "angle_exponential"

    @property
    def _scale(self):
        return 1.0

    def to_config(self):
        return {"kind": self.kind, "n_min": self.n_min, "n_max": self.n_max,
                "state_dim": self.state_dim, "coordinate": self.coordinate}


class GaussianRBFDictionary(Dictionary):
    """Gaussian bumps ``exp(-|x - c|^2 / width^2)``, one per center, in center order."""

    kind = "gaussian_rbf"

    def __init__(self, centers, width: float):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        if centers.shape[0] < 1:
            raise ConfigError("at least one center is required")
        super().__init__(centers.shape[1])
        if not width > 0:
            raise ConfigError("width must be positive")
        self.centers = centers
        self.width = float(width)

    @property
    def feature_dim(self):
        return self.centers.shape[0]

    def _eval_rows(self, X):
        d2 = ((X[:, None, :] - self.centers[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-d2 / self.width**2)

    def _jacobian(self, x):
        diff = x[None, :] - self.centers
        phi = np.exp(-(diff**2).sum(axis=1) / self.width**2)
        return (-2.0 / self.width**2) * phi[:, None] * diff

    def to_config(self):
        return {"kind": self.kind, "centers": self.centers.tolist(), "width": self.width}


_KINDS = {
    cls.kind: cls
    for cls in (LinearDictionary, MonomialDictionary, FourierCircleDictionary,
                AngleExponentialDictionary, GaussianRBFDictionary)
}


def dictionary_from_config(cfg: dict) -> Dictionary:
    """Build a dictionary from ``{"kind": ..., **params}``."""
    cfg = dict(cfg)
    try:
        cls = _KINDS[cfg.pop("kind")]
    except KeyError as exc:
        raise ConfigError(f"unknown dictionary kind: {exc.args[0]!r}") from None
    try:
        return cls(**cfg)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def gram(dictionary: Dictionary, samples) -> np.ndarray:
    """Empirical Gram matrix ``(1/M) sum_m Psi(x_m)^H Psi(x_m)``.

    ``samples`` is a :class:`~robust_koopman.snapshots.SnapshotMatrix` or an
    ``(M, n)`` array.  The result is Hermitian by construction.
    """
    X = getattr(samples, "states", samples)
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        raise EmptyDataError("gram needs at least one sample")
    Psi = dictionary.eval_many(X)
    L = Psi.conj().T @ Psi / Psi.shape[0]
    return 0.5 * (L + L.conj().T)
