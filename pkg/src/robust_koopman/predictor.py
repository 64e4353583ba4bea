"""Lifted linear predictor.

An initial state is lifted to its feature row ``z_0 = Psi(x0)``, advanced with
``z_{n+1} = z_n @ K`` and mapped back with ``x_n = C z_n``, where ``C``
solves ``min_C sum_i ||x_i - C Psi(x_i)||^2`` over the training states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionary import Dictionary
from .edmd import OperatorEstimate
from .errors import DimensionError, EmptyDataError
from .snapshots import SnapshotMatrix

__all__ = ["Predictor", "fit_output_map", "prediction_error", "chordal"]


def fit_output_map(dictionary: Dictionary, snap: SnapshotMatrix | np.ndarray,
                   imag_tol: float = 1e-8) -> np.ndarray:
    """Least-squares output matrix ``C`` (shape ``(n, K)``).

    The real part is returned when the imaginary part is below ``imag_tol``
    (relative); otherwise ``C`` stays complex.
    """
    X = np.asarray(getattr(snap, "states", snap), dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 1:
        raise EmptyDataError("need at least one snapshot")
    Psi = dictionary.eval_many(X)
    # X^T = C Psi^T  =>  Psi C^T = X
    Ct, *_ = np.linalg.lstsq(Psi, X.astype(Psi.dtype), rcond=None)
    C = Ct.T
    if np.iscomplexobj(C):
        scale = max(np.abs(C).max(), 1e-300)
        if np.abs(C.imag).max() <= imag_tol * scale:
            C = C.real.copy()
    return C


@dataclass(frozen=True)
class Predictor:
    operator: OperatorEstimate
    C: np.ndarray
    dictionary: Dictionary | None = None

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C))
        if C.shape[1] != self.operator.dim:
            raise DimensionError(
                f"C has {C.shape[1]} columns but the operator is {self.operator.dim}-dimensional"
            )
        object.__setattr__(self, "C", C)

    @classmethod
    def fit(cls, operator: OperatorEstimate, dictionary: Dictionary,
            snap: SnapshotMatrix | np.ndarray) -> "Predictor":
        return cls(operator, fit_output_map(dictionary, snap), dictionary)

    def lift(self, x0) -> np.ndarray:
        if self.dictionary is None:
            raise DimensionError("no dictionary attached; use predict_lifted")
        return self.dictionary.eval(x0)

    def propagate(self, z0, steps: int) -> np.ndarray:
        """Feature rows ``z_1 .. z_steps`` (shape ``(steps, K)``)."""
        if steps < 1:
            raise ValueError("steps must be >= 1")
        z = np.asarray(z0)
        if z.shape != (self.operator.dim,):
            raise DimensionError(f"lifted state must have length {self.operator.dim}")
        K = self.operator.K_matrix
        out = np.empty((steps, K.shape[0]), dtype=np.result_type(z, K))
        for n in range(steps):
            z = z @ K
            out[n] = z
        return out

    def predict_lifted(self, z0, steps: int) -> np.ndarray:
        Z = self.propagate(z0, steps)
        X = Z @ self.C.T
        if np.iscomplexobj(X) and not np.iscomplexobj(self.C) and not np.iscomplexobj(z0):
            X = X.real
        return X

    def predict(self, x0, steps: int) -> np.ndarray:
        """Predicted states ``x_1 .. x_steps`` from ``x0`` (shape ``(steps, n)``)."""
        X = self.predict_lifted(self.lift(x0), steps)
        if np.iscomplexobj(X) and np.abs(X.imag).max() <= 1e-8 * max(np.abs(X).max(), 1e-300):
            X = X.real
        return X


def chordal(theta_a, theta_b) -> np.ndarray:
    """``|exp(i a) - exp(i b)|``, a wrap-around-safe angle distance."""
    return np.abs(np.exp(1j * np.asarray(theta_a)) - np.exp(1j * np.asarray(theta_b)))


def prediction_error(pred, truth, angle_columns=()) -> tuple[np.ndarray, float]:
    """Per-step Euclidean error and its mean.

    Columns listed in ``angle_columns`` are compared with the chordal metric.
    """
    P = np.asarray(pred)
    T = np.asarray(truth)
    if P.ndim == 1:
        P = P[:, None]
    if T.ndim == 1:
        T = T[:, None]
    if P.shape != T.shape:
        raise DimensionError(f"trajectory shapes differ: {P.shape} vs {T.shape}")
    D = np.abs(P - T).astype(float)
    for j in angle_columns:
        D[:, j] = chordal(P[:, j].real, T[:, j].real)
    per_step = np.sqrt(np.sum(D**2, axis=1))
    return per_step, float(per_step.mean())
