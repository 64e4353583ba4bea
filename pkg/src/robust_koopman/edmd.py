"""Baseline estimators: EDMD, exact DMD, and the Koopman -> Perron-Frobenius transpose."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionError, EmptyDataError, NumericalError
from .snapshots import GramPair, SnapshotMatrix, pair_indices

__all__ = [
    "METHODS",
    "OperatorEstimate",
    "edmd",
    "dmd",
    "pf_from_koopman",
    "pinv_solve",
    "complex_to_json",
    "complex_from_json",
]

METHODS = ("EDMD", "DMD", "RobustTikhonov", "RobustLasso", "NSDMD", "SubspaceDMD")


@dataclass
class OperatorEstimate:
    """A ``K x K`` Koopman matrix in the row-feature convention.

    ``residual`` is the value of the objective the estimator minimized.
    ``info`` carries estimator-specific diagnostics (iteration counts, the
    selected ridge parameter, ...).
    """

    K_matrix: np.ndarray
    method: str
    reg_level: float = 0.0
    dict_id: str | None = None
    residual: float = 0.0
    info: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        K = np.asarray(self.K_matrix)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise DimensionError(f"K_matrix must be square, got {K.shape}")
        if not np.all(np.isfinite(K)):
            raise NumericalError("K_matrix has non-finite entries")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.reg_level < 0:
            raise ValueError("reg_level must be nonnegative")
        self.K_matrix = K

    @property
    def dim(self) -> int:
        return self.K_matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.K_matrix)

    def to_json(self, **extra) -> str:
        doc = {
            "method": self.method,
            "reg_level": float(self.reg_level),
            "dict_id": self.dict_id,
            "residual": float(self.residual),
            "K_matrix": complex_to_json(self.K_matrix),
            "info": _jsonable(self.info),
        }
        doc.update(extra)
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "OperatorEstimate":
        doc = json.loads(text)
        return cls(
            K_matrix=complex_from_json(doc["K_matrix"]),
            method=doc["method"],
            reg_level=doc.get("reg_level", 0.0),
            dict_id=doc.get("dict_id"),
            residual=doc.get("residual", 0.0),
            info=doc.get("info", {}),
        )


def _round17(v: float) -> float:
    return float(f"{v:.17g}")


def complex_to_json(M) -> list:
    """Nested lists with each entry as ``[re, im]`` at 17 significant digits."""
    M = np.asarray(M, dtype=complex)
    if M.ndim == 0:
        return [_round17(M.real), _round17(M.imag)]
    return [complex_to_json(m) for m in M]


def complex_from_json(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return complex_to_json(obj)
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round17(obj.real), _round17(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round17(obj) if np.isfinite(obj) else str(float(obj))
    return obj


def pinv_solve(G: np.ndarray, B: np.ndarray, rcond: float = 1e-12) -> np.ndarray:
    """Minimum-norm least-squares solution of ``G X = B``.

    Singular values below ``rcond * sigma_max`` are discarded.
    """
    U, s, Vh = np.linalg.svd(G)
    if s.size == 0 or s[0] == 0:
        return np.zeros((G.shape[1], B.shape[1]), dtype=np.result_type(G, B))
    keep = s > rcond * s[0]
    return (Vh[keep].conj().T / s[keep]) @ (U[:, keep].conj().T @ B)


def edmd(gp: GramPair, rcond: float = 1e-12, dict_id: str | None = None) -> OperatorEstimate:
    """EDMD estimate ``K = G^+ A`` (truncated pseudo-inverse)."""
    G, A = gp.G, gp.A
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(A))):
        raise NumericalError("G or A has non-finite entries")
    K = pinv_solve(G, A, rcond)
    res = float(np.linalg.norm(G @ K - A))
    return OperatorEstimate(K, "EDMD", 0.0, dict_id, res, {"rcond": rcond})


def dmd(snap: SnapshotMatrix | np.ndarray, rank: int | None = None,
        rcond: float = 1e-12) -> OperatorEstimate:
    """Exact DMD on raw states.

    Columns ``X0 = [x_0 ... x_{M-1}]``, ``X1 = [x_1 ... x_M]``; the SVD of
    ``X0`` is truncated to ``rank`` (default: numerical rank) and the reduced
    operator is ``A_r = U^H X1 V S^{-1}``.  ``K_matrix`` is the full-space map
    ``(U A_r U^H)^T`` in the row-feature convention, so its nonzero eigenvalues
    are those of ``A_r``; ``info`` holds ``A_r`` and the exact-DMD modes.
    """
    if isinstance(snap, SnapshotMatrix):
        idx = pair_indices(snap)
        X0, X1 = snap.states[idx].T, snap.states[idx + 1].T
    else:
        Y = np.asarray(snap)
        X0, X1 = Y[:, :-1], Y[:, 1:]
    if X0.shape[1] < 1:
        raise EmptyDataError("DMD needs at least one snapshot pair")
    U, s, Vh = np.linalg.svd(X0, full_matrices=False)
    r = int(np.sum(s > rcond * s[0])) if s.size and s[0] > 0 else 0
    if rank is not None:
        if rank > r:
            raise NumericalError(f"requested rank {rank} exceeds numerical rank {r}")
        r = int(rank)
    if r == 0:
        raise NumericalError("snapshot matrix is numerically zero")
    U, s, V = U[:, :r], s[:r], Vh[:r].conj().T
    Ar = U.conj().T @ X1 @ V / s
    lam, W = np.linalg.eig(Ar)
    modes = X1 @ V / s @ W
    full = U @ Ar @ U.conj().T
    K = full.T
    res = float(np.linalg.norm(X1 - full @ X0))
    return OperatorEstimate(K, "DMD", 0.0, "raw_states", res,
                            {"rank": r, "reduced_operator": Ar, "eigenvalues": lam,
                             "modes": modes})


def pf_from_koopman(est: OperatorEstimate | np.ndarray) -> np.ndarray:
    """Perron-Frobenius matrix ``P = K^T``."""
    K = est.K_matrix if isinstance(est, OperatorEstimate) else np.asarray(est)
    return K.T.copy()
