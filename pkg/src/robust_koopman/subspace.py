"""Subspace DMD for observations corrupted by measurement noise.

The future block rows of the data are projected onto the row space of the
past block rows; noise that is uncorrelated between past and future drops
out of the projection, which removes the bias plain DMD suffers from.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edmd import OperatorEstimate
from .errors import DimensionError, EmptyDataError, NumericalError

__all__ = ["SpectralModes", "block_matrices", "subspace_dmd", "subspace_dmd_estimate"]


@dataclass
class SpectralModes:
    eigenvalues: np.ndarray
    modes: np.ndarray
    truncation_rank: int
    #: observable-space operator ``U A_r U^H`` (column convention)
    operator: np.ndarray | None = None
    #: relative projection loss ``||O - Y_f|| / ||Y_f||``
    projection_loss: float = 0.0


def block_matrices(Y) -> tuple[np.ndarray, np.ndarray]:
    """Past and future block matrices ``Y_p = [Y0; Y1]``, ``Y_f = [Y2; Y3]``."""
    Y = np.asarray(Y)
    if Y.ndim != 2:
        raise DimensionError("observation matrix must be 2-D (observable, time)")
    m = Y.shape[1] - 3
    if m < 1:
        raise EmptyDataError("subspace DMD needs at least 4 observations")
    Y0, Y1, Y2, Y3 = (Y[:, k:k + m] for k in range(4))
    return np.vstack([Y0, Y1]), np.vstack([Y2, Y3])


def _rank(s, rcond):
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rcond * s[0]))


def subspace_dmd(Y, rank: int | None = None, rcond: float = 1e-12) -> SpectralModes:
    """Eigenvalues and modes from an observation matrix (columns are times).

    1. ``Y_p``, ``Y_f`` from the shifted blocks.
    2. ``O = Y_f Y_p^H (Y_p Y_p^H)^+ Y_p`` (row-space projection).
    3. Compact SVD ``O = U_q S_q V_q^H`` truncated to ``rank``; ``U_q1`` and
       ``U_q2`` are its top and bottom halves.
    4. Compact SVD ``U_q1 = U S V^H`` and ``A_r = U^H U_q2 V S^{-1}``.
    5. Eigenpairs ``(lam, w~)`` of ``A_r``.
    6. Modes ``w = lam^{-1} U_q2 V S^{-1} w~``; zero eigenvalues get no mode.
    """
    Y = np.asarray(Y)
    if Y.ndim == 1:
        Y = Y[None, :]
    Yp, Yf = block_matrices(Y)
    k_obs = Y.shape[0]

    Up, sp, Vph = np.linalg.svd(Yp, full_matrices=False)
    rp = _rank(sp, rcond)
    Q = Vph[:rp]  # orthonormal basis of the row space of Y_p
    O = (Yf @ Q.conj().T) @ Q
    nf = np.linalg.norm(Yf)
    loss = float(np.linalg.norm(O - Yf) / nf) if nf > 0 else 0.0

    Uq, sq, _ = np.linalg.svd(O, full_matrices=False)
    rq = _rank(sq, rcond)
    if rank is not None:
        if rank > rq:
            raise NumericalError(f"requested rank {rank} exceeds achieved rank {rq}")
        rq = int(rank)
    if rq == 0:
        raise NumericalError("projected data has rank 0")
    Uq = Uq[:, :rq]
    Uq1, Uq2 = Uq[:k_obs], Uq[k_obs:]

    U, s, Vh = np.linalg.svd(Uq1, full_matrices=False)
    r = _rank(s, rcond)
    if r == 0:
        raise NumericalError("top block of the projected basis has rank 0")
    U, s, V = U[:, :r], s[:r], Vh[:r].conj().T
    B = Uq2 @ V / s
    Ar = U.conj().T @ B
    lam, Wt = np.linalg.eig(Ar)
    nz = np.abs(lam) > 1e-14 * max(np.abs(lam).max(initial=0.0), 1e-300)
    modes = np.zeros((k_obs, len(lam)), dtype=complex)
    modes[:, nz] = (B @ Wt[:, nz]) / lam[nz]
    return SpectralModes(lam, modes, rq, U @ Ar @ U.conj().T, loss)


def subspace_dmd_estimate(Y, rank: int | None = None, rcond: float = 1e-12) -> OperatorEstimate:
    """Subspace DMD packaged as an :class:`OperatorEstimate`.

    ``Y`` has observables in rows.  The observable-space operator is returned
    transposed so it follows the row-feature convention of the other
    estimators (``psi_{t+1} ~= psi_t @ K``).
    """
    sm = subspace_dmd(Y, rank, rcond)
    return OperatorEstimate(sm.operator.T, "SubspaceDMD", 0.0, "observations", 0.0,
                            {"rank": sm.truncation_rank, "eigenvalues": sm.eigenvalues,
                             "projection_loss": sm.projection_loss})
