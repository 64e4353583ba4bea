"""Eigenvalue reports and spectrum comparison."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .edmd import OperatorEstimate, complex_to_json
from .errors import DimensionError, NumericalError

__all__ = ["SpectrumReport", "analyze", "sort_dominant", "spectral_distance",
           "write_eigs_csv"]


#: magnitudes equal to this many decimals count as tied
TIE_DECIMALS = 9


def sort_dominant(eigs) -> np.ndarray:
    """Descending magnitude; ties by descending real part, then imaginary part.

    Magnitudes are compared after rounding to ``TIE_DECIMALS`` decimals so
    that round-off does not decide the order of eigenvalues on a circle.
    """
    eigs = np.asarray(eigs, dtype=complex).ravel()
    order = np.lexsort((-eigs.imag, -eigs.real, -np.round(np.abs(eigs), TIE_DECIMALS)))
    return eigs[order]


@dataclass
class SpectrumReport:
    discrete_eigs: np.ndarray
    continuous_eigs: np.ndarray
    spectral_radius: float
    unstable_count_discrete: int
    unstable_count_continuous: int
    dominant: np.ndarray
    dt: float
    tol: float

    def to_json(self) -> str:
        cont = [None if not np.isfinite(z.real) else complex_to_json(z)
                for z in self.continuous_eigs]
        doc = {
            "discrete_eigs": complex_to_json(self.discrete_eigs),
            "continuous_eigs": cont,
            "spectral_radius": float(f"{self.spectral_radius:.17g}"),
            "unstable_count_discrete": self.unstable_count_discrete,
            "unstable_count_continuous": self.unstable_count_continuous,
            "dominant": complex_to_json(self.dominant),
            "dt": self.dt,
            "tol": self.tol,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def analyze(est: OperatorEstimate | np.ndarray, dt: float = 1.0, tol: float = 1e-3,
            k_dominant: int = 10) -> SpectrumReport:
    """Eigenvalues of ``K``, their continuous-time images ``log(lam)/dt``, and stability counts.

    A discrete eigenvalue counts as unstable when ``|lam| > 1 + tol``; a
    continuous one when ``Re > tol / dt``.  Zero eigenvalues map to ``-inf``
    and are left out of the continuous count.
    """
    K = est.K_matrix if isinstance(est, OperatorEstimate) else np.asarray(est)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    try:
        lam = np.linalg.eigvals(K)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from None
    lam = sort_dominant(lam)
    cont = np.full(lam.shape, -np.inf + 0j, dtype=complex)
    nz = lam != 0
    cont[nz] = np.log(lam[nz]) / dt
    mag = np.abs(lam)
    radius = float(mag.max()) if mag.size else 0.0
    return SpectrumReport(
        discrete_eigs=lam,
        continuous_eigs=cont,
        spectral_radius=radius,
        unstable_count_discrete=int(np.sum(mag > 1 + tol)),
        unstable_count_continuous=int(np.sum(cont[nz].real > tol / dt)),
        dominant=lam[:k_dominant],
        dt=float(dt),
        tol=float(tol),
    )


def spectral_distance(a, b, k: int | None = None) -> float:
    """Minimum-cost matching (sum of ``|a_i - b_j|``) between the top-k of each set."""
    a = sort_dominant(a)
    b = sort_dominant(b)
    if k is None:
        k = min(len(a), len(b))
    if k > min(len(a), len(b)) or k < 0:
        raise DimensionError(f"k={k} exceeds the set sizes {len(a)}, {len(b)}")
    if k == 0:
        return 0.0
    a, b = a[:k], b[:k]
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].sum())


def write_eigs_csv(path, columns: dict[str, np.ndarray]) -> None:
    """Long-format eigenvalue table: ``label,index,re,im``."""
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "index", "re", "im"])
        for label, eigs in columns.items():
            for i, z in enumerate(np.asarray(eigs, dtype=complex)):
                w.writerow([label, i, f"{z.real:.17g}", f"{z.imag:.17g}"])
