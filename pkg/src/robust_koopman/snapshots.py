"""Snapshot data and the G/A matrix assembly used by every estimator.

Convention: a feature vector ``Psi(x)`` is a row, and an operator estimate
``K`` satisfies ``Psi(x_{m+1}) ~= Psi(x_m) @ K``.  With this convention

    G = (1/M) sum_m Psi(x_m)^H Psi(x_m)
    A = (1/M) sum_m Psi(x_m)^H Psi(x_{m+1})

and the least-squares solution is ``K = G^+ A``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dictionary import Dictionary
from .errors import DimensionError, DomainError, EmptyDataError

__all__ = [
    "SnapshotMatrix",
    "GramPair",
    "make_pairs",
    "pair_indices",
    "assemble",
    "assemble_features",
    "concatenate",
    "read_csv",
    "write_csv",
]


@dataclass(frozen=True)
class SnapshotMatrix:
    """Time series ``x_0, ..., x_M`` stored as an ``(M+1, n)`` array.

    ``breaks`` lists row indices at which a new trajectory starts; no
    snapshot pair spans a break.
    """

    states: np.ndarray
    dt: float = 1.0
    meta: str = ""
    breaks: tuple[int, ...] = field(default=())

    def __post_init__(self):
        X = np.asarray(self.states, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise DimensionError("states must be a 2-D array (time, state)")
        if X.shape[0] < 2:
            raise EmptyDataError("a snapshot matrix needs at least two snapshots")
        if not np.all(np.isfinite(X)):
            raise DomainError("states contain non-finite values")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        X.setflags(write=False)
        object.__setattr__(self, "states", X)
        object.__setattr__(self, "breaks", tuple(sorted(int(b) for b in self.breaks)))

    @property
    def n_snapshots(self) -> int:
        return self.states.shape[0]

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def n_pairs(self) -> int:
        return len(pair_indices(self))

    def window(self, start: int, stop: int) -> "SnapshotMatrix":
        """Rows ``start:stop`` as a new snapshot matrix."""
        br = tuple(b - start for b in self.breaks if start < b < stop)
        return SnapshotMatrix(self.states[start:stop], self.dt, self.meta, br)


@dataclass(frozen=True)
class GramPair:
    """The matrices ``G`` and ``A`` together with the number of pairs used."""

    G: np.ndarray
    A: np.ndarray
    M_pairs: int

    def __post_init__(self):
        G = np.asarray(self.G)
        A = np.asarray(self.A)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or A.shape != G.shape:
            raise DimensionError(f"G and A must be equal square matrices, got {G.shape}, {A.shape}")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "A", A)

    @property
    def dim(self) -> int:
        return self.G.shape[0]


def pair_indices(snap: SnapshotMatrix) -> np.ndarray:
    """Indices m such that (x_m, x_{m+1}) is a valid pair."""
    m = np.arange(snap.n_snapshots - 1)
    if snap.breaks:
        m = m[~np.isin(m + 1, snap.breaks)]
    return m


def make_pairs(snap: SnapshotMatrix) -> list[tuple[np.ndarray, np.ndarray]]:
    """Consecutive ``(x_m, x_{m+1})`` pairs in time order."""
    idx = pair_indices(snap)
    if len(idx) == 0:
        raise EmptyDataError("no consecutive snapshot pairs")
    X = snap.states
    return [(X[m], X[m + 1]) for m in idx]


def assemble_features(Psi0, Psi1) -> GramPair:
    """G and A from matched feature rows ``Psi0[m] -> Psi1[m]``."""
    Psi0 = np.atleast_2d(np.asarray(Psi0))
    Psi1 = np.atleast_2d(np.asarray(Psi1))
    if Psi0.shape != Psi1.shape:
        raise DimensionError("feature matrices must have the same shape")
    M = Psi0.shape[0]
    if M < 1:
        raise EmptyDataError("no feature pairs")
    if not (np.all(np.isfinite(Psi0)) and np.all(np.isfinite(Psi1))):
        raise DomainError("features contain non-finite values")
    H = Psi0.conj().T
    G = H @ Psi0 / M
    G = 0.5 * (G + G.conj().T)
    A = H @ Psi1 / M
    return GramPair(G, A, M)


def assemble(dictionary: Dictionary, snap: SnapshotMatrix) -> GramPair:
    """G and A of the dictionary features over all snapshot pairs."""
    if snap.state_dim != dictionary.state_dim:
        raise DimensionError(
            f"snapshot dimension {snap.state_dim} != dictionary state_dim {dictionary.state_dim}"
        )
    idx = pair_indices(snap)
    if len(idx) == 0:
        raise EmptyDataError("no consecutive snapshot pairs")
    Psi = dictionary.eval_many(snap.states)
    return assemble_features(Psi[idx], Psi[idx + 1])


def concatenate(*snaps: SnapshotMatrix) -> SnapshotMatrix:
    """Stack trajectories, recording a break at each junction."""
    if not snaps:
        raise EmptyDataError("nothing to concatenate")
    dts = {s.dt for s in snaps}
    if len(dts) != 1:
        raise DimensionError("all trajectories must share the same dt")
    breaks, offset = [], 0
    for s in snaps:
        breaks += [offset + b for b in s.breaks]
        if offset:
            breaks.append(offset)
        offset += s.n_snapshots
    return SnapshotMatrix(np.vstack([s.states for s in snaps]), snaps[0].dt,
                          snaps[0].meta, tuple(breaks))


# -- CSV I/O ------------------------------------------------------------------
def _fmt(v: float) -> str:
    return repr(float(v)) if np.isfinite(v) else str(v)


def write_csv(snap: SnapshotMatrix, path, header: bool = True, sidecar: bool = True) -> None:
    """One snapshot per row.  ``dt``/``meta``/``breaks`` go to ``<path>.json``."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j}" for j in range(snap.state_dim)])
        for row in snap.states:
            w.writerow([_fmt(v) for v in row])
    if sidecar:
        meta = {"dt": snap.dt, "meta": snap.meta, "breaks": list(snap.breaks)}
        Path(str(path) + ".json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def read_csv(path, dt: float | None = None) -> SnapshotMatrix:
    """Read a snapshot CSV; a non-numeric first row is treated as a header.

    ``dt`` falls back to the sidecar ``<path>.json`` and then to 1.0.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows:
        try:
            [float(v) for v in rows[0]]
        except ValueError:
            rows = rows[1:]
    try:
        X = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DomainError(f"{path}: non-numeric entry ({exc})") from None
    meta, breaks = path.stem, ()
    side = Path(str(path) + ".json")
    if side.exists():
        info = json.loads(side.read_text(encoding="utf-8"))
        if dt is None:
            dt = info.get("dt")
        meta = info.get("meta", meta)
        breaks = tuple(info.get("breaks", ()))
    return SnapshotMatrix(X, 1.0 if dt is None else float(dt), meta, breaks)
