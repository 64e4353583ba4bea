"""Seeded generators for the benchmark systems.

Random streams: every simulator takes an integer ``seed`` and derives
independent child streams from ``numpy.random.SeedSequence(seed)`` with
``spawn``; child 0 drives process noise and child 1 observation noise, each
through a PCG64 generator.  Identical ``(params, steps, seed)`` therefore give
bit-identical output on every platform numpy supports.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse import diags, identity
from scipy.sparse.linalg import splu

from .errors import ConfigError, NumericalError
from .snapshots import SnapshotMatrix

__all__ = [
    "streams",
    "RotationParams",
    "StuartLandauParams",
    "BurgersParams",
    "LinearParams",
    "simulate_rotation",
    "simulate_stuart_landau",
    "stuart_landau_observations",
    "simulate_burgers",
    "burgers_grid",
    "stable_linear_system",
    "simulate_linear",
    "add_observation_noise",
]


def streams(seed: int, n: int = 2) -> list[np.random.Generator]:
    """``n`` independent PCG64 generators derived from ``seed``."""
    return [np.random.Generator(np.random.PCG64(s))
            for s in np.random.SeedSequence(int(seed)).spawn(n)]


# -- rotation on the circle ----------------------------------------------------
@dataclass(frozen=True)
class RotationParams:
    theta: float = np.pi / 320
    noise_halfwidth: float = 0.7
    x0: float = 1.0

    def __post_init__(self):
        if self.noise_halfwidth < 0:
            raise ConfigError("noise_halfwidth must be nonnegative")


def simulate_rotation(p: RotationParams, steps: int, seed: int = 0) -> SnapshotMatrix:
    """``x_{t+1} = x_t + theta + xi_t``, ``xi_t ~ U[-h, h]``; returns ``steps`` snapshots.

    The state is not wrapped; use a periodic dictionary.
    """
    if steps < 2:
        raise ConfigError("steps must be >= 2")
    rng = streams(seed)[0]
    xi = rng.uniform(-p.noise_halfwidth, p.noise_halfwidth, steps - 1)
    x = np.empty(steps)
    x[0] = p.x0
    # sequential sum keeps the recursion literal
    for t in range(steps - 1):
        x[t + 1] = x[t] + p.theta + xi[t]
    return SnapshotMatrix(x[:, None], 1.0, f"rotation(seed={seed})")


# -- Stuart-Landau -----------------------------------------------------------------
@dataclass(frozen=True)
class StuartLandauParams:
    # mu, gamma, beta are not fixed by the source experiment; these are defaults.
    mu: float = 1.0
    gamma: float = 1.0
    beta: float = 0.0
    sigma_p: float = 1.0
    proc_halfwidth: float = 0.3
    obs_halfwidth: float = 0.1
    dt: float = 0.01
    r0: float = 1.0
    theta0: float = -np.pi
    n_obs: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.r0 > 0:
            raise ConfigError("r0 must be positive")
        if self.proc_halfwidth < 0 or self.obs_halfwidth < 0:
            raise ConfigError("noise half-widths must be nonnegative")


def simulate_stuart_landau(p: StuartLandauParams, steps: int, seed: int = 0
                           ) -> tuple[SnapshotMatrix, np.ndarray]:
    """Iterate the discretized Stuart-Landau map; return states and noisy observations.

    States are ``(r_t, theta_t)``::

        r_{t+1}     = r_t + (mu r_t - r_t^3) dt   + sigma_p dt xi1_t
        theta_{t+1} = theta_t + (gamma - beta r_t^2) dt + sigma_p dt / r_t xi2_t

    with ``xi_t`` uniform on ``[-proc_halfwidth, proc_halfwidth]^2``.  The
    observation matrix has shape ``(2 n_obs + 1, steps)``; column t is
    ``[exp(i k theta_t)]_{k=-n_obs..n_obs} + w_t`` with real and imaginary
    parts of ``w_t`` uniform on ``[-obs_halfwidth, obs_halfwidth]``.
    """
    if steps < 2:
        raise ConfigError("steps must be >= 2")
    proc, obs = streams(seed)
    xi = proc.uniform(-p.proc_halfwidth, p.proc_halfwidth, (steps - 1, 2))
    S = np.empty((steps, 2))
    S[0] = (p.r0, p.theta0)
    clamped = False
    for t in range(steps - 1):
        r, th = S[t]
        r_new = r + (p.mu * r - r**3) * p.dt + p.sigma_p * p.dt * xi[t, 0]
        th_new = th + (p.gamma - p.beta * r**2) * p.dt + p.sigma_p * p.dt / r * xi[t, 1]
        if r_new < 1e-6:
            r_new, clamped = 1e-6, True
        S[t + 1] = (r_new, th_new)
    if clamped:
        warnings.warn("Stuart-Landau radius clamped at 1e-6", RuntimeWarning, stacklevel=2)
    snap = SnapshotMatrix(S, p.dt, f"stuart_landau(seed={seed})")
    return snap, stuart_landau_observations(S[:, 1], p.n_obs, p.obs_halfwidth, obs)


def stuart_landau_observations(theta, n_obs: int, halfwidth: float,
                               rng: np.random.Generator | None = None) -> np.ndarray:
    k = np.arange(-n_obs, n_obs + 1)
    Y = np.exp(1j * np.outer(k, theta))
    if halfwidth > 0:
        if rng is None:
            raise ConfigError("a generator is required for noisy observations")
        shape = Y.shape
        Y = Y + rng.uniform(-halfwidth, halfwidth, shape) + 1j * rng.uniform(-halfwidth, halfwidth, shape)
    return Y


# -- stochastic Burgers ----------------------------------------------------------
@dataclass(frozen=True)
class BurgersParams:
    k: float = 0.01
    sigma_p: float = 0.2
    dx: float = 0.01
    dt: float = 0.02
    t_end: float = 1.0

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0 and self.t_end > 0):
            raise ConfigError("dx, dt and t_end must be positive")
        n = 1.0 / self.dx
        if abs(n - round(n)) > 1e-9 or round(n) < 3:
            raise ConfigError("1/dx must be an integer >= 3")

    @property
    def n_cells(self) -> int:
        return int(round(1.0 / self.dx))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def burgers_grid(p: BurgersParams) -> np.ndarray:
    """Cell centres ``(j + 1/2) dx`` on ``[0, 1]``."""
    return (np.arange(p.n_cells) + 0.5) * p.dx


def simulate_burgers(p: BurgersParams, seed: int = 0, u0=None) -> SnapshotMatrix:
    """March ``u_t + u u_x = k u_xx + sigma_p e`` with ``u(0,t) = u(1,t) = 0``.

    Cell-centred grid with ``1/dx`` unknowns; the walls sit half a cell
    outside the first and last centre (antisymmetric ghost values, so the
    wall value is exactly zero).  Diffusion is Crank-Nicolson, advection is
    an explicit central difference, and the forcing adds ``dt * sigma_p * e``
    with ``e ~ U[-1, 1]`` per cell per step.  Returns ``n_steps + 1``
    snapshots starting from ``u0`` (default ``sin(2 pi x)``).
    """
    n = p.n_cells
    x = burgers_grid(p)
    u = np.sin(2 * np.pi * x) if u0 is None else np.asarray(u0, dtype=float).copy()
    if u.shape != (n,):
        raise ConfigError(f"u0 must have length {n}")
    rng = streams(seed)[0]

    main = -2.0 * np.ones(n)
    main[0] = main[-1] = -3.0  # ghost = -u at both walls
    D2 = diags([np.ones(n - 1), main, np.ones(n - 1)], [-1, 0, 1]) / p.dx**2
    D1 = diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1]) / (2 * p.dx)
    I = identity(n, format="csc")
    lu = splu((I - 0.5 * p.dt * p.k * D2).tocsc())
    half = (I + 0.5 * p.dt * p.k * D2).tocsr()

    out = np.empty((p.n_steps + 1, n))
    out[0] = u
    for s in range(p.n_steps):
        rhs = half @ u - p.dt * u * (D1 @ u)
        if p.sigma_p:
            rhs = rhs + p.dt * p.sigma_p * rng.uniform(-1.0, 1.0, n)
        u = lu.solve(rhs)
        if not np.all(np.isfinite(u)) or np.abs(u).max() > 1e6:
            raise NumericalError(f"Burgers solver diverged at step {s + 1}")
        out[s + 1] = u
    return SnapshotMatrix(out, p.dt, f"burgers(seed={seed})")


# -- linear systems --------------------------------------------------------------
@dataclass(frozen=True)
class LinearParams:
    dim: int = 21
    dt: float = 0.2
    proc_halfwidth: float = 0.0
    obs_halfwidth: float = 0.4
    system_seed: int = 2024


def stable_linear_system(dim: int, dt: float, seed: int) -> np.ndarray:
    """Discrete map ``expm(A dt)`` of a random stable continuous system.

    ``A = V diag(eigs) V^{-1}`` with lightly damped complex pairs (real parts
    in ``[-1, -0.05]``, frequencies in ``[0.2, 3]``), and one real mode when
    ``dim`` is odd.
    """
    rng = streams(seed, 1)[0]
    blocks = []
    for _ in range(dim // 2):
        a = -rng.uniform(0.05, 1.0)
        w = rng.uniform(0.2, 3.0)
        blocks.append(np.array([[a, w], [-w, a]]))
    if dim % 2:
        blocks.append(np.array([[-rng.uniform(0.1, 1.0)]]))
    Ac = sla.block_diag(*blocks)
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    S = Q @ np.diag(rng.uniform(0.5, 2.0, dim)) @ Q.T
    Ac = S @ Ac @ np.linalg.inv(S)
    return sla.expm(Ac * dt)


def simulate_linear(Ad: np.ndarray, x0, steps: int, seed: int = 0,
                    proc_halfwidth: float = 0.0, obs_halfwidth: float = 0.0,
                    dt: float = 1.0) -> tuple[SnapshotMatrix, SnapshotMatrix]:
    """Clean and observed trajectories of ``x_{t+1} = Ad x_t + v_t``.

    Returns ``(clean, observed)``; observed = clean + uniform measurement noise.
    """
    if steps < 2:
        raise ConfigError("steps must be >= 2")
    proc, obs = streams(seed)
    x = np.asarray(x0, dtype=float)
    X = np.empty((steps, x.size))
    X[0] = x
    for t in range(steps - 1):
        x = Ad @ x
        if proc_halfwidth:
            x = x + proc.uniform(-proc_halfwidth, proc_halfwidth, x.size)
        X[t + 1] = x
    Yobs = X + obs.uniform(-obs_halfwidth, obs_halfwidth, X.shape) if obs_halfwidth else X.copy()
    return (SnapshotMatrix(X, dt, f"linear(seed={seed})"),
            SnapshotMatrix(Yobs, dt, f"linear_observed(seed={seed})"))


def add_observation_noise(snap: SnapshotMatrix, halfwidth: float, seed: int) -> SnapshotMatrix:
    """Add ``U[-h, h]`` noise to every entry (stream 1 of ``seed``)."""
    rng = streams(seed)[1]
    noisy = snap.states + rng.uniform(-halfwidth, halfwidth, snap.states.shape)
    return SnapshotMatrix(noisy, snap.dt, snap.meta + "+obs", snap.breaks)
