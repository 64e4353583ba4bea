"""Robust EDMD.

The robust problem

    min_K  max_{||dG||_F <= lam}  ||(G + dG) K - A||_F

is handled through its regularized counterpart

    min_K  ||G K - A||_F + lam ||K||_F            (Tikhonov form)
    min_K  ||G K - A||_F + c sum_k ||K[:, k]||_1  (column-wise Lasso form)

The regularized objective is always an upper bound on the inner maximum
(triangle inequality); :func:`inner_max` computes the exact inner maximum so
the gap can be measured.  The two coincide when ``K`` has a single column,
or more generally when ``K = v w^H`` and ``G K - A = r u w^H`` share their
row space; for a generic square ``K`` the bound is strict.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .dictionary import Dictionary
from .edmd import OperatorEstimate, pinv_solve
from .errors import ConfigError, ConvergenceWarning, EmptyDataError
from .snapshots import GramPair, SnapshotMatrix, pair_indices

__all__ = [
    "UncertaintyModel",
    "RobustConfig",
    "WorstCase",
    "uncertainty_bound",
    "feature_radius",
    "tikhonov_objective",
    "lasso_objective",
    "worst_case",
    "inner_max",
    "robust_tikhonov",
    "robust_lasso",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class UncertaintyModel:
    """Norm-ball uncertainty.

    ``kind="feature"``: ``||dG||_F <= radius`` directly on the Gram matrix.
    ``kind="data"``: ``||dx_m||_2 <= radius`` on each snapshot; converted to
    a feature-space radius with :func:`uncertainty_bound`.
    """

    kind: str
    radius: float

    def __post_init__(self):
        if self.kind not in ("feature", "data"):
            raise ConfigError("uncertainty kind must be 'feature' or 'data'")
        if not self.radius >= 0:
            raise ConfigError("uncertainty radius must be nonnegative")


@dataclass(frozen=True)
class RobustConfig:
    solver_tol: float = 1e-9
    alpha_max_factor: float = 10.0
    max_iter: int = 5000
    prox_step: float | None = None  # default 1 / (2 ||G||_2^2)
    rcond: float = 1e-12
    squared: bool = False
    grid_points: int = 65
    log_span: float = 16.0
    lasso_tol: float = 1e-12

    def __post_init__(self):
        for name in ("solver_tol", "alpha_max_factor", "max_iter", "rcond",
                     "grid_points", "log_span", "lasso_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.prox_step is not None and not self.prox_step > 0:
            raise ConfigError("prox_step must be positive")


class WorstCase(NamedTuple):
    value: float
    dG_star: np.ndarray
    achieved: float


# -- uncertainty radius ---------------------------------------------------------
def uncertainty_bound(dictionary: Dictionary, snap: SnapshotMatrix, rho: float) -> float:
    """Feature-space radius ``rho * max_m ||Psi(x_m)|| * max_m ||Psi'(x_m)||_F``.

    Maxima run over the pair sources ``x_m`` (all snapshots but the last).
    Linearizing ``Psi(x_m + dx_m)`` gives ``||dG||_F`` at most this value for
    every set of perturbations with ``||dx_m|| <= rho``.
    """
    if rho < 0:
        raise ConfigError("rho must be nonnegative")
    idx = pair_indices(snap)
    if len(idx) == 0:
        raise EmptyDataError("no snapshot pairs")
    X = snap.states[idx]
    Psi = dictionary.eval_many(X)
    feat = float(np.max(np.linalg.norm(Psi, axis=1)))
    jac = max(float(np.linalg.norm(dictionary.jacobian(x))) for x in X)
    return rho * feat * jac


def feature_radius(model: UncertaintyModel, dictionary: Dictionary | None = None,
                   snap: SnapshotMatrix | None = None) -> float:
    if model.kind == "feature":
        return model.radius
    if dictionary is None or snap is None:
        raise ConfigError("a data-space radius needs the dictionary and snapshots")
    return uncertainty_bound(dictionary, snap, model.radius)


# -- objectives --------------------------------------------------------------------
def tikhonov_objective(G, A, K, lam, squared=False) -> float:
    r = np.linalg.norm(G @ K - A)
    k = np.linalg.norm(K)
    if squared:
        return float(r * r + lam * k * k)
    return float(r + lam * k)


def lasso_objective(G, A, K, c) -> float:
    return float(np.linalg.norm(G @ K - A) + c * np.abs(K).sum())


# -- inner maximization ------------------------------------------------------------
def inner_max(G, A, K, lam) -> tuple[float, np.ndarray]:
    """Exact ``max_{||D||_F <= lam} ||(G + D) K - A||_F`` and its maximizer.

    Row-wise, ``(D K)_i = d_i K``, so this is a trust-region problem for a
    convex quadratic.  The maximizer is ``D = R K^H (mu I - K K^H)^{-1}`` with
    ``mu >= sigma_max(K)^2`` chosen so that ``||D||_F = lam``.
    """
    G, A, K = (np.asarray(a) for a in (G, A, K))
    R = G @ K - A
    dtype = np.result_type(G, A, K, float)
    if lam == 0 or not np.any(K):
        return float(np.linalg.norm(R)), np.zeros(G.shape, dtype=dtype)
    h, Q = np.linalg.eigh(K @ K.conj().T)
    h = np.maximum(h, 0.0)
    C = R @ K.conj().T @ Q
    cn2 = np.sum(np.abs(C) ** 2, axis=0)
    hmax = h[-1]
    top = h >= hmax * (1 - 1e-12)
    scale = max(float(np.sum(cn2)), 1e-300)

    def excess(mu):
        return float(np.sum(cn2 / (mu - h) ** 2)) - lam**2

    hard = np.sum(cn2[top]) <= 1e-24 * scale
    if hard:
        rest = ~top
        with np.errstate(divide="ignore"):
            at_hmax = float(np.sum(cn2[rest] / (hmax - h[rest]) ** 2)) if np.any(rest) else 0.0
    if hard and at_hmax <= lam**2:
        coef = np.zeros_like(C)
        coef[:, ~top] = C[:, ~top] / (hmax - h[~top])
        D = coef @ Q.conj().T
        extra = math.sqrt(max(lam**2 - float(np.linalg.norm(D) ** 2), 0.0))
        # any unit direction in the top eigenspace; the cross term vanishes
        e = np.zeros(G.shape[0], dtype=dtype)
        e[0] = 1.0
        D = D + extra * np.outer(e, Q[:, -1].conj())
    else:
        lo = hmax * (1 + 1e-15) + 1e-300
        hi = hmax + math.sqrt(float(np.sum(cn2))) / lam + 1.0
        while excess(hi) > 0:
            hi = hmax + 2 * (hi - hmax)
        if excess(lo) <= 0:
            mu = lo
        else:
            mu = brentq(excess, lo, hi, xtol=1e-15 * max(hi, 1.0), rtol=1e-15, maxiter=500)
        D = (C / (mu - h)) @ Q.conj().T
        nD = np.linalg.norm(D)
        if nD > 0:
            D *= lam / nD
    val = float(np.linalg.norm((G + D) @ K - A))
    return val, D


def worst_case(gp: GramPair, K, lam: float) -> WorstCase:
    """Worst-case value ``||GK - A||_F + lam ||K||_F`` and a perturbation.

    ``value`` is the closed-form regularized objective, which upper-bounds
    every feasible perturbation.  ``dG_star`` is the best feasible
    perturbation (the alignment construction or the exact trust-region
    maximizer, whichever scores higher) and ``achieved`` its objective.
    """
    if lam < 0:
        raise ConfigError("lambda must be nonnegative")
    G, A = gp.G, gp.A
    K = np.asarray(K)
    R = G @ K - A
    nR, nK = np.linalg.norm(R), np.linalg.norm(K)
    value = float(nR + lam * nK)
    if lam == 0 or nK == 0:
        D = np.zeros(G.shape, dtype=np.result_type(G, A, K, float))
        return WorstCase(value, D, float(nR))
    if nR > 0:
        aligned = lam * (R @ K.conj().T) / (nR * nK)
    else:
        u = np.linalg.svd(K)[0][:, 0]
        aligned = lam * np.outer(np.eye(G.shape[0])[0], u.conj())
    a_val = float(np.linalg.norm((G + aligned) @ K - A))
    x_val, x_D = inner_max(G, A, K, lam)
    if x_val > a_val:
        return WorstCase(value, x_D, x_val)
    return WorstCase(value, aligned, a_val)


# -- Tikhonov form ----------------------------------------------------------------------
def robust_tikhonov(gp: GramPair, lam: float, cfg: RobustConfig | None = None,
                    dict_id: str | None = None) -> OperatorEstimate:
    """Minimize ``||G K - A||_F + lam ||K||_F``.

    The minimizer lies on the ridge path ``K(a) = (G^H G + a I)^{-1} G^H A``.
    A log-spaced grid over ``a in (0, alpha_max]`` brackets the best ``a``,
    golden-section search refines it to ``solver_tol`` (in ``log10 a``), and
    the stationarity fixed point ``a = lam ||G K - A|| / ||K||`` polishes it.
    The pseudo-inverse solution (``a = 0``) and ``K = 0`` are also candidates.
    """
    cfg = cfg or RobustConfig()
    if lam < 0:
        raise ConfigError("lambda must be nonnegative")
    G, A = gp.G, gp.A
    n = G.shape[0]
    if lam == 0:
        K = pinv_solve(G, A, cfg.rcond)
        f = tikhonov_objective(G, A, K, 0.0, cfg.squared)
        return OperatorEstimate(K, "RobustTikhonov", 0.0, dict_id, f,
                                {"alpha": 0.0, "candidate": "pinv"})

    GhG = G.conj().T @ G
    GhA = G.conj().T @ A
    w, V = np.linalg.eigh(GhG)
    w = np.maximum(w, 0.0)
    B = V.conj().T @ GhA

    def K_of(alpha):
        return V @ (B / (w + alpha)[:, None])

    if cfg.squared:
        K = K_of(lam)
        f = tikhonov_objective(G, A, K, lam, True)
        return OperatorEstimate(K, "RobustTikhonov", lam, dict_id, f,
                                {"alpha": lam, "candidate": "ridge", "squared": True})

    def f_of(alpha):
        return tikhonov_objective(G, A, K_of(alpha), lam)

    alpha_max = cfg.alpha_max_factor * max(float(w[-1]), np.finfo(float).tiny)
    t_hi = math.log10(alpha_max)
    t_lo = t_hi - cfg.log_span
    ts = np.linspace(t_lo, t_hi, cfg.grid_points)
    fs = np.array([f_of(10.0**t) for t in ts])
    i = int(np.argmin(fs))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f_of(10.0**c), f_of(10.0**d)
    n_eval = len(ts) + 2
    while b - a > cfg.solver_tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f_of(10.0**c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f_of(10.0**d)
        n_eval += 1
    alpha = 10.0 ** (c if fc <= fd else d)
    f_best = min(fc, fd, fs[i])
    if fs[i] < min(fc, fd):
        alpha = 10.0 ** ts[i]

    # stationarity polish: (G^H G + a I) K = G^H A with a = lam ||R|| / ||K||
    for _ in range(50):
        Ka = K_of(alpha)
        nK = np.linalg.norm(Ka)
        if nK == 0:
            break
        new = lam * np.linalg.norm(G @ Ka - A) / nK
        f_new = f_of(new)
        if not f_new <= f_best or new <= 0:
            break
        converged = abs(new - alpha) <= 1e-13 * alpha
        alpha, f_best = new, f_new
        if converged:
            break

    cands = [("ridge", alpha, K_of(alpha))]
    K_pinv = pinv_solve(G, A, cfg.rcond)
    cands.append(("pinv", 0.0, K_pinv))
    cands.append(("zero", math.inf, np.zeros((n, A.shape[1]), dtype=np.result_type(G, A))))
    scored = [(tikhonov_objective(G, A, K, lam), name, al, K) for name, al, K in cands]
    f, name, al, K = min(scored, key=lambda s: s[0])
    # on a tie (within round-off) prefer the closed-form candidates
    for cand in scored[:0:-1]:
        if cand[0] <= f * (1 + 1e-12) + 1e-300:
            f, name, al, K = cand
            break
    return OperatorEstimate(K, "RobustTikhonov", lam, dict_id, f,
                            {"alpha": al, "candidate": name, "evaluations": n_eval})


# -- Lasso form --------------------------------------------------------------------------
def _soft(Z, tau):
    mag = np.abs(Z)
    with np.errstate(divide="ignore", invalid="ignore"):
        shrink = np.where(mag > tau, 1.0 - tau / np.where(mag > 0, mag, 1.0), 0.0)
    return Z * shrink


def robust_lasso(gp: GramPair, c: float, cfg: RobustConfig | None = None,
                 dict_id: str | None = None) -> OperatorEstimate:
    """Minimize ``g(K) = ||G K - A||_F + c sum_k ||K[:, k]||_1``.

    Uses ``||R|| = min_{s > 0} ||R||^2 / (2 s) + s / 2``: alternately solve
    the squared Lasso ``||G K - A||^2 / (2 s) + c ||K||_1`` by accelerated
    proximal gradient (soft-thresholding prox, step ``prox_step`` or
    ``s / ||G||_2^2``), then set ``s = ||G K - A||``, starting from ``K = 0``.
    Every outer step is accepted only if ``g`` decreases, so the reported
    objective is monotone; the pseudo-inverse solution is a final candidate.
    ``info`` holds the inner iteration count, the last outer decrease and a
    convergence flag; hitting ``max_iter`` issues a :class:`ConvergenceWarning`.
    """
    cfg = cfg or RobustConfig()
    if c < 0:
        raise ConfigError("c must be nonnegative")
    G, A = gp.G, gp.A
    L = float(np.linalg.norm(G, 2)) ** 2

    def obj(K):
        return lasso_objective(G, A, K, c)

    K_pinv = pinv_solve(G, A, cfg.rcond)
    if c == 0:
        return OperatorEstimate(K_pinv, "RobustLasso", 0.0, dict_id, obj(K_pinv),
                                {"iterations": 0, "last_decrease": 0.0, "converged": True})
    # start at K = 0: from the pseudo-inverse the residual (hence s) would be ~0
    # and the alternation could not move; the pseudo-inverse is compared at the end
    K = np.zeros_like(K_pinv)
    f = obj(K)
    s_floor = 1e-12 * max(float(np.linalg.norm(A)), 1.0)
    GhG, GhA = G.conj().T @ G, G.conj().T @ A
    used = 0
    converged = False
    last_decrease = 0.0
    while used < cfg.max_iter:
        s_ = max(float(np.linalg.norm(G @ K - A)), s_floor)
        step = cfg.prox_step if cfg.prox_step is not None else s_ / max(L, 1e-300)

        def h(Z):
            return float(np.linalg.norm(G @ Z - A)) ** 2 / (2 * s_) + c * float(np.abs(Z).sum())

        # FISTA with restart on the squared subproblem, warm-started at K
        X, Y, t, hX = K, K, 1.0, h(K)
        for _ in range(min(500, cfg.max_iter - used)):
            used += 1
            X_new = _soft(Y - step * (GhG @ Y - GhA) / s_, step * c)
            h_new = h(X_new)
            if h_new > hX:  # restart momentum
                Y, t = X, 1.0
                continue
            t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
            Y = X_new + ((t - 1) / t_new) * (X_new - X)
            small = hX - h_new <= 1e-15 * max(hX, 1e-300)
            X, hX, t = X_new, h_new, t_new
            if small:
                break
        f_new = obj(X)
        if f_new < f:
            last_decrease = f - f_new
            K, f = X, f_new
            if last_decrease <= cfg.lasso_tol * max(f, 1e-300):
                converged = True
                break
        else:
            last_decrease = 0.0
            converged = True
            break
    if obj(K_pinv) < f:
        K, f = K_pinv, obj(K_pinv)
    if not converged:
        warnings.warn(f"robust_lasso stopped at max_iter={cfg.max_iter}", ConvergenceWarning,
                      stacklevel=2)
    return OperatorEstimate(K, "RobustLasso", c, dict_id, f,
                            {"iterations": used, "last_decrease": last_decrease,
                             "converged": converged})
