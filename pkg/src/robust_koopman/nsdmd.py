"""Robust EDMD with naturally-structured (positivity and Markov) constraints.

Solves, approximately,

    min_K ||G K - A||_F + lam ||K||_F
    s.t.  K >= 0,  L K L^{-1} >= 0,  L K L^{-1} 1 = 1

with ``L`` the Gram matrix of the dictionary.  For indicator-like
dictionaries (``L`` diagonal) the constraints reduce to ``K`` being
row-stochastic after a diagonal rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .dictionary import Dictionary
from .edmd import OperatorEstimate, pinv_solve
from .errors import ConfigError, NumericalError, UnsupportedDictionaryError
from .robust import RobustConfig, tikhonov_objective
from .snapshots import GramPair

__all__ = ["NsdmdResult", "nsdmd_robust", "pf_estimate", "project_simplex_rows",
           "constraint_violation", "project_feasible"]


@dataclass
class NsdmdResult:
    estimate: OperatorEstimate
    markov: np.ndarray
    constraint_violation: float


def project_simplex_rows(Y: np.ndarray) -> np.ndarray:
    """Euclidean projection of every row onto the probability simplex."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[1]
    U = -np.sort(-Y, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(1, n + 1)
    cond = U - css / ind > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(Y.shape[0]), rho] / (rho + 1)
    return np.maximum(Y - theta[:, None], 0.0)


def constraint_violation(K: np.ndarray, Lam: np.ndarray, Lam_inv: np.ndarray | None = None) -> float:
    """``max(-min K, -min L K L^-1, max |row sum of L K L^-1 - 1|)``, floored at 0."""
    if Lam_inv is None:
        Lam_inv = np.linalg.inv(Lam)
    M = Lam @ K @ Lam_inv
    return float(max(0.0, -K.min(), -M.min(), np.abs(M.sum(axis=1) - 1.0).max()))


def project_feasible(K, Lam, Lam_inv, iters=2000, tol=1e-12, rho=1.0):
    """Euclidean projection onto ``{K >= 0} & {L K L^-1 row-stochastic}`` by ADMM.

    Splitting: ``Z1 = K`` (orthant) and ``Z2 = L K L^-1`` (row simplex).  The
    K-update is diagonal in the eigenbasis of ``L``.  Returns the orthant
    copy ``Z1`` mapped through one final simplex pass when that is feasible,
    else the plain iterate, together with its constraint violation.
    """
    K0 = np.array(K, dtype=float)
    s, V = np.linalg.eigh(Lam)
    denom = 1.0 + rho + rho * (s[:, None] ** 2) / (s[None, :] ** 2)
    X = K0.copy()
    Z1 = np.maximum(X, 0.0)
    Z2 = project_simplex_rows(Lam @ X @ Lam_inv)
    U1 = np.zeros_like(X)
    U2 = np.zeros_like(X)
    viol = constraint_violation(X, Lam, Lam_inv)
    for _ in range(iters):
        rhs = K0 + rho * (Z1 - U1) + rho * (Lam @ (Z2 - U2) @ Lam_inv)
        X = V @ ((V.T @ rhs @ V) / denom) @ V.T
        TX = Lam @ X @ Lam_inv
        Z1 = np.maximum(X + U1, 0.0)
        Z2 = project_simplex_rows(TX + U2)
        U1 += X - Z1
        U2 += TX - Z2
        viol = constraint_violation(X, Lam, Lam_inv)
        if viol <= tol:
            break
    return X, viol


def _solve_socp(G, A, Lam, lam):
    n = G.shape[0]
    K = cp.Variable((n, n))
    Y = cp.Variable((n, n))
    ones = np.ones(n)
    objective = cp.norm(G @ K - A, "fro") + lam * cp.norm(K, "fro")
    cons = [K >= 0, Y >= 0, Y @ ones == ones, Lam @ K == Y @ Lam]
    prob = cp.Problem(cp.Minimize(objective), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        return None, "solver_error"
    if K.value is None:
        return None, str(prob.status)
    return np.asarray(K.value), str(prob.status)


def nsdmd_robust(gp: GramPair, Lam: np.ndarray, lam: float = 0.0,
                 cfg: RobustConfig | None = None, dictionary: Dictionary | None = None,
                 feas_tol: float = 1e-9, dict_id: str | None = None) -> NsdmdResult:
    """Constrained robust estimate.

    ``Lam`` must be real symmetric positive definite and the features real
    (pass ``dictionary`` to have complex dictionaries rejected up front).

    The convex problem is solved as a second-order cone program, with the
    similarity constraint written as ``L K = Y L`` to avoid forming
    ``L^{-1}`` inside the solver.  The interior-point answer is then pushed
    onto the feasible set with :func:`project_feasible` if it misses
    ``feas_tol``.  The identity is always feasible and serves as the starting
    candidate: a solution replaces it only if it is feasible and has a lower
    objective, so the result always satisfies the constraints.
    """
    cfg = cfg or RobustConfig()
    if lam < 0:
        raise ConfigError("lambda must be nonnegative")
    if dictionary is not None and not dictionary.is_real:
        raise UnsupportedDictionaryError(f"NSDMD needs a real dictionary, got {dictionary.kind}")
    G, A, Lam = gp.G, gp.A, np.asarray(Lam)
    if np.iscomplexobj(G) or np.iscomplexobj(A) or np.iscomplexobj(Lam):
        if max(np.abs(np.imag(G)).max(), np.abs(np.imag(A)).max(), np.abs(np.imag(Lam)).max()) > 0:
            raise UnsupportedDictionaryError("NSDMD needs real-valued features")
        G, A, Lam = G.real, A.real, Lam.real
    Lam = 0.5 * (Lam + Lam.T)
    ev = np.linalg.eigvalsh(Lam)
    if ev[0] <= 1e-10:
        raise NumericalError(f"Gram matrix is singular (min eigenvalue {ev[0]:.3g})")
    Lam_inv = np.linalg.inv(Lam)
    n = G.shape[0]

    def f(K):
        return tikhonov_objective(G, A, K, lam)

    K, fK = np.eye(n), f(np.eye(n))
    history = [fK]
    source = "identity"
    Ks, status = _solve_socp(G, A, Lam, lam)
    if Ks is not None:
        Ks = np.maximum(Ks, 0.0)
        v = constraint_violation(Ks, Lam, Lam_inv)
        if v > feas_tol:
            Ks, v = project_feasible(Ks, Lam, Lam_inv, iters=cfg.max_iter, tol=feas_tol)
        if v <= feas_tol and f(Ks) < fK:
            K, fK, source = Ks, f(Ks), "socp"
            history.append(fK)

    viol = constraint_violation(K, Lam, Lam_inv)
    est = OperatorEstimate(K, "NSDMD", lam, dict_id, fK,
                           {"solver_status": status, "source": source,
                            "objective_history": history})
    return NsdmdResult(est, Lam @ K @ Lam_inv, viol)


def pf_estimate(res: NsdmdResult) -> np.ndarray:
    """Perron-Frobenius matrix ``P = K^T``; nonnegative whenever K is."""
    return res.estimate.K_matrix.T.copy()
