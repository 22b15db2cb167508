"""Weighted-MMSE reformulation of sum-rate maximization.

The block surrogate is

    F(W, t, u, rho) = sum_k [rho_k * e_k - log(rho_k) - 1] + K

with the per-user MSE

    e_k = |1 - u_k^* h_k^H w_k|^2
        + sum_{i != k} |u_k|^2 |h_k^H w_i|^2 + |u_k|^2 sigma_k^2.

The additive constants are chosen so that after the closed-form (u, rho)
updates F equals K - ln(2) * sum_rate exactly; minimizing F cyclically is
then the same as monotonically increasing the sum rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AuxState",
    "QuadraticData",
    "update_u",
    "update_rho",
    "mmse_aux",
    "objective_F",
    "assemble_quadratic",
    "quad_objective",
]


@dataclass(frozen=True)
class AuxState:
    """Per-user receive scalars u (complex) and MSE weights rho (> 0)."""

    u: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        if np.any(self.rho <= 0) or not np.all(np.isfinite(self.rho)):
            raise ValueError("rho must be positive and finite")


@dataclass(frozen=True)
class QuadraticData:
    """Quadratic data of F in W: A (M, M) Hermitian PSD and b (M, K)."""

    A: np.ndarray
    b: np.ndarray


def _cross_gains(ch, W):
    """Z[k, i] = h_k^H w_i."""
    return ch.h.conj().T @ W


def update_u(ch, W, sigma2):
    """MMSE receive scalars: u_k = h_k^H w_k / (sum_i |h_k^H w_i|^2 + sigma2)."""
    Z = _cross_gains(ch, W)
    den = np.sum(np.abs(Z) ** 2, axis=1) + sigma2
    return np.diag(Z) / den


def update_rho(ch, W, u, sigma2):
    """MSE weights rho_k = 1 / (1 - u_k^* h_k^H w_k).

    With the MMSE ``u`` the denominator is real in (0, 1] and rho_k equals
    1 + sinr_k; a nonpositive denominator means ``u`` was not the MMSE
    receiver and is rejected.
    """
    Z = _cross_gains(ch, W)
    q = np.conj(u) * np.diag(Z)
    den = 1.0 - q.real
    if np.any(den <= 0):
        raise ValueError("1 - u^* h^H w must stay positive; u is not the MMSE receiver")
    return 1.0 / den


def mmse_aux(ch, W, sigma2) -> AuxState:
    """Both closed-form auxiliary updates in sequence."""
    u = update_u(ch, W, sigma2)
    return AuxState(u=u, rho=update_rho(ch, W, u, sigma2))


def objective_F(ch, W, aux: AuxState, sigma2):
    """Full surrogate value, natural log, constants included."""
    Z = _cross_gains(ch, W)
    zkk = np.diag(Z)
    total = np.sum(np.abs(Z) ** 2, axis=1)
    e = (
        np.abs(1.0 - np.conj(aux.u) * zkk) ** 2
        + np.abs(aux.u) ** 2 * (total - np.abs(zkk) ** 2 + sigma2)
    )
    return float(np.sum(aux.rho * e - np.log(aux.rho) - 1.0) + ch.K)


def assemble_quadratic(ch, aux: AuxState) -> QuadraticData:
    """Data of the W-subproblem: A = sum_k rho_k |u_k|^2 h_k h_k^H, b_k = rho_k u_k h_k.

    Minimizing sum_k [w_k^H A w_k - 2 Re(b_k^H w_k)] over W is minimizing F
    over W at fixed (u, rho, t); the noise term rho_k |u_k|^2 sigma2 is
    constant in W and lives only in :func:`objective_F`.
    """
    coef = aux.rho * np.abs(aux.u) ** 2
    A = (ch.h * coef[None, :]) @ ch.h.conj().T
    A = 0.5 * (A + A.conj().T)  # kill Hermitian roundoff
    b = ch.h * (aux.rho * aux.u)[None, :]
    return QuadraticData(A=A, b=b)


def quad_objective(quad: QuadraticData, W):
    """sum_k [w_k^H A w_k - 2 Re(b_k^H w_k)] (F over W up to a constant)."""
    return float(np.vdot(W, quad.A @ W).real - 2.0 * np.vdot(quad.b, W).real)
