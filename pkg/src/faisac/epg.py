"""Antenna-position subproblem via extrapolated projected gradient.

At fixed beamformers and auxiliaries the surrogate objective depends on the
positions only through the real quadratic/linear forms

    f_{k,i} = |a^H(t, theta_k) w_i|^2,
    h_{k,k} = Re{a^H(t, theta_k) w_k},

whose analytic derivatives are assembled into the exact gradient. The
momentum point follows the classic alpha-sequence; each step projects onto
the chain polytope intersected with the concave probing surrogate rebuilt
at the current accepted iterate, and an Armijo backtracking line search plus
a best-so-far safeguard keep the objective non-increasing.

Note on the cross term: the gradient of Re{u_k^* a^H w_k} is taken with the
phase of u_k absorbed into the beamformer split, which is exact for complex
u_k (treating u_k as real drops the Im{u_k} Im{a^H w_k} contribution).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcqp
from .wmmse import AuxState

__all__ = [
    "WSplit",
    "TrigState",
    "EpgOptions",
    "momentum_step",
    "quadratic_forms",
    "grad_t",
    "epg_solve",
]


@dataclass(frozen=True)
class WSplit:
    """Real/imaginary split of the beamformers and their outer-product forms.

    a, b are (M, K); C[k] = a_k a_k^T + b_k b_k^T is symmetric PSD and
    D[k] = a_k b_k^T - b_k a_k^T is antisymmetric, so that
    w_k w_k^H = C[k] - j D[k].
    """

    a: np.ndarray
    b: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @classmethod
    def from_beamformers(cls, W):
        a = W.real.copy()
        b = W.imag.copy()
        C = np.einsum("mk,nk->kmn", a, a) + np.einsum("mk,nk->kmn", b, b)
        D = np.einsum("mk,nk->kmn", a, b) - np.einsum("mk,nk->kmn", b, a)
        return cls(a=a, b=b, C=C, D=D)


@dataclass(frozen=True)
class TrigState:
    """g[m, k] = cos(v_k t_m), q[m, k] = sin(v_k t_m)."""

    g: np.ndarray
    q: np.ndarray

    @classmethod
    def at(cls, t, v_users):
        phase = np.outer(np.asarray(t, dtype=float), v_users)
        return cls(g=np.cos(phase), q=np.sin(phase))


@dataclass
class EpgOptions:
    """Step-size schedule and stopping tolerances for the position solver."""

    max_iter: int = 40
    eta0: float = None  # defaults to one wavelength at solve time
    armijo_c: float = 1e-4
    shrink: float = 0.5
    max_halvings: int = 30
    tol: float = 1e-8
    feas_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not 0 < self.armijo_c < 1 or not 0 < self.shrink < 1:
            raise ValueError("armijo_c and shrink must lie in (0, 1)")
        if self.eta0 is not None and not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if not self.tol > 0 or not self.feas_tol > 0:
            raise ValueError("tolerances must be positive")


def momentum_step(alpha):
    """One step of the extrapolation schedule; returns (alpha_next, zeta_next).

    alpha_1 = 0 gives zeta_2 = 0 (pure gradient first step) and
    alpha_3 = (1 + sqrt(5)) / 2.
    """
    alpha_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * alpha * alpha))
    return alpha_next, (alpha_next - 1.0) / alpha_next


def quadratic_forms(t, W, ch):
    """Real-arithmetic evaluation of f_{k,i} (K, K) and h_{k,k} (K,)."""
    sp = WSplit.from_beamformers(W)
    tr = TrigState.at(t, ch.v)
    K = W.shape[1]
    f = np.empty((K, K))
    h = np.empty(K)
    for k in range(K):
        g, q = tr.g[:, k], tr.q[:, k]
        for i in range(K):
            f[k, i] = g @ sp.C[i] @ g + q @ sp.C[i] @ q + 2.0 * (g @ sp.D[i] @ q)
        h[k] = g @ sp.a[:, k] + q @ sp.b[:, k]
    return f, h


def grad_t(t, W, aux: AuxState, ch):
    """Exact gradient of the surrogate objective in the antenna positions."""
    t = np.asarray(t, dtype=float)
    Rw = W @ W.conj().T
    Cs = Rw.real  # sum_i C_i
    Ds = -Rw.imag  # sum_i D_i
    grad = np.zeros(t.size)
    for k in range(ch.K):
        vk = ch.v[k]
        g = np.cos(vk * t)
        q = np.sin(vk * t)
        coef_f = aux.rho[k] * np.abs(aux.u[k]) ** 2 * ch.delta[k] ** 2
        df = 2.0 * vk * (g * (Cs @ q - Ds @ g) - q * (Cs @ g + Ds @ q))
        wt = np.conj(aux.u[k]) * W[:, k]  # phase of u_k absorbed
        dh = vk * (g * wt.imag - q * wt.real)
        grad += coef_f * df - 2.0 * aux.rho[k] * ch.delta[k] * dh
    return grad


def _objective_t(t, W, aux, scen, v_users, delta):
    """Surrogate objective as a function of positions alone."""
    A = np.exp(1j * np.outer(np.asarray(t, dtype=float), v_users))
    Z = A.conj().T @ W  # Z[k, i] = a_k^H w_i
    zkk = np.diag(Z)
    total = np.sum(np.abs(Z) ** 2, axis=1)
    e = (
        1.0
        - 2.0 * delta * np.real(np.conj(aux.u) * zkk)
        + np.abs(aux.u) ** 2 * (delta ** 2 * total + scen.sigma2)
    )
    return float(np.sum(aux.rho * e - np.log(aux.rho) - 1.0) + len(delta))


def epg_solve(t_init, W, aux: AuxState, ch, scen, opts: EpgOptions = None):
    """Extrapolated projected gradient over the feasible positions.

    Returns ``(t, info)`` with objective value at ``t`` never above the value
    at ``t_init``. ``info`` records iterations, convergence, and whether the
    probing surrogate ever came up empty (in which case the best iterate so
    far is returned and the caller decides how to proceed).
    """
    opts = opts or EpgOptions()
    eta0 = opts.eta0 if opts.eta0 is not None else scen.lam
    t_cur = np.asarray(t_init, dtype=float).copy()

    def fval(t):
        return _objective_t(t, W, aux, scen, ch.v, ch.delta)

    def gval(t):
        return grad_t(t, W, aux, ch)

    use_probe = scen.Pt > 0
    Rw = W @ W.conj().T if use_probe else None

    f_cur = fval(t_cur)
    t_best, f_best = t_cur.copy(), f_cur
    z = t_cur.copy()
    alpha = 0.0
    eta = eta0
    increases = 0
    surrogate_empty = False
    converged = False
    it = 0
    mu_hint = None  # multiplier memory across projections

    for it in range(1, opts.max_iter + 1):
        if use_probe:
            sur = qcqp.build_surrogate(t_cur, Rw, scen.theta_probe, scen.lam, scen.Pt)
            # the expansion point may sit a solver tolerance below the floor;
            # never require the step to be more feasible than where it starts,
            # or every projected candidate turns into a restoration move that
            # defeats the line search
            pt_eff = min(scen.Pt, qcqp.surrogate_value(sur, t_cur))
        gz = gval(z)
        fz = fval(z)

        accepted = None
        step = eta
        for _ in range(opts.max_halvings + 1):
            point = z - step * gz
            if use_probe:
                try:
                    cand, mu_hint = qcqp.project_feasible(
                        point, sur, scen.D0, scen.D, pt_eff,
                        mu_hint=mu_hint, return_info=True,
                    )
                except qcqp.SurrogateInfeasible:
                    surrogate_empty = True
                    break
            else:
                cand = qcqp.project_chain(point, scen.D0, scen.D)
            f_cand = fval(cand)
            if f_cand <= fz + opts.armijo_c * float(gz @ (cand - z)):
                accepted = (cand, f_cand)
                break
            step *= opts.shrink
        if surrogate_empty:
            break

        if accepted is None:
            # no Armijo step from this momentum point; restart momentum once,
            # then give up (best-so-far still protects the caller)
            if alpha != 0.0:
                alpha = 0.0
                z = t_cur.copy()
                continue
            break
        t_next, f_next = accepted
        eta = min(step * 2.0, eta0)

        if f_next > f_cur:
            increases += 1
            if increases >= 2:
                alpha = 0.0
                increases = 0
        else:
            increases = 0
        if f_next < f_best:
            f_best, t_best = f_next, t_next.copy()

        moved = np.linalg.norm(t_next - t_cur)
        alpha, zeta = momentum_step(alpha)
        z = t_next + zeta * (t_next - t_cur)
        t_cur, f_cur = t_next, f_next
        if moved <= opts.tol * max(1.0, np.linalg.norm(t_cur)):
            converged = True
            break

    info = {
        "iterations": it,
        "converged": converged,
        "surrogate_empty": surrogate_empty,
        "objective": f_best,
    }
    return t_best, info
