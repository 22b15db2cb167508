"""Beamformer subproblem via a proximal distance algorithm.

Minimizes the quadratic part of the WMMSE surrogate subject to the power
ball and the probing-power floor by penalizing squared distances to the two
sets, majorized through their projections. Each iteration is one Hermitian
linear solve plus two closed-form projections; the factorization of
(A + 2*rho_bar*I) is shared across the K right-hand sides and refreshed only
when the penalty grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .model import steering_vector
from .wmmse import QuadraticData, quad_objective

__all__ = [
    "PdaOptions",
    "PdaResult",
    "DegenerateProbeInput",
    "project_power",
    "project_probe",
    "pda_solve",
]


class DegenerateProbeInput(ValueError):
    """Input orthogonal to the probe steering vector; projection is ill-posed."""


@dataclass
class PdaOptions:
    """Penalty schedule and stopping tolerances.

    The penalty starts at ``rho_bar0`` and grows by ``kappa`` every
    ``period_I`` iterations. ``tol`` is a relative iterate-change threshold;
    ``feas_tol`` bounds the accepted constraint violation.
    """

    rho_bar0: float = 1.0
    kappa: float = 1.5
    period_I: int = 10
    max_iter: int = 500
    tol: float = 1e-8
    feas_tol: float = 1e-6

    def __post_init__(self):
        if not self.rho_bar0 > 0:
            raise ValueError("rho_bar0 must be positive")
        if not self.kappa > 1:
            raise ValueError("kappa must exceed 1")
        if self.period_I < 1 or self.max_iter < 1:
            raise ValueError("period_I and max_iter must be positive")
        if not self.tol > 0 or not self.feas_tol > 0:
            raise ValueError("tolerances must be positive")


@dataclass
class PdaResult:
    W: np.ndarray
    feasible: bool
    converged: bool
    iterations: int
    objective: float
    power: float
    probing: float


def project_power(W, Pmax):
    """Euclidean projection onto the total-power ball sum_k ||w_k||^2 <= Pmax."""
    p = float(np.sum(np.abs(W) ** 2))
    if p <= Pmax:
        return W
    return W * np.sqrt(Pmax / p)


def project_probe(W, a, Pt):
    """Euclidean projection onto sum_k |a^H w_k|^2 >= Pt.

    Identity when already satisfied; otherwise the component of each w_k
    along ``a`` is scaled up so the constraint holds with equality, which is
    the rank-one Woodbury form of (I - mu a a^H)^{-1} w_k with
    mu = 1/||a||^2 - sqrt(sum_k |a^H w_k|^2 / (||a||^4 Pt)).
    """
    s = a.conj() @ W
    ps = float(np.sum(np.abs(s) ** 2))
    if ps >= Pt:
        return W
    if ps == 0.0:
        raise DegenerateProbeInput(
            "input beamformers are orthogonal to the probe steering vector"
        )
    aa = float(np.vdot(a, a).real)
    mu = 1.0 / aa - np.sqrt(ps / (aa * aa * Pt))
    scale = mu / (1.0 - mu * aa)
    return W + np.outer(a, s) * scale


def pda_solve(quad: QuadraticData, t, theta, lam, Pmax, Pt, opts: PdaOptions = None,
              w_init=None) -> PdaResult:
    """Run the proximal distance iteration for the beamformer block.

    Returns the best feasible iterate found (lowest quadratic objective);
    when ``w_init`` is feasible the returned objective never exceeds its
    value. A result with ``feasible=False`` carries the achieved power and
    probing as diagnostics.
    """
    opts = opts or PdaOptions()
    a = steering_vector(t, theta, lam)
    A, b = quad.A, quad.b
    M, K = b.shape
    if w_init is None:
        w_init = np.zeros((M, K), dtype=complex)
    W = np.asarray(w_init, dtype=complex).copy()
    W_prev = W.copy()

    rho_bar = opts.rho_bar0
    eye = np.eye(M)
    factor = cho_factor(A + 2.0 * rho_bar * eye)

    aH = a.conj()
    aa = float(np.vdot(a, a).real)
    pw_tol = Pmax + opts.feas_tol * max(1.0, Pmax)
    pr_tol = Pt - opts.feas_tol * max(1.0, Pt)

    best_obj = np.inf
    best_W = None

    def consider(Wc, pw, pr):
        nonlocal best_obj, best_W
        if pw <= pw_tol and pr >= pr_tol:
            obj = quad_objective(quad, Wc)
            if obj < best_obj:
                best_obj = obj
                best_W = Wc.copy()
            return True
        return False

    def consider_candidates(Wc):
        """Raw iterate, plus power-clipped and probe-lifted repairs.

        The lift puts the probing floor at equality so downstream position
        updates see a feasible expansion point; its power cost is on the
        order of the repaired deficit and stays inside the tolerance.
        """
        s = aH @ Wc
        pw = float(np.vdot(Wc, Wc).real)
        pr = float(np.vdot(s, s).real)
        ok = consider(Wc, pw, pr)
        if pw > Pmax:
            c = np.sqrt(Pmax / pw)
            Wc = Wc * c
            s = s * c
            pw = Pmax
            pr *= c * c
            ok = consider(Wc, pw, pr) or ok
        if 0.0 < pr < Pt:
            lift = np.sqrt(Pt / pr)
            W_lift = Wc + np.outer(a, s) * ((lift - 1.0) / aa)
            pw_lift = pw + (lift * lift - 1.0) * pr / aa
            ok = consider(W_lift, pw_lift, Pt) or ok
        return ok

    consider_candidates(W)

    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        Z = W + ((it - 1.0) / (it + 2.0)) * (W - W_prev)
        sZ = aH @ Z
        prZ = float(np.vdot(sZ, sZ).real)
        if prZ == 0.0 and Pt > 0.0:
            # measure-zero case: nudge along the steering direction
            Z = Z + 1e-8 * a[:, None]
            sZ = aH @ Z
            prZ = float(np.vdot(sZ, sZ).real)
        # sum of the ball and probe projections, sharing the cross gains
        pwZ = float(np.vdot(Z, Z).real)
        y = Z if pwZ <= Pmax else Z * np.sqrt(Pmax / pwZ)
        if prZ >= Pt:
            y = y + Z
        else:
            lift = np.sqrt(Pt / prZ)
            y = y + Z + np.outer(a, sZ) * ((lift - 1.0) / aa)
        W_next = cho_solve(factor, rho_bar * y + b)

        ok = consider_candidates(W_next)

        rel = np.linalg.norm(W_next - W) / max(1.0, np.linalg.norm(W))
        W_prev, W = W, W_next

        if rel < opts.tol and ok:
            converged = True
            break
        if it % opts.period_I == 0:
            rho_bar *= opts.kappa
            factor = cho_factor(A + 2.0 * rho_bar * eye)

    if best_W is None:
        # no feasible iterate: report the power-clipped final iterate
        Wc = project_power(W, Pmax)
        return PdaResult(
            W=Wc,
            feasible=False,
            converged=False,
            iterations=it,
            objective=quad_objective(quad, Wc),
            power=float(np.vdot(Wc, Wc).real),
            probing=float(np.sum(np.abs(aH @ Wc) ** 2)),
        )
    return PdaResult(
        W=best_W,
        feasible=True,
        converged=converged,
        iterations=it,
        objective=best_obj,
        power=float(np.vdot(best_W, best_W).real),
        probing=float(np.sum(np.abs(aH @ best_W) ** 2)),
    )
