"""Projection onto the probing surrogate set intersected with the position chain.

The probing power a^H(t) R_w a(t) = sum_{mn} |R_mn| cos(v (t_n - t_m) + ang R_mn)
is minorized by the concave quadratic

    g(t | t~) = t^T D t - 2 d^T t + c,      D = -v^2 (diag(r) - |R|),

obtained by bounding each cosine's curvature by 1 around the expansion
point, so g is tight and tangent at t~ and a global lower bound elsewhere.

Projecting onto {g >= Pt} intersected with the chain polytope
{t_1 >= 0, t_M <= Dlen, t_m - t_{m-1} >= D0} is a convex QCQP. Instead of a
generic conic solver it is handled by root-finding on the multiplier of the
single concave constraint (bracketed Illinois secant, bisection-safe); every
inner problem is a strongly convex quadratic over the chain, solved exactly
by a primal active-set loop whose feasible starting points come from the
closed-form chain projection. The chain projection itself reduces, after
the shift s_m = t_m - (m-1) D0, to bounded isotonic regression solved by
pool-adjacent-violators with end clipping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import spatial_frequency

__all__ = [
    "Surrogate",
    "SurrogateInfeasible",
    "build_surrogate",
    "surrogate_value",
    "surrogate_grad",
    "project_chain",
    "chain_argmax_surrogate",
    "project_feasible",
]


class SurrogateInfeasible(RuntimeError):
    """The surrogate set {g >= Pt} does not meet the chain polytope."""

    def __init__(self, achieved_max, Pt):
        super().__init__(
            f"surrogate maximum {achieved_max:.6g} over the chain is below Pt={Pt:.6g}"
        )
        self.achieved_max = achieved_max
        self.Pt = Pt


@dataclass(frozen=True)
class Surrogate:
    """Concave quadratic minorizer of probing power at expansion point t_tilde."""

    Dmat: np.ndarray
    d: np.ndarray
    c: float
    t_tilde: np.ndarray
    v: float
    Pt_ref: float


def build_surrogate(t_tilde, Rw, theta, lam, Pt=0.0) -> Surrogate:
    """Build (D, d, c) so that g(t|t~) <= a^H(t) Rw a(t) with equality at t~."""
    t_tilde = np.asarray(t_tilde, dtype=float)
    v = float(spatial_frequency(theta, lam))
    Rabs = np.abs(Rw)
    ang = np.angle(Rw)  # angle(0) = 0, so zero entries contribute nothing
    r = Rabs.sum(axis=0)
    Dmat = -(v ** 2) * (np.diag(r) - Rabs)
    # delta[m, n] = t~_n - t~_m; f[m, n] = v * delta + ang(R_mn)
    delta = t_tilde[None, :] - t_tilde[:, None]
    f = v * delta + ang
    sinf = np.sin(f)
    d = v * np.sum(Rabs * sinf, axis=0) - v ** 2 * np.sum(Rabs * delta, axis=0)
    c = float(np.sum(Rabs * (np.cos(f) + v * sinf * delta - 0.5 * v ** 2 * delta ** 2)))
    return Surrogate(Dmat=Dmat, d=d, c=c, t_tilde=t_tilde.copy(), v=v, Pt_ref=float(Pt))


def surrogate_value(sur: Surrogate, t):
    t = np.asarray(t, dtype=float)
    return float(t @ sur.Dmat @ t - 2.0 * sur.d @ t + sur.c)


def surrogate_grad(sur: Surrogate, t):
    return 2.0 * (sur.Dmat @ np.asarray(t, dtype=float)) - 2.0 * sur.d


def _pav_nondecreasing(y):
    """L2 isotonic regression (unit weights) by pool-adjacent-violators."""
    means = []
    counts = []
    for val in y:
        means.append(float(val))
        counts.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, c2 = means.pop(), counts.pop()
            m1, c1 = means.pop(), counts.pop()
            c = c1 + c2
            means.append((m1 * c1 + m2 * c2) / c)
            counts.append(c)
    out = np.empty(len(y))
    i = 0
    for m, c in zip(means, counts):
        out[i : i + c] = m
        i += c
    return out


def project_chain(kappa, D0, Dlen):
    """Euclidean projection onto {t_1 >= 0, t_M <= Dlen, t_m - t_{m-1} >= D0}.

    Shifting s_m = t_m - (m-1) D0 turns the spacing constraints into
    monotonicity with box ends, and the bounded isotonic fit is the clipped
    unbounded fit.
    """
    kappa = np.asarray(kappa, dtype=float)
    m = kappa.size
    if Dlen < (m - 1) * D0:
        raise ValueError("chain infeasible: Dlen < (M-1)*D0")
    offsets = D0 * np.arange(m)
    s = _pav_nondecreasing(kappa - offsets)
    np.clip(s, 0.0, Dlen - (m - 1) * D0, out=s)
    return s + offsets


def _constraint_margins(t, D0, Dlen):
    """c_j(t) >= 0 margins: [t_1, spacing - D0 ..., Dlen - t_M]."""
    return np.concatenate(([t[0]], np.diff(t) - D0, [Dlen - t[-1]]))


def _constraint_directional(p):
    """Directional derivatives of the margins along p."""
    return np.concatenate(([p[0]], np.diff(p), [-p[-1]]))


def _constraint_rows(m, active):
    """Rows of the active constraints as a dense (na, m) matrix."""
    Ga = np.zeros((len(active), m))
    for i, j in enumerate(active):
        if j == 0:
            Ga[i, 0] = 1.0
        elif j == m:
            Ga[i, m - 1] = -1.0
        else:
            Ga[i, j] = 1.0
            Ga[i, j - 1] = -1.0
    return Ga


def _fista_chain(P, q, D0, Dlen, t0, tol=1e-13, max_iter=20000):
    """Accelerated projected gradient for min t^T P t - 2 q^T t over the chain.

    Fallback path; handles merely-PSD P with monotone restarts.
    """
    eigs = np.linalg.eigvalsh(P)
    lo, hi = float(max(eigs[0], 0.0)), float(eigs[-1])
    if hi <= 0.0:  # constant objective on the polytope
        return project_chain(t0, D0, Dlen)
    L = 2.0 * hi
    strong = lo / hi > 1e-12
    beta = (np.sqrt(hi) - np.sqrt(lo)) / (np.sqrt(hi) + np.sqrt(lo)) if strong else 0.0

    t = project_chain(t0, D0, Dlen)
    t_prev = t.copy()
    alpha = 1.0
    for _ in range(max_iter):
        if strong:
            y = t + beta * (t - t_prev)
        else:
            alpha_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * alpha * alpha))
            y = t + ((alpha - 1.0) / alpha_next) * (t - t_prev)
            alpha = alpha_next
        grad = 2.0 * (P @ y - q)
        t_next = project_chain(y - grad / L, D0, Dlen)
        done = np.linalg.norm(t_next - t) <= tol * max(1.0, np.linalg.norm(t))
        if not strong and (t_next - t) @ (y - t_next) > 0:
            alpha = 1.0
        t_prev, t = t, t_next
        if done:
            break
    return t


def _chain_qp(P, q, D0, Dlen, t0):
    """Exact min t^T P t - 2 q^T t over the chain polytope; P must be SPD.

    Primal active-set iteration: equality-constrained KKT solves on the
    working set, ratio tests to add blockers, multiplier signs to drop.
    Finite for a strictly convex quadratic; a projected-gradient fallback
    guards against degenerate cycling.
    """
    m = q.size
    slack = Dlen - (m - 1) * D0
    if slack <= 0:  # chain is the single fully squeezed layout
        return D0 * np.arange(m)
    H = 2.0 * P
    t = project_chain(t0, D0, Dlen)
    scale = max(1.0, abs(Dlen))
    active = list(np.nonzero(_constraint_margins(t, D0, Dlen) <= 1e-11 * scale)[0])

    for _ in range(6 * (m + 1) + 30):
        grad = H @ t - 2.0 * q
        na = len(active)
        if na:
            Ga = _constraint_rows(m, active)
            KKT = np.zeros((m + na, m + na))
            KKT[:m, :m] = H
            KKT[:m, m:] = Ga.T
            KKT[m:, :m] = Ga
            rhs = np.concatenate([-grad, np.zeros(na)])
            try:
                sol = np.linalg.solve(KKT, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(KKT, rhs, rcond=None)[0]
            p, nu = sol[:m], sol[m:]
        else:
            p = np.linalg.solve(H, -grad)
            nu = np.empty(0)

        if float(np.abs(p).max(initial=0.0)) <= 1e-11 * scale:
            lam = -nu
            if na == 0 or float(lam.min()) >= -1e-9 * max(1.0, float(np.abs(lam).max())):
                return t
            active.pop(int(np.argmin(lam)))
            continue
        if float(grad @ p) >= 0:  # conditioning broke the KKT solve
            return _fista_chain(P, q, D0, Dlen, t)

        margins = _constraint_margins(t, D0, Dlen)
        deriv = _constraint_directional(p)
        alpha = 1.0
        blocker = -1
        for j in range(m + 1):
            if deriv[j] < -1e-14 and j not in active:
                aj = margins[j] / (-deriv[j])
                if aj < alpha:
                    alpha = max(aj, 0.0)
                    blocker = j
        t = t + alpha * p
        if blocker >= 0:
            active.append(blocker)
    return _fista_chain(P, q, D0, Dlen, t)


def chain_argmax_surrogate(sur: Surrogate, D0, Dlen):
    """Maximize the concave g over the chain polytope; returns (t, g(t)).

    Used for infeasibility diagnostics. Maximizing g is minimizing the
    convex -g, whose quadratic part -D is PSD but singular along the common
    position shift (g depends on relative positions only), so the
    projected-gradient path is used: the flat direction leaves the achieved
    value untouched.
    """
    t0 = project_chain(sur.t_tilde, D0, Dlen)
    t = _fista_chain(-sur.Dmat, -sur.d, D0, Dlen, t0)
    return t, surrogate_value(sur, t)


def project_feasible(kappa, sur: Surrogate, D0, Dlen, Pt=None, mu_hint=None,
                     return_info=False):
    """Minimize ||t - kappa||^2 over {g(t) >= Pt} intersected with the chain.

    Root-finding on the multiplier mu >= 0 of the concave constraint: the
    inner problem min ||t - kappa||^2 + mu (Pt - g(t)) has Hessian
    2(I - mu D), always SPD, and g(t(mu)) is continuous and non-decreasing
    in mu. A bracketed Illinois secant drives g(t(mu)) to Pt; ``mu_hint``
    warm-starts the bracket (useful across repeated projections against one
    surrogate). Raises :class:`SurrogateInfeasible` when the intersection is
    empty.
    """
    if Pt is None:
        Pt = sur.Pt_ref
    kappa = np.asarray(kappa, dtype=float)
    m = kappa.size
    t0 = project_chain(kappa, D0, Dlen)
    # dust-level slack: a violation within float noise of the surrogate's own
    # scale must not drive the multiplier search (g can be numerically
    # constant when the probe sits near broadside)
    tol_g = 1e-12 * max(1.0, abs(Pt), abs(sur.c))
    if surrogate_value(sur, t0) >= Pt - tol_g:
        return (t0, 0.0) if return_info else t0

    eye = np.eye(m)

    def inner(mu, warm):
        t_mu = _chain_qp(eye - mu * sur.Dmat, kappa - mu * sur.d, D0, Dlen, warm)
        return t_mu, surrogate_value(sur, t_mu) - Pt

    # bracket [mu_lo, mu_hi] with phi(mu_lo) < 0 <= phi(mu_hi)
    mu = mu_hint if mu_hint and mu_hint > 0 else 1e-12 * max(1.0, float(np.linalg.norm(kappa)))
    t_cur, phi = inner(mu, t0)
    if phi >= 0:
        mu_hi, t_hi, phi_hi = mu, t_cur, phi
        mu_lo, phi_lo = 0.0, surrogate_value(sur, t0) - Pt
        for _ in range(80):
            mu /= 4.0
            if mu < 1e-250:
                break
            t_cur, phi = inner(mu, t_cur)
            if phi < 0:
                mu_lo, phi_lo = mu, phi
                break
            mu_hi, t_hi, phi_hi = mu, t_cur, phi
    else:
        mu_lo, phi_lo = mu, phi
        mu_hi = None
        for _ in range(80):
            mu *= 4.0
            t_cur, phi = inner(mu, t_cur)
            if phi >= 0:
                mu_hi, t_hi, phi_hi = mu, t_cur, phi
                break
            mu_lo, phi_lo = mu, phi
        if mu_hi is None:
            # either empty intersection or a touching point only reachable
            # in the mu -> inf limit
            t_max, g_max = chain_argmax_surrogate(sur, D0, Dlen)
            if g_max < Pt:
                raise SurrogateInfeasible(g_max, Pt)
            return (t_max, float(mu)) if return_info else t_max

    # Illinois secant with bisection fallback inside the bracket
    stale_lo = 0
    for _ in range(200):
        if mu_hi - mu_lo <= 1e-10 * mu_hi or phi_hi <= 1e-11 * max(1.0, abs(Pt)):
            break
        denom = phi_hi - phi_lo
        if denom > 0:
            mu_mid = mu_hi - phi_hi * (mu_hi - mu_lo) / denom
            span = mu_hi - mu_lo
            if not (mu_lo + 1e-3 * span < mu_mid < mu_hi - 1e-3 * span):
                mu_mid = 0.5 * (mu_lo + mu_hi)
        else:
            mu_mid = 0.5 * (mu_lo + mu_hi)
        t_mid, phi_mid = inner(mu_mid, t_hi)
        if phi_mid >= 0:
            mu_hi, t_hi, phi_hi = mu_mid, t_mid, phi_mid
            stale_lo += 1
            if stale_lo >= 2:  # Illinois: damp the stale endpoint
                phi_lo *= 0.5
                stale_lo = 0
        else:
            mu_lo, phi_lo = mu_mid, phi_mid
            stale_lo = 0
    return (t_hi, float(mu_hi)) if return_info else t_hi
