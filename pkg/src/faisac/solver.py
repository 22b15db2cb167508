"""BSUM orchestration: cyclic u -> rho -> W -> t updates to convergence.

Each cycle minimizes the shared surrogate over one block while the others
are held fixed; because the auxiliary updates are exact minimizers and both
inner solvers carry best-so-far safeguards, the sum rate recorded after each
full cycle is non-decreasing up to solver tolerances.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .epg import EpgOptions, epg_solve
from .model import (
    Scenario,
    build_channels,
    probing_power,
    steering_vector,
    sum_rate,
    uniform_apv,
)
from .pda import PdaOptions, pda_solve, project_probe
from .wmmse import AuxState, assemble_quadratic, mmse_aux, objective_F

__all__ = [
    "BsumOptions",
    "Solution",
    "InfeasibleScenario",
    "probing_ceiling",
    "init_solution",
    "bsum_solve",
]


class InfeasibleScenario(RuntimeError):
    """No beamformer can reach the probing threshold within the power budget."""

    def __init__(self, scen: Scenario):
        self.ceiling = probing_ceiling(scen)
        self.Pt = scen.Pt
        super().__init__(
            f"Pt={scen.Pt:.6g} W exceeds the matched-beam ceiling "
            f"M*Pmax={self.ceiling:.6g} W"
        )


@dataclass
class BsumOptions:
    """Outer-loop controls plus nested inner-solver options.

    ``enable_apv=False`` freezes the antenna positions (fixed-array mode).
    ``t_init`` overrides the starting layout; ``init_jitter`` adds a seeded
    relative perturbation to the matched-filter starting beamformers so
    distinct seeds explore distinct basins. ``multistart`` names the
    starting layouts tried when positions are optimized and ``t_init`` is
    unset ("uniform", "half_wavelength"); the best feasible result wins.
    Both defaults matter: a uniform span can alias users onto the probe
    when its spacing hits a wavelength multiple, while the half-wavelength
    start never aliases but explores less aperture.
    """

    max_outer: int = 100
    outer_tol: float = 1e-5
    patience: int = 3
    seed: int = 0
    pda: PdaOptions = field(default_factory=PdaOptions)
    epg: EpgOptions = field(default_factory=EpgOptions)
    enable_apv: bool = True
    t_init: np.ndarray = None
    init_jitter: float = 0.0
    multistart: tuple = ("uniform", "half_wavelength")
    feas_tol: float = 1e-6

    def __post_init__(self):
        if self.max_outer < 1:
            raise ValueError("max_outer must be positive")
        if not self.outer_tol > 0:
            raise ValueError("outer_tol must be positive")
        if self.patience < 1:
            raise ValueError("patience must be positive")
        if self.init_jitter < 0:
            raise ValueError("init_jitter must be nonnegative")
        self.multistart = tuple(self.multistart)
        for name in self.multistart:
            if name not in ("uniform", "half_wavelength"):
                raise ValueError(f"unknown start layout '{name}'")
        if not self.multistart:
            raise ValueError("multistart must name at least one layout")


@dataclass
class Solution:
    """Final state plus metrics recomputed from (W, t) at output."""

    W: np.ndarray
    t: np.ndarray
    aux: AuxState
    sum_rate: float
    probing: float
    power: float
    feasible: bool
    converged: bool
    iterations: int
    wall_s: float
    trace: list
    extras: dict = field(default_factory=dict)


def probing_ceiling(scen: Scenario):
    """Largest achievable probing power: all power on the matched beam."""
    return scen.M * scen.Pmax


def init_solution(scen: Scenario, seed=0, t_init=None, init_jitter=0.0):
    """Starting point: uniform layout and matched-filter beamformers.

    The beamformers split the budget equally across users along their
    channels; if the probing floor is violated the probe projection is
    applied once. ``init_jitter`` mixes in a seeded complex perturbation of
    that relative size before renormalizing to the full budget.
    """
    if t_init is None:
        t = uniform_apv(scen)
    else:
        t = np.asarray(t_init, dtype=float).copy()
        if t.size != scen.M:
            raise ValueError("t_init must have M entries")
    ch = build_channels(scen, t)
    W = ch.h / np.linalg.norm(ch.h, axis=0, keepdims=True)
    W = W * np.sqrt(scen.Pmax / scen.K)
    if init_jitter > 0:
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(W.shape) + 1j * rng.standard_normal(W.shape)
        W = W + init_jitter * np.sqrt(scen.Pmax / (2 * W.size)) * noise
        W = W * np.sqrt(scen.Pmax / np.sum(np.abs(W) ** 2))
    if probing_power(W, t, scen.theta_probe, scen.lam) < scen.Pt:
        a = steering_vector(t, scen.theta_probe, scen.lam)
        W = project_probe(W, a, scen.Pt)
    return W, t


def _spacing_ok(t, scen, tol):
    if t[0] < -tol or t[-1] > scen.D + tol:
        return False
    return t.size < 2 or float(np.min(np.diff(t))) >= scen.D0 - tol


def _start_layout(scen: Scenario, name):
    if name == "half_wavelength":
        t = np.arange(scen.M) * scen.lam / 2.0
        if t[-1] <= scen.D:
            return t
        return None  # layout does not fit this aperture
    return uniform_apv(scen)


def bsum_solve(scen: Scenario, opts: BsumOptions = None) -> Solution:
    """Full joint solve; deterministic for a fixed scenario and seed.

    With ``t_init`` unset, one pass runs per layout named in
    ``opts.multistart`` and the best feasible result wins (highest sum
    rate); an explicit ``t_init`` means a single pass from that layout.
    """
    opts = opts or BsumOptions()
    if scen.Pt > probing_ceiling(scen) * (1.0 + 1e-12):
        raise InfeasibleScenario(scen)
    if opts.t_init is not None:
        return _bsum_solve_from(scen, opts, opts.t_init, "explicit")
    if not opts.enable_apv:
        # fixed-position mode: the layout is part of the problem statement,
        # so only the first named start applies
        name = opts.multistart[0]
        t0 = _start_layout(scen, name)
        if t0 is None:
            name = "uniform"
            t0 = _start_layout(scen, name)
        return _bsum_solve_from(scen, opts, t0, name)

    best = None
    for name in opts.multistart:
        t0 = _start_layout(scen, name)
        if t0 is None:
            continue
        sol = _bsum_solve_from(scen, opts, t0, name)
        if best is None or (sol.feasible, sol.sum_rate) > (best.feasible, best.sum_rate):
            best = sol
    return best


def _bsum_solve_from(scen: Scenario, opts: BsumOptions, t_init, start_name) -> Solution:
    t_start = time.perf_counter()
    W, t = init_solution(scen, opts.seed, t_init, opts.init_jitter)
    ch = build_channels(scen, t)

    trace = []
    sr_prev = None
    stall = 0
    converged = False
    inner_feasible = True
    cycle = 0
    for cycle in range(1, opts.max_outer + 1):
        tic = time.perf_counter()
        aux = mmse_aux(ch, W, scen.sigma2)
        quad = assemble_quadratic(ch, aux)
        res = pda_solve(
            quad, t, scen.theta_probe, scen.lam, scen.Pmax, scen.Pt,
            opts.pda, w_init=W,
        )
        W = res.W
        inner_feasible = res.feasible
        if opts.enable_apv:
            t_new, _ = epg_solve(t, W, aux, ch, scen, opts.epg)
            if not np.array_equal(t_new, t):
                t = t_new
                ch = build_channels(scen, t)

        sr = sum_rate(ch, W, scen.sigma2)
        trace.append(
            {
                "cycle": cycle,
                "F": objective_F(ch, W, aux, scen.sigma2),
                "sum_rate": sr,
                "probing": probing_power(W, t, scen.theta_probe, scen.lam),
                "power": float(np.sum(np.abs(W) ** 2)),
                "wall_s": time.perf_counter() - tic,
            }
        )

        if sr_prev is not None and abs(sr - sr_prev) <= opts.outer_tol * max(1.0, abs(sr)):
            stall += 1
            if stall >= opts.patience:
                converged = True
                sr_prev = sr
                break
        else:
            stall = 0
        sr_prev = sr

    aux = mmse_aux(ch, W, scen.sigma2)
    power = float(np.sum(np.abs(W) ** 2))
    probing = probing_power(W, t, scen.theta_probe, scen.lam)
    tol = opts.feas_tol
    feasible = (
        inner_feasible
        and power <= scen.Pmax + tol * max(1.0, scen.Pmax)
        and probing >= scen.Pt - tol * max(1.0, scen.Pt)
        and _spacing_ok(t, scen, 1e-9)
    )
    return Solution(
        W=W,
        t=t,
        aux=aux,
        sum_rate=sum_rate(ch, W, scen.sigma2),
        probing=probing,
        power=power,
        feasible=feasible,
        converged=converged,
        iterations=cycle,
        wall_s=time.perf_counter() - t_start,
        trace=trace,
        extras={"start": start_name},
    )
