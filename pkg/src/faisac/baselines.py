"""Comparison methods: fixed half-wavelength array and particle-swarm positions."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .model import Scenario
from .pda import PdaOptions
from .qcqp import project_chain
from .solver import BsumOptions, InfeasibleScenario, Solution, bsum_solve, probing_ceiling

__all__ = ["PsoOptions", "fpa_positions", "fpa_solve", "pso_solve"]


@dataclass
class PsoOptions:
    """Swarm controls; the fitness of a layout is the sum rate after a short
    beamformer-only solve, so ``inner_bsum_iters`` trades fitness fidelity
    for speed. ``fitness_pda`` deliberately runs a lighter penalty schedule
    than the production solver."""

    n_particles: int = 50
    n_iters: int = 100
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    seed: int = 0
    inner_bsum_iters: int = 10
    fitness_pda: PdaOptions = field(
        default_factory=lambda: PdaOptions(max_iter=48, kappa=2.5, period_I=6, tol=1e-6)
    )

    def __post_init__(self):
        if self.n_particles < 1 or self.n_iters < 1 or self.inner_bsum_iters < 1:
            raise ValueError("counts must be positive")
        if not 0 < self.inertia <= 1:
            raise ValueError("inertia must lie in (0, 1]")
        if self.cognitive <= 0 or self.social <= 0:
            raise ValueError("cognitive and social weights must be positive")


INFEASIBLE_FITNESS = -1e6


def fpa_positions(scen: Scenario):
    """Conventional uniform half-wavelength layout."""
    t = np.arange(scen.M) * scen.lam / 2.0
    if t[-1] > scen.D:
        raise ValueError(
            f"half-wavelength array of {scen.M} elements exceeds the aperture "
            f"({t[-1]:.4g} m > {scen.D:.4g} m)"
        )
    return t


def fpa_solve(scen: Scenario, opts: BsumOptions = None) -> Solution:
    """Beamformer-only solve at the fixed half-wavelength layout."""
    opts = opts or BsumOptions()
    opts = replace(opts, enable_apv=False, t_init=fpa_positions(scen))
    return bsum_solve(scen, opts)


def _fitness(scen, t, pso_opts, bsum_opts):
    inner = replace(
        bsum_opts,
        enable_apv=False,
        t_init=t,
        max_outer=pso_opts.inner_bsum_iters,
        pda=pso_opts.fitness_pda,
    )
    sol = bsum_solve(scen, inner)
    return sol.sum_rate if sol.feasible else INFEASIBLE_FITNESS


def pso_solve(scen: Scenario, opts: PsoOptions = None,
              bsum_opts: BsumOptions = None) -> Solution:
    """Particle swarm over antenna layouts with beamformer fitness.

    Particles stay feasible by chain projection after every velocity update;
    particle 0 starts at the half-wavelength layout as a deterministic
    anchor. The global best layout is refined by a full beamformer-only
    solve. Deterministic for a fixed seed (serial evaluation order).
    """
    opts = opts or PsoOptions()
    bsum_opts = bsum_opts or BsumOptions()
    if scen.Pt > probing_ceiling(scen) * (1.0 + 1e-12):
        raise InfeasibleScenario(scen)
    t_start = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    M = scen.M

    positions = np.empty((opts.n_particles, M))
    positions[0] = project_chain(fpa_positions(scen), scen.D0, scen.D)
    for p in range(1, opts.n_particles):
        positions[p] = project_chain(
            np.sort(rng.uniform(0.0, scen.D, M)), scen.D0, scen.D
        )
    velocities = np.zeros_like(positions)

    pbest = positions.copy()
    pbest_fit = np.array(
        [_fitness(scen, positions[p], opts, bsum_opts) for p in range(opts.n_particles)]
    )
    g = int(np.argmax(pbest_fit))
    gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])

    best_trace = [gbest_fit]
    min_margin = np.inf
    for _ in range(opts.n_iters):
        for p in range(opts.n_particles):
            r1 = rng.random(M)
            r2 = rng.random(M)
            velocities[p] = (
                opts.inertia * velocities[p]
                + opts.cognitive * r1 * (pbest[p] - positions[p])
                + opts.social * r2 * (gbest - positions[p])
            )
            positions[p] = project_chain(positions[p] + velocities[p], scen.D0, scen.D)
            margins = np.concatenate(
                ([positions[p][0]], np.diff(positions[p]) - scen.D0,
                 [scen.D - positions[p][-1]])
            )
            min_margin = min(min_margin, float(margins.min()))
            fit = _fitness(scen, positions[p], opts, bsum_opts)
            if fit > pbest_fit[p]:
                pbest_fit[p] = fit
                pbest[p] = positions[p].copy()
                if fit > gbest_fit:
                    gbest_fit = fit
                    gbest = positions[p].copy()
        best_trace.append(gbest_fit)

    refined = replace(bsum_opts, enable_apv=False, t_init=gbest)
    sol = bsum_solve(scen, refined)
    sol.wall_s = time.perf_counter() - t_start  # swarm included
    sol.extras["pso_best_fitness"] = best_trace
    sol.extras["pso_best_layout"] = gbest
    sol.extras["pso_min_margin"] = min_margin
    return sol
