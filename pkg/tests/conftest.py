"""Shared helpers: seeded random physical instances at desk scale."""

import numpy as np
import pytest

from faisac.model import Scenario, build_channels
from faisac.qcqp import project_chain


def random_scenario(rng, M=None, K=None, pt_frac=0.0):
    """Random but physically coherent instance (wavelength-scale geometry).

    ``pt_frac`` sets Pt as a fraction of the matched-beam ceiling M*Pmax.
    """
    M = int(M if M is not None else rng.integers(2, 9))
    K = int(K if K is not None else rng.integers(1, 9))
    lam = 0.01
    D0 = lam / 2
    D = lam * rng.uniform(max((M - 1) * 0.5 + 0.5, 2.0), 12.0)
    Pmax = float(rng.uniform(0.5, 2.0))
    return Scenario(
        M=M,
        lam=lam,
        D=D,
        D0=D0,
        theta_users=rng.uniform(0.05, np.pi - 0.05, K),
        theta_probe=float(rng.uniform(0.2, np.pi - 0.2)),
        sigma2=float(10.0 ** rng.uniform(-11.5, -10.5)),
        Pmax=Pmax,
        Pt=pt_frac * M * Pmax,
        g0=1e-4,
        alpha=2.8,
        d_users=rng.uniform(50.0, 200.0, K),
    )


def random_apv(rng, scen):
    """Random feasible antenna positions."""
    return project_chain(np.sort(rng.uniform(0.0, scen.D, scen.M)), scen.D0, scen.D)


def random_beamformers(rng, M, K, power):
    """Random complex beamformers scaled to the given total power."""
    W = rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))
    return W * np.sqrt(power / np.sum(np.abs(W) ** 2))


def random_instance(rng, M=None, K=None, pt_frac=0.0, power_frac=1.0):
    """Scenario + feasible positions + channels + beamformers bundle."""
    scen = random_scenario(rng, M, K, pt_frac)
    t = random_apv(rng, scen)
    ch = build_channels(scen, t)
    W = random_beamformers(rng, scen.M, scen.K, power_frac * scen.Pmax)
    return scen, t, ch, W


@pytest.fixture
def rng():
    return np.random.default_rng(20240831)
