"""Physical model of a fluid-antenna ISAC downlink.

Conventions used throughout the package:

* antenna positions ``t`` are a real ``(M,)`` array in meters, ascending on
  the aperture ``[0, D]``;
* beamformers ``W`` are a complex ``(M, K)`` array, one column per user;
* all angles are radians and all powers are watts (unit conversion is the
  job of the config layer in :mod:`faisac.cli`).

Everything here is a pure function over immutable inputs; instances can be
evaluated concurrently without locking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Scenario",
    "ChannelSet",
    "spatial_frequency",
    "steering_vector",
    "build_channels",
    "sinr",
    "sum_rate",
    "probing_power",
    "beampattern",
    "uniform_apv",
    "apv_feasible",
    "two_user_scenario",
    "eight_user_scenario",
]


def spatial_frequency(theta, lam):
    """Spatial frequency v = (2*pi/lam)*cos(theta) in rad/m."""
    return 2.0 * np.pi / lam * np.cos(theta)


def steering_vector(t, theta, lam):
    """Steering vector with entries exp(j*v*t_m) toward angle ``theta``.

    Unit-modulus per element, so ``norm(a)**2 == len(t)`` for any positions.
    """
    t = np.asarray(t, dtype=float)
    return np.exp(1j * spatial_frequency(theta, lam) * t)


@dataclass(frozen=True)
class Scenario:
    """One problem instance: array geometry, users, powers.

    Attributes
    ----------
    M : int
        Number of transmit antennas.
    lam : float
        Carrier wavelength [m].
    D : float
        Aperture length [m]; antenna positions live in [0, D].
    D0 : float
        Minimum inter-antenna spacing [m].
    theta_users : ndarray
        Angles of departure toward the K users [rad].
    theta_probe : float
        Angle of departure of the sensing direction [rad].
    sigma2 : float
        Per-user noise power [W].
    Pmax : float
        Transmit power budget [W].
    Pt : float
        Probing-power threshold [W]; 0 disables the sensing constraint.
    g0 : float
        Reference channel power gain at 1 m (linear).
    alpha : float
        Path-loss exponent.
    d_users : ndarray
        User distances [m] (scalar broadcasts to all users).
    """

    M: int
    lam: float
    D: float
    D0: float
    theta_users: np.ndarray
    theta_probe: float
    sigma2: float
    Pmax: float
    Pt: float
    g0: float
    alpha: float
    d_users: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta_users, dtype=float)).copy()
        d = np.atleast_1d(np.asarray(self.d_users, dtype=float)).copy()
        if d.size == 1 and theta.size > 1:
            d = np.full(theta.size, d[0])
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if theta.size < 1:
            raise ValueError("theta_users must contain at least one angle")
        if d.size != theta.size:
            raise ValueError("d_users length must match theta_users length")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.D > 0 or not self.D0 > 0:
            raise ValueError("D and D0 must be positive")
        if self.D < (self.M - 1) * self.D0:
            raise ValueError(
                f"aperture too short: D={self.D} < (M-1)*D0={(self.M - 1) * self.D0}"
            )
        for name in ("sigma2", "Pmax", "g0", "alpha"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.Pt < 0:
            raise ValueError("Pt must be nonnegative")
        if np.any(theta < 0) or np.any(theta > np.pi):
            raise ValueError("theta_users must lie in [0, pi]")
        if not 0 <= self.theta_probe <= np.pi:
            raise ValueError("theta_probe must lie in [0, pi]")
        if np.any(d <= 0):
            raise ValueError("d_users must be positive")
        theta.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "theta_users", theta)
        object.__setattr__(self, "d_users", d)

    @property
    def K(self):
        return self.theta_users.size


@dataclass(frozen=True)
class ChannelSet:
    """LoS channels h_k = delta_k * a(t, theta_k) for one position vector.

    ``h`` is (M, K), ``delta`` and ``v`` are (K,) with v_k the spatial
    frequency of user k; every entry of h[:, k] has modulus delta_k.
    """

    h: np.ndarray
    delta: np.ndarray
    v: np.ndarray

    @property
    def K(self):
        return self.h.shape[1]

    @property
    def M(self):
        return self.h.shape[0]


def build_channels(s: Scenario, t) -> ChannelSet:
    """LoS channels at antenna positions ``t``.

    The propagation amplitude is delta_k = sqrt(g0 * d_k**-alpha), i.e.
    g0 * d**-alpha is treated as a power gain.
    """
    t = np.asarray(t, dtype=float)
    delta = np.sqrt(s.g0 * s.d_users ** (-s.alpha))
    v = spatial_frequency(s.theta_users, s.lam)
    h = delta[None, :] * np.exp(1j * np.outer(t, v))
    h.setflags(write=False)
    return ChannelSet(h=h, delta=delta, v=v)


def sinr(ch: ChannelSet, W, sigma2):
    """Per-user SINR gamma_k for beamformers ``W`` (one column per user)."""
    Z = ch.h.conj().T @ W  # Z[k, i] = h_k^H w_i
    p = np.abs(Z) ** 2
    desired = np.diag(p)
    interference = p.sum(axis=1) - desired
    return desired / (interference + sigma2)


def sum_rate(ch: ChannelSet, W, sigma2):
    """Multiuser sum rate in bits/s/Hz."""
    return float(np.sum(np.log2(1.0 + sinr(ch, W, sigma2))))


def probing_power(W, t, theta, lam):
    """Power radiated toward ``theta``: a^H (sum_k w_k w_k^H) a."""
    a = steering_vector(t, theta, lam)
    s = a.conj() @ W
    return float(np.sum(np.abs(s) ** 2))


def beampattern(W, t, lam, grid):
    """Probing power evaluated over a grid of angles [rad]."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("angle grid must be nonempty")
    t = np.asarray(t, dtype=float)
    # (G, M) steering matrix, then row-wise |a^H w_k|^2 summed over users
    A = np.exp(-1j * np.outer(spatial_frequency(grid, lam), t))
    S = A @ W
    return np.sum(np.abs(S) ** 2, axis=1)


def uniform_apv(s: Scenario):
    """Uniformly spaced positions spanning [0, D]; feasible when D >= (M-1)*D0."""
    if s.M == 1:
        return np.zeros(1)
    return np.linspace(0.0, s.D, s.M)


def apv_feasible(t, s: Scenario, tol=1e-9):
    """Check box and spacing constraints within ``tol``."""
    t = np.asarray(t, dtype=float)
    if t[0] < -tol or t[-1] > s.D + tol:
        return False
    if t.size > 1 and np.min(np.diff(t)) < s.D0 - tol:
        return False
    return True


def _base_scenario(M, theta_users_deg, Pt, Pmax, D_wavelengths):
    lam = 0.01
    return Scenario(
        M=M,
        lam=lam,
        D=D_wavelengths * lam,
        D0=lam / 2,
        theta_users=np.deg2rad(theta_users_deg),
        theta_probe=np.deg2rad(60.0),
        sigma2=1e-11,  # -80 dBm
        Pmax=Pmax,
        Pt=Pt,
        g0=1e-4,  # -40 dB
        alpha=2.8,
        d_users=np.full(len(theta_users_deg), 100.0),
    )


def two_user_scenario(M=8, Pt=1.0, Pmax=1.0, D_wavelengths=10.0):
    """Underloaded demo setup: two users at 90 and 120 degrees, probe at 60."""
    return _base_scenario(M, [90.0, 120.0], Pt, Pmax, D_wavelengths)


def eight_user_scenario(M=8, Pt=6.0, Pmax=1.0, D_wavelengths=10.0):
    """Overloaded demo setup: eight users spread over [10, 170] degrees."""
    return _base_scenario(
        M, [10.0, 30.0, 80.0, 90.0, 120.0, 130.0, 150.0, 170.0], Pt, Pmax, D_wavelengths
    )
