"""Position-solver checks: trig forms, exact gradient, extrapolated descent."""

import numpy as np
import pytest

from faisac.epg import (
    EpgOptions,
    TrigState,
    WSplit,
    epg_solve,
    grad_t,
    momentum_step,
    quadratic_forms,
)
from faisac.epg import _objective_t
from faisac.model import Scenario, build_channels, probing_power, steering_vector
from faisac.solver import init_solution
from faisac.wmmse import AuxState, mmse_aux, objective_F

from conftest import random_apv, random_beamformers, random_instance, random_scenario


class TestMomentumSchedule:
    def test_first_values_exact(self):
        alpha2, zeta2 = momentum_step(0.0)
        assert alpha2 == 1.0
        assert zeta2 == 0.0
        alpha3, zeta3 = momentum_step(alpha2)
        assert alpha3 == pytest.approx((1 + np.sqrt(5)) / 2, rel=1e-15)
        assert zeta3 == pytest.approx((alpha3 - 1) / alpha3, rel=1e-15)

    def test_monotone_growth(self):
        alpha = 0.0
        prev_zeta = -1.0
        for _ in range(50):
            alpha, zeta = momentum_step(alpha)
            assert zeta >= prev_zeta
            prev_zeta = zeta
        assert zeta < 1.0


class TestWSplit:
    def test_structure(self, rng):
        W = random_beamformers(rng, 5, 3, 1.0)
        sp = WSplit.from_beamformers(W)
        for k in range(3):
            assert np.allclose(sp.C[k], sp.C[k].T)
            assert np.allclose(sp.D[k], -sp.D[k].T)
            assert np.linalg.eigvalsh(sp.C[k]).min() >= -1e-12
            # w w^H = C - j D
            assert np.allclose(np.outer(W[:, k], W[:, k].conj()),
                               sp.C[k] - 1j * sp.D[k], atol=1e-12)

    def test_trig_state_identity(self, rng):
        scen, t, ch, _ = random_instance(rng)
        tr = TrigState.at(t, ch.v)
        assert np.allclose(tr.g ** 2 + tr.q ** 2, 1.0, atol=1e-12)


class TestQuadraticForms:
    def test_complex_oracle(self, rng):
        for _ in range(20):
            scen, t, ch, W = random_instance(rng)
            f, h = quadratic_forms(t, W, ch)
            for k in range(scen.K):
                a_k = steering_vector(t, scen.theta_users[k], scen.lam)
                for i in range(scen.K):
                    want = abs(np.vdot(a_k, W[:, i])) ** 2
                    assert f[k, i] == pytest.approx(want, rel=1e-12, abs=1e-15)
                assert h[k] == pytest.approx(
                    np.vdot(a_k, W[:, k]).real, rel=1e-12, abs=1e-15
                )
            assert np.all(f >= 0)

    def test_zero_beamformer(self, rng):
        scen, t, ch, W = random_instance(rng)
        f, h = quadratic_forms(t, np.zeros_like(W), ch)
        assert np.all(f == 0) and np.all(h == 0)

    def test_broadside_collapse(self, rng):
        # theta = pi/2 gives v = 0, so f reduces to |sum_m w_i[m]|^2
        scen = random_scenario(rng, M=4, K=2)
        scen = Scenario(M=4, lam=scen.lam, D=scen.D, D0=scen.D0,
                        theta_users=np.array([np.pi / 2, np.pi / 2]),
                        theta_probe=scen.theta_probe, sigma2=scen.sigma2,
                        Pmax=scen.Pmax, Pt=0.0, g0=scen.g0, alpha=scen.alpha,
                        d_users=scen.d_users)
        t = random_apv(rng, scen)
        ch = build_channels(scen, t)
        W = random_beamformers(rng, 4, 2, 1.0)
        f, _ = quadratic_forms(t, W, ch)
        for k in range(2):
            for i in range(2):
                assert f[k, i] == pytest.approx(abs(W[:, i].sum()) ** 2, rel=1e-12)


class TestGradT:
    def _fd_grad(self, t, W, aux, ch, scen, eps):
        g = np.zeros_like(t)
        for m in range(t.size):
            tp, tm = t.copy(), t.copy()
            tp[m] += eps
            tm[m] -= eps
            fp = objective_F(build_channels(scen, tp), W, aux, scen.sigma2)
            fm = objective_F(build_channels(scen, tm), W, aux, scen.sigma2)
            g[m] = (fp - fm) / (2 * eps)
        return g

    def test_matches_finite_differences_mmse_aux(self, rng):
        for _ in range(30):
            scen, t, ch, W = random_instance(rng, M=8, K=2)
            aux = mmse_aux(ch, W, scen.sigma2)
            got = grad_t(t, W, aux, ch)
            fd = self._fd_grad(t, W, aux, ch, scen, 1e-7 * scen.lam)
            assert np.linalg.norm(got - fd) <= 1e-5 * max(np.linalg.norm(fd), 1e-12)

    def test_matches_finite_differences_arbitrary_aux(self, rng):
        # the gradient must be exact for any complex u, not only MMSE ones
        for _ in range(10):
            scen, t, ch, W = random_instance(rng, M=5, K=3)
            u = rng.standard_normal(3) * 1e4 + 1j * rng.standard_normal(3) * 1e4
            aux = AuxState(u=u, rho=rng.uniform(1.0, 10.0, 3))
            got = grad_t(t, W, aux, ch)
            fd = self._fd_grad(t, W, aux, ch, scen, 1e-7 * scen.lam)
            assert np.linalg.norm(got - fd) <= 1e-5 * max(np.linalg.norm(fd), 1e-12)

    def test_broadside_users_zero_gradient(self, rng):
        scen = random_scenario(rng, M=6, K=2)
        scen = Scenario(M=6, lam=scen.lam, D=scen.D, D0=scen.D0,
                        theta_users=np.array([np.pi / 2, np.pi / 2]),
                        theta_probe=scen.theta_probe, sigma2=scen.sigma2,
                        Pmax=scen.Pmax, Pt=0.0, g0=scen.g0, alpha=scen.alpha,
                        d_users=scen.d_users)
        t = random_apv(rng, scen)
        ch = build_channels(scen, t)
        W = random_beamformers(rng, 6, 2, 1.0)
        aux = mmse_aux(ch, W, scen.sigma2)
        # cos(pi/2) is ~6e-17 in floats, so "zero" means v-factor dust;
        # a generic instance here has gradient norms around 1e3
        assert np.allclose(grad_t(t, W, aux, ch), 0.0, atol=1e-8)

    def test_zero_aux_zero_gradient(self, rng):
        scen, t, ch, W = random_instance(rng, K=2)
        aux = AuxState(u=np.zeros(2, complex), rho=np.ones(2))
        assert np.all(grad_t(t, W, aux, ch) == 0)


class TestObjectiveT:
    def test_matches_objective_f(self, rng):
        for _ in range(10):
            scen, t, ch, W = random_instance(rng)
            aux = mmse_aux(ch, W, scen.sigma2)
            t2 = random_apv(rng, scen)
            want = objective_F(build_channels(scen, t2), W, aux, scen.sigma2)
            got = _objective_t(t2, W, aux, scen, ch.v, ch.delta)
            assert got == pytest.approx(want, rel=1e-12)


class TestEpgSolve:
    def test_stationary_feasible_point_is_fixed(self, rng):
        # broadside users make F independent of t: gradient is exactly zero
        scen = random_scenario(rng, M=4, K=1)
        scen = Scenario(M=4, lam=scen.lam, D=scen.D, D0=scen.D0,
                        theta_users=np.array([np.pi / 2]),
                        theta_probe=scen.theta_probe, sigma2=scen.sigma2,
                        Pmax=scen.Pmax, Pt=0.0, g0=scen.g0, alpha=scen.alpha,
                        d_users=scen.d_users[:1])
        t = random_apv(rng, scen)
        ch = build_channels(scen, t)
        W = random_beamformers(rng, 4, 1, scen.Pmax)
        aux = mmse_aux(ch, W, scen.sigma2)
        out, info = epg_solve(t, W, aux, ch, scen, EpgOptions(max_iter=20))
        assert np.allclose(out, t, atol=1e-15)

    def test_unconstrained_descent_is_monotone(self, rng):
        # Pt = 0: box+spacing projected gradient; best-so-far never backslides
        for _ in range(5):
            scen, t, ch, W = random_instance(rng, M=6, K=3, pt_frac=0.0)
            aux = mmse_aux(ch, W, scen.sigma2)
            f0 = objective_F(ch, W, aux, scen.sigma2)
            opts = EpgOptions(max_iter=200)
            out, info = epg_solve(t, W, aux, ch, scen, opts)
            f1 = _objective_t(out, W, aux, scen, ch.v, ch.delta)
            assert f1 <= f0 + 1e-12
            assert info["objective"] == pytest.approx(f1, rel=1e-12)

    def test_iterates_stay_feasible_with_probe_floor(self, rng):
        for _ in range(5):
            scen, t, ch, W = random_instance(rng, M=5, K=2, pt_frac=0.25)
            # beamformers meeting the floor at the start point
            a = steering_vector(t, scen.theta_probe, scen.lam)
            from faisac.pda import project_probe

            W = project_probe(W, a, scen.Pt)
            aux = mmse_aux(ch, W, scen.sigma2)
            out, info = epg_solve(t, W, aux, ch, scen, EpgOptions(max_iter=30))
            assert out[0] >= -1e-12
            assert out[-1] <= scen.D + 1e-12
            assert np.min(np.diff(out)) >= scen.D0 - 1e-9
            assert probing_power(W, out, scen.theta_probe, scen.lam) >= (
                scen.Pt - 1e-6 * max(1.0, scen.Pt)
            )

    def test_two_antenna_grid_oracle(self, rng):
        # exhaustive search over (t1, t2) at 1e-4 m resolution
        lam = 0.01
        scen = Scenario(M=2, lam=lam, D=2.5 * lam, D0=lam / 2,
                        theta_users=np.array([np.pi / 2, 2 * np.pi / 3]),
                        theta_probe=np.pi / 3, sigma2=1e-11, Pmax=1.0, Pt=1.0,
                        g0=1e-4, alpha=2.8, d_users=np.array([100.0, 100.0]))
        t0 = np.array([0.0, scen.D])
        ch = build_channels(scen, t0)
        W, _ = init_solution(scen)
        aux = mmse_aux(ch, W, scen.sigma2)
        out, info = epg_solve(t0, W, aux, ch, scen, EpgOptions(max_iter=100))
        f_got = _objective_t(out, W, aux, scen, ch.v, ch.delta)

        axis = np.arange(0.0, scen.D + 5e-5, 1e-4)
        t1 = axis[:, None]
        t2 = axis[None, :]
        feas = (t2 - t1) >= scen.D0
        # vectorized probing power and objective over the grid
        vp = 2 * np.pi / lam * np.cos(scen.theta_probe)
        e1 = np.exp(-1j * vp * t1)
        e2 = np.exp(-1j * vp * t2)
        probe = np.zeros_like(t1 * t2)
        for i in range(2):
            probe = probe + np.abs(e1 * W[0, i] + e2 * W[1, i]) ** 2
        feas &= probe >= scen.Pt - 1e-9
        fgrid = np.zeros(feas.shape)
        for k in range(2):
            vk = ch.v[k]
            a1 = np.exp(-1j * vk * t1)
            a2 = np.exp(-1j * vk * t2)
            total = np.zeros(feas.shape)
            zkk = None
            for i in range(2):
                z = a1 * W[0, i] + a2 * W[1, i]
                total += np.abs(z) ** 2
                if i == k:
                    zkk = z
            e = (1.0 - 2.0 * ch.delta[k] * np.real(np.conj(aux.u[k]) * zkk)
                 + abs(aux.u[k]) ** 2 * (ch.delta[k] ** 2 * total + scen.sigma2))
            fgrid += aux.rho[k] * e - np.log(aux.rho[k]) - 1.0
        fgrid += 2.0
        fgrid = np.where(feas, fgrid, np.inf)
        f_grid = float(fgrid.min())
        assert f_got <= f_grid + 1e-3
        assert f_got >= f_grid - 1e-3
