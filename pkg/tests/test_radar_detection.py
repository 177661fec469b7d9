import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from coexist_sim import radar_detection as rd
from coexist_sim import radar_nsp as nsp
from coexist_sim.cellular_fd import BeamformerSet
from coexist_sim.errors import DegenerateSteering, DomainError, SingularCovariance
from conftest import desk_scenario, draw, random_beamformers, small_scenario


def crand(rng, r, c):
    return (rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))) / np.sqrt(2)


def make_params(r=4, p_r=10.0, sigma=1.0, l_samples=16, p_fa=1e-2, phi=0.7,
                wavelength=0.0833, alpha=1.0):
    return rd.RadarParams(
        r_antennas=r,
        element_positions=rd.ula_positions(r, wavelength),
        wavelength=wavelength,
        p_r=p_r,
        alpha_r=complex(alpha),
        phi=phi,
        sigma_r2=sigma,
        l_samples=l_samples,
        p_fa=p_fa,
    )


def random_projector(rng, r, rows):
    w = crand(rng, rows, r)
    return nsp.build_projector(nsp.InterferenceStack(w_stacked=w))


def ncx2_sf_quadrature(rho, threshold):
    """Independent oracle: adaptively integrate the noncentral chi-squared
    density with 2 DoF over [threshold, inf)."""
    if rho == 0.0:
        return math.exp(-threshold / 2.0)

    def density(x):
        s = math.sqrt(rho * x)
        # 0.5 exp(-(x+rho)/2) I0(sqrt(rho x)), written with the scaled Bessel
        return 0.5 * math.exp(s - (x + rho) / 2.0) * special.i0e(s)

    upper = threshold + rho + 60.0 * math.sqrt(rho + 4.0) + 60.0
    val, err = integrate.quad(density, threshold, upper, limit=400)
    assert err < 1e-9
    return val


class TestSteering:
    def test_zero_positions_all_ones(self):
        p = make_params()
        p.element_positions = np.zeros((4, 2))
        a = rd.steering_matrix(p)
        assert np.allclose(a, np.ones((4, 4)))

    def test_rank_one_unimodular(self, rng):
        p = make_params(r=6, phi=0.3)
        a = rd.steering_matrix(p)
        assert np.allclose(np.abs(a), 1.0)
        s = np.linalg.svd(a, compute_uv=False)
        assert s[1] < 1e-10 * s[0]

    def test_half_wavelength_broadside(self):
        p = make_params(r=4, phi=math.pi / 2, wavelength=2.0)
        # spacing lambda/2, phi = pi/2: A_ir = exp(-j pi (i + r - 2)) (1-based)
        a = rd.steering_matrix(p)
        for i in range(4):
            for r in range(4):
                assert abs(a[i, r] - np.exp(-1j * math.pi * (i + r))) < 1e-12


class TestInterferenceCovariance:
    def test_silent_system(self):
        chs = draw(small_scenario(), 0)
        bf = BeamformerSet(v={l: np.zeros((chs.dims[l].m_tx, chs.dims[l].d), dtype=complex)
                              for l in chs.links})
        chi = rd.radar_interference_covariance(chs, bf, 0.0, 2.0)
        assert np.allclose(chi, 2.0 * np.eye(chs.g[chs.links[0]].shape[0]))

    def test_single_ul_identity(self):
        from conftest import synthetic_channels

        chs = synthetic_channels(k=1, j=0, n_bs=2, m_ue=2, r_t=2, fill=0.0)
        ul = chs.links[0]
        chs.g[ul] = np.eye(2, dtype=complex)
        bf = BeamformerSet(v={ul: np.eye(2, dtype=complex)})
        chi = rd.radar_interference_covariance(chs, bf, 0.0, 0.5)
        # G V V^H G^H + sigma I = I + 0.5 I
        assert np.allclose(chi, 1.5 * np.eye(2))

    def test_against_loop_oracle(self, rng):
        chs = draw(desk_scenario(), 3)
        bf = random_beamformers(chs, rng)
        psi, sigma2 = 0.01, 0.3
        chi = rd.radar_interference_covariance(chs, bf, psi, sigma2)
        r = chs.g[chs.links[0]].shape[0]
        # independent elementwise summation oracle
        ref = sigma2 * np.eye(r, dtype=complex)
        for j in chs.links:
            g = chs.g[j]
            v = bf.v[j]
            q = v @ v.conj().T
            dq = np.zeros_like(q)
            for ell in range(q.shape[0]):
                dq[ell, ell] = q[ell, ell]
            ref = ref + g @ (q + psi * dq) @ g.conj().T
        assert np.linalg.norm(chi - ref) < 1e-10 * np.linalg.norm(ref)


class TestWhitening:
    def test_white_input(self):
        proj = rd.identity_projector(3)
        pi = rd.whitening_filter(4.0 * np.eye(3), proj)
        assert pi.shape == (9, 9)
        assert np.allclose(pi, 0.5 * np.eye(9))

    def test_whitened_identity(self, rng):
        a = crand(rng, 3, 3)
        chi = a @ a.conj().T + np.eye(3)
        proj = rd.identity_projector(3)
        pi = rd.whitening_filter(chi, proj)
        block = rd.restricted_block_covariance(chi, proj)
        assert np.linalg.norm(pi.conj().T @ block @ pi - np.eye(9)) < 1e-8

    def test_rank_deficient_projector(self, rng):
        proj = random_projector(rng, 6, 2)  # rank(P) = 4
        chi = np.eye(6) * 2.0
        basis, eigs = rd.whitening_subspace(chi, proj)
        assert eigs.size == proj.rank
        pi = rd.whitening_filter(chi, proj)
        assert pi.shape == (6 * proj.rank, 6 * proj.rank)


class TestNoncentrality:
    def test_nulled_steering(self, rng):
        p = make_params(r=4)
        a = rd.steering_matrix(p)
        proj = nsp.Projector(p=np.zeros((4, 4), dtype=complex), rank_w=4)
        assert rd.noncentrality_rho(p, a, proj, np.eye(4)) == 0.0

    def test_white_case_closed_form(self):
        p = make_params(r=4, sigma=0.7)
        a = rd.steering_matrix(p)
        rho = rd.noncentrality_rho(p, a, rd.identity_projector(4), 0.7 * np.eye(4))
        expected = p.gamma_r * np.linalg.norm(a) ** 2
        assert abs(rho - expected) < 1e-9 * expected

    def test_against_quadratic_form_oracle(self, rng):
        p = make_params(r=5)
        a = rd.steering_matrix(p)
        proj = random_projector(rng, 5, 2)
        m = crand(rng, 5, 5)
        chi_hat = m @ m.conj().T + 0.5 * np.eye(5)
        rho = rd.noncentrality_rho(p, a, proj, chi_hat)
        # oracle: build chi = I_R kron (P^H chi_hat P), pseudo-invert by eigen
        # decomposition, evaluate the quadratic form with explicit loops
        k = proj.p.conj().T @ chi_hat @ proj.p
        chi = np.kron(np.eye(5), k)
        vals, vecs = np.linalg.eigh((chi + chi.conj().T) / 2)
        keep = vals > vals.max() * 1e-12
        pinv = (vecs[:, keep] / vals[keep]) @ vecs[:, keep].conj().T
        v = (a @ proj.p).reshape(-1, order="F")
        quad = 0.0
        for i in range(v.size):
            for j in range(v.size):
                quad += np.conj(v[i]) * pinv[i, j] * v[j]
        expected = abs(p.alpha_r) ** 2 * p.l_samples * p.p_r * quad.real
        assert abs(rho - expected) <= 1e-9 * max(1.0, expected)


class TestThresholdAndPoD:
    def test_threshold_values(self):
        assert abs(rd.detection_threshold(1e-5) - 23.0259) < 1e-3
        assert abs(rd.detection_threshold(math.exp(-5.0)) - 10.0) < 1e-12
        assert rd.detection_threshold(0.999999) < 1e-5
        with pytest.raises(DomainError):
            rd.detection_threshold(0.0)

    def test_pod_boundaries(self):
        assert abs(rd.prob_detection(0.0, 1e-3) - 1e-3) < 1e-15
        assert rd.prob_detection(1e4, 1e-3) > 1 - 1e-12

    def test_pod_vs_quadrature(self):
        for p_fa in (1e-2, 1e-5):
            thr = rd.detection_threshold(p_fa)
            for rho in (0.5, 5.0, 25.0, 49.0):
                ref = ncx2_sf_quadrature(rho, thr)
                got = rd.prob_detection(rho, p_fa)
                assert abs(got - ref) < 1e-6

    def test_pod_monotone_in_rho(self):
        vals = [rd.prob_detection(float(r), 1e-5) for r in range(51)]
        assert np.all(np.diff(vals) > 0)

    def test_pod_monotone_in_pfa(self):
        pfas = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
        vals = [rd.prob_detection(9.0, p) for p in pfas]
        assert np.all(np.diff(vals) > 0)

    def test_marcum_vs_scipy(self):
        for rho in (0.1, 1.0, 10.0, 40.0, 200.0, 1100.0):
            for thr in (2.0, 10.0, 23.0):
                mine = rd.marcum_q1(math.sqrt(rho), math.sqrt(thr))
                ref = float(stats.ncx2.sf(thr, 2, rho))
                tol = 1e-9 if rho <= 2 * rd.MARCUM_SERIES_MAX_HALF_RHO else 1e-5
                assert abs(mine - ref) < tol, (rho, thr)


class TestGlrt:
    def test_zero_observation(self):
        p = make_params(r=3)
        a = rd.steering_matrix(p)
        stat = rd.glrt_statistic(np.zeros((3, 3)), a, rd.identity_projector(3), np.eye(3))
        assert stat == 0.0

    def test_noise_free_cancellation(self, rng):
        p = make_params(r=2, p_r=3.0, l_samples=9, alpha=0.8)
        a = rd.steering_matrix(p)
        proj = random_projector(rng, 2, 1)
        y = p.alpha_r * math.sqrt(p.l_samples * p.p_r) * (a @ proj.p)
        stat = rd.glrt_statistic(y, a, proj, np.eye(2))
        ap = a @ proj.p
        expected = (abs(p.alpha_r) ** 2 * p.l_samples * p.p_r
                    * np.real(np.trace(ap @ proj.p.conj().T @ a.conj().T)))
        assert abs(stat - expected) < 1e-9 * expected

    def test_degenerate_steering(self):
        p = make_params(r=3)
        a = rd.steering_matrix(p)
        proj = nsp.Projector(p=np.zeros((3, 3), dtype=complex), rank_w=3)
        with pytest.raises(DegenerateSteering):
            rd.glrt_statistic(np.zeros((3, 3)), a, proj, np.eye(3))

    def test_singular_covariance(self):
        p = make_params(r=3)
        a = rd.steering_matrix(p)
        with pytest.raises(SingularCovariance):
            rd.glrt_statistic(np.zeros((3, 3)), a, rd.identity_projector(3),
                              np.zeros((3, 3)))


class TestMonteCarlo:
    def test_no_target_return_matches_pfa(self, rng):
        p = make_params(r=4, p_r=0.0, p_fa=0.05, l_samples=16)
        rep = rd.simulate_detection(p, None, None, rd.identity_projector(4),
                                    20000, rng)
        se = math.sqrt(0.05 * 0.95 / 20000)
        assert abs(rep.pod_empirical - 0.05) <= 3 * se
        assert rep.rho == 0.0

    def test_analytic_vs_empirical(self, rng):
        p = make_params(r=4, p_r=0.035, sigma=1.0, l_samples=16, p_fa=1e-2)
        rep = rd.simulate_detection(p, None, None, rd.identity_projector(4),
                                    10000, rng)
        assert 0.1 < rep.pod_analytic < 0.95  # mid-range operating point
        se = math.sqrt(rep.pod_analytic * (1 - rep.pod_analytic) / 10000)
        assert abs(rep.pod_analytic - rep.pod_empirical) <= 3 * se

    def test_h0_calibration_with_cellular(self, rng):
        cfg = desk_scenario(radar_antennas=8, p_fa=0.02)
        chs = draw(cfg, 7)
        bf = random_beamformers(chs, rng, power=1e6)  # strong interference
        proj = nsp.build_projector(nsp.stack_interference(chs))
        p = rd.RadarParams.from_scenario(cfg)
        rate = rd.false_alarm_rate(p, chs, bf, proj, 30000, rng, psi=cfg.psi)
        se = math.sqrt(0.02 * 0.98 / 30000)
        assert abs(rate - 0.02) <= 3 * se


class TestLemma2Bound:
    def test_bound_on_interference_dominated_instances(self, rng):
        """tr(A P P^H A^H chi^-1) >= phi R^2 / (I_rad + R sigma^2) whenever the
        cellular interference dominates the noise floor."""
        violations = 0
        for t in range(100):
            r = 8
            p = make_params(r=r, sigma=1.0)
            a = rd.steering_matrix(p)
            proj = random_projector(rng, r, int(rng.integers(1, 5)))
            g = crand(rng, r, 4)
            scale = rng.uniform(10.0, 1000.0)  # interference-to-noise ratio
            q = g @ g.conj().T
            q *= scale * r / np.trace(q).real
            chi_hat = q + p.sigma_r2 * np.eye(r)
            i_rad = float(np.trace(q).real)
            phi = float(np.trace(proj.p @ proj.p.conj().T).real)
            lhs = float(np.real(np.trace(
                a @ proj.p @ proj.p.conj().T @ a.conj().T
                @ np.linalg.inv(chi_hat))))
            rhs = phi * r ** 2 / (i_rad + r * p.sigma_r2)
            if lhs < rhs:
                violations += 1
        assert violations == 0
