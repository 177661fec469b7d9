import math
import warnings

import numpy as np
import pytest

from coexist_sim import channel_model as cm
from coexist_sim.cellular_fd import DL, UL
from coexist_sim.errors import DomainError
from conftest import small_scenario


class TestPathLoss:
    def test_free_space_at_reference(self):
        # Friis at d0 = 1 m, 3.6 GHz (value depends mildly on the c convention)
        pl = cm.ci_path_loss_db(3.6e9, 1.0, 2.0, 0.0)
        assert abs(pl - 43.57) < 0.02

    def test_decade_of_distance(self):
        pl0 = cm.ci_path_loss_db(3.6e9, 1.0, 2.0, 0.0)
        assert abs(cm.ci_path_loss_db(3.6e9, 10.0, 2.0, 0.0) - pl0 - 20.0) < 1e-9

    def test_zero_exponent(self):
        pl0 = cm.ci_path_loss_db(3.6e9, 1.0, 2.0, 0.0)
        assert abs(cm.ci_path_loss_db(3.6e9, 123.0, 0.0, 3.5) - pl0 - 3.5) < 1e-9

    def test_below_reference_distance(self):
        with pytest.raises(DomainError):
            cm.ci_path_loss_db(3.6e9, 0.5, 2.0, 0.0)

    def test_monotone_in_distance(self):
        d = np.linspace(1.0, 500.0, 40)
        pl = [cm.ci_path_loss_db(3.6e9, x, 2.0, 0.0) for x in d]
        assert np.all(np.diff(pl) > 0)


class TestScenarioConfig:
    def test_noise_power(self):
        cfg = small_scenario()
        # -174 dBm/Hz + 80 dB + 13 dB = -81 dBm
        assert abs(cfg.noise_bs_w - 10 ** (-81.0 / 10.0) * 1e-3) < 1e-18
        assert abs(cfg.noise_user_w - 10 ** (-85.0 / 10.0) * 1e-3) < 1e-18

    def test_validation(self):
        with pytest.raises(DomainError):
            small_scenario(cci_factor=1.5).validate()
        with pytest.raises(DomainError):
            small_scenario(cell_radius_m=-1.0).validate()
        with pytest.raises(DomainError):
            small_scenario(p_fa=1.0).validate()

    def test_distortion_warning(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            small_scenario(psi=0.2).validate()
        assert any("distortion" in str(w.message) for w in caught)

    def test_from_file(self, tmp_path):
        path = tmp_path / "scenario.cfg"
        path.write_text("# comment\ncell_radius_m = 25\nnum_ul_users = 3\nseed = 7\n")
        cfg = cm.ScenarioConfig.from_file(path)
        assert cfg.cell_radius_m == 25.0
        assert cfg.num_ul_users == 3
        assert cfg.seed == 7
        assert cfg.bandwidth_hz == 100e6  # default retained

    def test_from_file_unknown_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("not_a_key = 1\n")
        with pytest.raises(DomainError):
            cm.ScenarioConfig.from_file(path)


class TestDrawChannelSet:
    def test_deterministic(self):
        cfg = small_scenario(seed=5)
        a = cm.draw_channel_set(cfg, np.random.default_rng(5))
        b = cm.draw_channel_set(cfg, np.random.default_rng(5))
        for key in a.h:
            assert np.array_equal(a.h[key], b.h[key])
        for key in a.g:
            assert np.array_equal(a.g[key], b.g[key])

    def test_full_cci_cancellation(self):
        cfg = small_scenario(num_ul_users=2, num_dl_users=2, cci_factor=0.0)
        chs = cm.draw_channel_set(cfg, np.random.default_rng(0))
        for i in chs.dl:
            for j in chs.ul:
                assert np.all(chs.h[(i, j)] == 0)

    def test_table_dims(self):
        rng = np.random.default_rng(3)
        for _ in range(6):
            k = int(rng.integers(1, 4))
            j = int(rng.integers(1, 4))
            nb = int(rng.integers(1, 4))
            nu = int(rng.integers(1, 4))
            cfg = small_scenario(num_ul_users=k, num_dl_users=j,
                                 antennas_bs_tx=nb, antennas_bs_rx=nb,
                                 antennas_user=nu)
            chs = cm.draw_channel_set(cfg, np.random.default_rng(int(rng.integers(1e6))))
            for i in chs.links:
                n_i = nb if i.kind == UL else nu
                m_i = nu if i.kind == UL else nb
                assert chs.dims[i].n_rx == n_i and chs.dims[i].m_tx == m_i
                for jj in chs.links:
                    assert chs.h[(i, jj)].shape == (chs.dims[i].n_rx, chs.dims[jj].m_tx)
                assert chs.w[i].shape == (chs.dims[i].n_rx, cfg.radar_antennas)
                assert chs.g[i].shape == (cfg.radar_antennas, chs.dims[i].m_tx)

    def test_small_scale_unit_variance(self):
        # divide out the stored large-scale gain, pool entries across draws
        cfg = small_scenario(antennas_user=1, antennas_bs_rx=1, antennas_bs_tx=1)
        vals = []
        for t in range(10000):
            chs = cm.draw_channel_set(cfg, np.random.default_rng(t))
            ul = chs.ul[0]
            gain = chs.gains[("UL", ul.id)]
            vals.append(chs.h[(ul, ul)][0, 0] / math.sqrt(gain))
        var = float(np.mean(np.abs(vals) ** 2))
        assert abs(var - 1.0) < 0.05

    def test_si_channel_rician(self):
        cfg = small_scenario(rician_k=1e9)  # mean-dominated limit
        chs = cm.draw_channel_set(cfg, np.random.default_rng(0))
        assert np.allclose(chs.h_si, np.ones_like(chs.h_si), atol=1e-3)

    def test_users_inside_cell(self):
        cfg = small_scenario(num_ul_users=3, num_dl_users=3)
        chs = cm.draw_channel_set(cfg, np.random.default_rng(2))
        for key, pos in chs.positions.items():
            if key in ("BS", "RS"):
                continue
            assert np.linalg.norm(pos) <= cfg.cell_radius_m + 1e-9

    def test_radar_position(self):
        cfg = small_scenario()
        chs = cm.draw_channel_set(cfg, np.random.default_rng(2))
        assert np.allclose(chs.positions["RS"], [440.0, 0.0])


class TestUncertaintyBall:
    def test_zero_radius(self, rng):
        nom = cm.crandn(rng, 2, 3)
        ball = cm.UncertaintyBall(nominal=nom, radius=0.0)
        assert np.array_equal(cm.sample_in_ball(ball, rng), nom)

    def test_membership(self, rng):
        nom = np.zeros((2, 2), dtype=complex)
        ball = cm.UncertaintyBall(nominal=nom, radius=0.1)
        norms = [np.linalg.norm(cm.sample_in_ball(ball, rng)) for _ in range(10000)]
        assert max(norms) <= 0.1 + 1e-12

    def test_radial_mean(self, rng):
        nom = np.zeros((2, 2), dtype=complex)
        ball = cm.UncertaintyBall(nominal=nom, radius=0.1)
        norms = [np.linalg.norm(cm.sample_in_ball(ball, rng)) for _ in range(10000)]
        expected = cm.uniform_ball_mean_radius(0.1, 2, 2)
        assert abs(np.mean(norms) - expected) < 0.02 * expected


def test_apply_radar_projection(rng):
    cfg = small_scenario()
    chs = cm.draw_channel_set(cfg, rng)
    p = np.zeros((cfg.radar_antennas, cfg.radar_antennas), dtype=complex)
    eff = cm.apply_radar_projection(chs, p)
    for key in eff.w:
        assert np.all(eff.w[key] == 0)
    # original untouched
    assert not np.all(chs.w["BR"] == 0)
