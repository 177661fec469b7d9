import numpy as np
import pytest

from coexist_sim import radar_nsp as nsp
from coexist_sim.errors import DimensionMismatch, FullRankNullSpace
from conftest import desk_scenario, draw, small_scenario


def crand(rng, r, c):
    return (rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))) / np.sqrt(2)


class TestBuildProjector:
    def test_zero_stack_gives_identity(self):
        stack = nsp.InterferenceStack(w_stacked=np.zeros((3, 5), dtype=complex))
        proj = nsp.build_projector(stack)
        assert np.array_equal(proj.p, np.eye(5))
        assert proj.rank_w == 0

    def test_full_rank_raises(self):
        stack = nsp.InterferenceStack(w_stacked=np.eye(4, dtype=complex))
        with pytest.raises(FullRankNullSpace):
            nsp.build_projector(stack)

    def test_full_rank_allow_empty(self):
        stack = nsp.InterferenceStack(w_stacked=np.eye(4, dtype=complex))
        proj = nsp.build_projector(stack, allow_empty=True)
        assert np.all(proj.p == 0)
        assert proj.rank == 0

    def test_random_tall_null_space(self, rng):
        w = crand(rng, 6, 8)
        proj = nsp.build_projector(nsp.InterferenceStack(w_stacked=w))
        assert proj.rank_w == 6
        assert proj.rank == 2
        assert np.linalg.norm(w @ proj.p.conj().T) < 1e-10 * np.linalg.norm(w)

    def test_projector_invariants(self, rng):
        for _ in range(10):
            w = crand(rng, int(rng.integers(1, 6)), 8)
            proj = nsp.build_projector(nsp.InterferenceStack(w_stacked=w))
            p = proj.p
            assert np.linalg.norm(p @ p - p) <= 1e-10
            assert np.linalg.norm(p - p.conj().T) <= 1e-10
            assert np.linalg.norm(w @ p.conj().T) <= 1e-9 * np.linalg.norm(w)
            # rank complementarity
            rank_p = int(round(np.trace(p).real))
            assert rank_p + proj.rank_w == 8


class TestStackInterference:
    def test_row_count(self):
        cfg = desk_scenario(radar_antennas=8)
        chs = draw(cfg, 0)
        stack = nsp.stack_interference(chs)
        expected = cfg.antennas_bs_rx + cfg.num_dl_users * cfg.antennas_user
        assert stack.w_stacked.shape == (expected, 8)

    def test_scenario_projector_nulls_all_channels(self):
        cfg = desk_scenario(radar_antennas=8)
        chs = draw(cfg, 1)
        stack = nsp.stack_interference(chs)
        proj = nsp.build_projector(stack)
        rng = np.random.default_rng(0)
        s_r = nsp.orthogonal_waveform(8, 32, rng)
        x_r = nsp.project_waveform(proj, s_r)
        for key in ["BR"] + chs.dl:
            w = chs.w[key]
            assert (np.linalg.norm(w @ x_r)
                    <= 1e-9 * np.linalg.norm(w) * np.linalg.norm(s_r))


class TestProjectWaveform:
    def test_identity(self, rng):
        proj = nsp.Projector(p=np.eye(4, dtype=complex), rank_w=0)
        s = crand(rng, 4, 6)
        assert np.array_equal(nsp.project_waveform(proj, s), s)

    def test_fixed_points(self, rng):
        w = crand(rng, 2, 6)
        proj = nsp.build_projector(nsp.InterferenceStack(w_stacked=w))
        s = proj.p @ crand(rng, 6, 3)  # columns already in range(P)
        assert np.linalg.norm(nsp.project_waveform(proj, s) - s) < 1e-12

    def test_dimension_mismatch(self, rng):
        proj = nsp.Projector(p=np.eye(4, dtype=complex), rank_w=0)
        with pytest.raises(DimensionMismatch):
            nsp.project_waveform(proj, crand(rng, 5, 2))


def test_orthogonal_waveform(rng):
    s = nsp.orthogonal_waveform(4, 32, rng)
    gram = s @ s.conj().T
    assert np.linalg.norm(gram - 32 * np.eye(4)) < 1e-10
    with pytest.raises(DimensionMismatch):
        nsp.orthogonal_waveform(8, 4, rng)
