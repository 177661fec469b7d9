"""Shared builders for the test suite."""

import numpy as np
import pytest

from coexist_sim.cellular_fd import BeamformerSet, DistortionParams, all_links
from coexist_sim.channel_model import (
    ChannelSet,
    LinkDims,
    ScenarioConfig,
    draw_channel_set,
)


def small_scenario(**overrides) -> ScenarioConfig:
    """Compact scenario used across unit tests (fast to draw and solve)."""
    base = dict(radar_antennas=4, num_ul_users=1, num_dl_users=1, seed=0)
    base.update(overrides)
    return ScenarioConfig(**base)


def desk_scenario(**overrides) -> ScenarioConfig:
    base = dict(radar_antennas=4, seed=0)
    base.update(overrides)
    return ScenarioConfig(**base)


def draw(cfg: ScenarioConfig, seed: int) -> ChannelSet:
    return draw_channel_set(cfg, np.random.default_rng(seed))


def random_beamformers(chs: ChannelSet, rng: np.random.Generator,
                       power: float = 1.0) -> BeamformerSet:
    """Random full beamformer set (V, U, B) with bounded norms."""
    from coexist_sim.channel_model import crandn

    v, u, b = {}, {}, {}
    for i in chs.links:
        d = chs.dims[i]
        v[i] = np.sqrt(power / (d.m_tx * d.d)) * crandn(rng, d.m_tx, d.d)
        u[i] = crandn(rng, d.n_rx, d.d)
        g = crandn(rng, d.d, d.d)
        b[i] = np.linalg.cholesky(g @ g.conj().T + np.eye(d.d))
    return BeamformerSet(v=v, u=u, b=b)


def mmse_beamformers(chs: ChannelSet, cfg: ScenarioConfig, p_r: float = 0.0) -> BeamformerSet:
    from coexist_sim import robust_beamforming as rb
    from coexist_sim.cellular_fd import mmse_receiver

    dist = DistortionParams(cfg.psi, cfg.upsilon)
    bf = rb.right_singular_init(chs, cfg)
    bf.u = {i: mmse_receiver(chs, bf, dist, p_r, i) for i in chs.links}
    bf.b = {i: rb.update_b_closed_form(chs, bf, dist, p_r, i) for i in chs.links}
    return bf


def synthetic_channels(k: int = 1, j: int = 1, n_bs: int = 2, n_ue: int = 2,
                       m_ue: int = 2, m_bs: int = 2, r_t: int = 4,
                       fill=None, noise: float = 1.0,
                       rng: np.random.Generator = None) -> ChannelSet:
    """Channel set with hand-chosen matrices (fill=0 gives all-zero channels,
    fill=None draws unit random)."""
    from coexist_sim.channel_model import crandn

    links = all_links(k, j)
    dims = {}
    for l in links:
        if l.kind == "UL":
            dims[l] = LinkDims(n_rx=n_bs, m_tx=m_ue, d=min(n_bs, m_ue))
        else:
            dims[l] = LinkDims(n_rx=n_ue, m_tx=m_bs, d=min(n_ue, m_bs))
    if rng is None:
        rng = np.random.default_rng(0)

    def make(r, c):
        if fill is None:
            return crandn(rng, r, c)
        return np.full((r, c), fill, dtype=complex)

    h = {}
    for i in links:
        for jj in links:
            h[(i, jj)] = make(dims[i].n_rx, dims[jj].m_tx)
    g = {l: make(r_t, dims[l].m_tx) for l in links}
    w = {l: make(dims[l].n_rx, r_t) for l in links}
    w["BR"] = make(n_bs, r_t)
    return ChannelSet(links=links, h=h, g=g, w=w,
                      h_si=h[(links[0], links[-1])] if k and j else make(n_bs, m_bs),
                      dims=dims, noise_power={l: noise for l in links})


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
