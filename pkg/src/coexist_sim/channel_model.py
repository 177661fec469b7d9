"""Scenario configuration, geometry, large/small-scale fading, the Rician
self-interference channel and norm-bounded uncertainty realizations.

A scenario places the full-duplex BS at the origin of a hexagonal cell,
drops the uplink/downlink users uniformly inside it and puts the radar on a
fixed bearing (0 rad) at ``radar_offset_m`` beyond the cell circumference.
Links shorter than 25 m are LOS, all others NLOS (fixed, deterministic rule
so experiments are reproducible).
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .cellular_fd import DL, UL, LinkIndex, all_links, dl_links, ul_links
from .errors import DomainError
from .matrix_core import frob

SPEED_OF_LIGHT = 299792458.0
LOS_DISTANCE_M = 25.0


@dataclass
class ScenarioConfig:
    """All scenario knobs. Powers are accepted in dB / dBm and converted to
    linear watts internally via the helper properties."""

    cell_radius_m: float = 40.0
    radar_offset_m: float = 400.0  # measured from the cell circumference
    num_ul_users: int = 2
    num_dl_users: int = 2
    antennas_bs_tx: int = 2
    antennas_bs_rx: int = 2
    antennas_user: int = 2
    radar_antennas: int = 8
    carrier_hz: float = 3.6e9
    bandwidth_hz: float = 100e6
    d0_m: float = 1.0
    alpha_los: float = 2.0
    alpha_nlos: float = 3.1
    shadow_sigma_los_db: float = 2.9
    shadow_sigma_nlos_db: float = 8.1
    noise_density_dbm_hz: float = -174.0
    noise_figure_bs_db: float = 13.0
    noise_figure_user_db: float = 9.0
    rician_k: float = 1.0
    psi: float = 1e-7  # transmit distortion (-70 dB)
    upsilon: float = 1e-7  # receive distortion (-70 dB)
    delta: float = 0.1  # CSI error radius (relative to nominal Frobenius norm)
    theta: float = 0.1  # radar-link error radius (relative)
    cci_factor: float = 0.5  # 0 -> full CCI cancellation, 1 -> none
    qos_ul_bps: float = 5e5
    qos_dl_bps: float = 5e5
    p_ul_db: float = 5.0  # per-UL-user transmit power, dBW
    p_bs_db: float = 10.0  # BS transmit power budget, dBW
    seed: int = 0
    # radar-side knobs (link budget invented from range/RCS; the source model
    # only fixes P_FA and the target range/velocity)
    p_radar_db: float = 30.0  # radar transmit power, dBW
    p_fa: float = 1e-5
    radar_samples: int = 64
    noise_figure_radar_db: float = 9.0
    target_angle_rad: float = math.pi / 3
    target_range_m: float = 300.0
    target_velocity_knots: float = 782.0  # metadata only (single-bin model)
    target_rcs_m2: float = 1.0

    def validate(self) -> None:
        positive = [
            "cell_radius_m", "radar_offset_m", "carrier_hz", "bandwidth_hz",
            "d0_m", "alpha_los", "alpha_nlos", "rician_k",
            "qos_ul_bps", "qos_dl_bps", "target_range_m", "target_rcs_m2",
        ]
        for name in positive:
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be strictly positive")
        for name in ("num_ul_users", "num_dl_users", "antennas_bs_tx",
                     "antennas_bs_rx", "antennas_user", "radar_antennas",
                     "radar_samples"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be a positive integer")
        if not 0.0 <= self.cci_factor <= 1.0:
            raise DomainError("cci_factor must lie in [0, 1]")
        if not 0.0 < self.p_fa < 1.0:
            raise DomainError("p_fa must lie in (0, 1)")
        if self.delta < 0 or self.theta < 0:
            raise DomainError("uncertainty radii must be non-negative")
        if self.psi < 0 or self.upsilon < 0:
            raise DomainError("distortion factors must be non-negative")
        if self.psi > 0.1 or self.upsilon > 0.1:
            warnings.warn("distortion factors psi/upsilon above 0.1: the "
                          "small-distortion covariance approximation degrades",
                          stacklevel=2)

    # -- unit conversions -------------------------------------------------
    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def p_ul_watts(self) -> float:
        return 10.0 ** (self.p_ul_db / 10.0)

    @property
    def p_bs_watts(self) -> float:
        return 10.0 ** (self.p_bs_db / 10.0)

    @property
    def p_radar_watts(self) -> float:
        return 10.0 ** (self.p_radar_db / 10.0)

    def noise_power_w(self, noise_figure_db: float) -> float:
        dbm = (self.noise_density_dbm_hz
               + 10.0 * math.log10(self.bandwidth_hz)
               + noise_figure_db)
        return 10.0 ** (dbm / 10.0) * 1e-3

    @property
    def noise_bs_w(self) -> float:
        return self.noise_power_w(self.noise_figure_bs_db)

    @property
    def noise_user_w(self) -> float:
        return self.noise_power_w(self.noise_figure_user_db)

    @property
    def noise_radar_w(self) -> float:
        return self.noise_power_w(self.noise_figure_radar_db)

    @property
    def radar_alpha(self) -> complex:
        """Two-way target path coefficient from the radar range equation."""
        lam = self.wavelength_m
        a2 = (lam ** 2) * self.target_rcs_m2 / ((4 * math.pi) ** 3 * self.target_range_m ** 4)
        return complex(math.sqrt(a2), 0.0)

    def replace(self, **kwargs) -> "ScenarioConfig":
        return dataclasses.replace(self, **kwargs)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        """Read a flat ``key = value`` document; absent keys keep defaults."""
        values = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise DomainError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                key = key.strip()
                val = val.strip()
                if key not in types:
                    raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
                typ = types[key]
                if typ in ("int", int):
                    values[key] = int(float(val))
                else:
                    values[key] = float(val)
        cfg = cls(**values)
        cfg.validate()
        return cfg


@dataclass
class LinkDims:
    n_rx: int
    m_tx: int
    d: int


@dataclass
class UncertaintyBall:
    """Norm-bounded (Frobenius) error ball around a nominal channel."""

    nominal: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise DomainError("uncertainty radius must be non-negative")


@dataclass
class ChannelSet:
    """All channel matrices of one realization under the unified indexing."""

    links: list
    h: Dict[Tuple[LinkIndex, LinkIndex], np.ndarray]
    g: Dict[LinkIndex, np.ndarray]
    w: Dict[object, np.ndarray]  # keys: LinkIndex plus "BR"
    h_si: np.ndarray
    dims: Dict[LinkIndex, LinkDims]
    noise_power: Dict[LinkIndex, float]
    gains: Dict[object, float] = field(default_factory=dict)
    positions: Dict[object, np.ndarray] = field(default_factory=dict)

    @property
    def ul(self):
        return [l for l in self.links if l.kind == UL]

    @property
    def dl(self):
        return [l for l in self.links if l.kind == DL]


def ci_path_loss_db(f_hz: float, d_m: float, alpha_c: float, shadow_db: float,
                    d0_m: float = 1.0) -> float:
    """Close-in free-space reference distance path loss:
    PL_F(f, d0) + 10 alpha log10(d/d0) + shadow."""
    if f_hz <= 0:
        raise DomainError("carrier frequency must be positive")
    if d_m < d0_m:
        raise DomainError(f"distance {d_m} m below reference distance {d0_m} m")
    pl_f = 20.0 * math.log10(4.0 * math.pi * d0_m * f_hz / SPEED_OF_LIGHT)
    return pl_f + 10.0 * alpha_c * math.log10(d_m / d0_m) + shadow_db


def crandn(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """I.i.d. circular complex Gaussian entries with unit variance."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)


def _sample_hexagon(rng: np.random.Generator, radius: float) -> np.ndarray:
    """Uniform point in a regular hexagon (circumradius ``radius``),
    by rejection from the bounding circle."""
    apothem = radius * math.sqrt(3.0) / 2.0
    normals = [(math.cos(a), math.sin(a))
               for a in (math.pi / 6 + k * math.pi / 3 for k in range(6))]
    while True:
        p = rng.uniform(-radius, radius, size=2)
        if all(p[0] * nx + p[1] * ny <= apothem for nx, ny in normals):
            return p


def _link_gain(cfg: ScenarioConfig, rng: np.random.Generator, d_m: float) -> float:
    """Linear large-scale gain for one link (path loss + one shadow draw)."""
    los = d_m < LOS_DISTANCE_M
    alpha = cfg.alpha_los if los else cfg.alpha_nlos
    sigma = cfg.shadow_sigma_los_db if los else cfg.shadow_sigma_nlos_db
    shadow = rng.normal(0.0, sigma)
    pl_db = ci_path_loss_db(cfg.carrier_hz, max(d_m, cfg.d0_m), alpha, shadow, cfg.d0_m)
    return 10.0 ** (-pl_db / 10.0)


def link_dims(cfg: ScenarioConfig, link: LinkIndex) -> LinkDims:
    if link.kind == UL:
        n_rx, m_tx = cfg.antennas_bs_rx, cfg.antennas_user
    else:
        n_rx, m_tx = cfg.antennas_user, cfg.antennas_bs_tx
    return LinkDims(n_rx=n_rx, m_tx=m_tx, d=min(n_rx, m_tx))


def draw_channel_set(cfg: ScenarioConfig, rng: np.random.Generator) -> ChannelSet:
    """Draw one full channel realization.

    Every channel is sqrt(large-scale gain) times i.i.d. unit-variance complex
    Gaussian entries, except the self-interference channel which follows the
    Rician model with an all-ones deterministic component and no path loss.
    CCI channels are amplitude-scaled by ``cci_factor``.
    """
    cfg.validate()
    k, j = cfg.num_ul_users, cfg.num_dl_users
    links = all_links(k, j)
    uls, dls = ul_links(k), dl_links(j)

    bs_pos = np.zeros(2)
    radar_pos = np.array([cfg.cell_radius_m + cfg.radar_offset_m, 0.0])
    ul_pos = {l: _sample_hexagon(rng, cfg.cell_radius_m) for l in uls}
    dl_pos = {l: _sample_hexagon(rng, cfg.cell_radius_m) for l in dls}

    dims = {l: link_dims(cfg, l) for l in links}
    noise = {l: (cfg.noise_bs_w if l.kind == UL else cfg.noise_user_w) for l in links}

    gains: Dict[object, float] = {}
    h: Dict[Tuple[LinkIndex, LinkIndex], np.ndarray] = {}

    # physical channels in a fixed draw order
    h_ul = {}
    for l in uls:
        d = float(np.linalg.norm(ul_pos[l] - bs_pos))
        gains[("UL", l.id)] = _link_gain(cfg, rng, d)
        h_ul[l] = math.sqrt(gains[("UL", l.id)]) * crandn(rng, cfg.antennas_bs_rx, cfg.antennas_user)
    h_dl = {}
    for l in dls:
        d = float(np.linalg.norm(dl_pos[l] - bs_pos))
        gains[("DL", l.id)] = _link_gain(cfg, rng, d)
        h_dl[l] = math.sqrt(gains[("DL", l.id)]) * crandn(rng, cfg.antennas_user, cfg.antennas_bs_tx)
    h_cci = {}
    for ld in dls:
        for lu in uls:
            d = float(np.linalg.norm(dl_pos[ld] - ul_pos[lu]))
            gains[("CCI", ld.id, lu.id)] = _link_gain(cfg, rng, max(d, cfg.d0_m))
            h_cci[(ld, lu)] = (cfg.cci_factor
                               * math.sqrt(gains[("CCI", ld.id, lu.id)])
                               * crandn(rng, cfg.antennas_user, cfg.antennas_user))
    # Rician self-interference channel, unit scale (RSI level is set by psi/upsilon)
    kr = cfg.rician_k
    h_si = (math.sqrt(kr / (1.0 + kr)) * np.ones((cfg.antennas_bs_rx, cfg.antennas_bs_tx), dtype=complex)
            + math.sqrt(1.0 / (1.0 + kr)) * crandn(rng, cfg.antennas_bs_rx, cfg.antennas_bs_tx))

    # radar-facing interference channels (cellular -> radar)
    g: Dict[LinkIndex, np.ndarray] = {}
    for l in uls:
        d = float(np.linalg.norm(ul_pos[l] - radar_pos))
        gains[("G", "UL", l.id)] = _link_gain(cfg, rng, d)
        g[l] = math.sqrt(gains[("G", "UL", l.id)]) * crandn(rng, cfg.radar_antennas, cfg.antennas_user)
    d_bs_radar = float(np.linalg.norm(bs_pos - radar_pos))
    g_rb_gain = _link_gain(cfg, rng, d_bs_radar)
    gains[("G", "BS")] = g_rb_gain
    g_rb = math.sqrt(g_rb_gain) * crandn(rng, cfg.radar_antennas, cfg.antennas_bs_tx)
    for l in dls:
        g[l] = g_rb

    # radar -> cellular channels
    w: Dict[object, np.ndarray] = {}
    gains[("W", "BR")] = _link_gain(cfg, rng, d_bs_radar)
    w_br = math.sqrt(gains[("W", "BR")]) * crandn(rng, cfg.antennas_bs_rx, cfg.radar_antennas)
    w["BR"] = w_br
    for l in uls:
        w[l] = w_br  # the BS is the receiver of every UL link
    for l in dls:
        d = float(np.linalg.norm(dl_pos[l] - radar_pos))
        gains[("W", "DL", l.id)] = _link_gain(cfg, rng, d)
        w[l] = math.sqrt(gains[("W", "DL", l.id)]) * crandn(rng, cfg.antennas_user, cfg.radar_antennas)

    # unified Table-I map
    for i in links:
        for jj in links:
            if i.kind == UL and jj.kind == UL:
                h[(i, jj)] = h_ul[jj]
            elif i.kind == UL and jj.kind == DL:
                h[(i, jj)] = h_si
            elif i.kind == DL and jj.kind == UL:
                h[(i, jj)] = h_cci[(i, jj)]
            else:
                h[(i, jj)] = h_dl[i]

    positions = {"BS": bs_pos, "RS": radar_pos}
    positions.update({("UL", l.id): ul_pos[l] for l in uls})
    positions.update({("DL", l.id): dl_pos[l] for l in dls})

    return ChannelSet(links=links, h=h, g=g, w=w, h_si=h_si, dims=dims,
                      noise_power=noise, gains=gains, positions=positions)


def apply_radar_projection(chs: ChannelSet, projector: np.ndarray) -> ChannelSet:
    """Replace every radar->cellular channel W by the effective W @ P seen
    through the projected radar waveform."""
    w_eff = {key: mat @ projector for key, mat in chs.w.items()}
    return ChannelSet(links=chs.links, h=chs.h, g=chs.g, w=w_eff, h_si=chs.h_si,
                      dims=chs.dims, noise_power=chs.noise_power,
                      gains=chs.gains, positions=chs.positions)


def sample_in_ball(ball: UncertaintyBall, rng: np.random.Generator) -> np.ndarray:
    """Nominal plus a perturbation drawn uniformly from the Frobenius ball.

    Direction uniform on the sphere, radius r = R * u^(1/(2 m n)) so the draw
    is uniform w.r.t. Lebesgue measure on the 2mn-dimensional real ball.
    """
    nom = np.asarray(ball.nominal, dtype=complex)
    if ball.radius == 0.0:
        return nom.copy()
    m, n = nom.shape
    direction = crandn(rng, m, n)
    nrm = frob(direction)
    while nrm == 0.0:  # pragma: no cover - probability zero
        direction = crandn(rng, m, n)
        nrm = frob(direction)
    u = rng.uniform(0.0, 1.0)
    r = ball.radius * u ** (1.0 / (2.0 * m * n))
    return nom + (r / nrm) * direction


def uniform_ball_mean_radius(radius: float, rows: int, cols: int) -> float:
    """Analytic mean of the radial law of :func:`sample_in_ball`:
    E r = R * D/(D+1) with D = 2 rows cols."""
    d = 2.0 * rows * cols
    return radius * d / (d + 1.0)


__all__ = [
    "SPEED_OF_LIGHT",
    "LOS_DISTANCE_M",
    "ScenarioConfig",
    "LinkDims",
    "ChannelSet",
    "UncertaintyBall",
    "ci_path_loss_db",
    "crandn",
    "link_dims",
    "draw_channel_set",
    "apply_radar_projection",
    "sample_in_ball",
    "uniform_ball_mean_radius",
]
