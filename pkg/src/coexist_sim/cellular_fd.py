"""Full-duplex cellular signal model: interference-plus-noise covariances with
hardware distortion, achievable rates, MMSE receivers, MSE matrices and the
cellular-to-radar interference power.

Link indexing follows the unified convention: the set S of links is the union
of K uplink links (receiver = base station) and J downlink links (receiver =
the downlink user). ``H[(i, j)]`` is the channel from the transmitter of link
j into the receiver of link i, of shape (n_rx_i, m_tx_j).

The known-signal part of the base-station self interference (the i in UL,
j in DL cross term) is cancelled digitally and excluded from every numerical
covariance; only its transmit/receive distortion terms survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .errors import DimensionMismatch, SingularCovariance
from .matrix_core import hermitian_part

UL = "UL"
DL = "DL"


@dataclass(frozen=True, order=True)
class LinkIndex:
    """One cellular link: kind 'UL' (user->BS) or 'DL' (BS->user) plus an id."""

    kind: str
    id: int

    def __post_init__(self):
        if self.kind not in (UL, DL):
            raise ValueError(f"link kind must be 'UL' or 'DL', got {self.kind!r}")


def ul_links(k: int) -> List[LinkIndex]:
    return [LinkIndex(UL, i) for i in range(k)]


def dl_links(j: int) -> List[LinkIndex]:
    return [LinkIndex(DL, i) for i in range(j)]


def all_links(k: int, j: int) -> List[LinkIndex]:
    """Uplink links first, then downlink links."""
    return ul_links(k) + dl_links(j)


@dataclass
class DistortionParams:
    """Per-chain transmit (psi) and receive (upsilon) distortion power ratios."""

    psi: float
    upsilon: float


@dataclass
class BeamformerSet:
    """Transmit precoders V_i, receive filters U_i and weight matrices B_i."""

    v: Dict[LinkIndex, np.ndarray]
    u: Dict[LinkIndex, np.ndarray] = field(default_factory=dict)
    b: Dict[LinkIndex, np.ndarray] = field(default_factory=dict)

    def copy(self) -> "BeamformerSet":
        return BeamformerSet(
            v={k: m.copy() for k, m in self.v.items()},
            u={k: m.copy() for k, m in self.u.items()},
            b={k: m.copy() for k, m in self.b.items()},
        )


def _diag_only(a: np.ndarray) -> np.ndarray:
    return np.diag(np.diag(a))


def si_excluded(i: LinkIndex, j: LinkIndex) -> bool:
    """True for the (UL receiver, DL transmitter) pairs whose known-signal
    self-interference term is digitally cancelled at the BS."""
    return i.kind == UL and j.kind == DL


def sigma_i(chs, bf: BeamformerSet, d: DistortionParams, p_r: float, i: LinkIndex) -> np.ndarray:
    """Aggregate interference-plus-noise covariance at the receiver of link i.

    Sum over j != i of H_ij V_j V_j^H H_ij^H (self-interference signal terms
    excluded), plus psi- and upsilon-weighted diagonal distortion terms over
    all j, plus the radar leakage p_r W_i W_i^H and the thermal floor.
    """
    n_rx = chs.dims[i].n_rx
    out = chs.noise_power[i] * np.eye(n_rx, dtype=complex)
    for j in chs.links:
        h = chs.h[(i, j)]
        v = bf.v[j]
        if h.shape != (n_rx, v.shape[0]):
            raise DimensionMismatch(
                f"H[{i},{j}] has shape {h.shape}, expected {(n_rx, v.shape[0])}"
            )
        q = v @ v.conj().T
        if j != i and not si_excluded(i, j):
            out += h @ q @ h.conj().T
        if d.psi:
            out += d.psi * (h @ _diag_only(q) @ h.conj().T)
        if d.upsilon:
            out += d.upsilon * _diag_only(h @ q @ h.conj().T)
    w = chs.w[i]
    if p_r:
        out += p_r * (w @ w.conj().T)
    return hermitian_part(out)


def _chol_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b for Hermitian positive definite a."""
    try:
        low = np.linalg.cholesky(hermitian_part(a))
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(str(exc)) from exc
    y = np.linalg.solve(low, b)
    return np.linalg.solve(low.conj().T, y)


def _logdet_h(a: np.ndarray) -> float:
    """log-determinant of a Hermitian positive definite matrix."""
    sign, val = np.linalg.slogdet(hermitian_part(a))
    if sign.real <= 0:
        raise SingularCovariance("non-positive determinant in log-det")
    return float(val)


def achievable_rate(chs, bf: BeamformerSet, d: DistortionParams, p_r: float, i: LinkIndex) -> float:
    """Achievable rate of link i in bits/s/Hz for the current receive filter.

    Computed as log2 |I + U^H H V V^H H^H U (U^H Sigma U)^{-1}| restricted to
    the column space of U (zeroed-out streams convey nothing).
    """
    h = chs.h[(i, i)]
    v = bf.v[i]
    u = bf.u[i]
    sig = sigma_i(chs, bf, d, p_r, i)
    a = hermitian_part(u.conj().T @ sig @ u)
    g = u.conj().T @ h @ v
    b = hermitian_part(g @ g.conj().T)
    eigs, vecs = np.linalg.eigh(a)
    keep = eigs > max(eigs[-1], 0.0) * 1e-13 if eigs.size else np.zeros(0, bool)
    if not np.any(keep):
        return 0.0
    q = vecs[:, keep] * (1.0 / np.sqrt(eigs[keep]))
    m = q.conj().T @ b @ q  # whitened signal term on the retained subspace
    vals = np.linalg.eigvalsh(hermitian_part(m))
    return float(np.sum(np.log2(1.0 + np.clip(vals, 0.0, None))))


def mmse_receiver(chs, bf: BeamformerSet, d: DistortionParams, p_r: float, i: LinkIndex) -> np.ndarray:
    """MMSE receive filter U_i = (H V V^H H^H + Sigma_i)^{-1} H V."""
    h = chs.h[(i, i)]
    v = bf.v[i]
    sig = sigma_i(chs, bf, d, p_r, i)
    hv = h @ v
    return _chol_solve(hv @ hv.conj().T + sig, hv)


def mse_matrix(chs, bf: BeamformerSet, d: DistortionParams, p_r: float, i: LinkIndex) -> np.ndarray:
    """MSE matrix E_i = (U^H H V - I)(U^H H V - I)^H + U^H Sigma_i U."""
    h = chs.h[(i, i)]
    v = bf.v[i]
    u = bf.u[i]
    d_i = v.shape[1]
    if u.shape[1] != d_i:
        raise DimensionMismatch(f"U[{i}] has {u.shape[1]} streams, V has {d_i}")
    g = u.conj().T @ h @ v - np.eye(d_i, dtype=complex)
    sig = sigma_i(chs, bf, d, p_r, i)
    return hermitian_part(g @ g.conj().T + u.conj().T @ sig @ u)


def mse_matrix_mmse(chs, bf: BeamformerSet, d: DistortionParams, p_r: float, i: LinkIndex) -> np.ndarray:
    """MSE at the MMSE receiver: (I + V^H H^H Sigma_i^{-1} H V)^{-1}."""
    h = chs.h[(i, i)]
    v = bf.v[i]
    sig = sigma_i(chs, bf, d, p_r, i)
    hv = h @ v
    m = np.eye(v.shape[1], dtype=complex) + hv.conj().T @ _chol_solve(sig, hv)
    return hermitian_part(np.linalg.inv(m))


def interference_to_radar(chs, bf: BeamformerSet, d: DistortionParams) -> float:
    """Total cellular-to-radar interference power
    sum_j tr{G_Rj (V_j V_j^H + psi diag(V_j V_j^H)) G_Rj^H}."""
    total = 0.0
    for j in chs.links:
        g = chs.g[j]
        v = bf.v[j]
        if g.shape[1] != v.shape[0]:
            raise DimensionMismatch(f"G[{j}] has {g.shape[1]} columns, V has {v.shape[0]} rows")
        q = v @ v.conj().T
        if d.psi:
            q = q + d.psi * _diag_only(q)
        total += float(np.real(np.trace(g @ q @ g.conj().T)))
    return total


__all__ = [
    "UL",
    "DL",
    "LinkIndex",
    "ul_links",
    "dl_links",
    "all_links",
    "DistortionParams",
    "BeamformerSet",
    "si_excluded",
    "sigma_i",
    "achievable_rate",
    "mmse_receiver",
    "mse_matrix",
    "mse_matrix_mmse",
    "interference_to_radar",
]
