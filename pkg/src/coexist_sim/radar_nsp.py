"""Null-space projection at the radar: stack the radar-to-cellular
interference channels, build the SVD-based projector onto their common null
space, and project the probing waveform through it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import DimensionMismatch, FullRankNullSpace
from .matrix_core import as_matrix, numerical_rank, svd


@dataclass
class InterferenceStack:
    """Vertical stack of W_BR and every downlink W_j (rows = N0 + sum N_j)."""

    w_stacked: np.ndarray

    @property
    def r_t(self) -> int:
        return self.w_stacked.shape[1]


@dataclass
class Projector:
    """Hermitian idempotent projector onto the null space of the stack."""

    p: np.ndarray
    rank_w: int

    @property
    def r_t(self) -> int:
        return self.p.shape[0]

    @property
    def rank(self) -> int:
        return self.r_t - self.rank_w


def stack_interference(chs) -> InterferenceStack:
    """Stack [W_BR; W_j for j in S_DL] from a channel set."""
    blocks: List[np.ndarray] = [chs.w["BR"]]
    blocks += [chs.w[l] for l in chs.dl]
    r_t = blocks[0].shape[1]
    for b in blocks:
        if b.shape[1] != r_t:
            raise DimensionMismatch("all interference channels must share R_T columns")
    return InterferenceStack(w_stacked=np.vstack(blocks))


def build_projector(stack: InterferenceStack, allow_empty: bool = False) -> Projector:
    """SVD W = R Omega X^H; singular directions with index above the numerical
    rank q span the null space, and P = X_null X_null^H.

    Raises FullRankNullSpace when q == R_T unless ``allow_empty`` is set, in
    which case the zero projector (silent radar) is returned.
    """
    w = as_matrix(stack.w_stacked)
    r_t = w.shape[1]
    if r_t < 1:
        raise DimensionMismatch("R_T must be at least 1")
    if np.all(w == 0):
        return Projector(p=np.eye(r_t, dtype=complex), rank_w=0)
    _, s, vh = svd(w)
    q = numerical_rank(s, w.shape)
    if q == r_t:
        if not allow_empty:
            raise FullRankNullSpace(
                f"interference stack has full column rank {q} == R_T; "
                "reduce cellular antennas or raise the radar array size")
        return Projector(p=np.zeros((r_t, r_t), dtype=complex), rank_w=q)
    x_null = vh[q:, :].conj().T  # columns: null-space basis (indices r > q)
    p = x_null @ x_null.conj().T
    return Projector(p=p, rank_w=q)


def project_waveform(projector: Projector, s_r: np.ndarray) -> np.ndarray:
    """x_R = P s_R."""
    s = as_matrix(s_r)
    if s.shape[0] != projector.r_t:
        raise DimensionMismatch(
            f"waveform has {s.shape[0]} rows, projector expects {projector.r_t}")
    return projector.p @ s


def orthogonal_waveform(r_t: int, l_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal probing waveform S_R (R_T x L) with sum_l s(l) s(l)^H = L I.

    Built from the QR factorization of a seeded Gaussian matrix, so rows are
    scaled orthonormal sequences.
    """
    if l_samples < r_t:
        raise DimensionMismatch("need at least R_T samples for orthogonal rows")
    g = (rng.standard_normal((l_samples, r_t)) + 1j * rng.standard_normal((l_samples, r_t)))
    q, _ = np.linalg.qr(g)
    return np.sqrt(l_samples) * q.conj().T


__all__ = [
    "InterferenceStack",
    "Projector",
    "stack_interference",
    "build_projector",
    "project_waveform",
    "orthogonal_waveform",
]
