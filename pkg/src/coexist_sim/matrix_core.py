"""Dense complex matrix utilities used throughout the simulator.

Conventions: matrices are 2-D ``numpy`` arrays (complex dtype unless noted),
``vec`` stacks columns (column-major), and the Kronecker identity
``vec(A B C) == kron(C.T, A) @ vec(B)`` holds exactly under these choices.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
    NotPositiveDefinite,
)

HERMITIAN_RTOL = 1e-10
CHOL_PIVOT_RTOL = 1e-14


def as_matrix(a) -> np.ndarray:
    """Coerce input to a 2-D complex array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix contains NaN/Inf entries")
    return m


def frob(a) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(a)))


def vec(m) -> np.ndarray:
    """Column-stacking vectorization: vec(A)[i + j*rows] == A[i, j]."""
    return np.asarray(m).reshape(-1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if v.size != rows * cols:
        raise DimensionMismatch(f"cannot reshape length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def kron(a, b) -> np.ndarray:
    """Kronecker product (delegates to numpy)."""
    return np.kron(np.asarray(a), np.asarray(b))


def hermitian_part(a) -> np.ndarray:
    """(A + A^H) / 2."""
    a = np.asarray(a)
    return (a + a.conj().T) / 2.0


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    """Hermitian within a relative Frobenius tolerance."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = frob(a)
    if scale == 0.0:
        return True
    return frob(a - a.conj().T) <= rtol * scale


def cholesky_lower(m) -> np.ndarray:
    """Lower-triangular L with L L^H == m for Hermitian positive-definite m.

    The input is symmetrized before factorization; accumulated floating-point
    asymmetry beyond ``HERMITIAN_RTOL`` (relative Frobenius) is rejected.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"cholesky needs a square matrix, got {a.shape}")
    if not is_hermitian(a):
        raise NotPositiveDefinite("matrix is not Hermitian within tolerance")
    a = hermitian_part(a)
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    # pivots are the squared diagonal entries of L
    pivots = np.real(np.diag(low)) ** 2
    if np.any(pivots <= CHOL_PIVOT_RTOL * max(frob(a), np.finfo(float).tiny)):
        raise NotPositiveDefinite("pivot below threshold: matrix numerically singular")
    return low


def svd(m):
    """Full SVD m = U diag(S) Vh with S non-negative and non-increasing."""
    a = as_matrix(m)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return u, s, vh


def numerical_rank(singular_values, shape) -> int:
    """Rank under the max(rows, cols) * eps * S[0] threshold."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = max(shape) * np.finfo(float).eps * s[0]
    return int(np.count_nonzero(s > tol))


def block_diag(blocks) -> np.ndarray:
    """Direct sum of matrices; off-block entries exactly zero."""
    mats = [np.asarray(b, dtype=complex) for b in blocks]
    for b in mats:
        if b.ndim != 2:
            raise DimensionMismatch("block_diag expects 2-D blocks")
    rows = sum(b.shape[0] for b in mats)
    cols = sum(b.shape[1] for b in mats)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for b in mats:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


__all__ = [
    "as_matrix",
    "frob",
    "vec",
    "unvec",
    "kron",
    "hermitian_part",
    "is_hermitian",
    "cholesky_lower",
    "svd",
    "numerical_rank",
    "block_diag",
    "DomainError",
]
