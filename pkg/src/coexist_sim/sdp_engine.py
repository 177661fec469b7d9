"""Small dense primal-dual interior-point solver for block-diagonal real
symmetric SDPs with a linear objective:

    minimize    c^T x
    subject to  A0_b + sum_i x_i A_ib  >= 0   (PSD, per block b)

The method is infeasible-start path following with Nesterov-Todd scaling and
a Mehrotra predictor-corrector step. Per iteration, each block contributes
its NT-scaled terms to the dense Schur complement system M dx = r with
M_ij = sum_b tr(A_ib W_b^{-1} A_jb W_b^{-1}).

Complex Hermitian constraints enter through the doubled real embedding
[[Re, -Im], [Im, Re]], which preserves the PSD cone (eigenvalues appear with
doubled multiplicity). Size-1 blocks are merged internally into one diagonal
block to keep per-iteration overhead low; the reported duals still follow
the caller's block list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, NotHermitian, SdpSolveError

SYMMETRY_TOL = 1e-12
SPARSE_BLOCK_MIN = 96  # blocks at least this large use triplet Schur assembly

STATUS_OPTIMAL = "Optimal"
STATUS_INFEASIBLE = "Infeasible"
STATUS_MAXITER = "MaxIter"
STATUS_NUMERICAL = "NumericalFailure"


@dataclass
class LmiBlock:
    """One PSD block: constant part plus per-variable coefficient matrices."""

    size: int
    a0: np.ndarray
    coeffs: Dict[int, np.ndarray]

    def __post_init__(self):
        self.a0 = _check_sym(np.asarray(self.a0, dtype=float), self.size)
        self.coeffs = {int(k): _check_sym(np.asarray(v, dtype=float), self.size)
                       for k, v in self.coeffs.items()}

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        out = self.a0.copy()
        for i, mat in self.coeffs.items():
            xi = x[i]
            if xi:
                out = out + xi * mat
        return out


@dataclass
class ComplexLmiBlock:
    """Hermitian analogue of :class:`LmiBlock` prior to real embedding."""

    size: int
    a0: np.ndarray
    coeffs: Dict[int, np.ndarray]


@dataclass
class SdpProblemSpec:
    n_vars: int
    objective: np.ndarray
    blocks: List[LmiBlock]
    var_bounds: Optional[List[Tuple[Optional[float], Optional[float]]]] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.n_vars,):
            raise DimensionMismatch("objective length must equal n_vars")


@dataclass
class KktResiduals:
    primal_res: float
    dual_res: float
    gap: float


@dataclass
class SdpSolution:
    x: np.ndarray
    status: str
    duals: List[np.ndarray]
    kkt: KktResiduals
    iterations: int
    primal_obj: float
    dual_obj: float


def _check_sym(a: np.ndarray, size: int) -> np.ndarray:
    if a.shape != (size, size):
        raise DimensionMismatch(f"block matrix has shape {a.shape}, expected {(size, size)}")
    nrm = np.linalg.norm(a)
    if nrm > 0 and np.linalg.norm(a - a.T) > SYMMETRY_TOL * max(1.0, nrm):
        raise NotHermitian("block matrix is not symmetric within 1e-12")
    return (a + a.T) / 2.0


def embed_matrix(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch("embedding expects a square matrix")
    nrm = np.linalg.norm(h)
    if nrm > 0 and np.linalg.norm(h - h.conj().T) > 1e-10 * max(1.0, nrm):
        raise NotHermitian("matrix is not Hermitian")
    h = (h + h.conj().T) / 2.0
    re, im = h.real, h.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    return np.vstack([top, bot])


def embed_complex(block: ComplexLmiBlock) -> LmiBlock:
    """Embed a complex Hermitian LMI block into a doubled real symmetric one."""
    return LmiBlock(
        size=2 * block.size,
        a0=embed_matrix(block.a0),
        coeffs={i: embed_matrix(m) for i, m in block.coeffs.items()},
    )


# ---------------------------------------------------------------------------
# solver internals
# ---------------------------------------------------------------------------


@dataclass
class _Block:
    m: int
    a0: np.ndarray
    idx: np.ndarray  # active variable indices
    mats: np.ndarray  # (k, m, m) coefficient stack
    flat: np.ndarray = field(default=None, repr=False)  # (k, m*m) view
    scalar_members: Optional[List[int]] = None  # spec indices of merged 1x1 blocks
    # triplet form for large sparse blocks
    sparse: bool = False
    trip_r: Optional[List[np.ndarray]] = None
    trip_c: Optional[List[np.ndarray]] = None
    trip_v: Optional[List[np.ndarray]] = None
    all_r: Optional[np.ndarray] = None
    all_c: Optional[np.ndarray] = None
    all_v: Optional[np.ndarray] = None
    starts: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.flat is None:
            self.flat = self.mats.reshape(self.mats.shape[0], -1)
        k = self.mats.shape[0]
        if self.m >= SPARSE_BLOCK_MIN and k:
            nnz = np.count_nonzero(self.mats)
            if nnz < 0.25 * k * self.m * self.m:
                self.sparse = True
                self.trip_r, self.trip_c, self.trip_v = [], [], []
                lengths = []
                for t in range(k):
                    r, c = np.nonzero(self.mats[t])
                    self.trip_r.append(r)
                    self.trip_c.append(c)
                    self.trip_v.append(self.mats[t][r, c])
                    lengths.append(r.size)
                self.all_r = np.concatenate(self.trip_r) if k else np.zeros(0, int)
                self.all_c = np.concatenate(self.trip_c) if k else np.zeros(0, int)
                self.all_v = np.concatenate(self.trip_v) if k else np.zeros(0)
                self.starts = np.repeat(np.arange(k), lengths)  # triplet -> var slot


def _compile(spec: SdpProblemSpec) -> Tuple[List[_Block], List[Tuple[str, int, int]]]:
    """Internal blocks plus a map from solver blocks back to spec blocks.

    All size-1 blocks (and box bounds) are merged into one diagonal block;
    the map records (kind, solver_block, position) for dual extraction.
    """
    big: List[_Block] = []
    scalars: List[Tuple[int, float, Dict[int, float]]] = []  # (spec idx, a0, coeffs)
    for k, b in enumerate(spec.blocks):
        idx = np.array(sorted(b.coeffs.keys()), dtype=int)
        if idx.size and (idx[0] < 0 or idx[-1] >= spec.n_vars):
            raise DimensionMismatch("coefficient index out of range")
        if b.size == 1:
            scalars.append((k, float(b.a0[0, 0]),
                            {i: float(b.coeffs[i][0, 0]) for i in idx}))
            continue
        mats = np.stack([b.coeffs[i] for i in idx]) if idx.size else np.zeros((0, b.size, b.size))
        big.append(_Block(m=b.size, a0=b.a0, idx=idx, mats=mats))
    if spec.var_bounds:
        if len(spec.var_bounds) != spec.n_vars:
            raise DimensionMismatch("var_bounds length must equal n_vars")
        for i, (lo, hi) in enumerate(spec.var_bounds):
            if lo is not None:
                scalars.append((-1, -lo, {i: 1.0}))
            if hi is not None:
                scalars.append((-1, hi, {i: -1.0}))
    mapping: List[Tuple[str, int, int]] = []
    if scalars:
        m = len(scalars)
        a0 = np.diag([s[1] for s in scalars])
        per_var: Dict[int, np.ndarray] = {}
        for pos, (_, _, cf) in enumerate(scalars):
            for vi, val in cf.items():
                per_var.setdefault(vi, np.zeros(m))[pos] = val
        idx = np.array(sorted(per_var.keys()), dtype=int)
        mats = np.stack([np.diag(per_var[i]) for i in idx]) if idx.size else np.zeros((0, m, m))
        big.append(_Block(m=m, a0=a0, idx=idx, mats=mats,
                          scalar_members=[s[0] for s in scalars]))
    # dual extraction map: spec block -> (solver block, diag position)
    for bi, blk in enumerate(big):
        if blk.scalar_members is None:
            mapping.append(("dense", bi, -1))
        else:
            for pos, spec_idx in enumerate(blk.scalar_members):
                if spec_idx >= 0:
                    mapping.append(("scalar", bi, pos))
    return big, mapping


def _spec_duals(spec: SdpProblemSpec, blocks: List[_Block], z_list: List[np.ndarray]) -> List[np.ndarray]:
    """Dual matrices in the caller's block order."""
    duals: List[np.ndarray] = []
    dense_iter = [i for i, b in enumerate(blocks) if b.scalar_members is None]
    dense_pos = 0
    scalar_lookup: Dict[int, Tuple[int, int]] = {}
    for bi, b in enumerate(blocks):
        if b.scalar_members is not None:
            for pos, spec_idx in enumerate(b.scalar_members):
                if spec_idx >= 0:
                    scalar_lookup[spec_idx] = (bi, pos)
    for k, sb in enumerate(spec.blocks):
        if sb.size == 1:
            bi, pos = scalar_lookup[k]
            duals.append(np.array([[z_list[bi][pos, pos]]]))
        else:
            duals.append(z_list[dense_iter[dense_pos]].copy())
            dense_pos += 1
    return duals


def _clip_eigs(vals: np.ndarray) -> np.ndarray:
    floor = max(float(vals[-1]), 0.0) * 1e-14 + 1e-300
    return np.clip(vals, floor, None)


def _eigh(a: np.ndarray):
    if a.shape[0] == 1:
        return a[0].copy(), np.ones((1, 1))
    return np.linalg.eigh(a)


def _min_eig(a: np.ndarray) -> float:
    if a.shape[0] == 1:
        return float(a[0, 0])
    return float(np.linalg.eigvalsh(a)[0])


def _max_step_from(invh: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha keeping s + alpha d PSD, given invh = s^{-1/2}."""
    sym = invh @ d @ invh
    lmin = _min_eig((sym + sym.T) / 2.0)
    if lmin >= -1e-300:
        return np.inf
    return -1.0 / lmin


def solve(spec: SdpProblemSpec, tol: float = 1e-8, max_iter: int = 100,
          x0: Optional[np.ndarray] = None) -> SdpSolution:
    """Solve the block SDP; deterministic for identical inputs.

    Returns a solution whose ``status`` is one of Optimal / Infeasible /
    MaxIter / NumericalFailure; KKT residuals are always populated so a
    non-optimal exit is never silently wrong.
    """
    blocks, _ = _compile(spec)
    n = spec.n_vars
    c = spec.objective
    m_total = sum(b.m for b in blocks)
    if m_total == 0 or n == 0:
        x = np.zeros(n)
        sol = SdpSolution(x, STATUS_OPTIMAL, [np.zeros((b.size, b.size)) for b in spec.blocks],
                          KktResiduals(0, 0, 0), 0, float(c @ x) if n else 0.0, 0.0)
        sol.kkt = kkt_residuals(spec, sol)
        return sol

    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    if x.shape != (n,):
        raise DimensionMismatch("x0 has wrong length")

    s_list, z_list = [], []
    for b in blocks:
        scale = 1.0 + float(np.linalg.norm(b.a0))
        if b.mats.size:
            scale = max(scale, float(np.max(np.sqrt(np.sum(b.mats ** 2, axis=(1, 2))))))
        f0 = b.a0 + (np.tensordot(x[b.idx], b.mats, axes=1) if b.idx.size else 0.0)
        f0 = (f0 + f0.T) / 2.0
        lmin = float(np.linalg.eigvalsh(f0)[0])
        shift = max(0.0, -lmin) * 2.0 + 0.1 * scale
        s_list.append(f0 + shift * np.eye(b.m))
        z_list.append((1.0 + float(np.linalg.norm(c)) / math.sqrt(max(1, n))) * np.eye(b.m))

    status = STATUS_MAXITER
    it = 0
    stall = 0
    c_scale = 1.0 + float(np.max(np.abs(c)))
    eye_cache = {b.m: np.eye(b.m) for b in blocks}

    for it in range(1, max_iter + 1):
        rp_list, fx_scales = [], []
        for b, s in zip(blocks, s_list):
            fx = b.a0 + (np.tensordot(x[b.idx], b.mats, axes=1) if b.idx.size else 0.0)
            rp_list.append((fx + fx.T) / 2.0 - s)
            fx_scales.append(1.0 + np.linalg.norm(b.a0))
        rd = c.copy()
        for b, z in zip(blocks, z_list):
            if b.idx.size:
                rd[b.idx] -= b.flat @ z.ravel()
        gap = sum(float(np.sum(s * z)) for s, z in zip(s_list, z_list))
        mu = gap / m_total
        pobj = float(c @ x)
        dobj = -sum(float(np.sum(b.a0 * z)) for b, z in zip(blocks, z_list))
        pinf = max(np.linalg.norm(rp) / nf for rp, nf in zip(rp_list, fx_scales))
        dinf = float(np.max(np.abs(rd))) / c_scale
        relgap = gap / (1.0 + abs(pobj) + abs(dobj))

        if pinf <= tol and dinf <= tol and relgap <= tol:
            status = STATUS_OPTIMAL
            break

        # Farkas-style certificate: Z >= 0 diverging with tr(A_i Z) -> 0 and
        # -tr(A0 Z) > 0 witnesses primal infeasibility.
        znorm = sum(float(np.linalg.norm(z)) for z in z_list)
        if znorm > 1e8:
            ray_res = float(np.max(np.abs(c - rd))) / znorm
            ray_obj = dobj / znorm
            if ray_res < 1e-10 and ray_obj > 1e-10:
                status = STATUS_INFEASIBLE
                break

        # NT scaling per block (cached factorizations for the line searches)
        fact = []
        failed = False
        for s, z in zip(s_list, z_list):
            try:
                ls, qs = _eigh(s)
                ls = _clip_eigs(ls)
                shalf = (qs * np.sqrt(ls)) @ qs.T
                sinvh = (qs * (1.0 / np.sqrt(ls))) @ qs.T
                lz, qz = _eigh(z)
                lz = _clip_eigs(lz)
                zinvh = (qz * (1.0 / np.sqrt(lz))) @ qz.T
                t = shalf @ z @ shalf
                g2, qt = _eigh((t + t.T) / 2.0)
                g2 = _clip_eigs(g2)
                gam = np.sqrt(g2)
                g_mat = (np.sqrt(gam)[:, None] * qt.T) @ sinvh
                ginv = shalf @ (qt * (1.0 / np.sqrt(gam)))
                wt = g_mat.T @ g_mat
                fact.append((sinvh, zinvh, g_mat, ginv, gam, wt))
            except (np.linalg.LinAlgError, ValueError):
                failed = True
                break
        if failed:
            status = STATUS_NUMERICAL
            break

        # Schur complement and the Rp-dependent rhs terms
        m_mat = np.zeros((n, n))
        wrw_terms = np.zeros(n)
        for b, f, rp in zip(blocks, fact, rp_list):
            wt = f[5]
            if not b.idx.size:
                continue
            k = b.mats.shape[0]
            wrw = wt @ rp @ wt
            if b.sparse:
                # tr(A_i W A_j W) via per-variable outer-product products
                sub = np.empty((k, k))
                for t in range(k):
                    ta = (wt[:, b.trip_r[t]] * b.trip_v[t]) @ wt[b.trip_c[t], :]
                    sub[t] = np.bincount(b.starts, weights=ta[b.all_r, b.all_c] * b.all_v,
                                         minlength=k)
                m_mat[np.ix_(b.idx, b.idx)] += (sub + sub.T) / 2.0
                wrw_terms[b.idx] += np.bincount(b.starts,
                                                weights=wrw[b.all_r, b.all_c] * b.all_v,
                                                minlength=k)
            else:
                ta = np.matmul(wt, np.matmul(b.mats, wt))
                sub = ta.reshape(k, -1) @ b.flat.T
                m_mat[np.ix_(b.idx, b.idx)] += (sub + sub.T) / 2.0
                wrw_terms[b.idx] += b.flat @ wrw.ravel()

        jitter = 0.0
        chol = None
        for _ in range(6):
            try:
                chol = np.linalg.cholesky(m_mat + jitter * np.eye(n))
                break
            except np.linalg.LinAlgError:
                jitter = max(jitter * 10.0, 1e-12 * (1.0 + float(np.trace(m_mat)) / max(1, n)))
        if chol is None:
            status = STATUS_NUMERICAL
            break

        def schur_solve(rhs):
            y = np.linalg.solve(chol, rhs)
            return np.linalg.solve(chol.T, y)

        def directions(rc_solved):
            """Directions for a Lyapunov-solved complementarity target."""
            rhs = -rd - wrw_terms
            u_list = []
            for b, f, rc in zip(blocks, fact, rc_solved):
                g_mat = f[2]
                u = g_mat.T @ rc @ g_mat
                u_list.append(u)
                if b.idx.size:
                    if b.sparse:
                        rhs[b.idx] += np.bincount(b.starts,
                                                  weights=u[b.all_r, b.all_c] * b.all_v,
                                                  minlength=b.mats.shape[0])
                    else:
                        rhs[b.idx] += b.flat @ u.ravel()
            dx = schur_solve(rhs)
            ds_list, dz_list = [], []
            for b, f, rp, u in zip(blocks, fact, rp_list, u_list):
                wt = f[5]
                ds = rp + (np.tensordot(dx[b.idx], b.mats, axes=1) if b.idx.size else 0.0)
                ds = (ds + ds.T) / 2.0
                dz = u - wt @ ds @ wt
                ds_list.append(ds)
                dz_list.append((dz + dz.T) / 2.0)
            return dx, ds_list, dz_list

        def lyap_inv(rc, gam):
            return 2.0 * rc / (gam[:, None] + gam[None, :])

        # predictor (affine scaling): target -Gamma^2, Lyapunov-solved = -diag(gam)
        rc_aff = [-np.diag(f[4]) for f in fact]
        dx_a, ds_a, dz_a = directions(rc_aff)
        ap = min(1.0, *(0.99 * _max_step_from(f[0], ds) for f, ds in zip(fact, ds_a)))
        ad = min(1.0, *(0.99 * _max_step_from(f[1], dz) for f, dz in zip(fact, dz_a)))
        gap_aff = sum(float(np.sum((s + ap * ds) * (z + ad * dz)))
                      for s, ds, z, dz in zip(s_list, ds_a, z_list, dz_a))
        mu_aff = max(gap_aff, 0.0) / m_total
        sigma = min(1.0, max((mu_aff / mu) ** 3 if mu > 0 else 0.0, 1e-8))

        # corrector with the Mehrotra second-order term in scaled space
        rc_corr = []
        for f, ds, dz in zip(fact, ds_a, dz_a):
            g_mat, ginv, gam = f[2], f[3], f[4]
            dst = g_mat @ ds @ g_mat.T
            dzt = ginv.T @ dz @ ginv
            cross = dst @ dzt
            rc = sigma * mu * eye_cache[len(gam)] - np.diag(gam ** 2) - (cross + cross.T) / 2.0
            rc_corr.append(lyap_inv(rc, gam))
        dx, ds_list, dz_list = directions(rc_corr)

        tau = 0.98
        ap = min(1.0, *(tau * _max_step_from(f[0], ds) for f, ds in zip(fact, ds_list)))
        ad = min(1.0, *(tau * _max_step_from(f[1], dz) for f, dz in zip(fact, dz_list)))
        if ap < 1e-8 and ad < 1e-8:
            stall += 1
            if stall >= 5:
                status = STATUS_NUMERICAL
                break
        else:
            stall = 0

        x = x + ap * dx
        s_list = [s + ap * ds for s, ds in zip(s_list, ds_list)]
        z_list = [z + ad * dz for z, dz in zip(z_list, dz_list)]
        if not (np.all(np.isfinite(x)) and all(np.all(np.isfinite(s)) for s in s_list)):
            status = STATUS_NUMERICAL
            break

    pobj = float(c @ x)
    dobj = -sum(float(np.sum(b.a0 * z)) for b, z in zip(blocks, z_list))
    sol = SdpSolution(x=x, status=status, duals=_spec_duals(spec, blocks, z_list),
                      kkt=KktResiduals(0.0, 0.0, 0.0), iterations=it,
                      primal_obj=pobj, dual_obj=dobj)
    sol.kkt = kkt_residuals(spec, sol)
    return sol


def kkt_residuals(spec: SdpProblemSpec, solution: SdpSolution) -> KktResiduals:
    """Recompute primal/dual/complementarity residuals from scratch.

    primal_res: most negative eigenvalue across blocks of F(x) (0 if PSD);
    dual_res:   ||c - [sum_b tr(A_ib Z_b)]||_inf;
    gap:        |sum_b tr(F_b(x) Z_b)| (complementarity).
    """
    x = np.asarray(solution.x, dtype=float)
    primal = 0.0
    gap = 0.0
    dual_vec = spec.objective.copy()
    have_duals = len(solution.duals) >= len(spec.blocks)
    for k, b in enumerate(spec.blocks):
        fx = b.evaluate(x)
        lmin = float(np.linalg.eigvalsh((fx + fx.T) / 2.0)[0]) if b.size else 0.0
        primal = max(primal, max(0.0, -lmin))
        if have_duals:
            z = solution.duals[k]
            gap += float(np.sum(fx * z))
            for i, mat in b.coeffs.items():
                dual_vec[i] -= float(np.sum(mat * z))
    # box-bound duals are internal; their effect shows only when bounds exist
    if spec.var_bounds and have_duals and len(solution.duals) > len(spec.blocks):
        k = len(spec.blocks)
        for i, (lo, hi) in enumerate(spec.var_bounds):
            if lo is not None:
                primal = max(primal, max(0.0, lo - x[i]))
                if k < len(solution.duals):
                    z = float(solution.duals[k][0, 0])
                    gap += (x[i] - lo) * z
                    dual_vec[i] -= z
                k += 1
            if hi is not None:
                primal = max(primal, max(0.0, x[i] - hi))
                if k < len(solution.duals):
                    z = float(solution.duals[k][0, 0])
                    gap += (hi - x[i]) * z
                    dual_vec[i] += z
                k += 1
    dual = float(np.max(np.abs(dual_vec))) if dual_vec.size else 0.0
    return KktResiduals(primal_res=primal, dual_res=dual, gap=abs(gap))


# ---------------------------------------------------------------------------
# text dump of a problem in a simple block-sparse format
# ---------------------------------------------------------------------------


def dump_spec(spec: SdpProblemSpec, path) -> None:
    """Write the problem in a plain triplet format for external cross-checks.

    Header: n_vars, block sizes, objective; then one line per upper-triangle
    nonzero: ``e <var> <block> <row> <col> <value>`` with var 0 denoting the
    constant matrix A0 and vars 1..n the coefficients.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n_vars {spec.n_vars}\n")
        fh.write(f"n_blocks {len(spec.blocks)}\n")
        fh.write("block_sizes " + " ".join(str(b.size) for b in spec.blocks) + "\n")
        fh.write("objective " + " ".join(f"{v:.17g}" for v in spec.objective) + "\n")
        for bi, b in enumerate(spec.blocks):
            mats = [(0, b.a0)] + [(i + 1, m) for i, m in sorted(b.coeffs.items())]
            for vi, mat in mats:
                rows, cols = np.nonzero(np.triu(mat != 0.0))
                for r, cc in zip(rows, cols):
                    fh.write(f"e {vi} {bi} {r} {cc} {mat[r, cc]:.17g}\n")


def load_spec(path) -> SdpProblemSpec:
    """Inverse of :func:`dump_spec`."""
    n_vars = 0
    sizes: Sequence[int] = []
    objective: np.ndarray = np.zeros(0)
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            parts = raw.split()
            if not parts:
                continue
            if parts[0] == "n_vars":
                n_vars = int(parts[1])
            elif parts[0] == "n_blocks":
                pass
            elif parts[0] == "block_sizes":
                sizes = [int(v) for v in parts[1:]]
            elif parts[0] == "objective":
                objective = np.array([float(v) for v in parts[1:]])
            elif parts[0] == "e":
                entries.append((int(parts[1]), int(parts[2]), int(parts[3]),
                                int(parts[4]), float(parts[5])))
    a0s = [np.zeros((s, s)) for s in sizes]
    coeffs: List[Dict[int, np.ndarray]] = [{} for _ in sizes]
    for vi, bi, r, cc, val in entries:
        if vi == 0:
            tgt = a0s[bi]
        else:
            tgt = coeffs[bi].setdefault(vi - 1, np.zeros((sizes[bi], sizes[bi])))
        tgt[r, cc] = val
        tgt[cc, r] = val
    blocks = [LmiBlock(size=s, a0=a0s[i], coeffs=coeffs[i]) for i, s in enumerate(sizes)]
    return SdpProblemSpec(n_vars=n_vars, objective=objective, blocks=blocks)


__all__ = [
    "LmiBlock",
    "ComplexLmiBlock",
    "SdpProblemSpec",
    "SdpSolution",
    "KktResiduals",
    "embed_matrix",
    "embed_complex",
    "solve",
    "kkt_residuals",
    "dump_spec",
    "load_spec",
    "STATUS_OPTIMAL",
    "STATUS_INFEASIBLE",
    "STATUS_MAXITER",
    "STATUS_NUMERICAL",
]
