import numpy as np
import pytest

from coexist_sim import matrix_core as mc
from coexist_sim.errors import ConvergenceFailure, DimensionMismatch, NotPositiveDefinite


def crand(rng, r, c):
    return rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))


class TestVec:
    def test_column_stacking(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(mc.vec(a), np.array([1.0, 3.0, 2.0, 4.0]))

    def test_identity(self):
        assert np.array_equal(mc.vec(np.eye(2)), np.array([1.0, 0.0, 0.0, 1.0]))

    def test_norm_matches_trace(self, rng):
        a = crand(rng, 3, 2)
        # independent oracle: direct trace of A A^H
        tr = sum(a[i, j] * np.conj(a[i, j]) for i in range(3) for j in range(2)).real
        assert abs(np.linalg.norm(mc.vec(a)) ** 2 - tr) < 1e-12

    def test_unvec_roundtrip(self, rng):
        a = crand(rng, 4, 3)
        assert np.array_equal(mc.unvec(mc.vec(a), 4, 3), a)


class TestKron:
    def test_identities(self):
        assert np.array_equal(mc.kron(np.eye(2), np.eye(2)), np.eye(4))
        b = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(mc.kron(np.array([[2.0]]), b), 2.0 * b)

    def test_vec_abc_identity(self, rng):
        a = crand(rng, 2, 3)
        b = crand(rng, 3, 1)
        c = crand(rng, 1, 2)
        lhs = mc.vec(a @ b @ c)
        rhs = mc.kron(c.T, a) @ mc.vec(b)
        assert np.linalg.norm(lhs - rhs) < 1e-12

    def test_vec_abc_property_random_sizes(self, rng):
        for _ in range(30):
            m, k, l, n = rng.integers(1, 7, size=4)
            a = crand(rng, m, k)
            b = crand(rng, k, l)
            c = crand(rng, l, n)
            lhs = mc.vec(a @ b @ c)
            rhs = mc.kron(c.T, a) @ mc.vec(b)
            assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(lhs))


class TestCholesky:
    def test_identity(self):
        assert np.allclose(mc.cholesky_lower(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        low = mc.cholesky_lower(np.diag([4.0, 9.0]))
        assert np.allclose(low, np.diag([2.0, 3.0]))

    def test_reconstruction_random(self, rng):
        for n in (2, 5, 16):
            a = crand(rng, n, n)
            m = a.conj().T @ a + np.eye(n)
            low = mc.cholesky_lower(m)
            assert np.linalg.norm(low @ low.conj().T - m) <= 1e-10 * np.linalg.norm(m)
            assert np.allclose(np.triu(low, 1), 0)

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            mc.cholesky_lower(-np.eye(2))

    def test_non_hermitian_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            mc.cholesky_lower(np.array([[1.0, 5.0], [0.0, 1.0]]))

    def test_singular_pivot(self):
        m = np.outer([1.0, 1.0], [1.0, 1.0])  # rank one
        with pytest.raises(NotPositiveDefinite):
            mc.cholesky_lower(m)


class TestSvd:
    def test_diagonal(self):
        _, s, _ = mc.svd(np.diag([3.0, 1.0]))
        assert np.allclose(s, [3.0, 1.0])

    def test_zero(self):
        _, s, _ = mc.svd(np.zeros((2, 3)))
        assert np.allclose(s, 0.0)

    def test_reconstruction_and_orthonormality(self, rng):
        a = crand(rng, 4, 8)
        u, s, vh = mc.svd(a)
        smat = np.zeros((4, 8))
        smat[:4, :4] = np.diag(s)
        assert np.linalg.norm(u @ smat @ vh - a) <= 1e-10 * np.linalg.norm(a)
        assert np.linalg.norm(u.conj().T @ u - np.eye(4)) < 1e-10
        assert np.linalg.norm(vh @ vh.conj().T - np.eye(8)) < 1e-10
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0)

    def test_singular_values_vs_eigenvalues(self, rng):
        for _ in range(5):
            m, n = rng.integers(2, 13, size=2)
            a = crand(rng, m, n)
            _, s, _ = mc.svd(a)
            eigs = np.sort(np.linalg.eigvalsh(a.conj().T @ a))[::-1]
            ref = np.sqrt(np.clip(eigs, 0.0, None))[: min(m, n)]
            assert np.max(np.abs(s - ref)) < 1e-9 * max(1.0, s[0])


class TestBlockDiag:
    def test_examples(self):
        out = mc.block_diag([np.array([[1.0]]), np.array([[2.0]])])
        assert np.array_equal(out, np.diag([1.0, 2.0]).astype(complex))
        b = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(mc.block_diag([b]), b.astype(complex))

    def test_matches_kron(self, rng):
        k = crand(rng, 3, 3)
        r = 4
        assert np.array_equal(mc.block_diag([k] * r), np.kron(np.eye(r), k))

    def test_rank_threshold(self):
        s = np.array([5.0, 1e-3, 0.0])
        assert mc.numerical_rank(s, (3, 3)) == 2
        assert mc.numerical_rank(np.zeros(3), (3, 3)) == 0
