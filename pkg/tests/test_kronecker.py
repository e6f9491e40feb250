import numpy as np
import pytest

import kronclust.kronecker as kr
from kronclust.exceptions import ApproximationError, ShapeError, SizeLimitError


def rearrange_oracle(c, p):
    out = np.zeros((p * p, p * p))
    for bi in range(p):
        for bj in range(p):
            block = c[bi * p:(bi + 1) * p, bj * p:(bj + 1) * p]
            out[:, bi * p + bj] = block.reshape(-1, order="F")
    return out


class TestKron:
    def test_identity_blocks(self):
        assert np.array_equal(kr.kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_scalar_one_identity(self):
        b = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(kr.kron([[1.0]], b), b)

    def test_entrywise_definition(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        b = np.array([[0.0, 1.0], [1.0, 0.0]])
        out = kr.kron(a, b)
        expected = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                expected[2 * i:2 * i + 2, 2 * j:2 * j + 2] = a[i, j] * b
        assert np.array_equal(out, expected)

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            kr.kron(np.ones((100, 100)), np.ones((100, 100)), max_entries=10_000)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            kr.kron(np.array([[np.nan]]), np.eye(1))

    def test_block_diagonal_zero_pattern_preserved(self):
        rng = np.random.default_rng(0)
        a = np.zeros((4, 4))
        a[:2, :2] = rng.standard_normal((2, 2))
        a[2:, 2:] = rng.standard_normal((2, 2))
        b = rng.standard_normal((3, 3))
        out = kr.kron(a, b)
        # zero blocks of a stay exactly zero in the product
        assert np.all(out[:6, 6:] == 0.0)
        assert np.all(out[6:, :6] == 0.0)

    def test_absolute_value_factorizes_exactly(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((3, 2))
        b = rng.standard_normal((2, 4))
        assert np.array_equal(np.abs(kr.kron(a, b)), kr.kron(np.abs(a), np.abs(b)))


class TestKronAll:
    def test_single_factor(self):
        a = np.arange(4.0).reshape(2, 2)
        assert np.array_equal(kr.kron_all([a]), a)

    def test_identities(self):
        assert np.array_equal(kr.kron_all([np.eye(2), np.eye(3)]), np.eye(6))

    def test_matches_pairwise_fold(self):
        rng = np.random.default_rng(2)
        mats = [rng.standard_normal((2, 2)) for _ in range(3)]
        expected = kr.kron(kr.kron(mats[0], mats[1]), mats[2])
        assert np.allclose(kr.kron_all(mats), expected)

    def test_empty_rejected(self):
        with pytest.raises(ShapeError):
            kr.kron_all([])


class TestVecUnvec:
    def test_column_vector_unchanged(self):
        v = np.array([[1.0], [2.0], [3.0]])
        assert np.array_equal(kr.vec(v), [1.0, 2.0, 3.0])

    def test_column_stacking(self):
        assert np.array_equal(kr.vec([[1.0, 2.0], [3.0, 4.0]]), [1, 3, 2, 4])

    def test_unvec_example(self):
        assert np.array_equal(kr.unvec([1, 3, 2, 4], 2, 2), [[1, 2], [3, 4]])

    def test_unvec_rectangular(self):
        out = kr.unvec(np.arange(6.0), 2, 3)
        assert np.array_equal(out, [[0, 2, 4], [1, 3, 5]])

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for rows, cols in ((1, 1), (2, 5), (4, 3), (6, 6)):
            m = rng.standard_normal((rows, cols))
            assert np.array_equal(kr.unvec(kr.vec(m), rows, cols), m)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            kr.unvec([1.0, 2.0, 3.0], 2, 2)


class TestKronVecProduct:
    def test_identity_factors(self):
        a = np.arange(6.0)
        assert np.allclose(kr.kron_vec_product(a, np.eye(2), np.eye(3)), a)

    def test_matches_materialized(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            p1, q1, p2, q2 = rng.integers(1, 6, size=4)
            c1 = rng.standard_normal((p1, q1))
            c2 = rng.standard_normal((p2, q2))
            a = rng.standard_normal(p1 * p2)
            structured = kr.kron_vec_product(a, c1, c2)
            direct = a @ np.kron(c1, c2)
            scale = max(np.linalg.norm(direct), 1e-30)
            assert np.linalg.norm(structured - direct) / scale < 1e-10

    def test_rank_one_reshape(self):
        rng = np.random.default_rng(5)
        c1 = rng.standard_normal((3, 3))
        c2 = rng.standard_normal((2, 2))
        m = np.zeros((2, 3))
        m[0, 0] = 1.0  # e1 e1^T block
        a = m.reshape(-1, order="F")
        expected = (c2.T @ m @ c1).reshape(-1, order="F")
        assert np.allclose(kr.kron_vec_product(a, c1, c2), expected)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            kr.kron_vec_product(np.ones(5), np.eye(2), np.eye(2))


class TestKronMatvec:
    def test_matches_materialized_multi_factor(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            k = rng.integers(1, 4)
            mats = [
                rng.standard_normal((rng.integers(1, 4), rng.integers(1, 4)))
                for _ in range(k)
            ]
            full = kr.kron_all(mats)
            x = rng.standard_normal((full.shape[1], 3))
            assert np.allclose(kr.kron_matvec(mats, x), full @ x, atol=1e-11)
            assert np.allclose(kr.kron_matvec(mats, x[:, 0]), full @ x[:, 0], atol=1e-11)


class TestNorms:
    def test_frobenius_identity(self):
        assert kr.frobenius_norm(np.eye(3)) == pytest.approx(np.sqrt(3))

    def test_nuclear_diagonal(self):
        assert kr.nuclear_norm(np.diag([2.0, 3.0])) == pytest.approx(5.0)

    def test_l1_product_identity(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3))
        assert kr.l1_norm(kr.kron(a, b)) == pytest.approx(kr.l1_norm(a) * kr.l1_norm(b))

    @pytest.mark.parametrize("norm", [kr.frobenius_norm, kr.l1_norm, kr.nuclear_norm])
    def test_multiplicative_over_kron(self, norm):
        rng = np.random.default_rng(8)
        for _ in range(50):
            a = rng.standard_normal((rng.integers(1, 7), rng.integers(1, 7)))
            b = rng.standard_normal((rng.integers(1, 7), rng.integers(1, 7)))
            product = norm(a) * norm(b)
            assert abs(norm(np.kron(a, b)) - product) <= 1e-8 * max(product, 1e-30)


class TestNkpRearrange:
    def test_identity_blocks(self):
        out = kr.nkp_rearrange(np.eye(4), 2)
        assert np.array_equal(out, rearrange_oracle(np.eye(4), 2))

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_matches_block_oracle(self, p):
        rng = np.random.default_rng(p)
        c = rng.standard_normal((p * p, p * p))
        assert np.allclose(kr.nkp_rearrange(c, p), rearrange_oracle(c, p))

    def test_kron_square_is_rank_one(self):
        rng = np.random.default_rng(9)
        for p in (2, 3, 5):
            a = rng.standard_normal((p, p))
            r = kr.nkp_rearrange(np.kron(a, a), p)
            s = np.linalg.svd(r, compute_uv=False)
            assert s[1] < 1e-10 * s[0]
            w = a.reshape(-1, order="C")
            assert np.allclose(r, np.outer(a.reshape(-1, order="F"), w))

    def test_inverse_reconstruction(self):
        rng = np.random.default_rng(10)
        p = 2
        c = rng.standard_normal((4, 4))
        r = kr.nkp_rearrange(c, p)
        rebuilt = np.zeros_like(c)
        for bi in range(p):
            for bj in range(p):
                rebuilt[bi * p:(bi + 1) * p, bj * p:(bj + 1) * p] = (
                    r[:, bi * p + bj].reshape(p, p, order="F")
                )
        assert np.allclose(rebuilt, c)

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            kr.nkp_rearrange(np.eye(4), 3)
        with pytest.raises(ShapeError):
            kr.nkp_rearrange(np.ones((4, 6)), 2)


class TestNkpSymmetricApprox:
    def test_recovers_constructed_factor(self):
        rng = np.random.default_rng(11)
        for p in (2, 4, 6):
            a0 = rng.standard_normal((p, p))
            if np.trace(a0) < 0:
                a0 = -a0
            approx, eigval, residual = kr.nkp_symmetric_approx(np.kron(a0, a0), p)
            assert residual < 1e-8
            assert np.allclose(approx, a0, atol=1e-7)
            assert eigval == pytest.approx(np.linalg.norm(a0) ** 2, rel=1e-7)
            assert np.trace(approx) >= 0.0

    def test_zero_matrix_fails(self):
        with pytest.raises(ApproximationError):
            kr.nkp_symmetric_approx(np.zeros((9, 9)), 3)

    def test_perturbation_residual(self):
        rng = np.random.default_rng(12)
        p = 4
        a0 = rng.standard_normal((p, p))
        noise = rng.standard_normal((p * p, p * p))
        noise /= np.linalg.norm(noise)
        eps = 1e-6
        _, _, residual = kr.nkp_symmetric_approx(np.kron(a0, a0) + eps * noise, p)
        assert residual <= 10 * eps

    def test_failure_carries_iterate(self):
        try:
            kr.nkp_symmetric_approx(np.zeros((4, 4)), 2)
        except ApproximationError as err:
            assert err.iterate is not None
        else:
            pytest.fail("expected ApproximationError")

    def test_random_matrix_residual_in_unit_interval(self):
        rng = np.random.default_rng(13)
        c = rng.standard_normal((16, 16))
        _, eigval, residual = kr.nkp_symmetric_approx(c, 4)
        assert eigval > 0.0
        assert 0.0 <= residual <= 1.0
