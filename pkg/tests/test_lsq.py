import numpy as np
import pytest

from gspcond import (
    DefinitenessError,
    SingularMatrixError,
    WlsProblem,
    build_wls_augmented,
    inverse_blocks,
    sls_cn,
    wls_cn_x2,
)


def random_full_row_rank(seed, n, m):
    rng = np.random.default_rng(seed)
    b_mat = rng.standard_normal((n, m))
    return b_mat, rng.standard_normal(m)


class TestAugmentedSystem:
    def test_identity_interpolation(self):
        p = WlsProblem(b_mat=np.eye(2), w=None, f=np.array([1.0, 2.0]))
        inv = inverse_blocks(build_wls_augmented(p))
        np.testing.assert_allclose(inv.x2, [1.0, 2.0], atol=1e-13)
        np.testing.assert_allclose(inv.x1, [0.0, 0.0], atol=1e-13)

    def test_weighted_normal_equations(self):
        # oracle: scalar normal equations B W B^T y = B W f
        p = WlsProblem(b_mat=np.array([[1.0, 1.0]]), w=np.diag([4.0, 1.0]),
                       f=np.array([1.0, 0.0]))
        inv = inverse_blocks(build_wls_augmented(p))
        assert inv.x2[0] == pytest.approx(4.0 / 5.0, rel=1e-13)

    def test_zero_row_is_singular(self):
        p = WlsProblem(b_mat=np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
                       w=None, f=np.zeros(3))
        with pytest.raises(SingularMatrixError, match="Schur"):
            inverse_blocks(build_wls_augmented(p))

    def test_residual_is_weighted(self):
        rng = np.random.default_rng(8)
        w = rng.standard_normal((4, 4))
        w = w @ w.T + 4 * np.eye(4)
        p = WlsProblem(b_mat=rng.standard_normal((2, 4)), w=w,
                       f=rng.standard_normal(4))
        inv = inverse_blocks(build_wls_augmented(p))
        expected = w @ (p.f - p.b_mat.T @ inv.x2)
        np.testing.assert_allclose(inv.x1, expected, atol=1e-10)
        # weighted normal equations: B W r = 0
        np.testing.assert_allclose(p.b_mat @ inv.x1, np.zeros(2), atol=1e-10)

    def test_not_spd(self):
        with pytest.raises(DefinitenessError):
            build_wls_augmented(WlsProblem(b_mat=np.eye(2), w=-np.eye(2),
                                           f=np.zeros(2)))
        with pytest.raises(DefinitenessError):
            WlsProblem(b_mat=np.eye(2), w=np.array([[1.0, 2.0], [0.0, 1.0]]),
                       f=np.zeros(2))


class TestWlsConditionNumbers:
    def test_identity(self):
        mixed, compw, flags = wls_cn_x2(
            WlsProblem(b_mat=np.eye(2), w=None, f=np.array([1.0, 2.0])))
        assert mixed == pytest.approx(2.0, abs=1e-13)
        assert compw == pytest.approx(2.0, abs=1e-13)
        assert flags == ()

    def test_scalar_hand_value(self):
        # oracle: y=2, r=0, K=1/2, S^{-1}=-1/4, numerator 2 + 2 = 4
        mixed, compw, _ = wls_cn_x2(
            WlsProblem(b_mat=np.array([[2.0]]), w=np.array([[1.0]]),
                       f=np.array([4.0])))
        assert mixed == pytest.approx(2.0, rel=1e-13)
        assert compw == pytest.approx(2.0, rel=1e-13)

    @pytest.mark.parametrize("seed,n,m", [(0, 2, 4), (1, 2, 5), (2, 3, 6)])
    def test_matches_pseudoinverse_route(self, seed, n, m):
        b_mat, f = random_full_row_rank(seed, n, m)
        wls = wls_cn_x2(WlsProblem(b_mat=b_mat, w=None, f=f))
        sls = sls_cn(b_mat, f)
        assert wls[0] == pytest.approx(sls[0], rel=1e-12)
        assert wls[1] == pytest.approx(sls[1], rel=1e-12)

    def test_consistent_system_zero_residual(self):
        rng = np.random.default_rng(5)
        b_mat = rng.standard_normal((2, 4))
        y = rng.standard_normal(2)
        f = b_mat.T @ y                     # f in range(B^T): r = 0
        wls = wls_cn_x2(WlsProblem(b_mat=b_mat, w=None, f=f))
        sls = sls_cn(b_mat, f)
        assert wls[0] == pytest.approx(sls[0], rel=1e-12)

    def test_blocks_recover_pseudoinverse(self):
        # at W = I the inverse blocks are the pseudoinverse and -(B B^T)^{-1}
        rng = np.random.default_rng(6)
        b_mat = rng.standard_normal((2, 5))
        p = WlsProblem(b_mat=b_mat, w=None, f=rng.standard_normal(5))
        inv = inverse_blocks(build_wls_augmented(p))
        np.testing.assert_allclose(inv.kblk, np.linalg.pinv(b_mat.T), atol=1e-10)
        np.testing.assert_allclose(inv.sinv, -np.linalg.inv(b_mat @ b_mat.T),
                                   atol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_equals_bc_formula_with_frozen_blocks(self, seed):
        # oracle: dense Kronecker assembly of the B = C x2 numerator with the
        # A contribution dropped (D and g vanish on the augmented system)
        rng = np.random.default_rng(seed)
        b_mat = rng.standard_normal((2, 4))
        w = rng.standard_normal((4, 4))
        w = w @ w.T + 4 * np.eye(4)
        p = WlsProblem(b_mat=b_mat, w=w, f=rng.standard_normal(4))
        sys_ = build_wls_augmented(p)
        inv = inverse_blocks(sys_)
        mid = np.abs(np.kron(inv.kblk, inv.x2[None, :])
                     + np.kron(inv.x1[None, :], inv.sinv))
        numer = (mid @ np.abs(sys_.B).ravel(order="F")
                 + np.abs(inv.kblk) @ np.abs(sys_.f))
        expected_mixed = np.max(numer) / np.max(np.abs(inv.x2))
        mixed, _, _ = wls_cn_x2(p)
        assert mixed == pytest.approx(expected_mixed, rel=1e-12)

    def test_rank_deficient_sls(self):
        with pytest.raises(ValueError):
            sls_cn(np.array([[1.0, 0.0], [2.0, 0.0]]), np.zeros(2))

    def test_identity_sls(self):
        mixed, compw, _ = sls_cn(np.eye(3), np.array([1.0, -2.0, 3.0]))
        assert mixed == pytest.approx(2.0, abs=1e-13)
        assert compw == pytest.approx(2.0, abs=1e-13)
