import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from basketlevy import (BasketModel, DomainError, Gaussian, KoBoL, Null, characteristic_function,
                        correlation, joint_exponent, marginal_exponent, second_cumulants)
from basketlevy.model import block_list, first_cumulants

from conftest import config


def two_asset(a=((0.8, 0.5), (0.6, -0.4))):
    return BasketModel(
        [KoBoL(0.6, 0.8, 1.0, 6.0, -5.0), Gaussian(0.03)],
        [KoBoL(1.3, 0.3, 0.4, 7.0, -6.0), Gaussian(0.02)], a)


class TestConstruction:
    def test_non_square(self):
        with pytest.raises(DomainError, match="square"):
            BasketModel([Null()], [Null()], [[1.0, 2.0]])

    def test_non_finite(self):
        with pytest.raises(DomainError):
            BasketModel([Null()], [Null()], [[np.nan]])

    def test_block_count(self):
        with pytest.raises(DomainError):
            BasketModel([Null(), Null()], [Null()], np.eye(2))

    def test_matrix_read_only(self):
        m = two_asset()
        with pytest.raises(ValueError):
            m.a[0, 0] = 1.0

    def test_equality_and_fingerprint(self):
        assert two_asset() == two_asset()
        assert two_asset().fingerprint() == two_asset().fingerprint()
        other = two_asset(((0.8, 0.5), (0.6, -0.41)))
        assert other != two_asset()
        assert other.fingerprint() != two_asset().fingerprint()


class TestJointExponent:
    def test_zero(self):
        assert joint_exponent(two_asset(), [0.0, 0.0]) == 0

    def test_decomposition(self):
        m = two_asset()
        v = np.array([0.7, -1.2])
        w = m.a.T @ v
        expected = (m.x_blocks[0](v[0]) + m.x_blocks[1](v[1])
                    + m.z_blocks[0](w[0]) + m.z_blocks[1](w[1]))
        assert joint_exponent(m, v) == pytest.approx(expected, abs=1e-14)

    def test_batched(self):
        m = two_asset()
        v = np.random.default_rng(1).normal(size=(5, 3, 2))
        out = joint_exponent(m, v)
        assert out.shape == (5, 3)
        assert out[2, 1] == pytest.approx(joint_exponent(m, v[2, 1]), abs=1e-14)

    def test_length_mismatch(self):
        with pytest.raises(DomainError, match="length"):
            joint_exponent(two_asset(), [1.0, 2.0, 3.0])

    def test_strip_error_names_block(self):
        with pytest.raises(DomainError, match=r"z_blocks\[0\]"):
            joint_exponent(two_asset(), [0.0, -12j])

    def test_cf_at_zero_time(self):
        assert characteristic_function(two_asset(), [1.0, 2.0], 0.0) == 1.0

    def test_cf_negative_time(self):
        with pytest.raises(DomainError):
            characteristic_function(two_asset(), [1.0, 2.0], -1.0)


class TestMarginal:
    def test_matches_joint(self):
        m = two_asset()
        e1 = marginal_exponent(m, 1)
        for x in (0.3, -2.0, 1.0 - 0.4j):
            assert e1(x) == pytest.approx(joint_exponent(m, [0.0, x]), abs=1e-14)

    def test_strip_pulled_back(self):
        m = two_asset()
        lo, hi = marginal_exponent(m, 0).strip
        # x block strip (-5, 6), z0 weight 0.8 -> (-7.5, 8.75)
        assert (lo, hi) == pytest.approx((-5.0, 6.0))

    def test_index_range(self):
        with pytest.raises(DomainError):
            marginal_exponent(two_asset(), 2)


class TestCumulants:
    def test_covariance_gaussian(self):
        m = BasketModel([Gaussian(0.05), Gaussian(0.0175)], [Gaussian(1.0), Null()],
                        [[0.2, 0.0], [0.15, 0.0]])
        cov = second_cumulants(m, 2.0)
        assert cov == pytest.approx(2.0 * np.array([[0.09, 0.03], [0.03, 0.04]]), abs=1e-10)
        assert correlation(m, 0, 1) == pytest.approx(0.5, abs=1e-10)

    def test_unit_matrix_identical_blocks(self):
        for n in (2, 3):
            blk = KoBoL(0.6, 0.8, 1.0, 6.0, -5.0)
            m = BasketModel([blk] * n, [blk] * n, np.ones((n, n)))
            assert correlation(m, 0, 1) == pytest.approx(n / (n + 1), abs=1e-10)

    def test_symmetric_psd(self):
        cov = second_cumulants(two_asset(), 1.0)
        assert np.array_equal(cov, cov.T)
        assert np.linalg.eigvalsh(cov).min() > 0

    def test_first_cumulants_match_mc_mean(self):
        m = two_asset()
        k1 = first_cumulants(m, 1.0)
        from basketlevy import simulate_terminal

        x = simulate_terminal(m, 1.0, 200_000, 3, antithetic=False)
        se = x.std(axis=0) / np.sqrt(len(x))
        assert np.all(np.abs(x.mean(axis=0) - k1) < 4 * se)

    def test_correlation_errors(self):
        m = two_asset()
        with pytest.raises(DomainError):
            correlation(m, 0, 0)
        deg = BasketModel([Null(), Gaussian(0.1)], [Null(), Null()], np.eye(2))
        with pytest.raises(DomainError, match="zero variance"):
            correlation(deg, 0, 1)

    def test_block_list_order(self):
        labels = [(k, i) for k, i, _ in block_list(two_asset())]
        assert labels == [("x", 0), ("x", 1), ("z", 0), ("z", 1)]


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4),
       st.lists(st.floats(-4, 4), min_size=2, max_size=2))
@settings(max_examples=100, deadline=None)
def test_joint_exponent_properties(a, v):
    m = two_asset(np.reshape(a, (2, 2)))
    val = joint_exponent(m, v)
    assert joint_exponent(m, -np.asarray(v)) == pytest.approx(np.conj(val), abs=1e-10)
    assert val.real >= -1e-10
    assert abs(characteristic_function(m, v, 1.0)) <= 1.0 + 1e-12


def test_fixture_configs_load():
    for name in ("kobol_2d", "kobol_3d", "margrabe_2d", "bs_1d", "basket_4d"):
        cfg = config(name)
        assert cfg.model.n == cfg.market.n


class TestWorkedExamples:
    def test_zero_matrix_is_sum_of_idiosyncratic(self):
        m = two_asset(np.zeros((2, 2)))
        v = [0.4, -1.1]
        assert joint_exponent(m, v) == pytest.approx(m.x_blocks[0](0.4) + m.x_blocks[1](-1.1),
                                                     abs=1e-15)

    def test_pure_common_factors(self):
        z = [KoBoL(0.6, 0.8, 1.0, 6.0, -5.0), Gaussian(0.3)]
        m = BasketModel([Null(), Null()], z, np.eye(2))
        assert joint_exponent(m, [0.4, -1.1]) == pytest.approx(z[0](0.4) + z[1](-1.1), abs=1e-15)

    def test_unit_gaussians_identity(self):
        g = Gaussian(1.0)
        m = BasketModel([g, g], [g, g], np.eye(2))
        assert joint_exponent(m, [1.0, 0.0]) == pytest.approx(1.0, abs=1e-15)

    def test_marginal_all_ones(self):
        g = Gaussian(1.0)
        m = BasketModel([g, g], [g, g], np.ones((2, 2)))
        for x in (0.5, 2.0):
            assert marginal_exponent(m, 0)(x) == pytest.approx(1.5 * x * x, abs=1e-14)

    def test_marginal_zero_matrix(self):
        m = two_asset(np.zeros((2, 2)))
        assert marginal_exponent(m, 0)(1.3) == pytest.approx(m.x_blocks[0](1.3), abs=1e-15)

    def test_marginal_pure_factor(self):
        m = BasketModel([Null(), Null()], [Gaussian(0.2), Gaussian(0.5)], np.eye(2))
        assert marginal_exponent(m, 1)(2.0) == pytest.approx(1.0, abs=1e-15)

    def test_cf_semigroup(self):
        m = two_asset()
        v = [0.8, -0.6]
        assert characteristic_function(m, v, 0.7) == pytest.approx(
            characteristic_function(m, v, 0.3) * characteristic_function(m, v, 0.4), abs=1e-14)

    def test_all_ones_covariance(self):
        n, rate = 3, 0.04
        m = BasketModel([Gaussian(rate)] * n, [Gaussian(rate)] * n, np.ones((n, n)))
        cov = second_cumulants(m, 1.0)
        assert np.diag(cov) == pytest.approx([(n + 1) * rate] * n, rel=1e-10)
        assert cov[0, 1] == pytest.approx(n * rate, rel=1e-10)

    def test_zero_matrix_covariance_diagonal(self):
        cov = second_cumulants(two_asset(np.zeros((2, 2))), 1.0)
        assert cov[0, 1] == 0.0
        assert correlation(two_asset(np.zeros((2, 2))), 0, 1) == 0.0

    def test_identity_pure_factors_uncorrelated(self):
        m = BasketModel([Null(), Null()], [Gaussian(0.2), Gaussian(0.5)], np.eye(2))
        assert correlation(m, 0, 1) == 0.0

    def test_kobol_variance_against_simulation(self):
        from basketlevy import simulate_terminal

        blk = KoBoL(0.5, 1.0, 1.0, 5.0, -5.0)
        m = BasketModel([blk], [Null()], [[0.0]])
        x = simulate_terminal(m, 1.0, 1_000_000, 8, antithetic=False)[:, 0]
        centred = (x - x.mean()) ** 2
        se = centred.std(ddof=1) / np.sqrt(len(x))
        assert abs(centred.mean() - second_cumulants(m, 1.0)[0, 0]) < 3 * se

    def test_correlation_time_invariant(self):
        m = two_asset()
        assert abs(correlation(m, 0, 1, 0.5) - correlation(m, 0, 1, 2.0)) <= 1e-10
