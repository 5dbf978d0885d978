import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from conftest import CONTINUOUS_FAMILIES, DISCRETE_FAMILIES, fd_gradient, random_theta
from zimodels import Family
from zimodels import families as fam
from zimodels.errors import ParameterError, SupportError, UnsupportedFamilyError
from zimodels.seeding import substream


class TestValidation:
    def test_rejects_bad_parameters(self):
        with pytest.raises(ParameterError):
            fam.validate_params(Family.POISSON, [-1.0])
        with pytest.raises(ParameterError):
            fam.validate_params(Family.GEOMETRIC, [1.0])
        with pytest.raises(ParameterError):
            fam.validate_params(Family.NORMAL, [0.0, 0.0])
        with pytest.raises(ParameterError):
            fam.validate_params(Family.NEG_BINOMIAL, [1.0])

    def test_make_params_roundtrip(self):
        theta = fam.make_params(Family.NEG_BINOMIAL, r=5, p=0.2)
        assert fam.params_dict(Family.NEG_BINOMIAL, theta) == {"r": 5.0, "p": 0.2}


class TestLogDensity:
    def test_poisson_zero_mass(self):
        # dpois(0, 0.8) = 0.449329
        got = math.exp(fam.log_density(Family.POISSON, [0.8], 0.0))
        assert got == pytest.approx(0.449329, abs=5e-7)

    def test_geometric_zero(self):
        assert fam.log_density(Family.GEOMETRIC, [0.3], 0.0) == pytest.approx(math.log(0.3))

    def test_bnb_against_high_precision(self):
        # direct Beta-function evaluation with mpmath
        r, a, b, y = 3, 3, 5, 2
        ref = mpmath.binomial(r + y - 1, y) * mpmath.beta(r + a, y + b) / mpmath.beta(a, b)
        got = math.exp(fam.log_density(Family.BETA_NEG_BINOMIAL, [r, a, b], float(y)))
        assert got == pytest.approx(float(ref), rel=1e-10)

    def test_out_of_support_is_neg_inf(self):
        assert fam.log_density(Family.POISSON, [2.0], -1.0) == -math.inf
        assert fam.log_density(Family.POISSON, [2.0], 2.5) == -math.inf
        assert fam.log_density(Family.EXPONENTIAL, [2.0], 0.0) == -math.inf
        assert fam.log_density(Family.BETA_BINOMIAL, [5, 8, 3], 6.0) == -math.inf

    def test_vectorized(self):
        out = fam.log_density(Family.NORMAL, [0.0, 1.0], [0.0, 1.0, -1.0])
        assert out.shape == (3,)
        assert out[1] == pytest.approx(out[2])


class TestZeroProb:
    def test_reference_values(self):
        assert fam.zero_prob(Family.GEOMETRIC, [0.3]) == pytest.approx(0.3, rel=1e-14)
        assert fam.zero_prob(Family.POISSON, [0.8]) == pytest.approx(0.449329, abs=5e-7)
        assert fam.zero_prob(Family.NORMAL, [1.0, 2.0]) == 0.0
        assert fam.zero_prob(Family.NEG_BINOMIAL, [10, 0.2]) == pytest.approx(0.2**10, rel=1e-12)

    def test_zero_prob_matches_density_at_zero(self, rng):
        for family in DISCRETE_FAMILIES:
            for _ in range(10):
                theta = random_theta(family, rng)
                assert fam.zero_prob(family, theta) == pytest.approx(
                    math.exp(fam.log_density(family, theta, 0.0)), rel=1e-12
                )


class TestGradients:
    def test_geometric_cancellation(self):
        assert fam.grad_log_density(Family.GEOMETRIC, [0.5], 1.0) == pytest.approx([0.0])

    def test_normal_components(self):
        g = fam.grad_log_density(Family.NORMAL, [0.0, 1.0], 2.0)
        assert g == pytest.approx([2.0, 3.0])

    def test_grad_zero_prob_values(self):
        assert fam.grad_log_zero_prob(Family.GEOMETRIC, [0.25]) == pytest.approx([4.0])
        g = fam.grad_log_zero_prob(Family.NEG_BINOMIAL, [10, 0.2])
        assert g == pytest.approx([math.log(0.2), 50.0])

    def test_grad_zero_prob_continuous_unsupported(self):
        with pytest.raises(UnsupportedFamilyError):
            fam.grad_log_zero_prob(Family.NORMAL, [0.0, 1.0])

    def test_grad_out_of_support_raises(self):
        with pytest.raises(SupportError):
            fam.grad_log_density(Family.EXPONENTIAL, [1.0], -1.0)

    def test_bb_gradient_matches_finite_difference(self):
        theta = np.array([5.0, 8.0, 3.0])
        g = fam.grad_log_density(Family.BETA_BINOMIAL, theta, 2.0)
        fd = fd_gradient(lambda t: fam.log_density(Family.BETA_BINOMIAL, t, 2.0), theta)
        assert np.max(np.abs(g - fd)) <= 1e-5

    def test_bnb_zero_prob_gradient_matches_finite_difference(self):
        theta = np.array([3.0, 3.0, 5.0])
        g = fam.grad_log_zero_prob(Family.BETA_NEG_BINOMIAL, theta)
        fd = fd_gradient(lambda t: fam.log_zero_prob(Family.BETA_NEG_BINOMIAL, t), theta)
        assert np.max(np.abs(g - fd)) <= 1e-5

    def test_all_families_match_finite_differences(self, rng):
        # 15 random (theta, y) per family here; the acceptance suite does 50
        for family in DISCRETE_FAMILIES + CONTINUOUS_FAMILIES:
            for _ in range(15):
                theta = random_theta(family, rng)
                y = float(fam.sample_baseline(family, theta, 1, rng)[0])
                if y == 0.0 and family in (Family.LOG_NORMAL, Family.HALF_NORMAL, Family.EXPONENTIAL):
                    continue
                g = fam.grad_log_density(family, theta, y)
                fd = fd_gradient(lambda t: fam.log_density(family, t, y), theta)
                assert np.max(np.abs(g - fd)) <= 1e-4, (family, theta, y)
                if family in DISCRETE_FAMILIES:
                    g0 = fam.grad_log_zero_prob(family, theta)
                    fd0 = fd_gradient(lambda t: fam.log_zero_prob(family, t), theta)
                    assert np.max(np.abs(g0 - fd0)) <= 1e-4, (family, theta)


class TestNormalization:
    def test_discrete_pmfs_sum_to_one(self, rng):
        for family in DISCRETE_FAMILIES:
            for _ in range(20):
                theta = random_theta(family, rng, integer_size=True)
                pmf = fam.pmf_table(family, theta)
                assert pmf.sum() == pytest.approx(1.0, abs=1e-8), (family, theta)

    def test_continuous_densities_integrate_to_one(self, rng):
        for family in CONTINUOUS_FAMILIES:
            for _ in range(5):
                theta = random_theta(family, rng)
                if family is Family.LOG_NORMAL:
                    # integrate on the log scale where the integrand is normal-shaped
                    val, _ = integrate.quad(
                        lambda t: math.exp(fam.log_density(family, theta, math.exp(t)) + t),
                        theta[0] - 10 * theta[1],
                        theta[0] + 10 * theta[1],
                        limit=300,
                    )
                else:
                    if family is Family.NORMAL:
                        lo, hi = theta[0] - 10 * theta[1], theta[0] + 10 * theta[1]
                    elif family is Family.HALF_NORMAL:
                        lo, hi = 1e-12, 10 * theta[0]
                    else:
                        lo, hi = 1e-12, 50.0 / theta[0]
                    val, _ = integrate.quad(
                        lambda y: math.exp(fam.log_density(family, theta, y)), lo, hi, limit=300
                    )
                assert val == pytest.approx(1.0, abs=1e-6), (family, theta)


class TestCdf:
    def test_boundary_values(self):
        assert fam.baseline_cdf(Family.EXPONENTIAL, [2.0], 0.0) == 0.0
        assert fam.baseline_cdf(Family.POISSON, [0.8], 0.0) == pytest.approx(0.449329, abs=5e-7)

    def test_bnb_partial_sum_against_mpmath(self):
        r, a, b = 3, 3, 5
        ref = sum(
            mpmath.binomial(r + y - 1, y) * mpmath.beta(r + a, y + b) / mpmath.beta(a, b)
            for y in range(11)
        )
        got = fam.baseline_cdf(Family.BETA_NEG_BINOMIAL, [r, a, b], 10.0)
        assert got == pytest.approx(float(ref), rel=1e-10)

    def test_nondecreasing_and_reaches_one(self, rng):
        for family in DISCRETE_FAMILIES + CONTINUOUS_FAMILIES:
            theta = random_theta(family, rng, integer_size=True)
            ys = np.linspace(0.0, 60.0, 121)
            vals = fam.baseline_cdf(family, theta, ys)
            assert np.all(np.diff(vals) >= -1e-15), family
            # far beyond any reasonable quantile for these parameter ranges
            assert fam.baseline_cdf(family, theta, 1e6) == pytest.approx(1.0, abs=1e-6)


class TestSampling:
    def test_geometric_concentrates_at_zero(self):
        draws = fam.sample_baseline(Family.GEOMETRIC, [1 - 1e-15], 100, substream(0))
        assert np.all(draws == 0.0)

    def test_poisson_mean_clt_bound(self):
        draws = fam.sample_baseline(Family.POISSON, [10.0], 100_000, substream(1))
        assert abs(draws.mean() - 10.0) <= 3.0 * math.sqrt(10.0 / 100_000)

    def test_normal_dkw_bound(self):
        n = 100_000
        draws = np.sort(fam.sample_baseline(Family.NORMAL, [0.0, 1.0], n, substream(2)))
        grid = np.arange(1, n + 1) / n
        from scipy.special import ndtr

        sup = np.max(
            np.maximum(np.abs(grid - ndtr(draws)), np.abs(grid - 1.0 / n - ndtr(draws)))
        )
        assert sup <= 1.95 / math.sqrt(n) * 1.5

    def test_bb_frequencies_match_pmf(self):
        theta = [5.0, 8.0, 3.0]
        draws = fam.sample_baseline(Family.BETA_BINOMIAL, theta, 200_000, substream(3))
        pmf = fam.pmf_table(Family.BETA_BINOMIAL, theta)
        freq = np.bincount(draws.astype(int), minlength=6) / len(draws)
        assert np.max(np.abs(freq - pmf)) <= 0.005

    def test_bb_non_integer_size_matches_renormalized_table(self):
        theta = [5.4, 8.0, 3.0]
        draws = fam.sample_baseline(Family.BETA_BINOMIAL, theta, 200_000, substream(4))
        pmf = fam.pmf_table(Family.BETA_BINOMIAL, theta)
        assert pmf.sum() == pytest.approx(1.0, rel=1e-12)
        freq = np.bincount(draws.astype(int), minlength=len(pmf)) / len(draws)
        assert np.max(np.abs(freq - pmf)) <= 0.005

    def test_deterministic_given_seed(self):
        a = fam.sample_baseline(Family.BETA_NEG_BINOMIAL, [3, 3, 5], 50, substream(9))
        b = fam.sample_baseline(Family.BETA_NEG_BINOMIAL, [3, 3, 5], 50, substream(9))
        assert np.array_equal(a, b)
