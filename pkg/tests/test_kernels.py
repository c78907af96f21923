import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from citefit.errors import NonNormalizableError, ParameterError, SupportError
from citefit.kernels import (
    DiscreteDistribution,
    DiscreteLognormalParams,
    HookedPowerLawParams,
    NORMALIZATION_TERMS,
    PowerLawParams,
    normalization_constant,
    normalization_constants,
    unnormalized_weight,
)

PI2_6 = math.pi**2 / 6

# Independent quadrature oracle, computed up front with scipy.integrate.quad:
#   integral over [0.5, inf) of the lognormal(mu=2, sigma=0.5) density.
LOGNORMAL_2_05_QUAD = 0.9999999640374257


def settings_grid():
    return [
        PowerLawParams(2.0),
        PowerLawParams(2.5),
        PowerLawParams(6.0),
        HookedPowerLawParams(2.0, 10.0),
        HookedPowerLawParams(3.0, 2.0),
        HookedPowerLawParams(3.9, 42.7),
        DiscreteLognormalParams(2.0, 0.5),
        DiscreteLognormalParams(2.3, 1.2),
        DiscreteLognormalParams(0.0, 1.0),
    ]


class TestUnnormalizedWeight:
    def test_power_law(self):
        assert unnormalized_weight(PowerLawParams(2.0), 2) == pytest.approx(0.25)

    def test_hooked_nests_power_law(self):
        w = unnormalized_weight(HookedPowerLawParams(2.0, 0.0), 3)
        assert w == pytest.approx(1 / 9)
        assert w == unnormalized_weight(PowerLawParams(2.0), 3)

    def test_lognormal_at_one(self):
        w = unnormalized_weight(DiscreteLognormalParams(0.0, 1.0), 1)
        assert w == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)

    def test_domain_validation(self):
        with pytest.raises(NonNormalizableError):
            PowerLawParams(1.0)
        with pytest.raises(NonNormalizableError):
            HookedPowerLawParams(0.5, 3.0)
        with pytest.raises(ParameterError):
            HookedPowerLawParams(2.0, -1.0)
        with pytest.raises(ParameterError):
            DiscreteLognormalParams(0.0, 0.0)
        with pytest.raises(SupportError):
            unnormalized_weight(PowerLawParams(2.0), 0)


class TestNormalization:
    def test_zeta_identity(self):
        assert normalization_constant(PowerLawParams(2.0), 1) == pytest.approx(
            PI2_6, abs=1e-3
        )

    def test_hooked_b0_equals_power_law(self):
        pl = normalization_constants(PowerLawParams(2.0), 1)
        hk = normalization_constants(HookedPowerLawParams(2.0, 0.0), 1)
        assert hk == pl

    def test_lognormal_matches_quadrature_oracle(self):
        bare = normalization_constants(DiscreteLognormalParams(2.0, 0.5), 1).bare
        assert bare == pytest.approx(LOGNORMAL_2_05_QUAD, abs=1e-3)

    def test_bare_vs_corrected(self):
        nc = normalization_constants(PowerLawParams(2.0), 1)
        assert nc.tail_corrected > nc.bare
        assert nc.tail_corrected == pytest.approx(PI2_6, abs=1e-6)
        light = normalization_constants(PowerLawParams(3.0), 1)
        assert light.tail_corrected == light.bare

    def test_positive_and_finite(self):
        for params in settings_grid():
            nc = normalization_constants(params, 1)
            assert 0 < nc.bare < math.inf
            assert 0 < nc.tail_corrected < math.inf


class TestPmf:
    def test_power_law_pmf_value(self):
        dist = DiscreteDistribution(PowerLawParams(2.0), 1)
        assert dist.pmf(1) == pytest.approx(6 / math.pi**2, abs=1e-3)

    @pytest.mark.parametrize("params", settings_grid(), ids=str)
    def test_window_sum_is_one(self, params):
        dist = DiscreteDistribution(params, 1)
        xs = np.arange(1, 1 + NORMALIZATION_TERMS)
        total = float(dist.pmf(xs).sum())
        assert 1 - 1e-3 <= total <= 1 + 1e-6
        # tight bound whenever the tail is light
        is_lognormal = isinstance(params, DiscreteLognormalParams)
        if (is_lognormal and params.sigma <= 2) or (not is_lognormal and params.alpha >= 2):
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_window_sum_heavy_tail_settings(self):
        # slow-decay settings still normalize within the loose tolerance
        for params in [PowerLawParams(1.9), DiscreteLognormalParams(0.0, 2.5)]:
            dist = DiscreteDistribution(params, 1)
            xs = np.arange(1, 1 + NORMALIZATION_TERMS)
            total = float(dist.pmf(xs).sum())
            assert 1 - 1e-3 <= total <= 1 + 1e-6

    @pytest.mark.parametrize("params", settings_grid(), ids=str)
    def test_log_pmf_matches_log_of_pmf(self, params):
        dist = DiscreteDistribution(params, 1)
        xs = np.arange(1, 200)
        p = dist.pmf(xs)
        keep = p > 1e-300
        assert np.allclose(dist.log_pmf(xs)[keep], np.log(p[keep]), atol=1e-10)

    def test_support_error(self):
        dist = DiscreteDistribution(PowerLawParams(2.0), 5)
        with pytest.raises(SupportError):
            dist.pmf(4)
        with pytest.raises(SupportError):
            dist.log_pmf(1)

    @given(alpha=st.floats(1.1, 19.9), x=st.integers(1, 5000))
    @settings(max_examples=40, deadline=None)
    def test_nesting_property(self, alpha, x):
        pl = DiscreteDistribution(PowerLawParams(alpha), 1)
        hk = DiscreteDistribution(HookedPowerLawParams(alpha, 0.0), 1)
        assert hk.pmf(x) == pytest.approx(pl.pmf(x), rel=1e-12)

    def test_monotone_tail_power_laws(self):
        xs = np.arange(1, 500)
        for params in [PowerLawParams(2.5), HookedPowerLawParams(3.0, 10.0)]:
            p = DiscreteDistribution(params, 1).pmf(xs)
            assert np.all(np.diff(p) < 0)

    def test_lognormal_unimodal(self):
        p = DiscreteDistribution(DiscreteLognormalParams(2.0, 0.5), 1).pmf(
            np.arange(1, 500)
        )
        mode = int(np.argmax(p))
        assert np.all(np.diff(p[mode:]) < 0)
        if mode > 0:
            assert np.all(np.diff(p[: mode + 1]) > 0)


class TestCcdf:
    @pytest.mark.parametrize("params", settings_grid(), ids=str)
    def test_starts_at_one(self, params):
        for x_min in (1, 5):
            dist = DiscreteDistribution(params, x_min)
            assert dist.ccdf(x_min) == 1.0

    def test_power_law_value(self):
        dist = DiscreteDistribution(PowerLawParams(2.0), 1)
        assert dist.ccdf(2) == pytest.approx(1 - 6 / math.pi**2, abs=1e-3)

    @pytest.mark.parametrize("params", settings_grid(), ids=str)
    def test_strictly_decreasing(self, params):
        dist = DiscreteDistribution(params, 1)
        vals = dist.ccdf(np.arange(1, 102))
        assert np.all(np.diff(vals) < 0)

    def test_consistent_with_pmf(self):
        dist = DiscreteDistribution(HookedPowerLawParams(3.0, 5.0), 2)
        xs = np.arange(2, 50)
        assert np.allclose(dist.ccdf(xs) - dist.ccdf(xs + 1), dist.pmf(xs), atol=1e-12)


class TestSampler:
    def test_determinism(self):
        dist = DiscreteDistribution(HookedPowerLawParams(3.0, 2.0), 1)
        a = dist.sample(5, seed=99)
        b = dist.sample(5, seed=99)
        assert np.array_equal(a, b)
        assert np.all(a >= 1)

    def test_respects_x_min(self):
        dist = DiscreteDistribution(PowerLawParams(2.5), 7)
        assert dist.sample(500, seed=1).min() >= 7

    def chi_square_stat(self, dist, sample, top=20):
        n = len(sample)
        observed = np.array(
            [np.sum(sample == k) for k in range(dist.x_min, dist.x_min + top)]
            + [np.sum(sample >= dist.x_min + top)]
        )
        probs = dist.pmf(np.arange(dist.x_min, dist.x_min + top))
        expected = np.append(n * probs, n * dist.ccdf(dist.x_min + top))
        assert expected.min() > 1  # bins chosen to keep expectations sane
        return float(((observed - expected) ** 2 / expected).sum()), len(observed) - 1

    @pytest.mark.parametrize(
        "params",
        [PowerLawParams(3.0), HookedPowerLawParams(3.0, 10.0), DiscreteLognormalParams(2.0, 0.5)],
        ids=["pl", "hooked", "lognormal"],
    )
    def test_chi_square_goodness_of_fit(self, params):
        dist = DiscreteDistribution(params, 1)
        sample = dist.sample(100_000, seed=1234)
        stat, dof = self.chi_square_stat(dist, sample)
        assert stat < chi2.ppf(0.999, dof)

    def test_lognormal_moment_oracle(self):
        # analytic mean/variance from the 10,000-term sum
        dist = DiscreteDistribution(DiscreteLognormalParams(2.0, 0.5), 1)
        xs = np.arange(1, 1 + NORMALIZATION_TERMS)
        p = dist.pmf(xs)
        mean = float((xs * p).sum())
        var = float(((xs - mean) ** 2 * p).sum())
        sample = dist.sample(100_000, seed=77)
        se = math.sqrt(var / len(sample))
        assert abs(sample.mean() - mean) < 3 * se
