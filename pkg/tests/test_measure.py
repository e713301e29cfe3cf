import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from densequiv import (BaseMeasure, DensityParameter, IntervalSpec, QuadratureConfig, QuadratureError,
                       SamplingError, check_class_membership, exponential, measure_cdf, measure_quantile,
                       power_law, sample_from_density, tabulated, uniform)
from densequiv import families

from oracles import integrate

BUILTINS = [uniform(), uniform(-2.0, 3.0), power_law(2.0), power_law(0.5, 2.0), power_law(3.5, 1.5),
            exponential(1.0), exponential(0.3), tabulated([0, 1, 2, 4], [1.0, 3.0, 0.5, 2.0])]


class TestInterval:
    def test_infinite_endpoints_are_open(self):
        iv = IntervalSpec(0.0, math.inf, True, True)
        assert not iv.upper_closed and iv.lower_closed
        assert not iv.is_compact

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            IntervalSpec(1.0, 1.0)

    @given(st.floats(0.001, 0.999))
    def test_unit_map_round_trip(self, u):
        for iv in (IntervalSpec(-1, 2), IntervalSpec(0, math.inf), IntervalSpec(-math.inf, 3),
                   IntervalSpec(-math.inf, math.inf)):
            assert iv.to_unit(iv.from_unit(u)) == pytest.approx(u, abs=1e-12)


class TestCdf:
    def test_uniform_identity(self):
        assert measure_cdf(uniform(), 0.25) == pytest.approx(0.25, abs=1e-14)

    def test_exponential_median(self):
        assert measure_cdf(exponential(), math.log(2)) == pytest.approx(0.5, abs=1e-12)

    def test_linear_density_total_mass(self):
        assert measure_cdf(tabulated([0.0, 1.0], [0.0, 2.0]), 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_clamped_outside(self):
        m = uniform()
        np.testing.assert_allclose(m.cdf([-1.0, 2.0]), [0.0, 1.0])

    @pytest.mark.parametrize("meas", [m for m in BUILTINS if m.interval.is_compact and m.name != "power_law(a=0.5,L=2)"],
                             ids=lambda m: m.name)
    def test_total_mass_matches_reference_quadrature(self, meas):
        iv = meas.interval
        ref = integrate(meas.g, [iv.lower, 1.0, 2.0, iv.upper] if meas.name == "tabulated" else [iv.lower, iv.upper])
        assert meas.total_mass == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("a,L", [(0.5, 1.0), (2.0, 1.0), (3.5, 2.0), (0.2, 3.0)])
    def test_power_law_mass_closed_form(self, a, L):
        assert power_law(a, L).total_mass == pytest.approx(L ** a / a, rel=1e-9)

    @pytest.mark.parametrize("meas", BUILTINS, ids=lambda m: m.name)
    def test_monotone(self, meas):
        t = meas.quantile(np.linspace(0, 1, 301))
        c = meas.cdf(t)
        assert np.all(np.diff(c) >= 0)
        assert c[-1] == pytest.approx(meas.total_mass, rel=1e-12)

    def test_cdf_matches_closed_forms(self):
        t = np.linspace(0, 1, 41)
        np.testing.assert_allclose(power_law(2.0).cdf(t), t ** 2 / 2, atol=1e-12)
        np.testing.assert_allclose(power_law(0.5).cdf(t), 2 * np.sqrt(t), atol=1e-10)
        s = np.linspace(0, 30, 61)
        np.testing.assert_allclose(exponential(0.3).cdf(s), (1 - np.exp(-0.3 * s)) / 0.3, atol=1e-10)

    def test_quadrature_failure_reports_tolerance(self):
        # a non-integrable singularity cannot converge
        with pytest.raises(QuadratureError, match="estimated error") as err:
            BaseMeasure(IntervalSpec(0.0, 1.0), lambda x: 1.0 / np.asarray(x) ** 1.5,
                        QuadratureConfig(epsabs=1e-10, epsrel=1e-11, limit=50)).total_mass
        assert err.value.achieved > 1e-10


class TestQuantile:
    def test_uniform(self):
        assert measure_quantile(uniform(), 0.75) == pytest.approx(0.75, abs=1e-13)

    def test_linear_density_median(self):
        assert measure_quantile(tabulated([0.0, 1.0], [0.0, 2.0]), 0.5) == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_exponential_median(self):
        assert measure_quantile(exponential(), 0.5) == pytest.approx(math.log(2), abs=1e-12)

    @pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
    def test_domain_error(self, p):
        with pytest.raises(ValueError):
            uniform().quantile(p)

    def test_endpoints(self):
        m = exponential()
        assert m.quantile(0.0) == 0.0
        assert m.quantile(1.0) == math.inf

    @pytest.mark.parametrize("meas", BUILTINS, ids=lambda m: m.name)
    def test_round_trip_on_interior_grid(self, meas):
        iv = meas.interval
        if iv.is_compact:
            x = np.linspace(iv.lower, iv.upper, 102)[1:-1]
        else:
            # the far tail is ill-conditioned: the cdf is flat to machine precision there
            x = meas.quantile(np.linspace(0.01, 0.99, 100))
        back = meas.quantile(meas.cdf(x) / meas.total_mass)
        assert np.max(np.abs(back - x) / np.maximum(1, np.abs(x))) < 1e-11

    @given(st.floats(0.0, 1.0))
    def test_root_brackets_level(self, p):
        # the tolerance is on x, so the level is bracketed by x -+ tol
        for meas in (power_law(0.5), exponential(2.0), tabulated([0, 1, 2], [0.0, 1.0, 0.0])):
            x = meas.quantile(p)
            if not np.isfinite(x):
                continue
            tol = 2e-12 * max(1.0, abs(x))
            level = p * meas.total_mass
            assert meas.cdf(x - tol) <= level + 1e-15 <= meas.cdf(x + tol) + 2e-15


class TestSampling:
    def test_deterministic_and_in_range(self):
        m = uniform()
        f = families.constant(m)
        a = sample_from_density(m, f, 3, seed=11)
        b = sample_from_density(m, f, 3, seed=11)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (3,) and np.all((a >= 0) & (a <= 1))

    def test_uniform_ks(self):
        x = sample_from_density(uniform(), families.constant(uniform()), 100_000, seed=5)
        ks = stats.kstest(x, "uniform").statistic
        assert ks < 1.628 / math.sqrt(x.size)

    def test_constant_follows_base_measure(self):
        m = exponential(0.5)
        x = sample_from_density(m, families.constant(m), 100_000, seed=2)
        assert stats.kstest(x, "expon", args=(0, 2.0)).statistic < 1.628 / math.sqrt(x.size)

    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    def test_sample_quantile_in_ks_band(self, p):
        m = power_law(0.5)
        x = sample_from_density(m, families.constant(m), 100_000, seed=9)
        lo, hi = np.quantile(x, [p - 1.628 / math.sqrt(x.size), p + 1.628 / math.sqrt(x.size)])
        assert lo <= m.quantile(p) <= hi

    def test_tilted_mean_against_quadrature(self):
        m = tabulated([0.0, 2.0], [0.0, 2.0])  # g(x) = x on [0, 2]
        Z = integrate(lambda x: np.exp(-x) * x, [0, 2])
        f = DensityParameter(lambda x: np.exp(-x) / Z, math.exp(-2) / Z, 1 / Z)
        mean = integrate(lambda x: x * np.exp(-x) * x / Z, [0, 2])
        var = integrate(lambda x: x * x * np.exp(-x) * x / Z, [0, 2]) - mean ** 2
        x = sample_from_density(m, f, 100_000, seed=4)
        assert abs(x.mean() - mean) < 4 * math.sqrt(var / x.size)

    def test_acceptance_floor(self):
        m = uniform(0, 100)
        f = DensityParameter(lambda x: np.full_like(x, 0.01), 0.01, 50.0)
        with pytest.raises(SamplingError, match="M"):
            sample_from_density(m, f, 10, seed=0)

    def test_bound_violation_detected(self):
        m = uniform()
        f = DensityParameter(lambda x: 1 + 0.5 * np.sin(2 * np.pi * x), 0.5, 1.2)
        with pytest.raises(SamplingError, match="exceeds"):
            sample_from_density(m, f, 1000, seed=0)


class TestMembership:
    def test_constant(self):
        m = uniform()
        rep = check_class_membership(families.constant(m), m)
        assert rep.f_min == rep.f_max == pytest.approx(1.0, abs=1e-14)
        assert rep.normalization_defect < 1e-14
        assert rep.passed

    def test_sinusoid(self):
        m = uniform()
        f = DensityParameter(lambda x: 1 + 0.3 * np.sin(2 * np.pi * x), 0.7, 1.3, (1.0, 0.3 * 4 * np.pi ** 2))
        rep = check_class_membership(f, m, grid_size=512)
        assert rep.f_min == pytest.approx(0.7, abs=1e-4)
        assert rep.f_max == pytest.approx(1.3, abs=1e-4)
        assert rep.normalization_defect < 1e-8
        assert rep.passed

    def test_violation(self):
        m = uniform()
        f = DensityParameter(lambda x: np.full_like(x, 0.5), 0.7, 1.0)
        rep = check_class_membership(f, m)
        assert not rep.h1_ok and not rep.passed

    def test_holder_violation(self):
        m = uniform()
        f = DensityParameter(lambda x: 1 + 0.3 * np.sin(2 * np.pi * x), 0.7, 1.3, (1.0, 1.0))
        rep = check_class_membership(f, m)
        assert rep.holder_ok is False
        assert rep.holder_quotient == pytest.approx(0.3 * 4 * np.pi ** 2, rel=1e-3)

    def test_grid_size_validated(self):
        with pytest.raises(ValueError):
            check_class_membership(families.constant(uniform()), uniform(), grid_size=1)
