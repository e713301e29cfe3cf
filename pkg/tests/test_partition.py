import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from densequiv import (BaseMeasure, IntervalSpec, PartitionResolutionError, QuadratureError,
                       build_partition, exponential, locate_cell, power_law, tabulated, uniform)

from oracles import integrate

FAMILIES = [uniform(), power_law(2.0), power_law(0.5), exponential(1.0),
            tabulated([0, 1, 3], [2.0, 0.5, 1.0])]


def test_uniform_quarters():
    p = build_partition(uniform(), 4)
    np.testing.assert_allclose(p.breakpoints, [0.25, 0.5, 0.75], atol=1e-14)
    assert p.cell_mass == pytest.approx(0.25)
    np.testing.assert_allclose(p.barycenters, [0.125, 0.375, 0.625, 0.875], atol=1e-14)
    assert p.finite_mesh == pytest.approx(0.25)


def test_linear_density_halves():
    p = build_partition(tabulated([0.0, 1.0], [0.0, 2.0]), 2)
    assert p.breakpoints[0] == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert p.barycenters[0] == pytest.approx((2 / 3) * 0.5 ** 1.5 / 0.5, abs=1e-12)


def test_exponential_halves():
    p = build_partition(exponential(), 2)
    assert p.breakpoints[0] == pytest.approx(math.log(2), abs=1e-12)
    np.testing.assert_allclose(p.barycenters, [1 - math.log(2), 1 + math.log(2)], atol=1e-10)
    assert not p.is_compact
    assert p.finite_mesh == pytest.approx(math.log(2))  # only [0, v_1] has finite ends


def test_mesh_excludes_tail_cells():
    p = build_partition(exponential(), 4)
    v = p.breakpoints
    assert p.finite_mesh == pytest.approx(max(v[0], v[1] - v[0], v[2] - v[1]))
    both = build_partition(BaseMeasure(IntervalSpec(-math.inf, math.inf), lambda x: np.exp(-np.asarray(x) ** 2)), 2)
    assert math.isnan(both.finite_mesh)


@pytest.mark.parametrize("meas", FAMILIES, ids=lambda m: m.name)
@pytest.mark.parametrize("m", [1, 2, 8, 64])
def test_invariants(meas, m):
    p = build_partition(meas, m)
    assert p.edges.size == m + 1
    assert np.all(np.diff(p.edges) > 0)
    np.testing.assert_allclose(p.measured_masses, p.cell_mass, rtol=1e-9)
    assert np.all(p.barycenters >= p.edges[:-1]) and np.all(p.barycenters <= p.edges[1:])
    assert np.all(np.diff(p.barycenters) > 0)


@pytest.mark.parametrize("meas", FAMILIES, ids=lambda m: m.name)
def test_masses_telescope(meas):
    p = build_partition(meas, 16)
    cdf = np.concatenate([[0.0], meas.cdf(p.breakpoints), [meas.total_mass]])
    assert np.diff(cdf).sum() == pytest.approx(meas.total_mass, rel=1e-15)


def test_barycenters_against_reference_quadrature():
    meas = tabulated([0, 1, 3], [2.0, 0.5, 1.0])
    p = build_partition(meas, 5)
    for j in range(5):
        a, b = p.edges[j], p.edges[j + 1]
        br = [a, 1.0, b] if a < 1.0 < b else [a, b]
        ref = integrate(lambda x: x * meas.g(x), br) / integrate(meas.g, br)
        assert p.barycenters[j] == pytest.approx(ref, abs=1e-11)


@pytest.mark.parametrize("meas", FAMILIES, ids=lambda m: m.name)
@pytest.mark.parametrize("m", [2, 5, 16])
def test_refinement_interleaves(meas, m):
    coarse, fine = build_partition(meas, m), build_partition(meas, 2 * m)
    np.testing.assert_allclose(fine.breakpoints[1::2], coarse.breakpoints, rtol=1e-11, atol=1e-12)


@given(st.floats(-5, 5), st.floats(0.1, 10), st.integers(1, 60))
def test_uniform_closed_form(a, width, m):
    b = a + width
    p = build_partition(uniform(a, b), m)
    j = np.arange(1, m)
    np.testing.assert_allclose(p.breakpoints, a + j * width / m, atol=1e-10)
    np.testing.assert_allclose(p.barycenters, a + (np.arange(m) + 0.5) * width / m, atol=1e-10)


@pytest.mark.parametrize("meas", [uniform(), power_law(2.0), power_law(3.0, 2.0), tabulated([0, 1, 3], [2.0, 0.5, 1.0])],
                         ids=lambda m: m.name)
def test_mesh_nonincreasing_under_doubling(meas):
    ell = [build_partition(meas, m).finite_mesh for m in (4, 8, 16, 32)]
    assert np.all(np.diff(ell) <= 1e-15)


class TestLocate:
    def test_boundary_in_lower_cell(self):
        p = build_partition(uniform(), 4)
        assert locate_cell(p, 0.5) == 2
        assert locate_cell(p, 0.51) == 3
        assert locate_cell(p, 0.0) == 1 and locate_cell(p, 1.0) == 4

    def test_tail_cell(self):
        assert locate_cell(build_partition(exponential(), 2), 10.0) == 2

    def test_outside(self):
        with pytest.raises(ValueError):
            locate_cell(build_partition(uniform(), 4), 1.5)

    def test_open_endpoint_excluded(self):
        p = build_partition(power_law(0.5), 4)
        with pytest.raises(ValueError):
            locate_cell(p, 0.0)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=50))
    def test_consistent_with_edges(self, xs):
        p = build_partition(uniform(), 7)
        j = locate_cell(p, xs)
        x = np.asarray(xs)
        lo, hi = p.edges[j - 1], p.edges[j]
        assert np.all(((x > lo) | (j == 1)) & (x <= hi))


def test_m_must_be_positive():
    with pytest.raises(ValueError):
        build_partition(uniform(), 0)


def test_resolution_error_suggests_max_m():
    with pytest.raises(PartitionResolutionError) as err:
        build_partition(uniform(), 10 ** 8)
    assert 1 <= err.value.max_m < 10 ** 8
    assert str(err.value.max_m) in str(err.value)


def test_nonintegrable_first_moment():
    heavy = BaseMeasure(IntervalSpec(0.0, math.inf), lambda x: (1.0 + np.asarray(x)) ** -1.5)
    assert heavy.total_mass == pytest.approx(2.0, rel=1e-7)
    with pytest.raises((ValueError, QuadratureError)):
        build_partition(heavy, 2)
