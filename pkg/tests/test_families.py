import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from densequiv import check_class_membership, families, power_law, uniform


@pytest.mark.parametrize("member", families.holder_battery(uniform(), 20), ids=lambda f: f.name)
def test_holder_battery_members(member):
    rep = check_class_membership(member, uniform())
    assert rep.passed
    assert member.holder[1] <= 2.0 + 1e-12
    assert 0.5 <= member.kappa and member.M <= 2.0


@pytest.mark.parametrize("member", families.sinusoidal_battery(uniform()), ids=lambda f: f.name)
def test_sinusoidal_battery_members(member):
    assert check_class_membership(member, uniform()).passed


def test_holder_battery_deterministic():
    a = families.holder_battery(uniform(), 6, seed=3)
    b = families.holder_battery(uniform(), 6, seed=3)
    x = np.linspace(0, 1, 17)
    for fa, fb in zip(a, b):
        np.testing.assert_array_equal(fa(x), fb(x))


def test_truncated_gamma_on_power_law():
    m = power_law(0.5)
    f = families.truncated_gamma(m, 2.0)
    assert check_class_membership(f, m).passed
    # closed form: f = exp(-2x) / int_0^1 x^-0.5 exp(-2x) dx
    from scipy.special import gammainc, gamma
    Z = gamma(0.5) * gammainc(0.5, 2.0) / math.sqrt(2.0)
    np.testing.assert_allclose(f(np.array([0.25])), math.exp(-0.5) / Z, rtol=1e-9)


def test_build_member_unknown():
    with pytest.raises(ValueError, match="unknown member family"):
        families.build_member(uniform(), "nope")


@given(st.floats(0.0, 0.95), st.integers(1, 4), st.floats(0, 2 * math.pi))
def test_sinusoidal_normalised(a, k, phase):
    f = families.sinusoidal(uniform(), a, k, phase)
    rep = check_class_membership(f, uniform(), grid_size=128)
    assert rep.normalization_defect < 1e-9 and rep.h1_ok


@given(st.floats(-3.9, 10.0))
def test_quadratic_membership(c):
    f = families.quadratic(uniform(), c)
    assert check_class_membership(f, uniform(), grid_size=128).passed
