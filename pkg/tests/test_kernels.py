"""Kernel profiles, capped regularizations and their invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab.errors import SingularityError
from vortexlab.kernels import (
    auxiliary_kernel,
    check_regularization,
    custom_kernel,
    euler_kernel,
    green_value,
    kernel_for_order,
    perp_gradient,
    regularize,
    sqg_kernel,
)

# Independent Lanczos approximation of the Gamma function (g=7, n=9),
# used as an oracle so the kernel coefficients are not checked against
# the same library that computes them.
_LANCZOS_G = 7.0
_LANCZOS_C = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]


def gamma_oracle(x: float) -> float:
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_oracle(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_C[0]
    for i in range(1, 9):
        acc += _LANCZOS_C[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


# Reference values of the Gamma function to 16+ digits.
_GAMMA_TABLE = {
    0.25: 3.6256099082219083119,
    0.5: 1.7724538509055160273,
    0.75: 1.2254167024651776451,
    1.0: 1.0,
    1.5: 0.88622692545275801365,
    5.0: 24.0,
}


def test_gamma_oracle_matches_reference_table():
    for x, ref in _GAMMA_TABLE.items():
        assert abs(gamma_oracle(x) - ref) / ref < 1e-12


def test_euler_value_at_one_is_zero():
    assert green_value(euler_kernel(), 1.0) == 0.0


def test_sqg_half_is_inverse_distance():
    ker = sqg_kernel(0.5)
    for r in (0.01, 1.0, 100.0):
        expected = 1.0 / (2.0 * math.pi * r)
        assert abs(green_value(ker, r) - expected) / expected < 1e-12


def test_sqg_value_against_gamma_oracle():
    s, r = 0.75, 2.0
    coef = gamma_oracle(1.0 - s) / (2.0 ** (2.0 * s) * math.pi * gamma_oracle(s))
    expected = coef * r ** (-2.0 * (1.0 - s))
    assert abs(green_value(sqg_kernel(s), r) - expected) / expected < 1e-12


@pytest.mark.parametrize("bad_r", [0.0, -1.0, math.inf, math.nan])
def test_green_value_rejects_bad_radius(bad_r):
    with pytest.raises(ValueError):
        green_value(euler_kernel(), bad_r)


@pytest.mark.parametrize("s", [0.0, 1.0, 1.5, -0.2])
def test_sqg_order_domain(s):
    with pytest.raises(ValueError):
        sqg_kernel(s)


def test_kernel_for_order_maps_one_to_log_profile():
    assert kernel_for_order(1.0).kind == "euler"
    assert kernel_for_order(0.3).kind == "sqg"
    with pytest.raises(ValueError):
        kernel_for_order(1.2)


def test_perp_gradient_reference_directions():
    eu = euler_kernel()
    np.testing.assert_allclose(perp_gradient(eu, [1.0, 0.0]),
                               [0.0, -1.0 / (2.0 * math.pi)], atol=1e-15)
    np.testing.assert_allclose(perp_gradient(eu, [0.0, 1.0]),
                               [1.0 / (2.0 * math.pi), 0.0], atol=1e-15)
    np.testing.assert_allclose(perp_gradient(sqg_kernel(0.5), [2.0, 0.0]),
                               [0.0, -1.0 / (8.0 * math.pi)], atol=1e-15)


def test_perp_gradient_singular_at_origin():
    with pytest.raises(SingularityError):
        perp_gradient(euler_kernel(), [0.0, 0.0])


def test_perp_gradient_vanishes_at_origin_for_capped_kernel():
    ker = regularize(sqg_kernel(0.5), 0.1)
    np.testing.assert_array_equal(perp_gradient(ker, [0.0, 0.0]), [0.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(
    s=st.sampled_from([0.25, 0.5, 0.75, 1.0]),
    r=st.floats(min_value=1e-3, max_value=1e3),
    angle=st.floats(min_value=0.0, max_value=2.0 * math.pi),
)
def test_perp_gradient_orthogonal_and_antisymmetric(s, r, angle):
    ker = kernel_for_order(s)
    x = np.array([r * math.cos(angle), r * math.sin(angle)])
    pg = perp_gradient(ker, x)
    mag = np.linalg.norm(pg)
    assert abs(pg @ x) <= 1e-12 * max(mag * r, 1e-30)
    np.testing.assert_allclose(perp_gradient(ker, -x), -pg,
                               rtol=1e-13, atol=1e-300)


@settings(max_examples=40, deadline=None)
@given(
    s=st.sampled_from([0.25, 0.5, 0.75, 1.0]),
    r=st.floats(min_value=1e-2, max_value=1e2),
)
def test_perp_gradient_magnitude_matches_value_derivative(s, r):
    ker = kernel_for_order(s)
    h = 1e-6 * r
    fd = (green_value(ker, r + h) - green_value(ker, r - h)) / (2.0 * h)
    pg = perp_gradient(ker, [r, 0.0])
    assert abs(pg[1] - fd) <= 1e-6 * max(abs(fd), 1e-30)


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 1.0])
@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01, 0.001])
def test_cap_conditions_hold_on_grid(s, eps):
    report = check_regularization(regularize(kernel_for_order(s), eps), n=2000)
    for cond in report.conditions:
        assert cond.passed, (s, eps, cond)
    assert report.junction_residual <= 1e-6


def test_cap_matches_profile_above_epsilon():
    ker = regularize(sqg_kernel(0.5), 0.1)
    assert ker.value(0.2) == green_value(sqg_kernel(0.5), 0.2)
    expected = 1.0 / (0.4 * math.pi)
    assert abs(ker.value(0.2) - expected) < 1e-15


def test_cap_value_at_origin():
    # Quadratic cap at q=0 for the inverse-distance kernel: 1.5 G(eps).
    ker = regularize(sqg_kernel(0.5), 0.1)
    expected = 1.5 / (0.2 * math.pi)
    assert abs(ker.value(0.0) - expected) / expected < 1e-14
    # Log kernel analogue: G(eps) + 1/(4 pi).
    keu = regularize(euler_kernel(), 0.1)
    expected = green_value(euler_kernel(), 0.1) + 1.0 / (4.0 * math.pi)
    assert abs(keu.value(0.0) - expected) / expected < 1e-14


def test_regularize_rejects_large_epsilon():
    with pytest.raises(ValueError):
        regularize(euler_kernel(), 0.6)
    with pytest.raises(ValueError):
        regularize(euler_kernel(), 0.0)


@pytest.mark.parametrize("s,eps", [(0.25, 0.05), (0.75, 0.2), (1.0, 0.4)])
def test_cap_derivative_consistent_with_value(s, eps):
    ker = regularize(kernel_for_order(s), eps)
    # Away from the junction: central differences to 1e-6 relative.
    for r in np.concatenate([np.linspace(0.05 * eps, 0.95 * eps, 9),
                             np.linspace(1.1 * eps, 5.0 * eps, 9)]):
        h = 1e-7 * max(r, eps)
        fd = (ker.value(r + h) - ker.value(r - h)) / (2.0 * h)
        d = ker.radial_derivative(r)
        assert abs(fd - d) <= 1e-6 * max(abs(d), abs(fd), 1e-12)
    # Inside the junction band the kink in the second derivative costs
    # accuracy; 1e-4 relative is the contract there.
    for r in (0.99 * eps, eps, 1.01 * eps):
        h = 1e-7 * eps
        fd = (ker.value(r + h) - ker.value(r - h)) / (2.0 * h)
        d = ker.radial_derivative(r)
        assert abs(fd - d) <= 1e-4 * max(abs(d), 1e-12)


@pytest.mark.parametrize("a_param", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_auxiliary_kernel_conditions(a_param, eps):
    report = check_regularization(auxiliary_kernel(a_param, eps), n=2000)
    for cond in report.conditions:
        assert cond.passed, (a_param, eps, cond)
    assert report.junction_residual <= 1e-6


def test_auxiliary_kernel_uncapped_above_epsilon():
    aux = auxiliary_kernel(1.0, 0.1)
    for r in (0.1, 0.3, 2.0):
        assert abs(aux.value(r) - r ** -3.0) <= 1e-15 * r ** -3.0


def test_auxiliary_kernel_validation():
    with pytest.raises(ValueError):
        auxiliary_kernel(0.0, 0.1)
    with pytest.raises(ValueError):
        auxiliary_kernel(1.0, 0.0)


def test_custom_kernel_accepts_consistent_pair():
    ker = custom_kernel(lambda r: 1.0 / np.asarray(r),
                        lambda r: -1.0 / np.asarray(r) ** 2)
    assert ker.kind == "custom"
    assert abs(green_value(ker, 2.0) - 0.5) < 1e-15


def test_custom_kernel_rejects_inconsistent_derivative():
    with pytest.raises(ValueError, match="inconsistent"):
        custom_kernel(lambda r: 1.0 / np.asarray(r),
                      lambda r: +1.0 / np.asarray(r) ** 2)


def test_kernel_values_finite_on_wide_range():
    rs = np.geomspace(1e-6, 1e6, 200)
    for s in (0.1, 0.5, 0.9, 1.0):
        ker = kernel_for_order(s)
        assert np.all(np.isfinite(ker.value(rs)))
        assert np.all(np.isfinite(ker.radial_derivative(rs)))
