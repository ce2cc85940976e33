import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from rosenblatt.fracint import (Indicator, SmoothTestFunction, sup_bound_check, weyl_chebyshev,
                                weyl_integral, weyl_integral_dt)
from rosenblatt.numcore import DomainError


def weyl_by_quadpack(xi, alpha, x):
    """Direct definition, the (x - y)^(α-1) endpoint weight handled by QUADPACK."""
    lo, _ = xi.support(12.0)
    if x <= lo:
        return 0.0
    val, _ = integrate.quad(xi, lo, x, weight="alg", wvar=(0.0, alpha - 1.0), epsabs=1e-13, epsrel=1e-12,
                            limit=200)
    return val / special.gamma(alpha)


atoms = st.tuples(st.floats(-2, 2).filter(lambda c: abs(c) > 0.05), st.floats(-1, 1), st.floats(0.1, 0.8),
                  st.integers(0, 2))


@settings(max_examples=25, deadline=None)
@given(st.lists(atoms, min_size=1, max_size=3), st.floats(0.05, 0.95), st.floats(-1.5, 2.5))
def test_weyl_integral_matches_direct_definition(terms, alpha, x):
    xi = SmoothTestFunction.from_terms(terms)
    ref = weyl_by_quadpack(xi, alpha, x)
    scale = sum(abs(t[0]) for t in terms)
    assert weyl_integral(xi, alpha, x) == pytest.approx(ref, abs=1e-8 * scale)


def test_indicator_has_closed_form():
    alpha = 0.4
    x = np.array([-0.5, 0.3, 1.0, 2.5])
    got = weyl_integral(Indicator(0.0, 1.0), alpha, x)
    ref = (np.clip(x, 0, None) ** alpha - np.clip(x - 1, 0, None) ** alpha) / special.gamma(alpha + 1)
    assert np.allclose(got, ref, atol=1e-12)


def test_derivative_commutes_with_integral():
    xi = SmoothTestFunction.from_terms([(1.0, 0.3, 0.25), (-0.7, 0.9, 0.4, 1)])
    x = np.linspace(-0.5, 2.0, 9)
    eps = 1e-5
    fd = (weyl_integral(xi, 0.35, x + eps) - weyl_integral(xi, 0.35, x - eps)) / (2 * eps)
    assert np.allclose(weyl_integral_dt(xi, 0.35, x), fd, atol=1e-7)


def test_chebyshev_interpolant_matches_direct_evaluation():
    xi = SmoothTestFunction.from_terms([(1.0, 0.3, 0.25), (1.5, 0.7, 0.15)])
    cheb = weyl_chebyshev(xi, 0.375, 0.0, 1.0)
    x = np.linspace(0, 1, 101)
    assert np.max(np.abs(cheb(x) - weyl_integral(xi, 0.375, x))) < 1e-12


def test_dilation_scaling():
    # I^α[ξ(t·)](x) = t^(-α) I^α ξ(tx)
    xi = SmoothTestFunction.gaussian(0.4, 0.3)
    t, a = 2.5, 0.3
    x = np.linspace(-0.3, 1.0, 7)
    assert np.allclose(weyl_integral(xi.dilated(t), a, x), t ** (-a) * weyl_integral(xi, a, t * x), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(-1, 1), st.floats(0.55, 0.95))
def test_sup_bound_holds(width, center, H):
    lhs, rhs = sup_bound_check(SmoothTestFunction.gaussian(center, width), H)
    assert 0 < lhs <= rhs


def test_norms_of_a_gaussian():
    xi = SmoothTestFunction.gaussian(0.2, 0.5, 2.0)
    ref_l1, _ = integrate.quad(lambda x: abs(xi(x)), -10, 10, points=[0.2])
    ref_l2, _ = integrate.quad(lambda x: xi(x) ** 2, -10, 10, points=[0.2])
    assert xi.l1_norm() == pytest.approx(ref_l1, rel=1e-10)
    assert xi.l2_norm() == pytest.approx(np.sqrt(ref_l2), rel=1e-10)
    assert xi.sup_norm() == pytest.approx(2.0, rel=1e-10)


def test_zero_function():
    z = SmoothTestFunction.zero()
    assert z.is_zero and z.l1_norm() == 0.0 and z.inner(SmoothTestFunction.gaussian()) == 0.0
    assert np.all(weyl_integral(z, 0.4, np.linspace(0, 1, 5)) == 0.0)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_order_outside_unit_interval_is_rejected(alpha):
    with pytest.raises(DomainError):
        weyl_integral(SmoothTestFunction.gaussian(), alpha, 0.5)
