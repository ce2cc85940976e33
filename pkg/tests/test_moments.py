import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from conftest import spectrum
from rosenblatt.moments import (c_k, ck_bound, ck_exact, ck_montecarlo, ck_quadrature, ck_spectral,
                                cumulant_table, kappa_r)
from rosenblatt.numcore import DomainError, SeedSpec

hurst = st.floats(0.55, 0.95)


@given(hurst)
def test_variance_is_one(H):
    assert kappa_r(H, 2) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(hurst)
def test_third_cyclic_integral_closed_form_matches_quadrature(H):
    assert ck_quadrature(H, 3).value == pytest.approx(ck_exact(H, 3), rel=1e-8)


def test_third_cyclic_integral_closed_form_matches_monte_carlo():
    H = 0.8
    res = ck_montecarlo(H, 3, 400_000, SeedSpec(5, 3))
    assert abs(res.value - ck_exact(H, 3)) < 4 * res.error


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_fourth_cyclic_integral_quadrature_vs_spectrum(H):
    spec = spectrum(H)
    q = ck_quadrature(H, 4).value
    s = ck_spectral(H, 4, spec).value
    assert q == pytest.approx(s, rel=1e-5)


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_cyclic_integrals_respect_bound(k, spec075):
    assert 0 < c_k(0.75, k, spec=spec075)[0] <= ck_bound(0.75, k)


def test_known_values_at_three_quarters(spec075):
    # κ_3 from the closed form; κ_4 from quadrature, confirmed by the spectral route above
    kappa = np.sqrt(0.75 * 0.5 / 2)
    c3 = 6 * special.beta(0.75, 0.75) / (2.25 * 1.25)
    assert kappa_r(0.75, 3) == pytest.approx(4 * 2 * kappa ** 3 * c3, rel=1e-12)
    table = cumulant_table(0.75, 6, spec=spec075)
    assert [r["route"] for r in table] == ["exact", "exact", "exact", "quadrature", "spectral", "spectral"]
    assert table[0]["kappa_r"] == 0.0


def test_monte_carlo_is_reproducible():
    a = ck_montecarlo(0.7, 4, 20_000, SeedSpec(1, 1))
    b = ck_montecarlo(0.7, 4, 20_000, SeedSpec(1, 1))
    assert a == b


def test_invalid_orders():
    for bad in (1, 0, 2.5):
        with pytest.raises(DomainError):
            c_k(0.7, bad)
    with pytest.raises(DomainError):
        ck_exact(0.7, 4)
    with pytest.raises(DomainError):
        ck_quadrature(0.7, 5)
    with pytest.raises(DomainError):
        kappa_r(0.7, 0)
