
import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rosenblatt.fracint import SmoothTestFunction
from rosenblatt.kernels import (KernelGrid, K_chain, T_norm_sq, apply_T, chain_form, contract1, default_edges,
                                f_kernel, inner_f_xi2, kernel_grid, kernel_l2_norm_sq, make_hurst)
from rosenblatt.numcore import DomainError, SeedSpec, beta_fn
from rosenblatt.stransform import s_Xk

hurst = st.floats(0.55, 0.95)


@pytest.mark.parametrize("H", [0.55, 0.7, 0.85, 0.95])
def test_hurst_constants(H):
    h = make_hurst(H)
    assert h.kappa == pytest.approx(h.c * beta_fn(1 - H, H / 2), rel=1e-13)
    assert h.d == pytest.approx(h.c * h.gamma_half ** 2, rel=1e-13)


@pytest.mark.parametrize("H", [0.5, 1.0, 0.3])
def test_hurst_outside_range_is_rejected(H):
    with pytest.raises(DomainError):
        make_hurst(H)


@settings(max_examples=30, deadline=None)
@given(hurst, st.floats(-3, 0.95), st.floats(-3, 0.95), st.floats(0.3, 2.0))
def test_closed_form_kernel_matches_quadrature(H, x1, x2, t):
    if abs(x1 - x2) < 1e-3:
        x2 = x1 - 0.01
    closed = f_kernel(H, t, x1, x2)
    quad = f_kernel(H, t, x1, x2, method="quadrature")
    assert closed == pytest.approx(quad, rel=1e-7)


@settings(max_examples=30, deadline=None)
@given(hurst, st.floats(-2, 0.9), st.floats(-2, 0.9), st.floats(0.2, 3.0))
def test_kernel_symmetry_and_self_similarity(H, x1, x2, t):
    if abs(x1 - x2) < 1e-6:
        return
    assert f_kernel(H, 1.0, x1, x2) == pytest.approx(f_kernel(H, 1.0, x2, x1), rel=1e-12)
    assert f_kernel(H, t, t * x1, t * x2) == pytest.approx(t ** (H - 1) * f_kernel(H, 1.0, x1, x2), rel=1e-9)


def test_kernel_vanishes_to_the_right_of_t():
    assert f_kernel(0.7, 1.0, 1.2, 0.5) == 0.0


@pytest.mark.parametrize("H", [0.55, 0.75, 0.95])
@pytest.mark.parametrize("t", [0.5, 1.0])
def test_kernel_norm(H, t):
    assert kernel_l2_norm_sq(H, t) == pytest.approx(t ** (2 * H) / 2, rel=1e-8)


def test_pairing_routes_agree():
    xi = SmoothTestFunction.gaussian(0.3, 0.25)
    assert inner_f_xi2(0.75, 1.0, xi, route="grid") == pytest.approx(inner_f_xi2(0.75, 1.0, xi), rel=1e-3)


def test_T_norm_equals_second_chain_form():
    xi = SmoothTestFunction.gaussian(0.3, 0.25)
    h = make_hurst(0.75)
    assert T_norm_sq(h, 1.0, xi) == pytest.approx(s_Xk(1.0, xi, h, 2), rel=1e-5)
    assert np.all(apply_T(h, 1.0, xi, np.array([1.0, 1.5])) == 0.0)


@pytest.mark.parametrize("H", [0.6, 0.8])
def test_chain_form_on_constants(H):
    L = 1.3
    one = lambda u: np.ones_like(u)
    assert chain_form(H, one, one, 1, L) == pytest.approx(2 * L ** (H + 1) / (H * (H + 1)), rel=1e-9)
    with mp.workdps(20):
        ref = mp.quad(lambda u: ((u ** H + (L - u) ** H) / H) ** 2, [0, L / 2, L])
    assert chain_form(H, one, one, 2, L) == pytest.approx(float(ref), rel=1e-9)


def test_K1_monte_carlo_agrees_with_quadrature():
    h = make_hurst(0.75)
    q = K_chain(h, 1, 1.0, 0.3, 0.7)
    mc, se = K_chain(h, 1, 1.0, 0.3, 0.7, method="montecarlo", n_mc=400_000, seed=SeedSpec(1, 2))
    assert abs(mc - q) < 4 * se
    with pytest.raises(DomainError):
        K_chain(h, 0, 1.0, 0.5, 0.5)


def test_kernel_grid_serialization_and_contraction():
    edges = default_edges(1.0, 20, 10, far=1e3)
    kg = kernel_grid(0.75, 1.0, edges)
    back = KernelGrid.from_json(kg.to_json())
    assert np.array_equal(back.values, kg.values)
    C = contract1(kg, kg)
    assert np.allclose(C.values, C.values.T)
    with pytest.raises(DomainError):
        KernelGrid(kg.grid, kg.values[:-1, :-1], 1.0, 0.75)
