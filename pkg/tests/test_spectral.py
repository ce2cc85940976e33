import numpy as np
import pytest
from scipy import integrate

from rosenblatt.fracint import SmoothTestFunction
from rosenblatt.numcore import DomainError
from rosenblatt.spectral import (Spectrum, eigenfunction, nystrom_eig, power_sum, project_xi, project_xi_dt,
                                 spectrum_cached)


def test_eigenvalues_are_positive_decreasing_and_orthonormal(spec075):
    lam = spec075.lambdas
    assert np.all(lam > 0) and np.all(np.diff(lam) <= 0)
    assert spec075.gram_error() < 1e-10
    assert spec075.n_trust == 100


def test_square_sum_is_half(spec075):
    assert power_sum(spec075, 2).value == pytest.approx(0.5, abs=1e-4)


def test_tail_law_continues_the_computed_spectrum(spec075):
    n = np.arange(spec075.n_trust // 2, spec075.n_trust + 1)
    rel = spec075.tail_lambdas(n) / spec075.lambdas[n - 1] - 1
    assert np.max(np.abs(rel)) < 2e-3


# the lifted functions have kinks at every cell edge, which QUADPACK reports as round-off
quad_kinks = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")


@quad_kinks
@pytest.mark.parametrize("n", [1, 2, 5])
def test_lifted_eigenfunctions_have_unit_norm(spec075, n):
    f = lambda x: eigenfunction(spec075, n, np.array([x]))[0] ** 2
    left, _ = integrate.quad(f, -np.inf, -1.0, limit=200)
    mid, _ = integrate.quad(f, -1.0, 0.0, limit=200)
    right, _ = integrate.quad(f, 0.0, 1.0, limit=200)
    assert left + mid + right == pytest.approx(1.0, abs=2e-3)


@quad_kinks
@pytest.mark.parametrize("t", [0.6, 1.0, 1.7])
def test_projection_matches_direct_quadrature(spec075, t):
    xi = SmoothTestFunction.gaussian(0.3, 0.25)
    beta = project_xi(spec075, t, xi)
    for n in (1, 3):
        g = lambda x: xi(x) * eigenfunction(spec075, n, np.array([x / t]))[0] / np.sqrt(t)
        ref, _ = integrate.quad(g, -3.0, t, points=[0.0, 0.3], limit=400)
        assert beta[n - 1] == pytest.approx(ref, abs=2e-5)


def test_projection_derivative_matches_finite_difference(spec075):
    xi = SmoothTestFunction.from_terms([(1.0, 0.3, 0.25), (0.5, -0.2, 0.4)])
    t, eps = 0.8, 1e-5
    fd = (project_xi(spec075, t + eps, xi) - project_xi(spec075, t - eps, xi)) / (2 * eps)
    assert np.max(np.abs(project_xi_dt(spec075, t, xi) - fd)[:50]) < 1e-6


def test_stability_under_grid_doubling():
    a = nystrom_eig(0.7, 1000, 40)
    b = nystrom_eig(0.7, 2000, 40)
    assert np.max(np.abs(a.lambdas[:a.n_trust] / b.lambdas[:a.n_trust] - 1)) < 5e-3


def test_save_and_load(tmp_path):
    spec = nystrom_eig(0.8, 200, 10)
    p = tmp_path / "spec.json"
    spec.save(p)
    back = Spectrum.load(p)
    assert np.array_equal(back.lambdas, spec.lambdas) and back.checksum == spec.checksum
    assert spectrum_cached(0.8, p, 200, 10).checksum == spec.checksum


def test_errors():
    with pytest.raises(DomainError):
        nystrom_eig(0.7, 201, 10)
    with pytest.raises(DomainError):
        nystrom_eig(0.7, 20, 30)
    spec = nystrom_eig(0.7, 200, 10)
    with pytest.raises(DomainError):
        power_sum(spec, 1)
    with pytest.raises(DomainError):
        project_xi(spec, 0.0, SmoothTestFunction.gaussian())
