"""Characteristic functions of X_t, plain and under the shifted measure μ_ξ.

With μ_n = λ_n t^H and β_n = <ξ, e_n(·/t)/√t>, X_t(ω + ξ) = Σ μ_n((X_n + β_n)² - 1)
for i.i.d. standard normals X_n, so

    log E^{μ_ξ}[e^{iθX_t}] = Σ_n [-½ log(1 - 2iθμ_n) - iθμ_n]              (Rosenblatt part)
                           + iθ<f_t, ξ⊗ξ> - 2θ² Σ_n β_n² μ_n² / (1 - 2iθμ_n).

Expanding both parts in θ gives the series

    ½ Σ_{k≥2} (2iθt^H)^k κ^k c_k / k  +  ½ Σ_{k≥1} (2iθ)^k ‖T_t^{k/2} ξ‖²,

valid for √2|θ|t^H < 1 (λ_1 ≤ 1/√2 because Σλ_n² = 1/2).
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from scipy import special

from .fracint import SmoothTestFunction, weyl_chebyshev
from .kernels import _as_hurst, chain_form, inner_f_xi2, make_hurst
from .moments import c_k_result
from .numcore import DomainError
from .spectral import Spectrum, power_sum, project_xi, tail_power_sum


@dataclass(frozen=True)
class CFSeriesConfig:
    """Truncation of the cumulant series.

    ``kmax=None`` picks the smallest order ≥ ``kmin`` whose remainder bound is
    below ``tail_tol``; ``radius_guard`` is the fraction of the convergence radius
    accepted when ``theta_domain_check`` is on.
    """

    kmax: int | None = None
    theta_domain_check: bool = True
    radius_guard: float = 0.95
    tail_tol: float = 1e-13
    kmin: int = 40

    def __post_init__(self):
        if self.kmax is not None and self.kmax < 2:
            raise DomainError("kmax must be >= 2")
        if not 0 < self.radius_guard <= 1:
            raise DomainError("radius_guard must lie in (0, 1]")


def series_radius(t: float, H: float) -> float:
    """|θ| below which the cumulant series converges: 1/(√2 t^H)."""
    return 1.0 / (np.sqrt(2.0) * t ** H)


def _check_radius(theta, t, H, cfg: CFSeriesConfig):
    if cfg.theta_domain_check and np.max(np.abs(theta)) >= cfg.radius_guard * series_radius(t, H):
        raise DomainError(f"|theta| must stay below {cfg.radius_guard} x the series radius "
                          f"{series_radius(t, H):.6g}")


def _remainder(q: float, lam1: float, k0: int) -> float:
    """Bound on ½ Σ_{k>k0} (2|θ|t^H)^k Σλ^k / k with Σλ^k ≤ λ_1^(k-2)/2; q = 2|θ|t^H."""
    r = q * lam1
    if r >= 1:
        return np.inf
    k = k0 + 1
    return 0.25 * q ** 2 * r ** (k - 2) / (k * (1 - r))


def _choose_kmax(q: float, lam1: float, cfg: CFSeriesConfig) -> int:
    if cfg.kmax is not None:
        return cfg.kmax
    k = cfg.kmin
    while _remainder(q, lam1, k) > cfg.tail_tol and k < 4000:
        k += 10
    return k


def _scaled_cyclic(h, kmax: int, spec: Spectrum) -> np.ndarray:
    """κ^k c_k for k = 0..kmax (entries 0, 1 unused): exact for k ≤ 3, quadrature for
    k = 4, spectral power sums beyond."""
    out = np.zeros(kmax + 1)
    for k in range(2, kmax + 1):
        if k <= 4:
            out[k] = h.kappa ** k * c_k_result(h, k).value
        else:
            out[k] = power_sum(spec, k).value
    return out


def logcf_series(theta, t: float, h, cfg: CFSeriesConfig | None = None, spec: Spectrum | None = None):
    """log E[e^{iθX_t}] from the cumulant series; returns (value, remainder bound)."""
    cfg = cfg or CFSeriesConfig()
    h = _as_hurst(h)
    if t <= 0:
        raise DomainError("t must be positive")
    if spec is None:
        from .spectral import nystrom_eig
        spec = nystrom_eig(h)
    theta = np.asarray(theta, dtype=float)
    _check_radius(theta, t, h.H, cfg)
    q = 2.0 * float(np.max(np.abs(theta), initial=0.0)) * t ** h.H
    lam1 = min(float(spec.lambdas[0]), 1.0 / np.sqrt(2.0))
    kmax = _choose_kmax(q, lam1, cfg)
    coef = _scaled_cyclic(h, kmax, spec)
    k = np.arange(2, kmax + 1)
    z = 2j * theta[..., None] * t ** h.H
    val = 0.5 * np.sum(z ** k * coef[2:] / k, axis=-1)
    val = complex(val) if val.ndim == 0 else val
    return val, _remainder(q, lam1, kmax)


def _rosenblatt_log(theta, t: float, spec: Spectrum, extra_modes: int = 20000):
    """Σ_n [-½ log(1 - 2iθμ_n) - iθμ_n] over trusted modes plus asymptotic tail modes.

    The tail's θ² part is matched to the residual 1/2 - Σ_trusted λ_n², using
    ‖f_1‖² = 1/2; its θ³ part beyond the explicit tail modes comes from ζ.
    """
    theta = np.asarray(theta, dtype=float)
    H = spec.H
    lam = spec.trusted()
    start = lam.size
    tail = spec.tail_lambdas(np.arange(start + 1, start + extra_modes + 1))
    tH = t ** H

    def modes(mu):
        z = 2j * theta[..., None] * mu
        return np.sum(-0.5 * np.log1p(-z) - 0.5 * z, axis=-1)

    val = modes(lam * tH) + modes(tail * tH)
    far3 = tail_power_sum(spec, 3, start + extra_modes)
    resid2 = 0.5 - float(np.sum(lam ** 2)) - float(np.sum(tail ** 2))
    return val - theta ** 2 * tH ** 2 * resid2 - (4j / 3) * theta ** 3 * tH ** 3 * far3


def cf_eigprod(theta, t: float, spec: Spectrum, extra_modes: int = 20000):
    """E[e^{iθX_t}] as the product over eigenvalues, kept modes plus asymptotic tail modes."""
    if t <= 0:
        raise DomainError("t must be positive")
    out = np.exp(_rosenblatt_log(theta, t, spec, extra_modes))
    return complex(out) if np.ndim(out) == 0 else out


def _check_k(k):
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    return int(k)


def tk_sq_eigen(spec: Spectrum, t: float, xi, k: int, beta=None) -> float:
    """Σ (λ_n t^H)^k β_n² over the kept modes."""
    k = _check_k(k)
    b = project_xi(spec, t, xi) if beta is None else beta
    return float(np.sum((spec.lambdas * t ** spec.H) ** k * b ** 2))


def tk_sq_contraction(h, t: float, xi, k: int) -> float:
    """‖T_t^{k/2} ξ‖² = d κ^(k-1) ∫∫ I^{H/2}ξ(s) I^{H/2}ξ(r) K_t^(k-2)(s, r) ds dr, for k ≤ 4.

    k = 1 is d ∫_0^t (I^{H/2}ξ)².  Uses the chained forms on [0, t].
    """
    k = _check_k(k)
    h = _as_hurst(h)
    if isinstance(xi, SmoothTestFunction) and xi.is_zero:
        return 0.0
    if k > 4:
        raise DomainError("the contraction route is available for k <= 4")
    I = weyl_chebyshev(xi, h.H / 2, 0.0, t)
    if k == 1:
        return inner_f_xi2(h, t, xi)
    return float(h.d * h.kappa ** (k - 1) * chain_form(h, I, I, k - 1, t))


def Tk_norm(xi, t: float, k: int, route: str = "eigen", spec: Spectrum | None = None, h=None) -> float:
    """‖T_t^{k/2} ξ‖² for even k ≥ 2 by the eigen or the contraction route."""
    if int(k) != k or k < 2 or k % 2:
        raise DomainError("Tk_norm needs an even k >= 2")
    if route == "eigen":
        if spec is None:
            raise DomainError("the eigen route needs a spectrum")
        return tk_sq_eigen(spec, t, xi, k)
    if route == "contraction":
        hh = h if h is not None else (spec.H if spec is not None else None)
        if hh is None:
            raise DomainError("the contraction route needs H")
        return tk_sq_contraction(hh, t, xi, k)
    raise DomainError(f"unknown route {route!r}")


def Tk_norm_bound(h, t: float, xi, k: int) -> float:
    """t^{Hk} κ^k √c_{2k} ‖ξ‖²."""
    h = _as_hurst(h)
    c2k = c_k_result(h, 2 * k, "spectral" if 2 * k > 4 else "auto").value
    return t ** (h.H * k) * h.kappa ** k * np.sqrt(c2k) * xi.l2_norm() ** 2


def translated_cf(theta, t: float, xi, spec: Spectrum, route: str = "product",
                  cfg: CFSeriesConfig | None = None, beta=None, mean=None):
    """E^{μ_ξ}[e^{iθX_t}].

    ``product`` is valid for all θ; ``series`` needs θ inside the radius and uses
    ‖T^{k/2}ξ‖² from the contraction route for k ≤ 4 and the eigen route above.
    ``mean`` (= <f_t, ξ⊗ξ>) and ``beta`` may be passed to reuse them across θ.
    """
    theta = np.asarray(theta, dtype=float)
    h = spec.hurst
    if t <= 0:
        raise DomainError("t must be positive")
    if isinstance(xi, SmoothTestFunction) and xi.is_zero:
        if route == "series":
            return np.exp(logcf_series(theta, t, h, cfg, spec)[0])
        return cf_eigprod(theta, t, spec)
    if mean is None:
        mean = inner_f_xi2(h, t, xi)
    if route == "product":
        b = project_xi(spec, t, xi) if beta is None else beta
        mu = spec.lambdas * t ** h.H
        z = 1.0 - 2j * theta[..., None] * mu
        shift = 1j * theta * mean - 2.0 * theta ** 2 * np.sum(b ** 2 * mu ** 2 / z, axis=-1)
        out = np.exp(_rosenblatt_log(theta, t, spec) + shift)
    elif route == "series":
        out = np.exp(translated_logcf_series(theta, t, xi, spec, cfg, mean=mean)[0])
    else:
        raise DomainError(f"unknown route {route!r}")
    return complex(out) if np.ndim(out) == 0 else out


def translated_logcf_series(theta, t: float, xi, spec: Spectrum, cfg: CFSeriesConfig | None = None,
                            mean=None, beta=None):
    """(log of the translated CF by series, remainder bound)."""
    cfg = cfg or CFSeriesConfig()
    h = spec.hurst
    theta = np.asarray(theta, dtype=float)
    ros, rem = logcf_series(theta, t, h, cfg, spec)
    q = 2.0 * float(np.max(np.abs(theta), initial=0.0)) * t ** h.H
    lam1 = min(float(spec.lambdas[0]), 1.0 / np.sqrt(2.0))
    kmax = _choose_kmax(q, lam1, cfg)
    b = project_xi(spec, t, xi) if beta is None else beta
    mu = spec.lambdas * t ** h.H
    norms = np.zeros(kmax + 1)
    norms[1] = inner_f_xi2(h, t, xi) if mean is None else mean
    for k in range(2, kmax + 1):
        norms[k] = tk_sq_contraction(h, t, xi, k) if k <= 4 else float(np.sum(mu ** k * b ** 2))
    k = np.arange(1, kmax + 1)
    z = 2j * theta[..., None]
    val = ros + 0.5 * np.sum(z ** k * norms[1:], axis=-1)
    # ‖T^{k/2}ξ‖² ≤ (λ_1 t^H)^(k-1) <f_t, ξ⊗ξ>
    r = q * lam1
    rem_xi = 0.5 * norms[1] * r ** kmax * q / (1 - r) if r < 1 else np.inf
    return val, rem + rem_xi


def empirical_cf(theta, samples) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(mean of e^{iθX}, standard error of the real part, standard error of the imaginary part)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.asarray(samples, dtype=float)
    n = x.size
    means, se_re, se_im = [], [], []
    for th in theta:
        c, s = np.cos(th * x), np.sin(th * x)
        means.append(complex(c.mean(), s.mean()))
        se_re.append(c.std(ddof=1) / np.sqrt(n))
        se_im.append(s.std(ddof=1) / np.sqrt(n))
    return np.array(means), np.array(se_re), np.array(se_im)
