"""Cyclic integrals c_k and the cumulants of the Rosenblatt distribution.

c_k = ∫_{[0,1]^k} |x_1 - x_2|^(H-1) |x_2 - x_3|^(H-1) ... |x_k - x_1|^(H-1) dx, and
κ_r(X_1) = 2^(r-1) (r-1)! κ^r c_r with κ = √(H(2H-1)/2).

Routes:
  exact       k = 2: 1/(H(2H-1)); k = 3: 6B(H,H)/(3H(3H-1)) (ordered simplex in
              gap/ratio coordinates factorizes into two beta integrals)
  quadrature  k ≤ 4 written as ∫∫ |x-y|^(H-1) K^(k-3)(x, y) or ∫∫ K^1(x, y)²
              (k = 2: ∫∫ |x-y|^(2H-2)), each over the two triangles of the
              square in (gap, position) coordinates with tanh-sinh in both
  montecarlo  uniform points on [0,1]^k, paired with the shifted point
              x -> (x + 1/2) mod 1, blocks drawn from independent streams
  spectral    ∑ λ_n^k / κ^k from the eigenvalues of T_1
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .kernels import _K1, _as_hurst, make_hurst
from .numcore import DomainError, SeedSpec, beta_fn, tanh_sinh

ROUTES = ("exact", "quadrature", "montecarlo", "spectral")


@dataclass(frozen=True)
class CkResult:
    value: float
    error: float
    route: str


def ck_exact(h, k: int) -> float:
    h = _as_hurst(h)
    H = h.H
    if k == 2:
        return 1.0 / (H * (2 * H - 1))
    if k == 3:
        return 6.0 * beta_fn(H, H) / (3 * H * (3 * H - 1))
    raise DomainError("closed forms exist for k = 2, 3 only")


def ck_bound(h, k: int) -> float:
    """Upper bound c_k ≤ (1/(H(2H-1)))^(k/2)."""
    h = _as_hurst(h)
    return (1.0 / (h.H * (2 * h.H - 1))) ** (k / 2)


def _triangle_quad(F, gamma: float, step: float) -> float:
    """∫∫_{[0,1]²} |x-y|^gamma F(x, y) for symmetric F, via gap ρ and lower point u."""
    g = tanh_sinh(0.0, 1.0, step)
    u = tanh_sinh(0.0, 1.0, step)
    rho = g.dl
    span = (1.0 - rho)[:, None]
    U = span * u.dl[None, :]
    W = span * u.w[None, :]
    V = U + rho[:, None]
    vals = np.sum(W * F(U, V), axis=1) * rho ** gamma
    return 2.0 * float(g.w @ vals)


def ck_quadrature(h, k: int, step: float = 1.0 / 8) -> CkResult:
    """c_k for k ≤ 4 by the triangle rule; the error is the change from step to 2·step."""
    return _ck_quadrature(_as_hurst(h).H, int(k), float(step))


@lru_cache(maxsize=128)
def _ck_quadrature(H: float, k: int, step: float) -> CkResult:
    h = make_hurst(H)
    g = h.H - 1
    if k == 2:
        def run(st):
            return _triangle_quad(lambda U, V: np.ones_like(U), 2 * g, st)
    elif k == 3:
        def run(st):
            return _triangle_quad(lambda U, V: _K1(h, 1.0, U, V), g, st)
    elif k == 4:
        def run(st):
            return _triangle_quad(lambda U, V: _K1(h, 1.0, U, V) ** 2, 0.0, st)
    else:
        raise DomainError("quadrature is supported for k <= 4; use montecarlo or spectral")
    fine = run(step)
    return CkResult(fine, abs(fine - run(2 * step)), "quadrature")


def ck_montecarlo(h, k: int, n_samples: int = 1_000_000, seed: SeedSpec | None = None,
                  block: int = 100_000) -> CkResult:
    """Uniform Monte Carlo with shifted pairs; returns the standard error as ``error``."""
    h = _as_hurst(h)
    if k < 2:
        raise DomainError("k must be >= 2")
    seed = seed or SeedSpec(20240601, 3)
    g = h.H - 1
    n_blocks = max(1, -(-n_samples // block))
    sums = np.zeros(2)
    count = 0
    for b in range(n_blocks):
        m = min(block, n_samples - b * block) // 2
        if m <= 0:
            break
        x = seed.generator(k, b).random((m, k))
        vals = []
        for pts in (x, np.mod(x + 0.5, 1.0)):
            d = np.abs(pts - np.roll(pts, -1, axis=1))
            vals.append(np.prod(d ** g, axis=1))
        pair = 0.5 * (vals[0] + vals[1])
        sums += (pair.sum(), (pair ** 2).sum())
        count += m
    mean = sums[0] / count
    var = (sums[1] - count * mean ** 2) / (count - 1)
    return CkResult(float(mean), float(np.sqrt(max(var, 0.0) / count)), "montecarlo")


def ck_spectral(h, k: int, spec=None) -> CkResult:
    from .spectral import nystrom_eig, power_sum

    h = _as_hurst(h)
    if spec is None:
        spec = nystrom_eig(h)
    ps = power_sum(spec, k)
    scale = h.kappa ** k
    # the whole asymptotic tail is reported as the error scale (conservative)
    return CkResult(ps.value / scale, ps.tail_estimate / scale, "spectral")


def c_k(h, k: int, method: str = "auto", budget: int | None = None, seed: SeedSpec | None = None,
        spec=None) -> tuple[float, float]:
    """(value, error estimate) of the cyclic integral c_k."""
    res = c_k_result(h, k, method, budget, seed, spec)
    return res.value, res.error


def c_k_result(h, k: int, method: str = "auto", budget: int | None = None, seed: SeedSpec | None = None,
               spec=None) -> CkResult:
    if int(k) != k or k < 2:
        raise DomainError("k must be an integer >= 2")
    k = int(k)
    if method == "auto":
        method = "exact" if k <= 3 else "quadrature" if k == 4 else "spectral"
    if method == "exact":
        return CkResult(ck_exact(h, k), 0.0, "exact")
    if method == "quadrature":
        return ck_quadrature(h, k)
    if method == "montecarlo":
        return ck_montecarlo(h, k, budget or 1_000_000, seed)
    if method == "spectral":
        return ck_spectral(h, k, spec)
    raise DomainError(f"unknown route {method!r}")


def kappa_r(h, r: int, method: str = "auto", spec=None) -> float:
    """r-th cumulant of X_1; κ_1 = 0."""
    return kappa_r_result(h, r, method, spec)[0]


def kappa_r_result(h, r: int, method: str = "auto", spec=None) -> tuple[float, float, str]:
    """(κ_r, error, route)."""
    h = _as_hurst(h)
    if int(r) != r or r < 1:
        raise DomainError("cumulant order must be an integer >= 1")
    r = int(r)
    if r == 1:
        return 0.0, 0.0, "exact"
    res = c_k_result(h, r, method, spec=spec)
    scale = 2 ** (r - 1) * factorial(r - 1) * h.kappa ** r
    return scale * res.value, scale * res.error, res.route


def cumulant_table(h, max_order: int, method: str = "auto", spec=None) -> list[dict]:
    """Rows (r, kappa_r, route, error) for r = 1..max_order."""
    rows = []
    for r in range(1, max_order + 1):
        v, e, route = kappa_r_result(h, r, method, spec)
        rows.append({"r": r, "kappa_r": v, "route": route, "error": e})
    return rows
