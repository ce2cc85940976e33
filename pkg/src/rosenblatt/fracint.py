"""Weyl fractional integrals of Gaussian-bump test functions.

A test function is a finite sum of atoms ``a * z**k * exp(-z**2/2)`` with
``z = (x - c)/w``.  Atoms are closed under differentiation, which gives exact
derivatives, and the fractional integral of an atom reduces to one standard
integral in the variable z.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .numcore import DomainError, composite_gauss_legendre, gamma_fn, gauss_jacobi, gauss_legendre

_REACH = 10.0  # atoms are treated as zero beyond |z| > _REACH


@dataclass(frozen=True)
class Atom:
    coef: float
    center: float
    width: float
    degree: int = 0

    def __call__(self, x):
        z = (np.asarray(x, dtype=float) - self.center) / self.width
        return self.coef * z ** self.degree * np.exp(-0.5 * z * z)

    def derivative(self) -> list["Atom"]:
        k, a, w = self.degree, self.coef, self.width
        out = [Atom(-a / w, self.center, w, k + 1)]
        if k > 0:
            out.append(Atom(a * k / w, self.center, w, k - 1))
        return out


@dataclass(frozen=True)
class SmoothTestFunction:
    """ξ(x) = Σ atoms; an element of the Schwartz space."""

    atoms: tuple = field(default_factory=tuple)

    @classmethod
    def gaussian(cls, center: float = 0.0, width: float = 1.0, coef: float = 1.0) -> "SmoothTestFunction":
        return cls((Atom(coef, center, width, 0),))

    @classmethod
    def from_terms(cls, terms: Sequence) -> "SmoothTestFunction":
        """Build from (coef, center, width[, degree]) tuples."""
        return cls(tuple(Atom(float(t[0]), float(t[1]), float(t[2]), int(t[3]) if len(t) > 3 else 0)
                         for t in terms))

    @classmethod
    def zero(cls) -> "SmoothTestFunction":
        return cls(())

    def terms(self) -> list:
        return [[a.coef, a.center, a.width, a.degree] for a in self.atoms]

    @property
    def is_zero(self) -> bool:
        return all(a.coef == 0 for a in self.atoms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a in self.atoms:
            out = out + a(x)
        return out

    def __add__(self, other: "SmoothTestFunction") -> "SmoothTestFunction":
        return SmoothTestFunction(self.atoms + other.atoms)

    def scaled(self, s: float) -> "SmoothTestFunction":
        return SmoothTestFunction(tuple(Atom(a.coef * s, a.center, a.width, a.degree) for a in self.atoms))

    def dilated(self, t: float) -> "SmoothTestFunction":
        """x ↦ ξ(t x)."""
        return SmoothTestFunction(tuple(Atom(a.coef, a.center / t, a.width / t, a.degree) for a in self.atoms))

    def derivative(self) -> "SmoothTestFunction":
        out = []
        for a in self.atoms:
            out.extend(a.derivative())
        return SmoothTestFunction(tuple(out))

    def support(self, reach: float = _REACH) -> tuple[float, float]:
        if not self.atoms:
            return (0.0, 0.0)
        lo = min(a.center - reach * a.width for a in self.atoms)
        hi = max(a.center + reach * a.width for a in self.atoms)
        return lo, hi

    def _panel_rule(self, n_per_width: int = 2):
        lo, hi = self.support(12.0)
        wmin = min(a.width for a in self.atoms)
        npan = max(8, int(np.ceil((hi - lo) / wmin * n_per_width)))
        return composite_gauss_legendre(12, np.linspace(lo, hi, npan + 1))

    def integral(self, g=None) -> float:
        """∫ ξ(x) g(x) dx (g defaults to 1)."""
        if self.is_zero:
            return 0.0
        r = self._panel_rule()
        vals = self(r.x) if g is None else self(r.x) * g(r.x)
        return r.integrate(vals)

    def inner(self, other: "SmoothTestFunction") -> float:
        if self.is_zero or other.is_zero:
            return 0.0
        return (self + other)._inner_on(self, other)

    def _inner_on(self, f, g) -> float:
        r = self._panel_rule()
        return r.integrate(f(r.x) * g(r.x))

    def l1_norm(self) -> float:
        if self.is_zero:
            return 0.0
        r = self._panel_rule(8)
        return r.integrate(np.abs(self(r.x)))

    def l2_norm(self) -> float:
        return float(np.sqrt(max(self.inner(self), 0.0)))

    def sup_norm(self) -> float:
        """Max of |ξ| by a dense scan refined with a bounded scalar search."""
        if self.is_zero:
            return 0.0
        lo, hi = self.support(8.0)
        wmin = min(a.width for a in self.atoms)
        x = np.linspace(lo, hi, int((hi - lo) / wmin * 40) + 2)
        v = np.abs(self(x))
        i = int(np.argmax(v))
        a, b = x[max(i - 1, 0)], x[min(i + 1, x.size - 1)]
        res = optimize.minimize_scalar(lambda y: -abs(float(self(y))), bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-12})
        return float(max(v[i], -res.fun))


@dataclass(frozen=True)
class Indicator:
    """1_[lo, hi]; only used to validate the fractional integral."""

    lo: float = 0.0
    hi: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return ((x >= self.lo) & (x <= self.hi)).astype(float)


# -- fractional integrals ---------------------------------------------------

def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError("fractional order must lie in (0, 1)")


def _standard_atom_weyl(alpha: float, k: int, y: np.ndarray) -> np.ndarray:
    """(1/Γ(α)) ∫_0^∞ s^(α-1) (y-s)^k exp(-(y-s)²/2) ds for an array y."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    top = y + _REACH
    g = lambda z: z ** k * np.exp(-0.5 * z * z)
    n_pan, n_gl = 20, 12
    xr, wr = gauss_legendre(n_gl, 0.0, 1.0).x, gauss_legendre(n_gl, 0.0, 1.0).w

    near = (top > 0) & (y - _REACH < 1.0)
    if np.any(near):
        yy, tt = y[near], top[near]
        a = np.minimum(1.0, tt)
        jac = gauss_jacobi(24, 0.0, 1.0, alpha - 1.0, 0.0)
        s0 = a[:, None] * jac.x[None, :]
        acc = np.sum(a[:, None] ** alpha * jac.w[None, :] * g(yy[:, None] - s0), axis=1)
        rest = tt > 1.0
        if np.any(rest):
            y2, t2 = yy[rest], tt[rest]
            h = (t2 - 1.0) / n_pan
            j = np.arange(n_pan)
            s = 1.0 + (j[None, :, None] + xr[None, None, :]) * h[:, None, None]
            w = wr[None, None, :] * h[:, None, None]
            acc[rest] += np.sum(w * s ** (alpha - 1.0) * g(y2[:, None, None] - s), axis=(1, 2))
        out[near] = acc
    far = (top > 0) & ~near
    if np.any(far):
        yy = y[far]
        lo = yy - _REACH
        h = 2.0 * _REACH / n_pan
        j = np.arange(n_pan)
        s = lo[:, None, None] + (j[None, :, None] + xr[None, None, :]) * h
        out[far] = np.sum(wr[None, None, :] * h * s ** (alpha - 1.0) * g(yy[:, None, None] - s), axis=(1, 2))
    return out / gamma_fn(alpha)


def _indicator_weyl(ind: Indicator, alpha: float, x: np.ndarray) -> np.ndarray:
    # (1/Γ(α)) ∫_{x-hi}^{x-lo} s^(α-1) ds over s > 0, by quadrature in s
    out = np.zeros_like(x)
    for i, xi in enumerate(x):
        a, b = max(xi - ind.hi, 0.0), xi - ind.lo
        if b <= 0:
            continue
        if a == 0.0:
            r = gauss_jacobi(8, 0.0, b, alpha - 1.0, 0.0)
            out[i] = r.w.sum()
        else:
            r = gauss_legendre(40, a, b)
            out[i] = r.integrate(r.x ** (alpha - 1.0))
    return out / gamma_fn(alpha)


def weyl_integral(xi, alpha: float, x):
    """I_+^α ξ(x) = (1/Γ(α)) ∫_{-∞}^x (x-y)^(α-1) ξ(y) dy."""
    _check_alpha(alpha)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(xi, Indicator):
        out = _indicator_weyl(xi, alpha, xa)
    else:
        out = np.zeros_like(xa)
        for a in xi.atoms:
            if a.coef == 0:
                continue
            y = (xa - a.center) / a.width
            out += a.coef * a.width ** alpha * _standard_atom_weyl(alpha, a.degree, y)
    return float(out[0]) if np.ndim(x) == 0 else out


def weyl_integral_dt(xi: SmoothTestFunction, alpha: float, x):
    """(I_+^α ξ)'(x), computed as I_+^α(ξ')(x) from the exact derivative atoms."""
    return weyl_integral(xi.derivative(), alpha, x)


def sup_bound_constant(H: float) -> float:
    """Constant of the split-at-lag-one bound on ‖I^{H/2} ξ‖_∞."""
    a = H / 2
    return max(1.0 / gamma_fn(a + 1.0), 1.0 / gamma_fn(a))


def sup_bound_check(xi: SmoothTestFunction, H: float, L: float = 10.0, t_max: float = 1.0,
                    n_scan: int = 1600) -> tuple[float, float]:
    """(max |I^{H/2} ξ| on a scan grid, C_H (‖ξ‖_∞ + ‖ξ'‖_∞ + ‖ξ‖_1)); asserts lhs ≤ rhs."""
    if xi.is_zero:
        return 0.0, 0.0
    lo, hi = xi.support(8.0)
    scan = np.union1d(np.linspace(-L, t_max, n_scan), np.linspace(lo, hi + 4.0, n_scan))
    lhs = float(np.max(np.abs(weyl_integral(xi, H / 2, scan))))
    rhs = sup_bound_constant(H) * (xi.sup_norm() + xi.derivative().sup_norm() + xi.l1_norm())
    assert lhs <= rhs, (lhs, rhs)
    return lhs, rhs


def weyl_chebyshev(xi, alpha: float, lo: float, hi: float, deg: int = 96, derivative: bool = False):
    """Chebyshev interpolant of I_+^α ξ (or of its derivative) on [lo, hi].

    I_+^α ξ is analytic for atom test functions, so a moderate degree resolves it
    to near round-off; callers that evaluate it at 1e5+ points use this instead
    of repeated quadrature.
    """
    _check_alpha(alpha)
    src = xi.derivative() if derivative else xi
    if isinstance(src, SmoothTestFunction) and src.is_zero:
        return np.polynomial.Chebyshev([0.0], domain=[lo, hi])
    return np.polynomial.Chebyshev.interpolate(lambda x: weyl_integral(src, alpha, x), deg, domain=[lo, hi])
