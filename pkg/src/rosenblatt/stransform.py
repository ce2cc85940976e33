"""S-transforms of the Rosenblatt process and its relatives, Wick integrals, and
residuals of the Itô change-of-variable identities evaluated at a fixed ξ.

Notation used throughout: I(s) = I_+^{H/2}ξ(s), s(t) = S(X_t)(ξ) = d ∫_0^t I²,
S_k(t) = S(X^{H,k}_t)(ξ) = d κ^(k-1) ∫∫_{[0,t]²} I(u) I(v) K_t^(k-2)(u, v) du dv.

Derivation notes for the identities checked here (S-side):

  dS(F(X_t))/dt = S(F')ṡ + Σ_{k≥2} [H κ_k t^(Hk-1)/(k-1)! S(F^(k)) + 2^(k-1) S(F^(k)) Ṡ_k]

which for F = x², x³ gives

  S(X²) = s² + 4 S_2 + t^{2H}
  S(X³) = s³ + 12 s S_2 + 3 t^{2H} s + 24 S_3 + κ_3 t^{3H}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .charfn import translated_cf
from .fracint import SmoothTestFunction, weyl_chebyshev, weyl_integral
from .kernels import _as_hurst, chain_form, inner_f_xi2
from .moments import kappa_r
from .numcore import DomainError, composite_gauss_legendre, gamma_fn, beta_fn, gauss_jacobi, tanh_sinh
from .spectral import Spectrum, project_xi, project_xi_dt


def _is_zero(xi) -> bool:
    return isinstance(xi, SmoothTestFunction) and xi.is_zero


@dataclass(frozen=True)
class SFunctional:
    """t ↦ S(Φ_t)(ξ) for one fixed ξ."""
    evaluator: Callable[[float], float]
    process: str = ""
    H: float | None = None
    xi_label: str = ""

    def __call__(self, t):
        if np.ndim(t) == 0:
            return float(self.evaluator(float(t)))
        return np.array([float(self.evaluator(float(s))) for s in np.ravel(t)]).reshape(np.shape(t))

    @classmethod
    def constant(cls, value: float) -> "SFunctional":
        return cls(lambda t: value, "constant")


# -- the process itself ------------------------------------------------------------

def s_X(t: float, xi, h) -> float:
    """d ∫_0^t (I_+^{H/2}ξ)²."""
    h = _as_hurst(h)
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0 or _is_zero(xi):
        return 0.0
    return inner_f_xi2(h, t, xi)


def s_Xdot(t: float, xi, h) -> float:
    """d (I_+^{H/2}ξ(t))²."""
    h = _as_hurst(h)
    if _is_zero(xi):
        return 0.0
    return float(h.d * weyl_integral(xi, h.H / 2, float(t)) ** 2)


def hermite_constant(H: float, order: int) -> float:
    """Normalizing constant of the order-d Hermite noise, making E[Y_1²] = 1.

    With H_0 = 1/2 + (H-1)/d the covariance of the fractional integrals is
    B(H_0, 1-2H_0)/Γ(H_0)² |s-r|^(2H_0-1), whose d-th power integrates over
    [0,1]² to 1/(H(2H-1)); the constant solves d! C² (...)^d /(H(2H-1)) = 1.
    """
    if order < 1 or int(order) != order:
        raise DomainError("order must be a positive integer")
    if not 0.5 < H < 1:
        raise DomainError("H must lie in (1/2, 1)")
    H0 = 0.5 + (H - 1) / order
    ratio = gamma_fn(H0) ** 2 / beta_fn(H0, 1 - 2 * H0)
    return float(np.sqrt(H * (2 * H - 1) / special.factorial(order)) * ratio ** (order / 2))


def s_hermite_dot(t: float, xi, H: float, order: int) -> float:
    """C(H_0) (I_+^{H_0}ξ(t))^d for the Hermite noise of order d.

    order = 2 reproduces :func:`s_Xdot`; order = 1 is the fractional Brownian
    noise and is linear in ξ.
    """
    C = hermite_constant(H, order)
    if _is_zero(xi):
        return 0.0
    H0 = 0.5 + (H - 1) / order
    if order == 2:
        # same constant as d(H); evaluate it the same way so the values coincide
        h = _as_hurst(H)
        return float(h.d * weyl_integral(xi, h.H / 2, float(t)) ** 2)
    return float(C * weyl_integral(xi, H0, float(t)) ** order)


# -- higher-order contractions X^{H,k} -----------------------------------------------

def _weyl_interp(h, xi, hi: float, derivative: bool = False):
    return weyl_chebyshev(xi, h.H / 2, 0.0, hi, derivative=derivative)


def s_Xk(t: float, xi, h, k: int, route: str = "auto", spec: Spectrum | None = None) -> float:
    """S(X^{H,k}_t)(ξ), k ≥ 2.

    ``chain``: d κ^(k-1) ∫∫_{[0,t]²} I(u) I(v) K_t^(k-2)(u, v), for k ≤ 4;
    ``eigen``: Σ (λ_n t^H)^k β_n(t)²;  ``auto`` picks chain when available.
    """
    h = _as_hurst(h)
    if int(k) != k or k < 2:
        raise DomainError("k must be an integer >= 2")
    k = int(k)
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0 or _is_zero(xi):
        return 0.0
    if route == "auto":
        route = "chain" if k <= 4 else "eigen"
    if route == "chain":
        if k > 4:
            raise DomainError("the chain route covers k <= 4")
        I = _weyl_interp(h, xi, t)
        return float(h.d * h.kappa ** (k - 1) * chain_form(h, I, I, k - 1, t))
    if route == "eigen":
        if spec is None:
            raise DomainError("the eigen route needs a spectrum")
        b = project_xi(spec, t, xi)
        return float(np.sum((spec.lambdas * t ** h.H) ** k * b ** 2))
    raise DomainError(f"unknown route {route!r}")


def _lemma_parts(h, xi, t: float, k: int, I=None, dI=None):
    """(J, J') with J(t) = ∫∫_{[0,1]²} I(tu) I(tv) K_1^(k-2) and J' its t-derivative."""
    I = _weyl_interp(h, xi, t) if I is None else I
    dI = _weyl_interp(h, xi, t, derivative=True) if dI is None else dI

    def a(u):
        return I(t * u)

    def da(u):
        return u * dI(t * u)

    J = chain_form(h, a, a, k - 1, 1.0)
    dJ = 2.0 * chain_form(h, da, a, k - 1, 1.0)
    return J, dJ


def s_Xk_dot(t: float, xi, h, k: int, route: str = "lemma", spec: Spectrum | None = None,
             interp=None) -> float:
    """d/dt S(X^{H,k}_t)(ξ).

    ``lemma``: S_k = d κ^(k-1) t^((k-1)H+1) J(t), differentiated through the
    scaling: ((k-1)H+1) t^((k-1)H) J + t^((k-1)H+1) J'.  ``eigen``: termwise
    derivative of Σ (λ_n t^H)^k β_n(t)².  ``interp`` may carry Chebyshev
    interpolants (I, I') on an interval [0, T ≥ t] to reuse across t.
    """
    h = _as_hurst(h)
    if int(k) != k or k < 2:
        raise DomainError("k must be an integer >= 2")
    k = int(k)
    if t <= 0:
        raise DomainError("t must be positive")
    if _is_zero(xi):
        return 0.0
    if route == "lemma":
        if k > 4:
            raise DomainError("the lemma route covers k <= 4")
        I, dI = interp if interp is not None else (None, None)
        J, dJ = _lemma_parts(h, xi, t, k, I, dI)
        p = (k - 1) * h.H
        return float(h.d * h.kappa ** (k - 1) * ((p + 1) * t ** p * J + t ** (p + 1) * dJ))
    if route == "eigen":
        if spec is None:
            raise DomainError("the eigen route needs a spectrum")
        I, dI = interp if interp is not None else (None, None)
        b = project_xi(spec, t, xi, weyl=I)
        db = project_xi_dt(spec, t, xi, weyl=None if I is None else (I, dI))
        return float(_eigen_dots(spec, t, b, db, [k])[0])
    raise DomainError(f"unknown route {route!r}")


def _eigen_dots(spec: Spectrum, t: float, b, db, ks) -> np.ndarray:
    H = spec.H
    mu = spec.lambdas * t ** H
    return np.array([np.sum(mu ** k * (k * H / t * b ** 2 + 2 * b * db)) for k in ks])


# -- Wick integrals -----------------------------------------------------------------

def _time_rule(a: float, b: float, panels: int = 4, n: int = 8):
    return composite_gauss_legendre(n, np.linspace(a, b, panels + 1))


def s_wick_integral(phiS, a: float, b: float, xi, h, noise: str = "X", panels: int = 4, n: int = 8) -> float:
    """∫_a^b S(φ_t)(ξ) S(noise_t)(ξ) dt for noise X (Rosenblatt) or Z (finite interval)."""
    h = _as_hurst(h)
    if b < a:
        raise DomainError("need a <= b")
    if a == b or _is_zero(xi):
        return 0.0
    if noise == "X":
        dot = lambda t: s_Xdot(t, xi, h)  # noqa: E731
        r = _time_rule(a, b, panels, n)
    elif noise == "Z":
        dot = lambda t: s_Zdot(t, xi, h)  # noqa: E731
        # the Z noise is singular near 0 only through x^{-H/2}; tanh-sinh is safe
        r = tanh_sinh(a, b, 1.0 / 16)
    else:
        raise DomainError(f"unknown noise {noise!r}")
    vals = np.array([float(phiS(t)) * dot(t) for t in r.x])
    if not np.all(np.isfinite(vals)):
        raise DomainError("integrand is not integrable on the interval (non-finite values)")
    return float(r.w @ vals)


# -- polynomial Itô identities ---------------------------------------------------------

def s_square(t: float, xi, h) -> float:
    """S((X_t)²)(ξ) = s² + 4 S_2 + t^{2H}."""
    h = _as_hurst(h)
    s = s_X(t, xi, h)
    return s * s + 4.0 * s_Xk(t, xi, h, 2) + t ** (2 * h.H)


def s_cube(t: float, xi, h) -> float:
    """S((X_t)³)(ξ) = s³ + 12 s S_2 + 3 t^{2H} s + 24 S_3 + κ_3 t^{3H}."""
    h = _as_hurst(h)
    s = s_X(t, xi, h)
    S2 = s_Xk(t, xi, h, 2)
    S3 = s_Xk(t, xi, h, 3)
    return s ** 3 + 12.0 * s * S2 + 3.0 * t ** (2 * h.H) * s + 24.0 * S3 + _cube_det(h, t)


def _cube_det(h, t: float) -> float:
    return kappa_r(h, 3) * t ** (3 * h.H)


@dataclass
class ItoResidual:
    """Residuals of one identity; ``routes`` maps the route name to the absolute residual."""
    degree: object
    lhs: float
    routes: dict
    scale: float
    terms: dict = field(default_factory=dict)
    bound: float = 0.0

    @property
    def residual(self) -> float:
        return max(self.routes.values()) if self.routes else 0.0

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual

    def to_dict(self) -> dict:
        return {"degree": self.degree, "lhs": self.lhs, "routes": dict(self.routes), "scale": self.scale,
                "terms": dict(self.terms), "bound": self.bound, "residual": self.residual,
                "relative": self.relative}


def _check_interval(a: float, b: float):
    if not (a > 0):
        raise DomainError("need a > 0")
    if a > b:
        raise DomainError("need a < b")


def ito_residual_poly(degree: int, a: float, b: float, xi, h, panels: int = 4, n: int = 8,
                      spec: Spectrum | None = None) -> ItoResidual:
    """Residual of the S-transformed x² or x³ identity on [a, b].

    The ∫dX^{H,k} terms are taken both as ∫ Ṡ_k dt (``lemma`` route) and as
    S_k(b) - S_k(a) (``increment`` route); with a spectrum, a third route
    integrates the eigen-series derivative.  ``scale`` is the sum of the
    absolute values of the terms on the right-hand side.
    """
    h = _as_hurst(h)
    if degree not in (2, 3):
        raise DomainError("degree must be 2 or 3")
    _check_interval(a, b)
    if a == b:
        return ItoResidual(degree, 0.0, {"lemma": 0.0, "increment": 0.0}, 0.0)
    H = h.H
    zero = _is_zero(xi)
    r = _time_rule(a, b, panels, n)
    ts = r.x
    if zero:
        s = ds = dS2 = dS3 = np.zeros_like(ts)
    else:
        I = _weyl_interp(h, xi, b)
        dI = _weyl_interp(h, xi, b, derivative=True)
        s = np.array([s_X(t, xi, h) for t in ts])
        ds = h.d * I(ts) ** 2
        dS2 = np.array([s_Xk_dot(t, xi, h, 2, interp=(I, dI)) for t in ts])
        dS3 = (np.array([s_Xk_dot(t, xi, h, 3, interp=(I, dI)) for t in ts]) if degree == 3 else None)
    eig = None
    if spec is not None:
        if zero:
            eig = np.zeros((ts.size, 2))
        else:
            eig = np.array([_eigen_dots(spec, t, project_xi(spec, t, xi, weyl=I),
                                        project_xi_dt(spec, t, xi, weyl=(I, dI)), [2, 3])
                            for t in ts])
    if degree == 2:
        lhs = s_square(b, xi, h) - s_square(a, xi, h)
        wick = 2.0 * r.integrate(s * ds)
        det = b ** (2 * H) - a ** (2 * H)
        inc2 = {"lemma": r.integrate(dS2), "increment": s_Xk(b, xi, h, 2) - s_Xk(a, xi, h, 2)}
        if eig is not None:
            inc2["eigen"] = r.integrate(eig[:, 0])
        routes = {}
        for name, d2 in inc2.items():
            rhs = (wick + 4.0 * d2) + det if not zero else det
            routes[name] = abs(lhs - rhs)
        terms = {"wick": wick, "deterministic": det, "contraction_lemma": 4 * inc2["lemma"],
                 "contraction_increment": 4 * inc2["increment"]}
        scale = abs(wick) + abs(det) + abs(4 * inc2["lemma"])
        return ItoResidual(2, lhs, routes, scale, terms)
    lhs = s_cube(b, xi, h) - s_cube(a, xi, h)
    sq = s * s + 4.0 * np.array([s_Xk(t, xi, h, 2) for t in ts]) + ts ** (2 * H) if not zero else ts ** (2 * H)
    wick = 3.0 * r.integrate(sq * ds)
    drift = 6.0 * H * r.integrate(ts ** (2 * H - 1) * s)
    mixed = 12.0 * r.integrate(s * dS2)
    det = _cube_det(h, b) - _cube_det(h, a)
    inc3 = {"lemma": r.integrate(dS3) if not zero else 0.0,
            "increment": s_Xk(b, xi, h, 3) - s_Xk(a, xi, h, 3)}
    if eig is not None:
        inc3["eigen"] = r.integrate(eig[:, 1])
    routes = {}
    for name, d3 in inc3.items():
        body = wick + drift + mixed + 24.0 * d3
        rhs = body + det
        routes[name] = abs(lhs - rhs)
    terms = {"wick": wick, "drift": drift, "mixed": mixed, "deterministic": det,
             "contraction_lemma": 24 * inc3["lemma"], "contraction_increment": 24 * inc3["increment"]}
    scale = abs(wick) + abs(drift) + abs(mixed) + abs(det) + abs(24 * inc3["lemma"])
    return ItoResidual(3, lhs, routes, scale, terms)


# -- band-limited functions --------------------------------------------------------------

@dataclass(frozen=True)
class BandLimitedF:
    """F(x) = (1/2π) ∫ F̂(θ) e^{iθx} dθ with F̂ supported in [-θ_max, θ_max].

    ``fhat`` is a vectorized callable; ``hermitian`` marks F̂(-θ) = conj F̂(θ),
    i.e. a real F.  ``order`` is the polynomial growth order (0 here).
    """
    fhat: Callable
    theta_max: float
    hermitian: bool = True
    order: int = 0
    label: str = ""
    panels: int = 8
    nodes: int = 16
    interval: tuple | None = None

    def rule(self):
        lo, hi = self.interval if self.interval is not None else (-self.theta_max, self.theta_max)
        return composite_gauss_legendre(self.nodes, np.linspace(lo, hi, self.panels + 1))

    def samples(self):
        r = self.rule()
        return r.x, np.asarray(self.fhat(r.x), dtype=complex), r.w

    def l1_norm(self) -> float:
        th, fh, w = self.samples()
        return float(w @ np.abs(fh))

    def __call__(self, x, k: int = 0):
        """F^{(k)}(x) evaluated through the Fourier integral."""
        th, fh, w = self.samples()
        x = np.asarray(x, dtype=float)
        vals = np.exp(1j * np.multiply.outer(x, th)) @ (w * fh * (1j * th) ** k) / (2 * np.pi)
        return vals.real if self.hermitian else vals


def _bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def windowed_cosine(theta_max: float, omega: float = 1.0, sigma: float | None = None,
                    shift: float = 0.0) -> BandLimitedF:
    """F̂(θ) = e^{-θ²/(2σ²)} cos(ωθ) ψ(θ/θ_max) e^{-iθ·shift} with the C^∞ bump ψ.

    Real F for every shift; σ defaults to θ_max/2.
    """
    sig = theta_max / 2 if sigma is None else sigma

    def fhat(th):
        th = np.asarray(th, dtype=float)
        return np.exp(-th ** 2 / (2 * sig ** 2)) * np.cos(omega * th) * _bump(th / theta_max) * np.exp(-1j * th * shift)

    return BandLimitedF(fhat, float(theta_max), True, 0, f"windowed_cosine(w={omega}, s={sig}, x0={shift})")


def narrow_bump(theta0: float, width: float) -> BandLimitedF:
    """2π × a unit-mass bump at θ_0, so F(x) ≈ e^{iθ_0 x}; complex-valued F."""
    probe = composite_gauss_legendre(32, np.linspace(-1, 1, 9))
    mass = width * float(probe.w @ _bump(probe.x))

    def fhat(th):
        return 2 * np.pi * _bump((np.asarray(th, dtype=float) - theta0) / width) / mass

    return BandLimitedF(fhat, abs(theta0) + width, False, 0, f"narrow_bump({theta0}, {width})",
                        interval=(theta0 - width, theta0 + width))


def support_limit(t: float, H: float) -> float:
    """1/(√2 t^H): the radius the Fourier support must stay strictly inside."""
    return 1.0 / (np.sqrt(2.0) * t ** H)


def _check_support(F: BandLimitedF, t: float, H: float):
    lim = support_limit(t, H)
    if F.theta_max >= lim * (1 - 1e-12):
        raise DomainError(f"θ_max = {F.theta_max} is not strictly inside 1/(√2 t^H) = {lim}")


def _moments_from_cf(F: BandLimitedF, cf: np.ndarray, ks) -> np.ndarray:
    """S(F^{(k)}(X_t))(ξ) for each k, given cf on the rule's θ nodes."""
    th, fh, w = F.samples()
    base = w * fh * cf / (2 * np.pi)
    return np.array([np.sum(base * (1j * th) ** k) for k in ks])


def s_F(F: BandLimitedF, t: float, xi, spec: Spectrum, k: int = 0, check: bool = True):
    """S(F^{(k)}(X_t))(ξ) = (1/2π) ∫ F̂(θ)(iθ)^k E^{μ_ξ}[e^{iθX_t}] dθ."""
    if check:
        _check_support(F, t, spec.H)
    th, fh, w = F.samples()
    cf = translated_cf(th, t, xi, spec)
    val = _moments_from_cf(F, cf, [k])[0]
    return float(val.real) if F.hermitian else complex(val)


def ito_residual_PW(F: BandLimitedF, a: float, b: float, xi, kmax: int, spec: Spectrum,
                    panels: int = 4, n: int = 8) -> ItoResidual:
    """Residual of the S-transformed change of variables for band-limited F, k-sum cut at kmax.

    ``bound`` is the geometric tail of the omitted k > kmax terms, from
    |S(F^{(k)})| ≤ θ_max^k ‖F̂‖_1/2π, κ_k/(k-1)! ≤ 2^(k-2) λ_1^(k-2) and
    |Ṡ_k| ≤ (λ_1 t^H)^(k-2) Σ (λ_n t^H)² (kH β_n²/t + 2|β_n β_n'|).
    """
    h = spec.hurst
    H = h.H
    if int(kmax) != kmax or kmax < 2:
        raise DomainError("kmax must be an integer >= 2")
    _check_interval(a, b)
    _check_support(F, b, H)
    if a == b:
        return ItoResidual("pw", 0.0, {"eigen": 0.0}, 0.0)
    ks = np.arange(1, kmax + 1)
    kap = np.array([0.0] + [kappa_r(h, int(k), spec=spec) for k in ks[1:]])
    r = _time_rule(a, b, panels, n)
    th, fh, w = F.samples()
    A = F.l1_norm() / (2 * np.pi)
    lam1 = float(spec.lambdas[0])
    zero = _is_zero(xi)
    integrand = np.zeros(r.x.size, dtype=complex)
    tail = np.zeros(r.x.size)
    if not zero:
        I = _weyl_interp(h, xi, b)
        dI = _weyl_interp(h, xi, b, derivative=True)
    for j, t in enumerate(r.x):
        if zero:
            b_ = db_ = np.zeros(spec.n_keep)
        else:
            b_ = project_xi(spec, t, xi, weyl=I)
            db_ = project_xi_dt(spec, t, xi, weyl=(I, dI))
        cf = translated_cf(th, t, xi, spec, beta=b_)
        mom = _moments_from_cf(F, cf, ks)
        sdot = 0.0 if zero else s_Xdot(t, xi, h)
        dots = _eigen_dots(spec, t, b_, db_, ks[1:])
        kk = ks[1:]
        fact = special.factorial(kk - 1)
        val = mom[0] * sdot
        val += np.sum(H * kap[1:] * t ** (H * kk - 1) / fact * mom[1:])
        val += np.sum(2.0 ** (kk - 1) * mom[1:] * dots)
        integrand[j] = val
        # omitted k > kmax
        q = 2 * lam1 * F.theta_max * t ** H
        far = np.arange(kmax + 1, kmax + 4000)
        geo = q ** (far - 2)
        mu2 = (spec.lambdas * t ** H) ** 2
        P = float(np.sum(mu2 * b_ ** 2))
        Q = float(np.sum(mu2 * np.abs(b_ * db_)))
        pre = (F.theta_max * t ** H) ** 2
        t1 = H / t * A * pre * np.sum(geo)
        t2 = 2 * F.theta_max ** 2 * A * np.sum(geo * (far * H / t * P + 2 * Q))
        tail[j] = t1 + t2
    lhs_c = (s_F(F, b, xi, spec, check=False) - s_F(F, a, xi, spec, check=False))
    rhs_c = complex(np.dot(r.w, integrand))
    if F.hermitian:
        rhs_c = rhs_c.real
    res = abs(lhs_c - rhs_c)
    bound = float(r.integrate(tail))
    return ItoResidual("pw", float(np.real(lhs_c)), {"eigen": float(res)}, float(abs(rhs_c)),
                       {"rhs": float(np.real(rhs_c)), "kmax": int(kmax)}, bound)


# -- the finite-interval process Z --------------------------------------------------------

def _z_inner(h, xi, s, n: int = 48):
    """G(s) = ∫_0^s (s/x)^{H/2} (s-x)^{H/2-1} ξ(x) dx = s^{H/2} ∫_0^1 y^{-H/2}(1-y)^{H/2-1} ξ(sy) dy."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    H = h.H
    ref = gauss_jacobi(n, 0.0, 1.0, -H / 2, H / 2 - 1)
    vals = xi(np.multiply.outer(s, ref.x)) @ ref.w
    return s ** (H / 2) * vals


def s_Zdot(t: float, xi, h) -> float:
    """c (∫_0^t ξ(x)(t/x)^{H/2}(t-x)^{H/2-1} dx)²."""
    h = _as_hurst(h)
    if t <= 0 or _is_zero(xi):
        return 0.0
    return float(h.c * _z_inner(h, xi, t)[0] ** 2)


def s_Z(t: float, xi, h, step: float = 1.0 / 16) -> float:
    """c ∫_0^t G(s)² ds."""
    h = _as_hurst(h)
    if t <= 0 or _is_zero(xi):
        return 0.0
    r = tanh_sinh(0.0, t, step)
    return float(h.c * r.integrate(_z_inner(h, xi, r.x) ** 2))


@dataclass(frozen=True)
class ChaosIntegrand:
    """φ_t = g(t) (order 0) or I_1(h(·) g(t)) (order 1) for the Skorohod check."""
    order: int
    time_factor: Callable = field(default=lambda t: np.ones_like(np.asarray(t, dtype=float)))
    space: SmoothTestFunction | None = None

    def s_value(self, t, xi):
        """E^{μ_ξ}[φ_t] = g(t) or g(t)<h, ξ>."""
        g = self.time_factor(np.asarray(t, dtype=float))
        if self.order == 0:
            return g
        if self.order == 1:
            return g * self.space.inner(xi)
        raise DomainError("only chaos orders 0 and 1 are supported")


def _skorohod_triple(h, phi: ChaosIntegrand, T: float, xi, step: float) -> float:
    """c ∫∫ ξ(s_1)ξ(s_2) ∫_{max}^T S(φ_u) (u/s_1)^{H/2}(u-s_1)^β (u/s_2)^{H/2}(u-s_2)^β du ds_1 ds_2.

    Coordinates: s_2, r = s_2 - s_1 ∈ (0, s_2), v = u - s_2 ∈ (0, T - s_2); the
    s_1 > s_2 half is the mirror image.
    """
    H = h.H
    beta = H / 2 - 1
    outer = tanh_sinh(0.0, T, step)
    ref = tanh_sinh(0.0, 1.0, step)
    total = 0.0
    for s2, w2 in zip(outer.x, outer.w):
        r = s2 * ref.dl
        wr = s2 * ref.w
        span = T - s2
        v = span * ref.dl
        wv = span * ref.w
        R, V = np.meshgrid(r, v, indexing="ij")
        s1 = s2 - R
        u = s2 + V
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            core = ((u * u / (s1 * s2)) ** (H / 2) * (V + R) ** beta * V ** beta
                    * phi.s_value(u, xi))
        core = np.where(np.isfinite(core), core, 0.0)
        inner = wr @ (xi(s2 - r) * (core @ wv))
        total += w2 * float(xi(s2)) * float(inner)
    return float(2.0 * h.c * total)


def skorohod_equality_check(phi: ChaosIntegrand, T: float, xi, h, step: float = 1.0 / 16) -> dict:
    """|S(δ² side)(ξ) - S(Wick side)(ξ)| for order-0/1 integrands on [0, T]."""
    h = _as_hurst(h)
    if phi.order not in (0, 1):
        raise DomainError("only chaos orders 0 and 1 are supported")
    if T <= 0:
        raise DomainError("T must be positive")
    if _is_zero(xi):
        return {"skorohod": 0.0, "wick": 0.0, "residual": 0.0}
    r = tanh_sinh(0.0, T, step)
    wick = float(h.c * r.integrate(phi.s_value(r.x, xi) * _z_inner(h, xi, r.x) ** 2))
    skor = _skorohod_triple(h, phi, T, xi, step)
    return {"skorohod": skor, "wick": wick, "residual": abs(skor - wick)}
