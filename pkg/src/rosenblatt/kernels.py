"""The Rosenblatt kernel f_t, chained kernels K_t^k, and the operator T_t.

Notation used throughout: β = H/2 - 1 and k(u) = u_+^β / Γ(H/2), so that
f_t(x1, x2) = d ∫_0^t k(s - x1) k(s - x2) ds and ∫ k(s - x) ξ(x) dx equals the
Weyl integral I^{H/2} ξ(s).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .fracint import SmoothTestFunction, weyl_integral
from .numcore import (DomainError, Grid1D, SeedSpec, array_checksum, beta_fn, cell_grid, gauss_jacobi,
                      composite_gauss_legendre, gamma_fn, gauss_legendre, graded_edges, halfline_left,
                      power_tail, tanh_sinh)


@dataclass(frozen=True)
class Hurst:
    H: float
    c: float
    d: float

    @property
    def kappa(self) -> float:
        """√(H(2H-1)/2); equals c·β(1-H, H/2)."""
        return float(np.sqrt(self.H * (2 * self.H - 1) / 2))

    @property
    def gamma_half(self) -> float:
        return gamma_fn(self.H / 2)


@lru_cache(maxsize=256)
def make_hurst(H: float) -> Hurst:
    H = float(H)
    if not 0.5 < H < 1.0:
        raise DomainError("H must lie in (1/2, 1)")
    c = np.sqrt(H * (2 * H - 1) / 2) / beta_fn(1 - H, H / 2)
    return Hurst(H, float(c), float(c * gamma_fn(H / 2) ** 2))


def _as_hurst(h) -> Hurst:
    return h if isinstance(h, Hurst) else make_hurst(h)


# -- f_t --------------------------------------------------------------------

def f_kernel(h, t: float, x1, x2, method: str = "closed"):
    """f_t(x1, x2); +inf on the diagonal inside [0, t).

    ``closed`` uses the incomplete beta function: with δ = |x1 - x2| and
    b = max(x1, x2), ∫_0^V v^β (v+δ)^β dv = δ^(H-1) B(H/2, 1-H) I_{V/(V+δ)}(H/2, 1-H).
    ``quadrature`` integrates in s with a tanh-sinh rule (validation route).
    """
    h = _as_hurst(h)
    if t <= 0:
        raise DomainError("t must be positive")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if method == "quadrature":
        return _f_quadrature(h, t, x1, x2)
    b = np.maximum(x1, x2)
    out = _f_from_gap(h, t, b, b - np.minimum(x1, x2))
    return float(out) if out.ndim == 0 else out


def _f_from_gap(h: Hurst, t: float, b, delta) -> np.ndarray:
    """f_t at the pair (b - δ, b); δ is passed separately so that tiny gaps survive rounding."""
    H = h.H
    b, delta = np.broadcast_arrays(np.asarray(b, float), np.asarray(delta, float))
    lower = np.maximum(b, 0.0)
    out = np.zeros(b.shape)
    live = b < t
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = live & (delta == 0)
        if np.any(diag):
            x = b[diag]
            m = lower[diag]
            out[diag] = h.c * ((t - x) ** (H - 1) - (m - x) ** (H - 1)) / (H - 1)
        off = live & (delta > 0)
        if np.any(off):
            dd = delta[off]
            v1 = t - b[off]
            v0 = lower[off] - b[off]
            # I(τ1) - I(τ0) written through the complementary argument δ/(V+δ)
            q1 = special.betainc(1 - H, H / 2, dd / (v1 + dd))
            q0 = special.betainc(1 - H, H / 2, dd / (v0 + dd))
            diff = q0 - q1
            # far from the diagonal both q's approach 1; switch to the complement
            far = dd > v0
            if np.any(far):
                diff[far] = (special.betainc(H / 2, 1 - H, v1[far] / (v1[far] + dd[far]))
                             - special.betainc(H / 2, 1 - H, v0[far] / (v0[far] + dd[far])))
            out[off] = h.kappa * dd ** (H - 1) * diff
        # both points well left of 0: the s-integrand is analytic on a wide
        # ellipse around [0, t], while the beta difference would cancel
        remote = b <= -t
        if np.any(remote):
            ref = gauss_legendre(20, 0.0, t)
            beta = H / 2 - 1
            bb = b[remote][:, None]
            aa = bb - delta[remote][:, None]
            s = ref.x[None, :]
            out[remote] = h.c * ((s - aa) ** beta * (s - bb) ** beta) @ ref.w
    return out


def _f_quadrature(h: Hurst, t, x1, x2):
    beta = h.H / 2 - 1
    shape = np.broadcast(x1, x2).shape
    a = np.broadcast_to(np.minimum(x1, x2), shape).ravel()
    b = np.broadcast_to(np.maximum(x1, x2), shape).ravel()
    out = np.zeros(a.size)
    for i in range(a.size):
        if b[i] >= t:
            continue
        m = max(b[i], 0.0)
        r = tanh_sinh(m, t, h=1.0 / 32)
        sb = (m - b[i]) + r.dl
        sa = (m - a[i]) + r.dl
        with np.errstate(divide="ignore"):
            out[i] = r.integrate(sa ** beta * sb ** beta)
    out = h.c * out
    return float(out[0]) if shape == () else out.reshape(shape)


def kernel_l2_norm_sq(h, t: float, step: float = 1.0 / 32, n_tail: int = 12) -> float:
    """‖f_t‖² by a two-dimensional quadrature over ℝ².

    By symmetry ‖f_t‖² = 2 ∫_{x2<t} ∫_{r>0} f_t(x2 - r, x2)² dr dx2.  For each x2
    the gap r is split at v = t - x2 and 4v; beyond 4v the integrand decays like
    r^(H-2) and is handled by a power-tail substitution.  The outer integral has a
    |x2|^(2H-3) tail below -t, treated the same way.
    """
    h = _as_hurst(h)
    H = h.H
    ts = tanh_sinh(0.0, 1.0, h=step)
    mid = gauss_legendre(24, 1.0, 4.0)
    tail = power_tail(4.0, 1.0 - H, n=n_tail)
    ref_x = np.concatenate([ts.dl, mid.x, tail.x])
    ref_w = np.concatenate([ts.w, mid.w, tail.w])

    def inner(x2):
        v = (t - x2)[:, None]
        vals = _f_from_gap(h, t, x2[:, None], v * ref_x[None, :])
        return (vals ** 2 * v) @ ref_w

    right = tanh_sinh(0.0, t, h=step)
    left = tanh_sinh(-t, 0.0, h=step)
    far = power_tail(t, 2.0 - 2.0 * H, n=n_tail)
    total = right.integrate(inner(right.dl)) + left.integrate(inner(-left.dr)) + far.integrate(inner(-far.x))
    return 2.0 * float(total)


# -- chained kernels ---------------------------------------------------------

def K_chain(h, k: int, t: float, s, r, method: str = "auto", n_mc: int = 200_000,
            seed: SeedSpec | None = None):
    """K_t^k(s, r).

    k = 0: |s - r|^(H-1).  k = 1: singular quadrature over [0, t] split at s and
    r.  k = 2: nested quadrature.  Any k with method='montecarlo' returns
    (value, standard error) from uniform sampling of the chain.
    """
    h = _as_hurst(h)
    if k < 0:
        raise DomainError("k must be >= 0")
    s = np.asarray(s, dtype=float)
    r = np.asarray(r, dtype=float)
    g = h.H - 1
    if method == "montecarlo":
        return _K_mc(h, k, t, float(s), float(r), n_mc, seed or SeedSpec(0, 7))
    if k == 0:
        if np.any(s == r):
            raise DomainError("K^0 is singular on the diagonal")
        out = np.abs(s - r) ** g
        return float(out) if out.ndim == 0 else out
    if k == 1:
        return _K1(h, t, s, r)
    if k == 2:
        return _K2(h, t, s, r)
    raise DomainError("quadrature supports k <= 2; use method='montecarlo'")


def _K1(h: Hurst, t, s, r, step: float = 1.0 / 16):
    g = h.H - 1
    shape = np.broadcast(s, r).shape
    lo = np.broadcast_to(np.minimum(s, r), shape).ravel()
    hi = np.broadcast_to(np.maximum(s, r), shape).ravel()
    gap = hi - lo
    ref = tanh_sinh(0.0, 1.0, h=step)
    out = np.zeros(lo.size)
    # [0, lo]: (lo-u)^g (hi-u)^g with dist = lo - u
    L = lo[:, None]
    dist = L * ref.dr[None, :]
    w = L * ref.w[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        out += np.sum(np.where(dist > 0, w * dist ** g * (dist + gap[:, None]) ** g, 0.0), axis=1)
        # [hi, t]: (u-lo)^g (u-hi)^g with dist = u - hi
        R = (t - hi)[:, None]
        dist = R * ref.dl[None, :]
        w = R * ref.w[None, :]
        out += np.sum(np.where(dist > 0, w * dist ** g * (dist + gap[:, None]) ** g, 0.0), axis=1)
    # [lo, hi]: exact Beta integral
    out += beta_fn(h.H, h.H) * gap ** (2 * h.H - 1)
    return float(out[0]) if shape == () else out.reshape(shape)


def _K2(h: Hurst, t, s, r, step: float = 1.0 / 16):
    g = h.H - 1
    shape = np.broadcast(s, r).shape
    ss = np.broadcast_to(s, shape).ravel()
    rr = np.broadcast_to(r, shape).ravel()
    out = np.zeros(ss.size)
    for i in range(ss.size):
        cuts = np.unique([0.0, ss[i], rr[i], t])
        acc = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            q = tanh_sinh(a, b, h=step)
            # exact distance to s when s sits at an end of the piece
            if ss[i] == a:
                dist = q.dl
            elif ss[i] == b:
                dist = q.dr
            else:
                dist = np.abs(q.x - ss[i])
            acc += q.integrate(dist ** g * _K1(h, t, q.x, np.full(q.x.shape, rr[i]), step))
        out[i] = acc
    return float(out[0]) if shape == () else out.reshape(shape)


def _K_mc(h: Hurst, k: int, t: float, s: float, r: float, n: int, seed: SeedSpec):
    g = h.H - 1
    if k == 0:
        return abs(s - r) ** g, 0.0
    rng = seed.generator(k)
    # stratify the first link of the chain; antithetic pairs u <-> t - u
    u = rng.random((n // 2, k))
    u[:, 0] = (np.arange(n // 2) + u[:, 0]) / (n // 2)
    vals = []
    for uu in (t * u, t - t * u):
        chain = np.column_stack([np.full(len(uu), s), uu, np.full(len(uu), r)])
        vals.append(t ** k * np.prod(np.abs(np.diff(chain, axis=1)) ** g, axis=1))
    pair = 0.5 * (vals[0] + vals[1])
    return float(pair.mean()), float(pair.std(ddof=1) / np.sqrt(pair.size))


# -- grids of kernel cell averages -------------------------------------------

def default_edges(t_max: float = 1.0, n_pos: int = 240, n_neg: int = 160, far: float = 1e30,
                  grade: float = 1.5) -> np.ndarray:
    """Cell edges: graded cells on [0, t_max], geometric cells on [-far, 0]."""
    pos = graded_edges(n_pos, 0.0, t_max, grade)
    h0 = pos[1] - pos[0]
    neg = -np.geomspace(far, h0, n_neg)
    return np.concatenate([neg, pos])


@dataclass(frozen=True)
class KernelGrid:
    """Symmetric kernel on a cell partition.

    ``values[i, j]`` is the average of the kernel over cell i × cell j, so the
    grid sum Σ_ij w_i w_j values_ij a_i b_j with cell averages a, b is exact for
    piecewise-constant functions.
    """

    grid: Grid1D
    values: np.ndarray
    t: float
    H: float

    def __post_init__(self):
        if self.values.shape != (self.grid.size, self.grid.size):
            raise DomainError("kernel values do not match the grid")
        if not np.allclose(self.values, self.values.T, rtol=1e-12, atol=1e-300):
            raise DomainError("kernel values are not symmetric")

    def quadratic_form(self, a, b=None) -> float:
        b = a if b is None else b
        w = self.grid.weights
        return float((w * a) @ self.values @ (w * b))

    def weighted_trace(self) -> float:
        return float(np.dot(self.grid.weights, np.diag(self.values)))

    def to_json(self) -> str:
        return json.dumps({"H": self.H, "t": self.t, "grid": self.grid.to_dict(),
                           "values": self.values.ravel().tolist()})

    @classmethod
    def from_json(cls, text: str) -> "KernelGrid":
        d = json.loads(text)
        grid = Grid1D.from_dict(d["grid"])
        vals = np.asarray(d["values"], float).reshape(grid.size, grid.size)
        return cls(grid, vals, float(d["t"]), float(d["H"]))


def cell_weyl_matrix(h: Hurst, edges: np.ndarray, s: np.ndarray) -> np.ndarray:
    """M[i, q] = ∫_{cell i} k(s_q - x) dx (exact antiderivative)."""
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    p = h.H / 2
    with np.errstate(invalid="ignore"):
        up = np.where(s[None, :] > a, np.abs(s[None, :] - a), 0.0) ** p
        dn = np.where(s[None, :] > b, np.abs(s[None, :] - b), 0.0) ** p
    return (up - dn) / gamma_fn(p + 1)


def s_rule(h: Hurst, edges: np.ndarray, t: float, n: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Rule on [0, t] with breakpoints at every cell edge; each piece graded at its left end."""
    cuts = np.unique(np.concatenate([[0.0, t], edges[(edges > 0) & (edges < t)]]))
    q = 2.0 / h.H
    ref = gauss_legendre(n, 0.0, 1.0)
    v = ref.x ** q
    jac = q * ref.x ** (q - 1) * ref.w
    L = np.diff(cuts)[:, None]
    s = cuts[:-1, None] + L * v[None, :]
    w = L * jac[None, :]
    return s.ravel(), w.ravel()


def kernel_grid(h, t: float, edges: np.ndarray | None = None) -> KernelGrid:
    """Cell averages of f_t via f_t = d ∫_0^t k_s ⊗ k_s ds."""
    h = _as_hurst(h)
    edges = default_edges(max(t, 1.0)) if edges is None else np.asarray(edges, float)
    grid = cell_grid(edges)
    s, w = s_rule(h, edges, t)
    M = cell_weyl_matrix(h, edges, s) / grid.weights[:, None]
    vals = h.d * (M * w[None, :]) @ M.T
    vals = 0.5 * (vals + vals.T)
    return KernelGrid(grid, vals, t, h.H)


def cell_averages(xi, grid: Grid1D, n: int = 6) -> np.ndarray:
    """Average of ξ over each cell of a cell grid."""
    if grid.edges is None:
        raise DomainError("cell averages need a grid built from edges")
    r = composite_gauss_legendre(n, grid.edges)
    vals = np.asarray(xi(r.x)) * r.w
    return vals.reshape(grid.size, n).sum(axis=1) / grid.weights


def contract1(A: KernelGrid, B: KernelGrid) -> KernelGrid:
    """(A ⊗₁ B)(x, z) = Σ_j w_j A(x, y_j) B(y_j, z)."""
    if A.grid.size != B.grid.size or not np.array_equal(A.grid.nodes, B.grid.nodes):
        raise DomainError("kernels live on different grids")
    C = (A.values * A.grid.weights[None, :]) @ B.values
    C = 0.5 * (C + C.T)
    return KernelGrid(A.grid, C, A.t, A.H)


# -- the operator T_t and quadratic forms ------------------------------------

def weyl_on(h: Hurst, xi: SmoothTestFunction, s) -> np.ndarray:
    return weyl_integral(xi, h.H / 2, np.asarray(s, dtype=float))


def apply_T(h, t: float, xi, y, step: float = 1.0 / 16) -> np.ndarray:
    """(T_t ξ)(y) = d ∫_{max(y,0)}^t k(s - y) I^{H/2}ξ(s) ds at the points y."""
    h = _as_hurst(h)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if isinstance(xi, SmoothTestFunction) and xi.is_zero:
        return np.zeros_like(y)
    beta = h.H / 2 - 1
    ref = tanh_sinh(0.0, 1.0, h=step)
    out = np.zeros_like(y)
    live = y < t
    yy = y[live]
    m = np.maximum(yy, 0.0)
    L = (t - m)[:, None]
    s = m[:, None] + L * ref.dl[None, :]
    gap = (m - yy)[:, None] + L * ref.dl[None, :]
    Iw = weyl_on(h, xi, s.ravel()).reshape(s.shape)
    with np.errstate(divide="ignore"):
        out[live] = np.sum(L * ref.w[None, :] * gap ** beta * Iw, axis=1)
    return h.d * out / h.gamma_half


def T_norm_sq(h, t: float, xi, step: float = 1.0 / 16) -> float:
    """‖T_t ξ‖² by quadrature of (T_t ξ)(y)² over y ∈ (-∞, t)."""
    h = _as_hurst(h)
    left = halfline_left(0.0, h=step)
    mid = tanh_sinh(0.0, t, h=step)
    y = np.concatenate([left.x, mid.x])
    w = np.concatenate([left.w, mid.w])
    v = apply_T(h, t, xi, y, step)
    return float(w @ v ** 2)


def inner_f_xi2(h, t: float, xi: SmoothTestFunction, route: str = "weyl", n: int = 24) -> float:
    """<f_t, ξ⊗ξ>.  ``weyl``: d ∫_0^t (I^{H/2}ξ)²; ``grid``: cell-average quadratic form."""
    h = _as_hurst(h)
    if xi.is_zero or t == 0:
        return 0.0
    if route == "weyl":
        r = composite_gauss_legendre(n, np.linspace(0.0, t, 9))
        return h.d * r.integrate(weyl_on(h, xi, r.x) ** 2)
    if route == "grid":
        lo, hi = xi.support()
        edges = default_edges(max(t, 1.0))
        extra = np.linspace(max(lo, -50.0), 0.0, 200)
        edges = np.unique(np.concatenate([edges, extra]))
        kg = kernel_grid(h, t, edges)
        a = cell_averages(xi, kg.grid)
        return kg.quadratic_form(a)
    raise DomainError(f"unknown route {route!r}")


# -- chained quadratic forms on [0, L] -----------------------------------------

def k0_apply(h, f, u, L: float, n: int = 32) -> np.ndarray:
    """(K^0 f)(u) = ∫_0^L |u - v|^(H-1) f(v) dv for smooth f, at the points u.

    The range is split at u and each side carries the weight ρ^(H-1) of the
    gap ρ = |u - v|, absorbed by a Gauss-Jacobi rule.
    """
    h = _as_hurst(h)
    g = h.H - 1
    u = np.atleast_1d(np.asarray(u, dtype=float))
    ref = gauss_jacobi(n, 0.0, 1.0, g, 0.0)
    out = np.zeros(u.shape)
    for span, sign in ((u, -1.0), (L - u, 1.0)):
        S = span[..., None]
        pts = u[..., None] + sign * S * ref.x
        out += np.sum(S ** (g + 1) * ref.w * f(pts), axis=-1)
    return out


def chain_form(h, a, b, m: int, L: float = 1.0, step: float = 1.0 / 8) -> float:
    """∫_0^L ∫_0^L a(u) b(v) K_L^(m-1)(u, v) du dv for smooth callables a, b.

    K^(m-1) chains m factors |·|^(H-1).  m = 1 and m = 2 reduce to one outer
    integral of K^0 a, K^0 b; m = 3 pairs K^0 a and K^0 b against |u - v|^(H-1)
    on the two triangles of the square.  Outer rules are tanh-sinh, which copes
    with the |u|^H-type endpoint behaviour of K^0 a.
    """
    h = _as_hurst(h)
    if m == 1:
        r = tanh_sinh(0.0, L, step / 2)
        return r.integrate(a(r.x) * k0_apply(h, b, r.x, L))
    if m == 2:
        r = tanh_sinh(0.0, L, step / 2)
        return r.integrate(k0_apply(h, a, r.x, L) * k0_apply(h, b, r.x, L))
    if m == 3:
        g = h.H - 1
        gr = tanh_sinh(0.0, L, step)
        ur = tanh_sinh(0.0, 1.0, step)
        rho = gr.dl
        span = (L - rho)[:, None]
        U = span * ur.dl[None, :]
        W = span * ur.w[None, :]
        V = U + rho[:, None]
        Au, Bv = k0_apply(h, a, U, L), k0_apply(h, b, V, L)
        Av, Bu = k0_apply(h, a, V, L), k0_apply(h, b, U, L)
        vals = np.sum(W * (Au * Bv + Av * Bu), axis=1) * rho ** g
        return float(gr.w @ vals)
    raise DomainError("chain_form supports m = 1, 2, 3")
