"""Discrete Wiener chaos on a cell grid (orders 0 to 4) and Monte Carlo samplers.

A chaos element is Σ_m I_m(f_m) with f_m stored as a dense symmetric tensor of
cell values; inner products carry the cell weights, so E[I_m(f) I_m(g)] =
m! Σ f g w⊗...⊗w.  Functionals y act on the last argument through a weight
vector ℓ (ℓ(g) = Σ ℓ_i g_i); for an L² function y on the grid ℓ = y·w.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import comb, factorial
from pathlib import Path

import numpy as np
from scipy import special

from .fracint import SmoothTestFunction, weyl_integral
from .kernels import _as_hurst, cell_averages, cell_weyl_matrix, default_edges, kernel_grid, s_rule
from .numcore import (DomainError, Grid1D, SeedSpec, beta_fn, cell_grid, composite_gauss_legendre,
                      gamma_fn, gauss_legendre, graded_edges, tanh_sinh)
from .spectral import Spectrum

MAX_ORDER = 4
PANEL_NODES = 4
DENSE_LIMIT = 60_000_000  # entries allowed in one dense tensor


# -- tensors ------------------------------------------------------------------------

def symmetrize(T: np.ndarray) -> np.ndarray:
    if T.ndim < 2:
        return T
    perms = list(itertools.permutations(range(T.ndim)))
    return sum(np.transpose(T, p) for p in perms) / len(perms)


def _weighted(T: np.ndarray, w: np.ndarray) -> np.ndarray:
    out = T
    for ax in range(T.ndim):
        shape = [1] * T.ndim
        shape[ax] = w.size
        out = out * w.reshape(shape)
    return out


def _contract(f: np.ndarray, g: np.ndarray, r: int, w: np.ndarray) -> np.ndarray:
    """f ⊗_r g: the last r arguments of f paired with the last r of g."""
    if r == 0:
        return np.multiply.outer(f, g)
    fw = f
    for ax in range(f.ndim - r, f.ndim):
        shape = [1] * f.ndim
        shape[ax] = w.size
        fw = fw * w.reshape(shape)
    return np.tensordot(fw, g, axes=(list(range(f.ndim - r, f.ndim)), list(range(g.ndim - r, g.ndim))))


def _check_size(n: int, order: int):
    if n ** order > DENSE_LIMIT:
        raise DomainError(f"order-{order} tensor on {n} nodes exceeds the dense memory guard")


@dataclass
class ChaosVector:
    """Σ_{m ≤ 4} I_m(f_m) on a grid; ``parts[m]`` holds f_m (0-d array for the constant)."""
    grid: Grid1D
    parts: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.grid.size
        clean = {}
        for m, f in self.parts.items():
            m = int(m)
            if m > MAX_ORDER:
                raise DomainError(f"chaos order {m} exceeds the cap {MAX_ORDER}")
            f = np.asarray(f, dtype=float)
            if f.shape != (n,) * m:
                raise DomainError(f"order-{m} kernel has shape {f.shape}")
            if m >= 2:
                scale = max(float(np.max(np.abs(f))), 1e-300)
                if np.max(np.abs(f - symmetrize(f))) > 1e-12 * scale:
                    raise DomainError(f"order-{m} kernel is not symmetric")
            clean[m] = f
        self.parts = clean

    # construction
    @classmethod
    def constant(cls, grid: Grid1D, c: float) -> "ChaosVector":
        return cls(grid, {0: np.asarray(float(c))})

    @classmethod
    def first(cls, grid: Grid1D, g) -> "ChaosVector":
        return cls(grid, {1: np.asarray(g, float)})

    @classmethod
    def second(cls, grid: Grid1D, F) -> "ChaosVector":
        return cls(grid, {2: np.asarray(F, float)})

    @classmethod
    def rosenblatt(cls, h, t: float, edges=None) -> "ChaosVector":
        """I_2(f_t) with the cell averages of f_t."""
        kg = kernel_grid(h, t, edges)
        return cls(kg.grid, {2: kg.values})

    @property
    def c0(self) -> float:
        return float(self.parts.get(0, 0.0))

    def kernel(self, m: int) -> np.ndarray:
        n = self.grid.size
        return self.parts.get(m, np.zeros((n,) * m))

    @property
    def orders(self) -> list:
        return sorted(m for m, f in self.parts.items() if np.any(f != 0))

    def _same_grid(self, other: "ChaosVector"):
        if self.grid.size != other.grid.size or not np.array_equal(self.grid.weights, other.grid.weights):
            raise DomainError("chaos elements live on different grids")

    def __add__(self, other: "ChaosVector") -> "ChaosVector":
        self._same_grid(other)
        parts = dict(self.parts)
        for m, f in other.parts.items():
            parts[m] = parts[m] + f if m in parts else f
        return ChaosVector(self.grid, parts)

    def __sub__(self, other: "ChaosVector") -> "ChaosVector":
        return self + other.scaled(-1.0)

    def scaled(self, s: float) -> "ChaosVector":
        return ChaosVector(self.grid, {m: s * f for m, f in self.parts.items()})

    def expectation(self) -> float:
        return self.c0

    def inner(self, other: "ChaosVector") -> float:
        """E[p q] by chaos orthogonality."""
        self._same_grid(other)
        w = self.grid.weights
        total = 0.0
        for m, f in self.parts.items():
            if m in other.parts:
                total += factorial(m) * float(np.sum(_weighted(f, w) * other.parts[m]))
        return total

    def variance(self) -> float:
        return self.inner(self) - self.c0 ** 2


def _xi_vector(grid: Grid1D, xi) -> np.ndarray:
    if isinstance(xi, SmoothTestFunction):
        if grid.edges is not None:
            return cell_averages(xi, grid)
        return xi(grid.nodes)
    v = np.asarray(xi, dtype=float)
    if v.shape != (grid.size,):
        raise DomainError("ξ must be a test function or a grid vector")
    return v


def multiply(p: ChaosVector, q: ChaosVector) -> ChaosVector:
    """Pointwise product by I_a(f) I_b(g) = Σ_r r! C(a,r) C(b,r) I_{a+b-2r}(f ⊗_r g)."""
    p._same_grid(q)
    w = p.grid.weights
    out: dict = {}
    for a, f in p.parts.items():
        for b, g in q.parts.items():
            for r in range(min(a, b) + 1):
                order = a + b - 2 * r
                coef = factorial(r) * comb(a, r) * comb(b, r)
                if order > MAX_ORDER:
                    if np.any(f != 0) and np.any(g != 0):
                        raise DomainError(f"product reaches chaos order {order} > {MAX_ORDER}")
                    continue
                _check_size(p.grid.size, order)
                term = coef * symmetrize(_contract(f, g, r, w))
                out[order] = out[order] + term if order in out else term
    return ChaosVector(p.grid, out)


def wick(p: ChaosVector, q: ChaosVector) -> ChaosVector:
    """Wick product: only the r = 0 term of the multiplication formula."""
    p._same_grid(q)
    out: dict = {}
    for a, f in p.parts.items():
        for b, g in q.parts.items():
            order = a + b
            if order > MAX_ORDER:
                if np.any(f != 0) and np.any(g != 0):
                    raise DomainError(f"Wick product reaches chaos order {order} > {MAX_ORDER}")
                continue
            _check_size(p.grid.size, order)
            term = symmetrize(np.multiply.outer(f, g))
            out[order] = out[order] + term if order in out else term
    return ChaosVector(p.grid, out)


def translate(p: ChaosVector, xi) -> ChaosVector:
    """p(ω + ξ) for p of order ≤ 2."""
    if any(m > 2 for m in p.orders):
        raise DomainError("translation is implemented for chaos orders <= 2")
    v = _xi_vector(p.grid, xi)
    w = p.grid.weights
    vw = v * w
    parts = {m: f.copy() for m, f in p.parts.items()}
    c = p.c0
    if 1 in p.parts:
        c += float(p.parts[1] @ vw)
    if 2 in p.parts:
        F = p.parts[2]
        Fv = F @ vw
        parts[1] = parts.get(1, np.zeros(p.grid.size)) + 2.0 * Fv
        c += float(vw @ Fv)
    parts[0] = np.asarray(c)
    return ChaosVector(p.grid, parts)


def s_transform_of(p: ChaosVector, xi) -> float:
    """S(p)(ξ) = Σ_m <f_m, ξ^{⊗m}>."""
    v = _xi_vector(p.grid, xi) * p.grid.weights
    total = 0.0
    for m, f in p.parts.items():
        x = f
        for _ in range(m):
            x = x @ v
        total += float(x)
    return total


@dataclass(frozen=True)
class GridFunctional:
    """y acting on the grid by ℓ(g) = Σ ℓ_i g_i."""
    coef: np.ndarray

    @classmethod
    def from_function(cls, grid: Grid1D, y) -> "GridFunctional":
        return cls(_xi_vector(grid, y) * grid.weights)

    @classmethod
    def weyl_point(cls, h, grid: Grid1D, s: float) -> "GridFunctional":
        """√d · δ_s ∘ I_+^{H/2}: g ↦ √d ∫ k(s - x) g(x) dx with exact cell integrals of k."""
        h = _as_hurst(h)
        if grid.edges is None:
            raise DomainError("the point functional needs a grid built from edges")
        col = cell_weyl_matrix(h, grid.edges, np.array([float(s)]))[:, 0]
        return cls(np.sqrt(h.d) * col)

    def element(self, grid: Grid1D) -> np.ndarray:
        """The grid function representing y (ℓ / w)."""
        return self.coef / grid.weights

    def __call__(self, g) -> float:
        return float(np.dot(self.coef, g))


def panel_weyl_weights(h, panel_edges: np.ndarray, s, p: int = PANEL_NODES) -> np.ndarray:
    """W[i, q] with Σ_i W[i, q] g(x_i) = ∫ k(s_q - x) g_p(x) dx, g_p the panelwise interpolant of g.

    x_i are the Gauss-Legendre nodes of each panel.  On a panel [a, a + Δ] with
    σ = (s - a)/Δ the moments ∫_0^min(1,σ) (σ - y)^β y^j dy are
    σ^(β+j+1) B(j+1, β+1) I_min(1,1/σ)(j+1, β+1).
    """
    h = _as_hurst(h)
    beta = h.H / 2 - 1
    s = np.atleast_1d(np.asarray(s, dtype=float))
    y = gauss_legendre(p, 0.0, 1.0).x
    C = np.linalg.inv(np.vander(y, p, increasing=True))   # Lagrange coefficients, by column
    j = np.arange(p)
    out = []
    for a, b in zip(panel_edges[:-1], panel_edges[1:]):
        dx = b - a
        sig = (s - a) / dx
        live = sig > 0
        mom = np.zeros((p, s.size))
        sl = sig[live][None, :]
        x = np.minimum(1.0, 1.0 / sl)
        jj = j[:, None]
        mom[:, live] = sl ** (beta + jj + 1) * special.beta(jj + 1, beta + 1) * special.betainc(jj + 1, beta + 1, x)
        out.append(dx ** (beta + 1) / gamma_fn(h.H / 2) * (C.T @ mom))
    return np.concatenate(out, axis=0)


def D_op(p: ChaosVector, y: GridFunctional) -> ChaosVector:
    """D_y I_m(f) = m I_{m-1}(y applied to the last argument of f)."""
    out = {}
    for m, f in p.parts.items():
        if m == 0:
            continue
        out[m - 1] = m * (f @ y.coef)
    return ChaosVector(p.grid, out)


def Dstar_op(p: ChaosVector, y: GridFunctional) -> ChaosVector:
    """D*_y I_m(f) = I_{m+1}(sym(y ⊗ f)); S(D*_y p)(ξ) = <y, ξ> S(p)(ξ)."""
    e = y.element(p.grid)
    out = {}
    for m, f in p.parts.items():
        if m + 1 > MAX_ORDER:
            if np.any(f != 0):
                raise DomainError(f"D* raises the order to {m + 1} > {MAX_ORDER}")
            continue
        _check_size(p.grid.size, m + 1)
        out[m + 1] = symmetrize(np.multiply.outer(e, f))
    return ChaosVector(p.grid, out)


# -- integrands and the variance of Wick integrals ----------------------------------------

@dataclass(frozen=True)
class IntegrandSpec:
    """φ_t = I_m(f_m(·, t)) with f_m(x_1..x_m, t) = Σ_j q_j(t) g_j(x_1)···g_j(x_m).

    ``atoms`` holds (q_j polynomial coefficients in increasing degree, g_j);
    for m = 0 the g_j are ignored.  JSON schema::

        {"order": 1, "interval": [a, b], "nodes": 120,
         "atoms": [{"time_poly": [1.0, 0.5], "space": [[coef, center, width], ...]}]}
    """
    order: int
    a: float
    b: float
    atoms: tuple
    nodes: int = 120

    def __post_init__(self):
        if self.order not in (0, 1, 2):
            raise DomainError("integrand chaos order must be 0, 1 or 2")
        if not 0 <= self.a < self.b:
            raise DomainError("need 0 <= a < b")

    def q(self, j: int, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, float), self.atoms[j][0])

    @property
    def is_zero(self) -> bool:
        return all(not np.any(np.asarray(c, float)) for c, _ in self.atoms) or not self.atoms or (
            self.order > 0 and all(g.is_zero for _, g in self.atoms))

    def support(self) -> tuple[float, float]:
        lo, hi = np.inf, -np.inf
        for _, g in self.atoms:
            if not g.is_zero:
                l, r = g.support(8.0)
                lo, hi = min(lo, l), max(hi, r)
        return lo, hi

    def grid(self) -> tuple[Grid1D, np.ndarray]:
        """Composite Gauss-Legendre grid (4 nodes per panel) over the atoms, with its panel edges."""
        lo, hi = self.support()
        panels = max(1, self.nodes // PANEL_NODES)
        pe = np.linspace(lo, hi, panels + 1)
        r = composite_gauss_legendre(PANEL_NODES, pe)
        return Grid1D(r.x, r.w, lo, hi), pe

    def to_dict(self) -> dict:
        return {"order": self.order, "interval": [self.a, self.b], "nodes": self.nodes,
                "atoms": [{"time_poly": list(map(float, c)), "space": g.terms()} for c, g in self.atoms]}

    @classmethod
    def from_dict(cls, d: dict) -> "IntegrandSpec":
        atoms = tuple((tuple(float(x) for x in at["time_poly"]),
                       SmoothTestFunction.from_terms(at.get("space", []))) for at in d["atoms"])
        a, b = d["interval"]
        return cls(int(d["order"]), float(a), float(b), atoms, int(d.get("nodes", 120)))

    @classmethod
    def load(cls, path) -> "IntegrandSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    @classmethod
    def constant(cls, a: float, b: float, value: float = 1.0) -> "IntegrandSpec":
        return cls(0, a, b, (((float(value),), SmoothTestFunction.zero()),))


def _pair_rule(a: float, b: float, step: float):
    """Nodes (t, s) with s > t on the triangle of (a, b)², as gap ρ = s - t and position."""
    L = b - a
    g = tanh_sinh(0.0, L, step)
    u = tanh_sinh(0.0, 1.0, step)
    rho = np.repeat(g.x, u.x.size)
    span = L - rho
    t = a + span * np.tile(u.dl, g.x.size)
    w = np.repeat(g.w, u.x.size) * span * np.tile(u.w, g.x.size)
    return t, t + rho, rho, w


def _triangle(vals, rho, w, gamma):
    """2 × the triangle integral of |t - s|^gamma · vals (vals symmetric in t, s)."""
    return 2.0 * float(np.sum(w * rho ** gamma * vals))


def variance_rhs(phi: IntegrandSpec, h, step: float = 1.0 / 8) -> tuple[float, float, float]:
    """(term1, term2, term3) of the three-term variance of ∫_a^b φ_t ⋄ Ẋ_t dt.

    The E[...] factors come from grid chaos elements: E[φ_t φ_s] by orthogonality,
    D along √d δ_s ∘ I^{H/2} via exact cell integrals of k.
    """
    h = _as_hurst(h)
    H = h.H
    m = phi.order
    if phi.is_zero:
        return 0.0, 0.0, 0.0
    t, s, rho, w = _pair_rule(phi.a, phi.b, step)
    R = len(phi.atoms)
    Q_t = np.array([phi.q(j, t) for j in range(R)])
    Q_s = np.array([phi.q(j, s) for j in range(R)])
    if m == 0:
        e11 = np.sum(Q_t, axis=0) * np.sum(Q_s, axis=0)
        return H * (2 * H - 1) * _triangle(e11, rho, w, 2 * H - 2), 0.0, 0.0
    grid, pe = phi.grid()
    wts = grid.weights
    G = []
    for _, g in phi.atoms:
        v = g(grid.nodes)
        T = v
        for _ in range(m - 1):
            T = np.multiply.outer(T, v)
        G.append(T)
    el_s = np.sqrt(h.d) * panel_weyl_weights(h, pe, s)  # ℓ at the s nodes, by column
    el_t = np.sqrt(h.d) * panel_weyl_weights(h, pe, t)
    e11 = np.zeros_like(t)
    e22 = np.zeros_like(t)
    e33 = np.zeros_like(t)
    for j in range(R):
        for jj in range(R):
            qq = Q_t[j] * Q_s[jj]
            e11 += factorial(m) * float(np.sum(_weighted(G[j], wts) * G[jj])) * qq
            # D_{y_s} φ_t = m I_{m-1}(f_t ℓ_s), paired with D_{y_t} φ_s
            A = np.tensordot(G[j], el_s, axes=([m - 1], [0]))     # shape n^{m-1} × N
            B = np.tensordot(G[jj], el_t, axes=([m - 1], [0]))
            Aw = A
            for ax in range(m - 1):
                shape = [1] * A.ndim
                shape[ax] = wts.size
                Aw = Aw * wts.reshape(shape)
            inner = np.sum((Aw * B).reshape(-1, t.size), axis=0)
            e22 += m * m * factorial(m - 1) * inner * qq
            if m == 2:
                # D² I_2(f) along ℓ is the scalar 2 ℓᵀ f ℓ
                a2 = np.einsum("in,in->n", A, el_s)
                b2 = np.einsum("in,in->n", B, el_t)
                e33 += 4.0 * a2 * b2 * qq
    term1 = H * (2 * H - 1) * _triangle(e11, rho, w, 2 * H - 2)
    term2 = 4.0 * h.kappa * _triangle(e22, rho, w, H - 1)
    term3 = _triangle(e33, rho, w, 0.0)
    return term1, term2, term3


def variance_bruteforce(phi: IntegrandSpec, h, step: float = 1.0 / 8) -> float:
    """E[(∫ φ_t ⋄ Ẋ_t dt)²] = d² Σ_{σ ∈ S_{m+2}} <G, G∘σ> by enumerating permutations.

    G(x) = Σ_j ∫ q_j(t) k(t-x_1) k(t-x_2) g_j(x_3)···g_j(x_{m+2}) dt.  For each σ
    every argument of G_t is paired with one of G_s and integrated out in closed
    form: k·k gives B(H/2, 1-H)/Γ(H/2)² |t-s|^(H-1), k·g gives I^{H/2}g, g·g gives <g, g'>.
    """
    h = _as_hurst(h)
    H = h.H
    m = phi.order
    if phi.is_zero:
        return 0.0
    t, s, rho, w = _pair_rule(phi.a, phi.b, step)
    kk = beta_fn(H / 2, 1 - H) / gamma_fn(H / 2) ** 2
    R = len(phi.atoms)
    Q_t = np.array([phi.q(j, t) for j in range(R)])
    Q_s = np.array([phi.q(j, s) for j in range(R)])
    gs = [g for _, g in phi.atoms]
    Wt = [weyl_integral(g, H / 2, t) if m else None for g in gs]
    Ws = [weyl_integral(g, H / 2, s) if m else None for g in gs]
    gram = np.array([[gs[i].inner(gs[j]) if m else 0.0 for j in range(R)] for i in range(R)])
    kinds = ["k", "k"] + ["g"] * m
    by_power = {0: np.zeros_like(t), 1: np.zeros_like(t), 2: np.zeros_like(t)}
    for sigma in itertools.permutations(range(m + 2)):
        n_kk = sum(1 for i in range(m + 2) if kinds[i] == "k" and kinds[sigma[i]] == "k")
        for j in range(R):
            for jj in range(R):
                val = Q_t[j] * Q_s[jj]
                for i in range(m + 2):
                    left, right = kinds[i], kinds[sigma[i]]
                    if left == "k" and right == "k":
                        val = val * kk
                    elif left == "k":
                        val = val * Wt[jj]    # k(t - x) against g_jj(x) of G_s
                    elif right == "k":
                        val = val * Ws[j]     # g_j(x) of G_t against k(s - x)
                    else:
                        val = val * gram[j, jj]
                by_power[n_kk] = by_power[n_kk] + val
    total = 0.0
    for n_kk, vals in by_power.items():
        # the power |t-s|^((H-1) n_kk) is carried by the rule; vals hold the rest
        total += _triangle(vals, rho, w, (H - 1) * n_kk)
    return float(h.d ** 2 * total)


# -- samplers -----------------------------------------------------------------------

def simulate_marginal(t: float, h, spec: Spectrum, n_samples: int, seed: SeedSpec | None = None,
                      n_modes: int = 400, block: int = 50_000) -> np.ndarray:
    """Samples of t^H [Σ_{n ≤ N} λ_n (Z_n² - 1) + G] with G Gaussian of variance 2(1/2 - Σ λ_n²).

    The first modes are the trusted eigenvalues, the rest up to ``n_modes`` follow
    the asymptotic law; G carries the variance of everything beyond.
    """
    h = _as_hurst(h)
    seed = seed or SeedSpec(20240601, 11)
    lam = modes_for_sampling(spec, n_modes)
    tail_var = max(2.0 * (0.5 - float(np.sum(lam ** 2))), 0.0)
    out = np.empty(n_samples)
    for b, start in enumerate(range(0, n_samples, block)):
        stop = min(start + block, n_samples)
        rng = seed.generator(b)
        z = rng.standard_normal((stop - start, lam.size))
        g = rng.standard_normal(stop - start)
        out[start:stop] = (z * z - 1.0) @ lam + np.sqrt(tail_var) * g
    return t ** h.H * out


def modes_for_sampling(spec: Spectrum, n_modes: int) -> np.ndarray:
    lam = spec.trusted()
    if n_modes > lam.size:
        lam = np.concatenate([lam, spec.tail_lambdas(np.arange(lam.size + 1, n_modes + 1))])
    return lam[:n_modes]


@dataclass
class PathEnsemble:
    times: np.ndarray
    samples: np.ndarray
    seed: SeedSpec
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples.shape[1] != self.times.size:
            raise DomainError("samples do not match the time grid")
        if not np.all(np.isfinite(self.samples)):
            raise DomainError("non-finite sample values")

    def covariance(self) -> np.ndarray:
        return np.cov(self.samples, rowvar=False, ddof=1)

    def to_csv_rows(self) -> list:
        rows = []
        for p, row in enumerate(self.samples):
            for t, x in zip(self.times, row):
                rows.append((p, float(t), float(x)))
        return rows


def finite_interval_kernel(h, t: float, edges: np.ndarray) -> np.ndarray:
    """Cell averages of c ∫_0^t (s/x_1)^{H/2}(s-x_1)_+^{H/2-1}(s/x_2)^{H/2}(s-x_2)_+^{H/2-1} ds on [0, T]."""
    h = _as_hurst(h)
    H = h.H
    grid = cell_grid(edges)
    s, w = s_rule(h, edges, t)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    S = s[None, :]
    B = beta_fn(1 - H / 2, H / 2)
    up = special.betainc(1 - H / 2, H / 2, np.clip(np.minimum(b, S) / S, 0, 1))
    dn = special.betainc(1 - H / 2, H / 2, np.clip(np.minimum(a, S) / S, 0, 1))
    M = S ** (H / 2) * B * (up - dn) / grid.weights[:, None]
    vals = h.c * (M * w[None, :]) @ M.T
    return 0.5 * (vals + vals.T)


def path_edges(method: str, t_max: float, n_pos: int = 240, n_neg: int = 320, far: float = 1e12,
               grade: float = 1.5) -> np.ndarray:
    if method == "doublesum":
        return default_edges(t_max, n_pos, n_neg, far, grade)
    if method == "finite_interval":
        return graded_edges(n_pos, 0.0, t_max, 2.0, both=False)
    raise DomainError(f"unknown method {method!r}")


def simulate_paths(times, h, n_paths: int, seed: SeedSpec | None = None, method: str = "doublesum",
                   edges: np.ndarray | None = None, diagonal: str = "centered",
                   block: int = 2000) -> PathEnsemble:
    """Joint samples of X at the given times from one set of cell increments ΔB.

    X_t = Σ_{i,j} F_t[i,j] ΔB_i ΔB_j - Σ_i F_t[i,i] Δ_i (``centered``), i.e. the
    double integral of the cell-averaged kernel; ``excluded`` drops i = j.
    ``doublesum`` uses f_t on (-∞, t]; ``finite_interval`` the kernel on [0, T].
    """
    h = _as_hurst(h)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise DomainError("times must be positive and increasing")
    if diagonal not in ("centered", "excluded"):
        raise DomainError("diagonal must be 'centered' or 'excluded'")
    seed = seed or SeedSpec(20240601, 21)
    edges = path_edges(method, float(times[-1])) if edges is None else np.asarray(edges, float)
    grid = cell_grid(edges)
    sw = np.sqrt(grid.weights)
    mats, shifts = [], []
    for t in times:
        F = kernel_grid(h, t, edges).values if method == "doublesum" else finite_interval_kernel(h, t, edges)
        M = sw[:, None] * F * sw[None, :]
        if diagonal == "excluded":
            np.fill_diagonal(M, 0.0)
            shifts.append(0.0)
        else:
            shifts.append(float(np.trace(M)))
        mats.append(M)
    out = np.empty((n_paths, times.size))
    for b, start in enumerate(range(0, n_paths, block)):
        stop = min(start + block, n_paths)
        z = seed.generator(b).standard_normal((stop - start, grid.size))
        for k, M in enumerate(mats):
            out[start:stop, k] = np.einsum("pi,pi->p", z @ M, z) - shifts[k]
    return PathEnsemble(times, out, seed, method,
                        {"H": h.H, "cells": grid.size, "diagonal": diagonal})


def projected_moments(h, t: float, method: str = "doublesum", edges=None) -> dict:
    """Variance and third cumulant of the cell-averaged double integral (the simulator's target)."""
    h = _as_hurst(h)
    edges = path_edges(method, t) if edges is None else np.asarray(edges, float)
    grid = cell_grid(edges)
    F = kernel_grid(h, t, edges).values if method == "doublesum" else finite_interval_kernel(h, t, edges)
    sw = np.sqrt(grid.weights)
    M = sw[:, None] * F * sw[None, :]
    ev = np.linalg.eigvalsh(M)
    return {"variance": float(2 * np.sum(ev ** 2)), "kappa3": float(8 * np.sum(ev ** 3))}
