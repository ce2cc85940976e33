"""Quadrature rules, special functions, grids and seeded random streams.

Everything else in the package integrates through the rules defined here.
Rules that absorb endpoint singularities return the distance of each node to
both endpoints, so callers can evaluate factors like ``(x - a)**g`` without
cancellation when a node sits 1e-200 away from ``a``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special


class DomainError(ValueError):
    """Argument outside the domain of a mathematical operation."""


# -- special functions ------------------------------------------------------

def gamma_fn(a):
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise DomainError("gamma_fn needs a > 0")
    out = special.gamma(a)
    return float(out) if out.ndim == 0 else out


def beta_fn(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("beta_fn needs a, b > 0")
    # through log-gamma so small arguments do not lose digits
    out = np.exp(special.gammaln(a) + special.gammaln(b) - special.gammaln(a + b))
    return float(out) if out.ndim == 0 else out


# -- one-dimensional rules --------------------------------------------------

@dataclass(frozen=True)
class Rule:
    """Nodes and weights on [lo, hi] plus exact distances to both ends."""

    x: np.ndarray
    w: np.ndarray
    dl: np.ndarray
    dr: np.ndarray
    lo: float
    hi: float

    def integrate(self, values) -> float:
        return float(np.dot(self.w, values))


@lru_cache(maxsize=64)
def _gl_ref(n: int):
    x, w = special.roots_legendre(n)
    return x, w


def gauss_legendre(n: int, lo: float, hi: float) -> Rule:
    x, w = _gl_ref(n)
    half = 0.5 * (hi - lo)
    dl = half * (1.0 + x)
    dr = half * (1.0 - x)
    return Rule(lo + dl, half * w, dl, dr, lo, hi)


def composite_gauss_legendre(n: int, edges) -> Rule:
    edges = np.asarray(edges, dtype=float)
    xr, wr = _gl_ref(n)
    half = 0.5 * np.diff(edges)[:, None]
    x = (edges[:-1, None] + half * (1.0 + xr)).ravel()
    lo, hi = float(edges[0]), float(edges[-1])
    return Rule(x, (half * wr).ravel(), x - lo, hi - x, lo, hi)


@lru_cache(maxsize=128)
def _gj_ref(n: int, a_left: float, a_right: float):
    # scipy weight is (1-x)^alpha (1+x)^beta
    # a_left + a_right = -1 trips a harmless 0/0 inside scipy's recurrence
    with np.errstate(invalid="ignore", divide="ignore"):
        x, w = special.roots_jacobi(n, a_right, a_left)
    return x, w


def gauss_jacobi(n: int, lo: float, hi: float, a_left: float = 0.0, a_right: float = 0.0) -> Rule:
    """Rule for ``∫ g(x) (x-lo)^a_left (hi-x)^a_right dx`` with smooth g.

    The returned weights already contain the singular factor.
    """
    if a_left <= -1 or a_right <= -1:
        raise DomainError("Jacobi exponents must exceed -1")
    x, w = _gj_ref(int(n), float(a_left), float(a_right))
    half = 0.5 * (hi - lo)
    dl = half * (1.0 + x)
    dr = half * (1.0 - x)
    scale = half ** (1.0 + a_left + a_right)
    return Rule(lo + dl, w * scale, dl, dr, lo, hi)


@lru_cache(maxsize=16)
def _ts_ref(h: float, tmax: float):
    k = np.arange(-int(np.ceil(tmax / h)), int(np.ceil(tmax / h)) + 1)
    t = k * h
    u = 0.5 * np.pi * np.sinh(t)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    # distances of the reference node to -1 and +1, free of cancellation
    dm = 2.0 / (1.0 + np.exp(-2.0 * u))
    dp = 2.0 / (1.0 + np.exp(2.0 * u))
    keep = (dm > 1e-290) & (dp > 1e-290)
    return dm[keep], dp[keep], w[keep]


def tanh_sinh(lo: float, hi: float, h: float = 1.0 / 16, tmax: float = 5.6) -> Rule:
    """Double-exponential rule; converges fast for algebraic endpoint singularities."""
    dm, dp, w = _ts_ref(float(h), float(tmax))
    half = 0.5 * (hi - lo)
    dl = half * dm
    dr = half * dp
    x = np.where(dl <= dr, lo + dl, hi - dr)
    return Rule(x, half * w, dl, dr, lo, hi)


def halfline_left(end: float, h: float = 1.0 / 16, tmax: float = 5.6) -> Rule:
    """Rule on (-inf, end] for integrands decaying algebraically at -inf.

    Uses x = end - u/(1-u) with a tanh-sinh rule in u; ``dr`` holds end - x
    and ``dl`` is +inf.
    """
    r = tanh_sinh(0.0, 1.0, h, tmax)
    u, one_minus_u = r.dl, r.dr
    with np.errstate(divide="ignore", over="ignore"):
        gap = u / one_minus_u
        w = r.w / one_minus_u ** 2
    ok = np.isfinite(gap) & np.isfinite(w) & (gap < 1e250)
    gap, w = gap[ok], w[ok]
    order = np.argsort(-gap)
    gap, w = gap[order], w[order]
    return Rule(end - gap, w, np.full_like(gap, np.inf), gap, -np.inf, end)


def power_tail(start: float, p: float, n: int = 12, panels: int = 8) -> Rule:
    """Rule for ∫_start^∞ g when g(x) ~ x^(-1-p): x = start·w^(-1/p) makes the integrand flat in w.

    Panels in w ∈ (0, 1] are geometric toward 0, where subleading powers of 1/x live.
    """
    if start <= 0 or p <= 0:
        raise DomainError("power_tail needs start > 0 and p > 0")
    edges = np.concatenate([[0.0], np.geomspace(2.0 ** -(panels - 1), 1.0, panels)])
    ref = composite_gauss_legendre(n, edges)
    x = start * ref.x ** (-1.0 / p)
    w = ref.w * start * ref.x ** (-1.0 / p - 1.0) / p
    return Rule(x, w, x - start, np.full_like(x, np.inf), float(start), np.inf)


def quad_power_endpoint(f, lo: float, hi: float, gamma: float, endpoint: str = "lo", n: int = 16,
                        levels: int = 12) -> float:
    """∫_lo^hi f(x)|x - endpoint|^gamma dx via u = |x - e|^(1+gamma).

    After the substitution the integrand is f(e ± u^(1/(1+gamma)))/(1+gamma),
    which is bounded.  The u-range is split into geometrically shrinking
    panels toward u = 0, where the composed integrand is only Hölder.
    """
    if gamma <= -1:
        raise DomainError("integral diverges for gamma <= -1")
    if gamma > 0:
        raise DomainError("quad_power_endpoint expects gamma in (-1, 0]")
    if endpoint not in ("lo", "hi"):
        raise DomainError("endpoint must be 'lo' or 'hi'")
    length = hi - lo
    if length == 0:
        return 0.0
    p = 1.0 / (1.0 + gamma)
    top = abs(length) ** (1.0 + gamma)
    edges = np.concatenate([[0.0], top * 0.5 ** np.arange(levels, -1, -1)])
    r = composite_gauss_legendre(n, edges)
    dist = r.x ** p
    x = lo + dist if endpoint == "lo" else hi - dist
    val = np.dot(r.w, np.asarray(f(x), dtype=float)) / (1.0 + gamma)
    return float(np.sign(length) * val)


def diag_singular_2d(F, lo: float, hi: float, gamma: float, n_gap: int = 48, n_pos: int = 48,
                     gap_rule: str = "jacobi") -> float:
    """∫_lo^hi ∫_lo^hi |s-r|^gamma F(s, r) ds dr for F smooth near the diagonal.

    Writes the square as two triangles parametrised by the gap ρ = |s-r| and
    the lower point u; the ρ-integral carries the weight ρ^gamma.  ``F`` must
    accept broadcast arrays.  With ``gap_rule='tanh-sinh'`` the gamma factor is
    applied pointwise, which also copes with F that are merely Hölder at the
    diagonal.
    """
    length = hi - lo
    if length <= 0:
        return 0.0
    if gap_rule == "jacobi":
        g = gauss_jacobi(n_gap, 0.0, length, gamma, 0.0)
        rho, wr = g.x, g.w
    else:
        g = tanh_sinh(0.0, length)
        rho, wr = g.dl, g.w * g.dl ** gamma
    ref_x, ref_w = _gl_ref(n_pos)
    span = (length - rho)[:, None]
    u = lo + 0.5 * span * (1.0 + ref_x[None, :])
    wu = 0.5 * span * ref_w[None, :]
    v = u + rho[:, None]
    inner = np.sum(wu * (np.asarray(F(u, v)) + np.asarray(F(v, u))), axis=1)
    return float(np.dot(wr, inner))


# -- grids ------------------------------------------------------------------

@dataclass(frozen=True)
class Grid1D:
    nodes: np.ndarray
    weights: np.ndarray
    lo: float
    hi: float
    edges: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.edges is not None and self.edges.size != self.nodes.size + 1:
            raise DomainError("a cell grid needs one more edge than nodes")
        if np.any(np.diff(self.nodes) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        if np.any(self.weights <= 0):
            raise DomainError("grid weights must be positive")

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def to_dict(self) -> dict:
        d = {"lo": self.lo, "hi": self.hi, "nodes": self.nodes.tolist(),
             "weights": self.weights.tolist()}
        if self.edges is not None:
            d["edges"] = self.edges.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Grid1D":
        edges = np.asarray(d["edges"], float) if "edges" in d else None
        return cls(np.asarray(d["nodes"], float), np.asarray(d["weights"], float),
                   float(d["lo"]), float(d["hi"]), edges)

    def checksum(self) -> str:
        return array_checksum(self.nodes, self.weights)


def cell_grid(edges) -> Grid1D:
    """Midpoint grid of a partition; weights are the cell lengths."""
    edges = np.asarray(edges, dtype=float)
    return Grid1D(0.5 * (edges[1:] + edges[:-1]), np.diff(edges), float(edges[0]), float(edges[-1]),
                  edges.copy())


def graded_edges(n: int, lo: float, hi: float, grade: float = 1.0, both: bool = True) -> np.ndarray:
    """Partition of [lo, hi] into n cells graded like |x - end|^grade near the ends."""
    u = np.linspace(0.0, 1.0, n + 1)
    if both:
        e = np.where(u < 0.5, 0.5 * (2 * u) ** grade, 1 - 0.5 * (2 * (1 - u)) ** grade)
    else:
        e = u ** grade
    e[0], e[-1] = 0.0, 1.0
    return lo + (hi - lo) * e


def array_checksum(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=np.float64)).tobytes())
    return h.hexdigest()[:16]


# -- randomness -------------------------------------------------------------

@dataclass(frozen=True)
class SeedSpec:
    """Counter-based random streams: (master_seed, stream_id, *block) -> Philox key.

    A block index addresses an independent stream, so a sample set drawn in
    blocks is identical whatever order or worker computes the blocks.
    """

    master_seed: int = 0
    stream_id: int = 0

    def generator(self, *block: int) -> np.random.Generator:
        words = [self.master_seed & 0xFFFFFFFFFFFFFFFF, self.stream_id, *block]
        key = np.random.SeedSequence(words).generate_state(2, dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id)

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "stream_id": self.stream_id}


def blocked_normals(seed: SeedSpec, n_rows: int, n_cols: int, block: int = 1024) -> np.ndarray:
    """n_rows x n_cols standard normals; row block b comes from stream block b."""
    out = np.empty((n_rows, n_cols))
    for b, start in enumerate(range(0, n_rows, block)):
        stop = min(start + block, n_rows)
        out[start:stop] = seed.generator(b).standard_normal((stop - start, n_cols))
    return out


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)
