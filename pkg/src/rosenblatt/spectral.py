"""Eigenvalues and eigenfunctions of the Rosenblatt operator T_1.

T_1 has kernel f_1 = c·A*A with (Ag)(s) = ∫ (s - x)_+^β g(x) dx for s in [0, 1],
and c·AA* is the operator with kernel κ|s - r|^(H-1) on [0, 1].  The two share
their nonzero spectrum, so the eigenproblem is solved on [0, 1] where the
kernel is compact and has no tails.  An eigenfunction φ of the reduced operator
lifts to e(x) = √(c/λ) ∫_0^1 (s - x)_+^β φ(s) ds, an L²(ℝ)-normalized
eigenfunction of T_1.

Discretization is Galerkin with piecewise constants (cell integrals of
|s - r|^(H-1) are exact), graded toward both ends, followed by Richardson
extrapolation against the grid with every other edge removed.  Past n ≈ N/20
(N cells) the extrapolated eigenvalues lose accuracy, so spectral sums use the
computed values up to ``n_trust`` and the asymptotic law λ_n ≈ A(π(n - δ))^(-H),
A = 2κΓ(H)cos(πH/2), beyond it; δ is fitted on n in [n_trust/4, n_trust/2] and the
tail sums come from the Hurwitz zeta function.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from .fracint import SmoothTestFunction, weyl_integral
from .kernels import Hurst, _as_hurst, make_hurst
from .numcore import DomainError, Grid1D, array_checksum, cell_grid, composite_gauss_legendre, graded_edges

DEFAULT_CELLS = 2000
DEFAULT_KEEP = 200


@dataclass(frozen=True)
class Spectrum:
    """Top eigenpairs of T_1.

    ``eigvecs[n]`` holds the cell values of the reduced eigenfunction φ_n on
    ``grid`` (cells of [0, 1]); they are orthonormal under the cell weights.
    Use :func:`eigenfunction` for the lifted e_n on ℝ.
    """

    H: float
    lambdas: np.ndarray
    eigvecs: np.ndarray
    grid: Grid1D
    widom_delta: float
    checksum: str
    n_trust: int = 0

    def __post_init__(self):
        if not 0 < self.n_trust <= self.lambdas.size:
            object.__setattr__(self, "n_trust", int(self.lambdas.size))
        if np.any(self.lambdas <= 0):
            raise DomainError("eigenvalues must be positive")
        if np.any(np.diff(self.lambdas) > 0):
            raise DomainError("eigenvalues must be non-increasing")

    @property
    def hurst(self) -> Hurst:
        return make_hurst(self.H)

    @property
    def n_keep(self) -> int:
        return int(self.lambdas.size)

    @property
    def widom_amplitude(self) -> float:
        return widom_amplitude(self.H)

    def trusted(self) -> np.ndarray:
        return self.lambdas[: self.n_trust]

    def tail_lambdas(self, n) -> np.ndarray:
        """Asymptotic eigenvalues λ_n for indices n (1-based) past the trusted range."""
        n = np.asarray(n, dtype=float)
        return self.widom_amplitude * (np.pi * (n - self.widom_delta)) ** (-self.H)

    def gram_error(self) -> float:
        w = self.grid.weights
        G = (self.eigvecs * w[None, :]) @ self.eigvecs.T
        return float(np.max(np.abs(G - np.eye(self.n_keep))))

    # serialization
    def to_dict(self) -> dict:
        return {"H": self.H, "grid": self.grid.to_dict(), "lambdas": self.lambdas.tolist(),
                "eigvecs": self.eigvecs.ravel().tolist(), "widom_delta": self.widom_delta,
                "checksum": self.checksum, "n_trust": self.n_trust}

    @classmethod
    def from_dict(cls, d: dict) -> "Spectrum":
        grid = Grid1D.from_dict(d["grid"])
        lam = np.asarray(d["lambdas"], float)
        vecs = np.asarray(d["eigvecs"], float).reshape(lam.size, grid.size)
        return cls(float(d["H"]), lam, vecs, grid, float(d["widom_delta"]), str(d["checksum"]),
                   int(d.get("n_trust", 0)))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Spectrum":
        return cls.from_dict(json.loads(Path(path).read_text()))


def widom_amplitude(H: float) -> float:
    kappa = np.sqrt(H * (2 * H - 1) / 2)
    return float(kappa * 2 * special.gamma(H) * np.cos(np.pi * H / 2))


def reduced_edges(n_cells: int = DEFAULT_CELLS, grade: float = 1.5) -> np.ndarray:
    return graded_edges(n_cells, 0.0, 1.0, grade, both=True)


def reduced_matrix(h, edges) -> np.ndarray:
    """Galerkin matrix of κ|s - r|^(H-1) in the L²-normalized cell indicator basis."""
    h = _as_hurst(h)
    e = np.asarray(edges, dtype=float)
    H = h.H

    def G(x):
        return np.abs(x) ** (H + 1) / (H * (H + 1))

    a, b = e[:-1][:, None], e[1:][:, None]
    c, d = e[:-1][None, :], e[1:][None, :]
    M = G(b - c) + G(a - d) - G(b - d) - G(a - c)
    w = np.diff(e)
    M = h.kappa * M / np.sqrt(w[:, None] * w[None, :])
    asym = np.max(np.abs(M - M.T))
    if asym > 1e-10 * np.max(np.abs(M)):
        raise DomainError(f"assembled matrix is not symmetric ({asym:.2e})")
    return 0.5 * (M + M.T)


def _top_eigs(M: np.ndarray, k: int, vectors: bool):
    n = M.shape[0]
    k = min(k, n)
    if vectors:
        vals, vecs = np.linalg.eigh(M)
        return vals[::-1][:k], vecs[:, ::-1][:, :k].T
    return np.linalg.eigvalsh(M)[::-1][:k], None


def nystrom_eig(h, grid: Grid1D | int | None = None, n_keep: int = DEFAULT_KEEP,
                richardson: bool = True, grade: float = 1.5) -> Spectrum:
    """Top ``n_keep`` eigenpairs of T_1.

    ``grid`` is a cell grid of [0, 1] (built with edges) or a cell count.  With
    ``richardson`` the eigenvalues are extrapolated as (4λ(grid) - λ(half grid))/3,
    the half grid keeping every other edge (the Galerkin error is O(h²)).
    """
    h = _as_hurst(h)
    if n_keep < 1:
        raise DomainError("n_keep must be >= 1")
    if grid is None or isinstance(grid, (int, np.integer)):
        grid = cell_grid(reduced_edges(int(grid or DEFAULT_CELLS), grade))
    if grid.edges is None or abs(grid.lo) > 1e-15 or abs(grid.hi - 1.0) > 1e-15:
        raise DomainError("the eigen grid must be a cell grid of [0, 1]")
    edges = grid.edges
    if n_keep > grid.size:
        raise DomainError("n_keep exceeds the number of cells")
    M = reduced_matrix(h, edges)
    lam, vecs = _top_eigs(M, n_keep, vectors=True)
    if richardson:
        if grid.size % 2:
            raise DomainError("Richardson extrapolation needs an even number of cells")
        coarse, _ = _top_eigs(reduced_matrix(h, edges[::2]), n_keep, vectors=False)
        lam = (4.0 * lam - coarse) / 3.0
    if np.any(lam <= 0):
        raise DomainError("non-positive eigenvalue; refine the grid or reduce n_keep")
    lam = np.minimum.accumulate(lam)
    # cell values of φ_n, normalized under the cell weights
    phi = vecs / np.sqrt(grid.weights)[None, :]
    # fix signs so that ∫φ_n ≥ 0 (makes caches and tests deterministic)
    sgn = np.sign(phi @ grid.weights)
    sgn[sgn == 0] = 1.0
    phi *= sgn[:, None]
    n_trust = max(1, min(n_keep, grid.size // 20))
    delta = _fit_delta(h.H, lam, n_trust)
    return Spectrum(h.H, lam, phi, grid, delta, array_checksum(M[:4], edges, [h.H]), n_trust)


def _fit_delta(H: float, lam: np.ndarray, n_trust: int) -> float:
    """Offset δ in λ_n ≈ A(π(n - δ))^(-H), averaged over n in [n_trust/4, n_trust/2]."""
    lo = max(1, n_trust // 4)
    hi = max(lo, n_trust // 2)
    n = np.arange(lo, hi + 1)
    implied = n - (lam[lo - 1:hi] / widom_amplitude(H)) ** (-1.0 / H) / np.pi
    return float(np.mean(implied))


@dataclass(frozen=True)
class PowerSum:
    """∑λ_n^r split into kept modes and tail; ``value`` includes the asymptotic tail."""

    r: int
    kept: float
    tail_estimate: float
    tail_bound: float

    @property
    def value(self) -> float:
        return self.kept + self.tail_estimate


def power_sum(spec: Spectrum, r: int) -> PowerSum:
    """∑ λ_n^r for r ≥ 2.

    ``kept`` sums the trusted computed eigenvalues, ``tail_estimate`` the
    asymptotic ones past them (Hurwitz zeta).  ``tail_bound`` is
    λ_N^(r-2)·(1/2 - ∑_{n≤N} λ_n²), which uses the known value ‖f_1‖² = 1/2 and
    so is a bound, not an independent estimate.
    """
    if int(r) != r or r < 2:
        raise DomainError("power sums need an integer r >= 2 (T_1 is not trace class)")
    r = int(r)
    H = spec.H
    lam = spec.trusted()
    kept = float(np.sum(lam ** r))
    tail = tail_power_sum(spec, r, lam.size)
    resid2 = max(0.5 - float(np.sum(lam ** 2)), 0.0)
    bound = lam[-1] ** (r - 2) * resid2
    return PowerSum(r, kept, float(tail), float(bound))


def tail_power_sum(spec: Spectrum, r: float, start: int) -> float:
    """∑_{n > start} of the asymptotic λ_n^r."""
    H = spec.H
    A = spec.widom_amplitude
    return A ** r * np.pi ** (-r * H) * float(special.zeta(r * H, start + 1 - spec.widom_delta))


def eigenfunction(spec: Spectrum, n: int, x) -> np.ndarray:
    """Lifted eigenfunction e_n(x) of T_1 (n is 1-based), exact for the cell-constant φ_n."""
    if not 1 <= n <= spec.n_keep:
        raise DomainError("eigenfunction index out of range")
    h = spec.hurst
    x = np.asarray(x, dtype=float)
    e = spec.grid.edges
    p = h.H / 2
    xx = x.reshape(-1, 1)
    with np.errstate(invalid="ignore"):
        up = np.where(e[None, 1:] > xx, e[None, 1:] - xx, 0.0) ** p
        dn = np.where(e[None, :-1] > xx, e[None, :-1] - xx, 0.0) ** p
    vals = (up - dn) @ spec.eigvecs[n - 1] / p
    vals = np.sqrt(h.c / spec.lambdas[n - 1]) * vals
    return vals.reshape(x.shape)


def project_xi(spec: Spectrum, t: float, xi, n_per_cell: int = 4, cells_per_panel: int = 1,
               weyl=None) -> np.ndarray:
    """β_n = <ξ, e_n(·/t)/√t> for the kept modes.

    Uses β_n = √(d/λ_n) t^((1-H)/2) ∫_0^1 φ_n(s) I^(H/2)ξ(ts) ds, with the cell
    integrals of I^(H/2)ξ(t·) done by Gauss-Legendre on each cell.  ``weyl``
    may supply a callable for I^(H/2)ξ valid on [0, t] (e.g. an interpolant).
    """
    if t <= 0:
        raise DomainError("t must be positive")
    if isinstance(xi, SmoothTestFunction) and xi.is_zero:
        return np.zeros(spec.n_keep)
    h = spec.hurst
    e = spec.grid.edges
    rule = composite_gauss_legendre(n_per_cell, e)
    Iw = weyl_integral(xi, h.H / 2, t * rule.x) if weyl is None else weyl(t * rule.x)
    cell_int = (rule.w * Iw).reshape(spec.grid.size, n_per_cell).sum(axis=1)
    proj = spec.eigvecs @ cell_int
    return np.sqrt(h.d / spec.lambdas) * t ** ((1 - h.H) / 2) * proj


def spectrum_cached(H: float, path=None, n_cells: int = DEFAULT_CELLS, n_keep: int = DEFAULT_KEEP) -> Spectrum:
    """Load a cached spectrum when it matches (H, n_cells, n_keep); compute and store it otherwise."""
    if path is not None and Path(path).exists():
        spec = Spectrum.load(path)
        if spec.H == float(H) and spec.grid.size == n_cells and spec.n_keep == n_keep:
            return spec
    spec = nystrom_eig(make_hurst(H), n_cells, n_keep)
    if path is not None:
        spec.save(path)
    return spec


def project_xi_dt(spec: Spectrum, t: float, xi, n_per_cell: int = 4, weyl=None) -> np.ndarray:
    """d/dt of the projections β_n(t) returned by :func:`project_xi`.

    β_n(t) = √(d/λ_n) t^((1-H)/2) P_n(t) with P_n(t) = ∫_0^1 φ_n(s) I^{H/2}ξ(ts) ds and
    P_n'(t) = ∫_0^1 φ_n(s) s (I^{H/2}ξ)'(ts) ds.  ``weyl`` may supply the pair of
    callables (I^{H/2}ξ, (I^{H/2}ξ)') valid on [0, t].
    """
    if t <= 0:
        raise DomainError("t must be positive")
    if isinstance(xi, SmoothTestFunction) and xi.is_zero:
        return np.zeros(spec.n_keep)
    h = spec.hurst
    rule = composite_gauss_legendre(n_per_cell, spec.grid.edges)
    if weyl is None:
        I0 = weyl_integral(xi, h.H / 2, t * rule.x)
        I1 = weyl_integral(xi.derivative(), h.H / 2, t * rule.x)
    else:
        I0, I1 = weyl[0](t * rule.x), weyl[1](t * rule.x)
    n = spec.grid.size
    P = spec.eigvecs @ (rule.w * I0).reshape(n, n_per_cell).sum(axis=1)
    dP = spec.eigvecs @ (rule.w * rule.x * I1).reshape(n, n_per_cell).sum(axis=1)
    a = (1 - h.H) / 2
    scale = np.sqrt(h.d / spec.lambdas)
    return scale * (a * t ** (a - 1) * P + t ** a * dP)
