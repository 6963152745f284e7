"""Exact Gaussian simulation on time grids.

Two samplers are provided.  The Cholesky sampler factors the exact Gram
matrix of the requested process on the grid; it is exact in law for any
grid up to the quadrature accuracy of the Gram entries, with an escalating
diagonal jitter as a recorded fallback for numerically semidefinite
matrices.  The oracle sampler discretizes the defining stochastic integral
of the causal component cell by cell, which is statistically independent
of the covariance pipeline and therefore usable as a cross-check: each
cell contributes its own white-noise variable scaled so that the single-
time variance is exact at any mesh, with a positive O(mesh) bias in
cross-time covariances (the only approximation).

Path generation uses one counter-based stream per path, keyed by
(seed, path index), so ensembles are reproducible bit for bit regardless
of chunking or parallel scheduling.

Ensembles serialize to .npz (columnar, lossless) and CSV (header row of
grid times, one path per line, 17 significant digits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _batchquad as bq
from .covariance import (
    ProcessId,
    cov_x_many,
    cov_y_many,
    cov_yprime_many,
    cov_z_many,
    cov_zprime_many,
)
from .errors import DomainError, NotPSD
from .params import GfbmParams

JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)

# Diagonal entries at or below this absolute level are treated as exact
# zeros (deterministic points of the process, e.g. t = 0).
_ZERO_VAR = 1e-300


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing times >= 0; zero allowed only as first point."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise DomainError("grid must be a nonempty 1-d sequence")
        if np.any(~np.isfinite(pts)):
            raise DomainError("grid times must be finite")
        if np.any(np.diff(pts) <= 0.0):
            raise DomainError("grid times must be strictly increasing")
        if pts[0] < 0.0:
            raise DomainError("grid times must be nonnegative")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.size


def _stationary_grid(points: np.ndarray) -> TimeGrid:
    """Grid of stationary-process lags; may be negative (log-times)."""
    pts = np.asarray(points, dtype=float)
    if np.any(np.diff(pts) <= 0.0):
        raise DomainError("grid times must be strictly increasing")
    grid = TimeGrid.__new__(TimeGrid)
    object.__setattr__(grid, "points", pts)
    return grid


def uniform_grid(a: float, b: float, n: int) -> TimeGrid:
    return TimeGrid(np.linspace(a, b, n))


def geometric_grid(a: float, b: float, n: int) -> TimeGrid:
    if a <= 0.0:
        raise DomainError("geometric grid needs a > 0")
    return TimeGrid(np.geomspace(a, b, n))


@dataclass
class PathEnsemble:
    """Sample paths on a shared grid, with full provenance."""

    grid: TimeGrid
    paths: np.ndarray          # (n_paths, n_points)
    process: ProcessId
    params: GfbmParams
    sampler: str               # "cholesky" | "oracle"
    seed: int
    mesh: Optional[float] = None
    jitter: float = 0.0
    transform: Optional[str] = None

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(f"{t:.17g}" for t in self.grid.points) + "\n")
            for row in self.paths:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    def to_npz(self, path) -> None:
        np.savez(
            path,
            grid=self.grid.points,
            paths=self.paths,
            process=self.process.value,
            alpha=self.params.alpha,
            gamma=self.params.gamma,
            sampler=self.sampler,
            seed=self.seed,
            mesh=np.nan if self.mesh is None else self.mesh,
            jitter=self.jitter,
            transform="" if self.transform is None else self.transform,
        )

    @classmethod
    def from_npz(cls, path) -> "PathEnsemble":
        from .params import validate

        with np.load(path, allow_pickle=False) as data:
            mesh = float(data["mesh"])
            transform = str(data["transform"])
            return cls(
                grid=TimeGrid(data["grid"]),
                paths=data["paths"],
                process=ProcessId(str(data["process"])),
                params=validate(float(data["alpha"]), float(data["gamma"])),
                sampler=str(data["sampler"]),
                seed=int(data["seed"]),
                mesh=None if math.isnan(mesh) else mesh,
                jitter=float(data["jitter"]),
                transform=transform or None,
            )


# ---------------------------------------------------------------------------
# Gram assembly and factorization
# ---------------------------------------------------------------------------

_COV_BY_PROCESS = {
    ProcessId.X: cov_x_many,
    ProcessId.Y: cov_y_many,
    ProcessId.Z: cov_z_many,
    ProcessId.ZPRIME: cov_zprime_many,
    ProcessId.YPRIME: cov_yprime_many,
}


def build_gram(params: GfbmParams, grid: TimeGrid, process: ProcessId) -> np.ndarray:
    """Exact covariance matrix of the process on the grid.

    Each unordered pair is evaluated once and mirrored, so the result is
    symmetric bit for bit.
    """
    pts = grid.points
    n = pts.size
    if process is ProcessId.U:
        # stationary log-time process: entries depend on |s_i - s_j| only
        lags = np.abs(pts[None, :] - pts[:, None])
        iu = np.triu_indices(n)
        vals = _r_u_batch(params, lags[iu])
    else:
        fn = _COV_BY_PROCESS[process]
        iu = np.triu_indices(n)
        vals = fn(params, pts[iu[0]], pts[iu[1]])
    gram = np.zeros((n, n), dtype=float)
    gram[iu] = vals
    gram.T[iu] = vals
    return gram


def _r_u_batch(params: GfbmParams, lag: np.ndarray) -> np.ndarray:
    # covariance of the stationary log-time transform of the causal part
    a, g, h = params.alpha, params.gamma, params.hurst
    lag = np.abs(np.asarray(lag, dtype=float))
    return np.exp(-lag * h) * bq.z_cov(a, g, np.ones_like(lag), np.exp(lag))


def factor_with_jitter(gram: np.ndarray):
    """Cholesky factor with escalating diagonal jitter.

    Zero-variance rows (deterministic points) are excluded up front.
    Returns (L, active_index, applied_jitter); raises NotPSD if the whole
    ladder fails.
    """
    diag = np.diag(gram)
    if np.any(diag < 0.0):
        raise NotPSD("negative variance on the diagonal")
    active = np.flatnonzero(diag > _ZERO_VAR)
    sub = gram[np.ix_(active, active)]
    n = gram.shape[0]
    scale = float(np.trace(gram)) / max(n, 1)
    for eps in JITTER_LADDER:
        try:
            L = np.linalg.cholesky(sub + (eps * scale) * np.eye(active.size))
        except np.linalg.LinAlgError:
            continue
        return L, active, eps * scale
    raise NotPSD(
        f"factorization failed at every jitter level {JITTER_LADDER} (scale {scale:.3g})"
    )


def _normal_block(seed: int, path_lo: int, path_hi: int, m: int) -> np.ndarray:
    """Standard normals for paths [path_lo, path_hi), one stream per path."""
    out = np.empty((path_hi - path_lo, m))
    base = (int(seed) & 0xFFFFFFFFFFFFFFFF) << 64
    for i in range(path_lo, path_hi):
        gen = np.random.Generator(np.random.Philox(key=base + i))
        out[i - path_lo] = gen.standard_normal(m)
    return out


def cholesky_sample(
    gram: np.ndarray,
    n_paths: int,
    seed: int,
    *,
    grid: TimeGrid,
    process: ProcessId,
    params: GfbmParams,
) -> PathEnsemble:
    """Draw i.i.d. centered Gaussian paths with the given Gram matrix."""
    n = gram.shape[0]
    if gram.shape != (n, n):
        raise DomainError("gram matrix must be square")
    if grid.n != n:
        raise DomainError("grid size does not match gram matrix")
    paths = np.zeros((n_paths, n), dtype=float)
    jitter = 0.0
    if n_paths > 0:
        L, active, jitter = factor_with_jitter(gram)
        m = active.size
        chunk = max(1, int(4e6) // max(m, 1))
        for lo in range(0, n_paths, chunk):
            hi = min(n_paths, lo + chunk)
            z = _normal_block(seed, lo, hi, m)
            paths[lo:hi, active] = z @ L.T
    ens = PathEnsemble(
        grid=grid, paths=paths, process=process, params=params,
        sampler="cholesky", seed=int(seed), mesh=None, jitter=jitter,
    )
    _enforce_origin_zero(ens)
    return ens


def _enforce_origin_zero(ens: PathEnsemble) -> None:
    # the process and its causal part start at zero; variance-zero columns
    # are already zero by construction, this pins them against jitter
    if ens.process in (ProcessId.X, ProcessId.Z):
        at_zero = ens.grid.points == 0.0
        if np.any(at_zero):
            ens.paths[:, at_zero] = 0.0


def sample_process(
    params: GfbmParams,
    grid: TimeGrid,
    process: ProcessId,
    n_paths: int,
    seed: int,
) -> PathEnsemble:
    """Build the Gram matrix and draw an exact ensemble in one step."""
    gram = build_gram(params, grid, process)
    return cholesky_sample(gram, n_paths, seed, grid=grid, process=process, params=params)


# ---------------------------------------------------------------------------
# Oracle sampler: discretized stochastic integral of the causal component
# ---------------------------------------------------------------------------


def _oracle_cells(pts: np.ndarray, mesh: float) -> np.ndarray:
    """Cell boundaries on [0, max(pts)]: every grid point is a boundary and
    no cell is wider than mesh."""
    bounds = [np.array([0.0])]
    prev = 0.0
    for t in pts:
        span = t - prev
        k = max(1, int(math.ceil(span / mesh - 1e-12)))
        seg = prev + span * np.arange(1, k + 1) / k
        seg[-1] = t  # grid times are cell boundaries exactly
        bounds.append(seg)
        prev = t
    return np.concatenate(bounds)


def _cell_stds(params: GfbmParams, pts: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """sqrt of per-cell variances: sigma[i, j]^2 = int_cell_j (t_i-u)^(2a) u^(-g) du
    for cells left of t_i, else 0."""
    a2 = 2.0 * params.alpha
    g = params.gamma
    lo = bounds[:-1]
    hi = bounds[1:]
    n_t = pts.size

    x8, w8 = bq._gl(8)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[None, :] + half[None, :] * x8[:, None]     # (8, n_cells)
    u_pow = nodes**-g if g != 0.0 else np.ones_like(nodes)

    var = np.zeros((n_t, lo.size))
    # bulk: plain Gauss-Legendre per cell (both factors analytic inside)
    with np.errstate(invalid="ignore"):
        for k in range(8):
            d = pts[:, None] - nodes[k][None, :]
            term = np.where(d > 0.0, d, 1.0) ** a2 * u_pow[k]
            var += np.where(d > 0.0, term, 0.0) * (half * w8[k])[None, :]
    live = hi[None, :] <= pts[:, None] * (1.0 + 1e-15)
    var *= live

    x12, w12 = bq._gl(12)
    v12 = 0.5 * (x12 + 1.0)
    hw12 = 0.5 * w12

    # first cell: substitute u = b1 * v^(1/(1-g)), absorbing u^(-g) into the
    # constant jacobian b1^(1-g)/(1-g)
    if g != 0.0:
        b1 = hi[0]
        u_sub = b1 * v12 ** (1.0 / (1.0 - g))
        d = pts[:, None] - u_sub[None, :]
        with np.errstate(invalid="ignore"):
            vals = np.where(d > 0.0, d, 1.0) ** a2
        first = (np.where(d > 0.0, vals, 0.0) @ hw12) * (b1 ** (1.0 - g) / (1.0 - g))
        var[:, 0] = np.where(hi[0] <= pts * (1.0 + 1e-15), first, 0.0)

    # cell ending exactly at t_i (grid times are boundaries by construction):
    # substitute t_i - u = delta * z^(1/(1+2a)) to absorb the kernel
    if a2 != 0.0:
        end_idx = np.searchsorted(hi, pts * (1.0 - 1e-15))
        end_idx = np.clip(end_idx, 0, lo.size - 1)
        at_end = np.isclose(hi[end_idx], pts, rtol=1e-12, atol=0.0)
        rows = np.flatnonzero(at_end & (end_idx > 0))
        if rows.size:
            j = end_idx[rows]
            delta = (hi[j] - lo[j])[:, None]
            u_sub = pts[rows][:, None] - delta * v12[None, :] ** (1.0 / (1.0 + a2))
            c = delta[:, 0] ** (1.0 + a2) / (1.0 + a2)
            u_fac = u_sub**-g if g != 0.0 else np.ones_like(u_sub)
            var[rows, j] = (u_fac @ hw12) * c
        # doubly singular single-cell rows (first grid point with one cell)
        rows0 = np.flatnonzero(at_end & (end_idx == 0))
        for i in rows0:
            m_half = 0.5 * (lo[0] + hi[0])
            if g != 0.0:
                uL = m_half * v12 ** (1.0 / (1.0 - g))
                vL = ((pts[i] - uL) ** a2) @ hw12 * (m_half ** (1.0 - g) / (1.0 - g))
            else:
                uL = m_half * v12
                vL = ((pts[i] - uL) ** a2) @ hw12 * m_half
            dR = (pts[i] - m_half) * v12 ** (1.0 / (1.0 + a2))
            uR = pts[i] - dR
            cR = (pts[i] - m_half) ** (1.0 + a2) / (1.0 + a2)
            u_fac = uR**-g if g != 0.0 else np.ones_like(uR)
            var[i, 0] = vL + (u_fac @ hw12) * cR
    return np.sqrt(np.maximum(var, 0.0))


def oracle_sample_z(
    params: GfbmParams,
    grid: TimeGrid,
    mesh: float,
    n_paths: int,
    seed: int,
) -> PathEnsemble:
    """Sample the causal component from its discretized defining integral.

    Cells partition [0, max t] with every grid time on a cell boundary;
    cell j contributes sigma_j(t) * xi_j to the value at t, with xi_j
    shared across all grid times (consistent noise) and sigma_j(t)^2 the
    exact kernel mass of the cell.  Single-time variances are therefore
    exact at any mesh; cross-time covariances carry a positive O(mesh)
    bias from the per-cell kernel evaluation.
    """
    if mesh <= 0.0:
        raise DomainError("mesh must be positive")
    pts = grid.points
    if pts[0] <= 0.0:
        raise DomainError("oracle sampler needs strictly positive grid times")

    if params.alpha == 0.0:
        # kernel identically one: independent increments with exact
        # variances, so the construction is exact at any mesh
        g = params.gamma
        bnds = np.concatenate(([0.0], pts))
        if g != 0.0:
            v = (bnds[1:] ** (1.0 - g) - bnds[:-1] ** (1.0 - g)) / (1.0 - g)
        else:
            v = np.diff(bnds)
        stds = np.sqrt(v)
        paths = np.empty((n_paths, pts.size))
        chunk = max(1, int(3e7) // max(pts.size, 1))
        for lo in range(0, n_paths, chunk):
            hi = min(n_paths, lo + chunk)
            xi = _normal_block(seed, lo, hi, pts.size)
            np.cumsum(xi * stds[None, :], axis=1, out=paths[lo:hi])
        return PathEnsemble(
            grid=grid, paths=paths, process=ProcessId.Z, params=params,
            sampler="oracle", seed=int(seed), mesh=float(mesh), jitter=0.0,
        )

    bounds = _oracle_cells(pts, mesh)
    n_cells = bounds.size - 1
    paths = np.empty((n_paths, pts.size))

    if pts.size * n_cells <= 40_000_000:
        sig = _cell_stds(params, pts, bounds)
        chunk = max(1, int(3e7) // max(n_cells, 1))
        for lo in range(0, n_paths, chunk):
            hi = min(n_paths, lo + chunk)
            xi = _normal_block(seed, lo, hi, n_cells)
            paths[lo:hi] = xi @ sig.T
    else:
        # large grids, few paths: chunk over grid times and regenerate the
        # per-path noise deterministically for each block
        t_chunk = max(1, 40_000_000 // max(n_cells, 1))
        for tlo in range(0, pts.size, t_chunk):
            thi = min(pts.size, tlo + t_chunk)
            sig = _cell_stds(params, pts[tlo:thi], bounds)
            xi = _normal_block(seed, 0, n_paths, n_cells)
            paths[:, tlo:thi] = xi @ sig.T
    return PathEnsemble(
        grid=grid, paths=paths, process=ProcessId.Z, params=params,
        sampler="oracle", seed=int(seed), mesh=float(mesh), jitter=0.0,
    )


# ---------------------------------------------------------------------------
# Time inversion
# ---------------------------------------------------------------------------


def time_invert(ens: PathEnsemble) -> PathEnsemble:
    """Map an ensemble of the full process through t -> 1/t.

    The transformed values s^(2H) X(1/s) have the law of the original
    process; the returned ensemble lives on the inverted, re-sorted grid.
    """
    if ens.process is not ProcessId.X:
        raise DomainError("time inversion is defined for the full process")
    t = ens.grid.points
    if t[0] <= 0.0:
        raise DomainError("time inversion needs strictly positive grid times")
    two_h = 2.0 * ens.params.hurst
    inv = (1.0 / t)[::-1]
    vals = (ens.paths * t ** (-two_h))[:, ::-1]
    return PathEnsemble(
        grid=TimeGrid(inv.copy()),
        paths=np.ascontiguousarray(vals),
        process=ProcessId.X,
        params=ens.params,
        sampler=ens.sampler,
        seed=ens.seed,
        mesh=ens.mesh,
        jitter=ens.jitter,
        transform="time_invert",
    )
