"""Vectorized fixed-mesh quadrature kernels for covariance assembly.

Gram matrices need millions of covariance entries, far too many for a
per-entry adaptive integrator.  Each covariance integral here is reduced,
by scaling out the larger time, to a one-parameter family of integrals on
[0, 1] (or [0, inf) mapped to (0, 1]).  Endpoint singularities are removed
by the same power substitutions as the scalar engine, and what remains is
integrated on a fixed composite Gauss-Legendre mesh, geometrically graded
toward both endpoints: the singular end needs depth to resolve boundary
layers (coincident times, tiny time ratios), while the opposite end needs
grading because a strong substitution exponent compresses most of the
original domain into a thin slab there.  Node tables depend only on
(alpha, gamma) and are cached; evaluating a batch of time pairs is one
broadcasted power plus a matrix-vector product.

Accuracy is pinned against the adaptive engine and against high-precision
quadrature in the test suite; the target is ~1e-11 relative error on the
full parameter domain away from degenerate corners.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .quadrature import beta

_RATIO = 0.25
_ORDER = 12

# Below this relative time separation a covariance entry is
# indistinguishable from the variance at double precision.
_NEAR_DIAG = 1e-12

_leggauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _leggauss_cache:
        _leggauss_cache[order] = leggauss(order)
    return _leggauss_cache[order]


def _panels(bounds: np.ndarray, order: int):
    x, w = _gl(order)
    lo = bounds[:-1, None]
    hi = bounds[1:, None]
    nodes = (0.5 * (hi + lo) + 0.5 * (hi - lo) * x[None, :]).ravel()
    weights = ((0.5 * (hi - lo)) * np.broadcast_to(w, (len(bounds) - 1, order))).ravel()
    return nodes, weights


def graded_nodes(
    depth0: int,
    depth1: int = 0,
    ratio: float = _RATIO,
    order: int = _ORDER,
):
    """Composite Gauss-Legendre rule on [0, 1], geometrically graded.

    depth0 / depth1 control how many geometric refinement levels stack up
    against the endpoints 0 / 1; the innermost panels ([0, ratio**depth0/2]
    and its mirror) are kept, so the rule integrates the full interval.
    """
    left = 0.5 * ratio ** np.arange(depth0, -1.0, -1.0)
    if depth1 > 0:
        right = 1.0 - 0.5 * ratio ** np.arange(1.0, depth1 + 1.0)
        bounds = np.concatenate(([0.0], left, right, [1.0]))
    else:
        bounds = np.concatenate(([0.0], left, [1.0]))
    return _panels(bounds, order)


def mapped_log_mesh(
    one_plus: float,
    feature_decades: float = 16.0,
    order: int = _ORDER,
    right_depth: int = 12,
):
    """Gauss-Legendre rule on [0, 1] for integrals reduced by u = w^one_plus.

    After absorbing an algebraic factor w^(one_plus - 1) by the power
    substitution u = w^one_plus, boundary layers at w ~ x (for small time
    ratios x) land wherever the map sends them; panel boundaries laid out
    uniformly in log10 of the *physical* variable w, then mapped through
    the substitution, keep those layers resolved for any compression
    strength.  Returned nodes/weights live in u-space; strong compression
    (small one_plus) only narrows the mapped panels, which helps accuracy.
    """
    pd = 0.6
    k = int(np.ceil(feature_decades / pd)) + 2
    w_left = 10.0 ** (-pd * np.arange(k, 0, -1))
    w_right = 1.0 - 0.5 * _RATIO ** np.arange(1.0, right_depth + 1.0)
    w_bounds = np.unique(np.concatenate((w_left, [0.5], w_right, [1.0])))
    u_bounds = w_bounds**one_plus
    # Geometric cascade below the smallest mapped bound: residual algebraic
    # kinks (unabsorbed slow powers like v^alpha) are resolved panel by
    # panel instead of being lumped into one terminal panel.
    cascade = u_bounds[0] * _RATIO ** np.arange(20.0, 0.0, -1.0)
    u_bounds = np.concatenate(([0.0], cascade, u_bounds))
    return _panels(u_bounds, order)


def _chunked(n_rows: int, n_cols: int, limit: int = 6_000_000) -> int:
    return max(1, min(n_rows, limit // max(n_cols, 1)))


# ---------------------------------------------------------------------------
# Causal (one-sided) component: kernel (t-u)^alpha u^(-gamma/2) on [0, t].
#   G(rho) = int_0^1 (1 - rho*w)^alpha (1 - w)^alpha w^(-gamma) dw,
#   cov(s, t) = t^alpha * s^(1 + alpha - gamma) * G(s/t),   s <= t.
# ---------------------------------------------------------------------------


class _ZTables:
    def __init__(self, alpha: float, gamma: float):
        # Outer half w in [0, 1/2]: substitute w = (1/2) v^(1/(1-gamma)),
        # absorbing w^(-gamma) exactly.  Grading toward v=1 compensates the
        # compression of the map when gamma is close to 1.
        v, wv = graded_nodes(8, 10)
        w_pts = 0.5 * v ** (1.0 / (1.0 - gamma))
        self.outer_w = w_pts
        self.outer_base = (1.0 - w_pts) ** alpha * wv * (0.5 ** (1.0 - gamma) / (1.0 - gamma))

        # Inner half w in [1/2, 1]: substitute 1 - w = (1/2) z^(1/(1+alpha))
        # to absorb (1-w)^alpha.  The pair-dependent factor
        # ((1-rho) + rho*(1-w))^alpha develops a boundary layer as rho -> 1;
        # deep grading toward z=0 resolves separations down to the
        # near-diagonal cutoff.
        z, wz = graded_nodes(30, 6)
        c = 0.5 * z ** (1.0 / (1.0 + alpha))
        self.inner_c = c
        self.inner_base = (1.0 - c) ** (-gamma) * wz * (0.5 ** (1.0 + alpha) / (1.0 + alpha))


# ---------------------------------------------------------------------------
# Anti-causal (smooth) component: kernel ((t+u)^alpha - u^alpha) u^(-gamma/2)
# over u in [0, inf).
#   K(x) = int_0^inf ((x+v)^a - v^a)((1+v)^a - v^a) v^(-g) dv,
#   cov(s, t) = t^(2H) K(s/t),   s <= t,  2H = 2 alpha - gamma + 1.
# ---------------------------------------------------------------------------


class _YTables:
    def __init__(self, alpha: float, gamma: float):
        # Near range v in [0, 1].  For alpha >= 0 the only singular factor
        # at v=0 is v^(-gamma); for alpha < 0 the bracket product itself
        # behaves like v^(2 alpha), so the absorbed exponent is
        # sigma = 2 min(alpha, 0) - gamma  (> -1 on the open domain).
        self.sigma = 2.0 * min(alpha, 0.0) - gamma
        w, ww = mapped_log_mesh(1.0 + self.sigma)
        v = w ** (1.0 / (1.0 + self.sigma))
        self.near_v = v
        jac = ww / (1.0 + self.sigma)
        if alpha >= 0.0:
            # residual integrand psi_x(v) * psi_1(v), psi bounded near 0
            self.near_va = v**alpha
            self.near_base = ((1.0 + v) ** alpha - self.near_va) * jac
        else:
            # residual integrand B_x(v) * B_1(v) with B = psi / v^alpha,
            # B_x(v) = (1 + x/v)^alpha - 1, bounded and analytic
            self.near_base = np.expm1(alpha * np.log1p(1.0 / v)) * jac

        # Far range v in [1, inf): substitute w = 1/v, absorb the residual
        # algebraic factor w^(gamma - 2 alpha); grading toward the w = 1 end
        # compensates compression when gamma - 2 alpha approaches -1.
        mu = gamma - 2.0 * alpha
        u, wu = graded_nodes(8, 10)
        wv = u ** (1.0 / (1.0 + mu))
        self.far_w = wv
        e_unit = np.expm1(alpha * np.log1p(wv)) / wv
        self.far_base = e_unit * wu / ((1.0 + mu) * wv)


class _YPrimeTables:
    def __init__(self, alpha: float, gamma: float):
        w, ww = mapped_log_mesh(1.0 - gamma)
        v = w ** (1.0 / (1.0 - gamma))
        self.near_v = v
        self.near_base = (1.0 + v) ** (alpha - 1.0) * ww / (1.0 - gamma)

        mu = gamma - 2.0 * alpha
        u, wu = graded_nodes(8, 10)
        wv = u ** (1.0 / (1.0 + mu))
        self.far_w = wv
        self.far_base = (1.0 + wv) ** (alpha - 1.0) * wu / (1.0 + mu)


_tables_cache: dict = {}


def _tables(kind: str, alpha: float, gamma: float):
    key = (kind, alpha, gamma)
    if key not in _tables_cache:
        cls = {"z": _ZTables, "y": _YTables, "yp": _YPrimeTables}[kind]
        _tables_cache[key] = cls(alpha, gamma)
    return _tables_cache[key]


def z_ratio_kernel(alpha: float, gamma: float, rho: np.ndarray) -> np.ndarray:
    """G(rho) for rho in [0, 1]; the exact Beta value is used at rho = 1."""
    tab: _ZTables = _tables("z", alpha, gamma)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.empty_like(rho)
    step = _chunked(rho.size, tab.outer_w.size + tab.inner_c.size)
    for i in range(0, rho.size, step):
        r = rho[i : i + step, None]
        outer = (1.0 - r * tab.outer_w[None, :]) ** alpha @ tab.outer_base
        inner = ((1.0 - r) + r * tab.inner_c[None, :]) ** alpha @ tab.inner_base
        out[i : i + step] = outer + inner
    exact_diag = rho >= 1.0 - _NEAR_DIAG
    if np.any(exact_diag):
        out[exact_diag] = beta(2.0 * alpha + 1.0, 1.0 - gamma)
    return out


def z_var(alpha: float, gamma: float, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    two_h = 2.0 * alpha - gamma + 1.0
    return beta(2.0 * alpha + 1.0, 1.0 - gamma) * t**two_h


def z_cov(alpha: float, gamma: float, s, t) -> np.ndarray:
    """Covariance of the causal component at arbitrary nonnegative times."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s, t = np.broadcast_arrays(s, t)
    m = np.minimum(s, t)
    M = np.maximum(s, t)
    out = np.zeros(m.shape, dtype=float)
    pos = m > 0.0
    if np.any(pos):
        rho = np.ones_like(m)
        np.divide(m, M, out=rho, where=pos)
        g = z_ratio_kernel(alpha, gamma, rho[pos])
        out[pos] = M[pos] ** alpha * m[pos] ** (1.0 + alpha - gamma) * g
    return out


def y_kernel(alpha: float, gamma: float, x: np.ndarray) -> np.ndarray:
    """K(x) for time ratios x in (0, 1]; identically zero at alpha = 0."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if alpha == 0.0:
        return np.zeros_like(x)
    tab: _YTables = _tables("y", alpha, gamma)
    out = np.empty_like(x)
    n_cols = tab.near_v.size + tab.far_w.size
    step = _chunked(x.size, n_cols)
    v = tab.near_v[None, :]
    for i in range(0, x.size, step):
        xc = x[i : i + step, None]
        with np.errstate(over="ignore", divide="ignore"):
            if alpha >= 0.0:
                # (x+v)^a - v^a, switching to an expm1 form once v dominates
                # x to avoid subtractive cancellation.
                ratio = xc / v
                small = ratio < 0.5
                direct = (xc + v) ** alpha - tab.near_va[None, :]
                stable = tab.near_va[None, :] * np.expm1(
                    alpha * np.log1p(np.where(small, ratio, 1.0))
                )
                pair = np.where(small, stable, direct)
            else:
                # (1 + x/v)^a - 1; the x/v -> inf limit is exactly -1 and
                # expm1(-inf) produces it without special-casing.
                pair = np.expm1(alpha * np.log1p(xc / v))
        near = pair @ tab.near_base
        far = np.expm1(alpha * np.log1p(xc * tab.far_w[None, :])) @ tab.far_base
        out[i : i + step] = near + far
    return out


# Chebyshev proxies for the anti-causal kernels.  K(x) and its derivative
# analogue are analytic on any [lo, 1] with their only branch point at
# x = 0, so a Chebyshev interpolant on [lo, 1] converges geometrically at a
# rate set by lo; for batches of pairs whose time ratios stay away from 0
# this replaces per-pair quadrature with a few hundred kernel evaluations.
_cheb_cache: dict = {}


def _cheb_degree(lo: float) -> int:
    m = (1.0 + lo) / (1.0 - lo)
    rho_b = m + np.sqrt(m * m - 1.0)
    return min(1500, int(14.0 / np.log10(rho_b)) + 12)


def _cheb_kernel(kind: str, alpha: float, gamma: float, lo: float):
    key = (kind, alpha, gamma, lo)
    if key not in _cheb_cache:
        deg = _cheb_degree(lo)
        k = np.arange(deg + 1)
        nodes = np.cos(np.pi * (2.0 * k + 1.0) / (2.0 * (deg + 1)))
        x_nodes = lo + (nodes + 1.0) * 0.5 * (1.0 - lo)
        if kind == "y":
            vals = y_kernel(alpha, gamma, x_nodes)
        else:
            vals = _yprime_kernel(alpha, gamma, x_nodes)
        coef = np.polynomial.chebyshev.chebfit(nodes, vals, deg)
        _cheb_cache[key] = (lo, coef)
    return _cheb_cache[key]


def _kernel_batch(kind: str, alpha: float, gamma: float, x: np.ndarray) -> np.ndarray:
    """Evaluate an anti-causal kernel over ratios x, via proxy when cheaper."""
    direct = y_kernel if kind == "y" else _yprime_kernel
    x_min = float(x.min())
    if x_min <= 0.004:
        return direct(alpha, gamma, x)
    lo = 2.0 ** np.floor(np.log2(x_min))
    deg = _cheb_degree(lo)
    if x.size <= 4 * (deg + 1):
        return direct(alpha, gamma, x)
    lo, coef = _cheb_kernel(kind, alpha, gamma, lo)
    u = (x - lo) * (2.0 / (1.0 - lo)) - 1.0
    return np.polynomial.chebyshev.chebval(u, coef)


def y_cov(alpha: float, gamma: float, s, t) -> np.ndarray:
    """Covariance of the smooth (anti-causal) component."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s, t = np.broadcast_arrays(s, t)
    m = np.minimum(s, t)
    M = np.maximum(s, t)
    out = np.zeros(m.shape, dtype=float)
    pos = m > 0.0
    if np.any(pos) and alpha != 0.0:
        two_h = 2.0 * alpha - gamma + 1.0
        out[pos] = M[pos] ** two_h * _kernel_batch("y", alpha, gamma, m[pos] / M[pos])
    return out


def y_var(alpha: float, gamma: float, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if alpha == 0.0:
        return np.zeros_like(t)
    k1 = float(y_kernel(alpha, gamma, np.array([1.0]))[0])
    return t ** (2.0 * alpha - gamma + 1.0) * k1


def x_cov(alpha: float, gamma: float, s, t) -> np.ndarray:
    return z_cov(alpha, gamma, s, t) + y_cov(alpha, gamma, s, t)


def zprime_cov(alpha: float, gamma: float, s, t) -> np.ndarray:
    """Covariance of the derivative of the causal component (alpha > 1/2)."""
    return alpha**2 * z_cov(alpha - 1.0, gamma, s, t)


def _yprime_kernel(alpha: float, gamma: float, x: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tab: _YPrimeTables = _tables("yp", alpha, gamma)
    out = np.empty(x.shape, dtype=float)
    n_cols = tab.near_v.size + tab.far_w.size
    step = _chunked(x.size, n_cols)
    for i in range(0, x.size, step):
        xc = x[i : i + step, None]
        near = (xc + tab.near_v[None, :]) ** (alpha - 1.0) @ tab.near_base
        far = (1.0 + xc * tab.far_w[None, :]) ** (alpha - 1.0) @ tab.far_base
        out[i : i + step] = near + far
    return out


def yprime_cov(alpha: float, gamma: float, s, t) -> np.ndarray:
    """Covariance of the derivative of the smooth component (s, t > 0)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s, t = np.broadcast_arrays(s, t)
    if alpha == 0.0:
        return np.zeros(s.shape, dtype=float)
    m = np.minimum(s, t)
    M = np.maximum(s, t)
    vals = _kernel_batch("yp", alpha, gamma, m / M)
    return alpha**2 * M ** (2.0 * alpha - gamma - 1.0) * vals


def z_incvar(alpha: float, gamma: float, s, t) -> np.ndarray:
    """E[(Z(t)-Z(s))^2] in batch.

    Assembled from variances and the covariance; fine down to relative
    separations ~1e-8, below which the scalar increment integrals should
    be used instead.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return z_var(alpha, gamma, s) + z_var(alpha, gamma, t) - 2.0 * z_cov(alpha, gamma, s, t)


def y_incvar(alpha: float, gamma: float, s, t) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return y_var(alpha, gamma, s) + y_var(alpha, gamma, t) - 2.0 * y_cov(alpha, gamma, s, t)
