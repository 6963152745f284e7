"""Empirical statistics mirroring the limit laws of the process.

Almost-sure limits over vanishing scales are not reachable on a finite
grid, so every statistic here is an honest finite-scale surrogate: sups
over a decreasing ladder of radii, with per-scale values reported so the
trend toward the limit stays inspectable.  Across paths both the mean and
the median are computed; acceptance checks read the median because sup
statistics have a heavy upper tail.

Denominators follow the regime of the sampled process: with a_eff the
kernel exponent of the ensemble's process (alpha for the process and its
causal part, alpha - 1 for derivative processes), the local normalizers
are

    modulus   h^(a_eff + 1/2) sqrt(ln 1/h)     (a_eff < 1/2)
              h ln(1/h)                        (a_eff = 1/2)
    liminf    r^(a_eff + 1/2) / (ln ln 1/r)^(a_eff + 1/2)
    limsup    r^(a_eff + 1/2) sqrt(ln ln 1/r)  (a_eff < 1/2)
              r sqrt(ln(1/r) ln ln 1/r)        (a_eff = 1/2)

and iterated logarithms are only evaluated where they are safely
positive (r below exp(-e) ~ 0.066; the conservative cutoff 0.135 keeps
ln ln 1/r above 0.69) -- ladders are clipped to that range and the
clipping is recorded in the report notes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .covariance import ProcessId
from .errors import DomainError, GridTooCoarse, InsufficientData, RegimeError
from .simulate import PathEnsemble, TimeGrid

LNLN_GUARD = 0.135  # exp(-1)*exp(-1); keeps ln ln 1/r > 0.69


@dataclass(frozen=True)
class LadderSpec:
    """Decreasing scale ladder for local or uniform statistics."""

    r_values: np.ndarray
    t_center: Optional[float] = None
    interval: Optional[tuple[float, float]] = None

    def __post_init__(self):
        r = np.asarray(self.r_values, dtype=float)
        if r.size == 0:
            raise InsufficientData("empty scale ladder")
        if np.any(np.diff(r) >= 0.0):
            raise DomainError("scale ladder must be strictly decreasing")
        if np.any(r <= 0.0) or np.any(r >= 1.0):
            raise DomainError("scales must lie in (0, 1)")
        if self.interval is not None:
            a, b = self.interval
            if not (0.0 < a < b):
                raise DomainError("interval must satisfy 0 < a < b")
            if r[0] >= b - a:
                raise DomainError("scales must be smaller than the interval")
        if self.t_center is not None and r[0] >= self.t_center / 2.0:
            raise DomainError("scales must be below t_center / 2")
        object.__setattr__(self, "r_values", r)


@dataclass
class StatReport:
    """One empirical statistic against its theoretical prediction."""

    r_values: np.ndarray
    statistic: np.ndarray            # per-scale median across paths
    statistic_mean: np.ndarray
    statistic_max: np.ndarray
    fitted_constant: float
    fitted_constant_mean: float
    fitted_exponent: float
    prediction_exponent: float
    prediction_location_factor: float
    n_paths: int
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "r_values": [float(v) for v in self.r_values],
            "statistic": [float(v) for v in self.statistic],
            "statistic_mean": [float(v) for v in self.statistic_mean],
            "statistic_max": [float(v) for v in self.statistic_max],
            "fitted_constant": self.fitted_constant,
            "fitted_constant_mean": self.fitted_constant_mean,
            "fitted_exponent": self.fitted_exponent,
            "prediction_exponent": self.prediction_exponent,
            "prediction_location_factor": self.prediction_location_factor,
            "n_paths": self.n_paths,
            "notes": self.notes,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("r,statistic_median,statistic_mean,statistic_max\n")
            for r, med, mean, mx in zip(
                self.r_values, self.statistic, self.statistic_mean, self.statistic_max
            ):
                fh.write(f"{r:.17g},{med:.17g},{mean:.17g},{mx:.17g}\n")


def effective_alpha(ens: PathEnsemble) -> float:
    a = ens.params.alpha
    if ens.process in (ProcessId.ZPRIME, ProcessId.YPRIME):
        return a - 1.0
    return a


def _modulus_denominator(a_eff: float, h: np.ndarray) -> np.ndarray:
    log_inv = np.log(1.0 / h)
    if a_eff == 0.5:
        return h * log_inv
    return h ** (a_eff + 0.5) * np.sqrt(log_inv)


def _chung_denominator(a_eff: float, r: np.ndarray) -> np.ndarray:
    lnln = np.log(np.log(1.0 / r))
    return r ** (a_eff + 0.5) / lnln ** (a_eff + 0.5)


def _limsup_denominator(a_eff: float, r: np.ndarray) -> np.ndarray:
    lnln = np.log(np.log(1.0 / r))
    if a_eff == 0.5:
        return r * np.sqrt(np.log(1.0 / r) * lnln)
    return r ** (a_eff + 0.5) * np.sqrt(lnln)


def _clip_ladder(r: np.ndarray) -> tuple[np.ndarray, str]:
    keep = r < LNLN_GUARD
    note = ""
    if not np.all(keep):
        note = f"clipped {int((~keep).sum())} scales >= {LNLN_GUARD} (iterated-log guard); "
    r = r[keep]
    if r.size == 0:
        raise InsufficientData("no scales survive the iterated-logarithm guard")
    return r, note


# ---------------------------------------------------------------------------
# Uniform modulus of continuity
# ---------------------------------------------------------------------------


def _uniform_spacing(ens: PathEnsemble) -> float:
    d = np.diff(ens.grid.points)
    if d.max() - d.min() > 1e-9 * d.max():
        raise GridTooCoarse("uniform statistics need a uniform grid")
    return float(d.mean())


def _lag_set(k_max: int, dense_until: int = 64, per_octave: int = 16) -> np.ndarray:
    if k_max <= dense_until:
        return np.arange(1, k_max + 1)
    n_oct = math.log2(k_max / dense_until)
    sparse = np.unique(
        np.round(dense_until * 2.0 ** np.linspace(0.0, n_oct, int(n_oct * per_octave) + 1)).astype(int)
    )
    return np.unique(np.concatenate((np.arange(1, dense_until + 1), sparse)))


def uniform_modulus(ens: PathEnsemble, interval: tuple[float, float], ladder: LadderSpec) -> StatReport:
    """Sup of |increment| / modulus normalizer over a time window.

    For each scale r, the sup runs over window times t and grid lags
    0 < h <= r; the fitted constant is the cross-path mean at the smallest
    scale, as the modulus limit concentrates.
    """
    a, b = interval
    delta = _uniform_spacing(ens)
    pts = ens.grid.points
    r_vals = ladder.r_values
    r_min, r_max = r_vals[-1], r_vals[0]
    if pts[0] > a + 1e-12 or pts[-1] < b + r_max - 1e-12:
        raise GridTooCoarse("grid does not cover the window plus the largest scale")
    if int(r_min / delta) < 32:
        raise GridTooCoarse("fewer than 32 grid lags below the smallest scale")

    window = (pts >= a - 1e-12) & (pts <= b + 1e-12)
    w_idx = np.flatnonzero(window)
    lags = _lag_set(int(round(r_max / delta)))
    h = lags * delta
    keep = h < 0.3678794
    lags, h = lags[keep], h[keep]
    a_eff = effective_alpha(ens)
    denom = _modulus_denominator(a_eff, h)

    n_paths = ens.n_paths
    n = pts.size
    sup_inc = np.empty((n_paths, lags.size))
    for j, k in enumerate(lags):
        hi = min(n - k, w_idx[-1] + 1)
        seg = slice(w_idx[0], hi)
        diff = np.abs(ens.paths[:, k:][:, seg] - ens.paths[:, seg])
        sup_inc[:, j] = diff.max(axis=1)

    ratios = sup_inc / denom[None, :]
    stat_med = np.empty(r_vals.size)
    stat_mean = np.empty(r_vals.size)
    stat_max = np.empty(r_vals.size)
    per_path_at_rmin = None
    for i, r in enumerate(r_vals):
        m = h <= r
        per_path = ratios[:, m].max(axis=1)
        stat_med[i] = np.median(per_path)
        stat_mean[i] = per_path.mean()
        stat_max[i] = per_path.max()
        if i == r_vals.size - 1:
            per_path_at_rmin = per_path

    # slope of the sup increments against h with the predicted sqrt-log
    # factor removed, over the lags below the smallest scale
    m = h <= r_min
    level = np.median(sup_inc[:, m], axis=0) / np.sqrt(np.log(1.0 / h[m]))
    fitted_exponent = float(np.polyfit(np.log(h[m]), np.log(level), 1)[0])

    return StatReport(
        r_values=r_vals,
        statistic=stat_med,
        statistic_mean=stat_mean,
        statistic_max=stat_max,
        fitted_constant=float(np.mean(per_path_at_rmin)),
        fitted_constant_mean=float(np.mean(per_path_at_rmin)),
        fitted_exponent=fitted_exponent,
        prediction_exponent=a_eff + 0.5,
        prediction_location_factor=1.0,
        n_paths=n_paths,
        notes=f"window [{a}, {b}], spacing {delta:.3g}, {lags.size} lags",
    )


# ---------------------------------------------------------------------------
# Local sup profiles around a center point
# ---------------------------------------------------------------------------


def _local_sups(ens: PathEnsemble, t_center: float, r_vals: np.ndarray) -> np.ndarray:
    """sup_{|h| <= r} |X(t+h) - X(t)| per path and ladder scale."""
    pts = ens.grid.points
    ci = int(np.argmin(np.abs(pts - t_center)))
    if abs(pts[ci] - t_center) > 1e-9 * max(1.0, abs(t_center)):
        raise DomainError("t_center must be a grid point")
    r_max, r_min = r_vals[0], r_vals[-1]
    if pts[0] > t_center - r_max + 1e-15 or pts[-1] < t_center + r_max - 1e-15:
        raise GridTooCoarse("grid does not cover t_center +- max scale")
    offs = pts - pts[ci]
    a_off = np.abs(offs)
    inside = np.flatnonzero((a_off > 0.0) & (a_off <= r_max * (1.0 + 1e-12)))
    if (a_off[inside] <= r_min).sum() < 32:
        raise GridTooCoarse("fewer than 32 offsets below the smallest scale")
    if a_off[inside].min() > r_min / 64.0:
        raise GridTooCoarse("grid resolution exceeds smallest scale / 64")

    order = inside[np.argsort(a_off[inside], kind="stable")]
    sorted_abs = a_off[order]
    diffs = np.abs(ens.paths[:, order] - ens.paths[:, [ci]])
    running = np.maximum.accumulate(diffs, axis=1)
    idx = np.searchsorted(sorted_abs, r_vals * (1.0 + 1e-12)) - 1
    if np.any(idx < 0):
        raise GridTooCoarse("no offsets below some ladder scale")
    return running[:, idx]


def chung_liminf(ens: PathEnsemble, t_center: float, ladder: LadderSpec) -> StatReport:
    """Smallest normalized local sup over the ladder (liminf surrogate).

    Excluded at the critical kernel exponent, where the two-sided
    small-deviation bounds do not match.
    """
    a_eff = effective_alpha(ens)
    if a_eff == 0.5:
        raise RegimeError("liminf statistic is excluded at the critical index")
    r_vals, note = _clip_ladder(ladder.r_values)
    sups = _local_sups(ens, t_center, r_vals)
    denom = _chung_denominator(a_eff, r_vals)
    ratios = sups / denom[None, :]
    per_path = ratios.min(axis=1)
    exps = _sup_slope(sups, r_vals)
    return StatReport(
        r_values=r_vals,
        statistic=np.median(ratios, axis=0),
        statistic_mean=ratios.mean(axis=0),
        statistic_max=ratios.max(axis=0),
        fitted_constant=float(np.median(per_path)),
        fitted_constant_mean=float(per_path.mean()),
        fitted_exponent=exps,
        prediction_exponent=a_eff + 0.5,
        prediction_location_factor=t_center ** (-ens.params.gamma / 2.0),
        n_paths=ens.n_paths,
        notes=note + f"t_center={t_center}",
    )


def lil_limsup(ens: PathEnsemble, t_center: float, ladder: LadderSpec) -> StatReport:
    """Largest normalized local sup over the ladder (limsup surrogate)."""
    a_eff = effective_alpha(ens)
    r_vals, note = _clip_ladder(ladder.r_values)
    sups = _local_sups(ens, t_center, r_vals)
    denom = _limsup_denominator(a_eff, r_vals)
    ratios = sups / denom[None, :]
    per_path = ratios.max(axis=1)
    return StatReport(
        r_values=r_vals,
        statistic=np.median(ratios, axis=0),
        statistic_mean=ratios.mean(axis=0),
        statistic_max=ratios.max(axis=0),
        fitted_constant=float(np.median(per_path)),
        fitted_constant_mean=float(per_path.mean()),
        fitted_exponent=_sup_slope(sups, r_vals),
        prediction_exponent=a_eff + 0.5 if a_eff != 0.5 else 1.0,
        prediction_location_factor=t_center ** (-ens.params.gamma / 2.0),
        n_paths=ens.n_paths,
        notes=note + f"t_center={t_center}",
    )


def _sup_slope(sups: np.ndarray, r_vals: np.ndarray) -> float:
    med = np.median(sups, axis=0)
    return float(np.polyfit(np.log(r_vals), np.log(med), 1)[0])


def lil_origin(ens: PathEnsemble, ladder: LadderSpec) -> StatReport:
    """Limsup surrogate of |X(r)| / (r^H sqrt(ln ln 1/r)) at the origin."""
    r_vals, note = _clip_ladder(ladder.r_values)
    pts = ens.grid.points
    idx = np.array([int(np.argmin(np.abs(pts - r))) for r in r_vals])
    if np.any(np.abs(pts[idx] - r_vals) > 1e-9 * r_vals):
        raise GridTooCoarse("ladder scales must be grid points")
    h_exp = ens.params.hurst
    lnln = np.log(np.log(1.0 / r_vals))
    denom = r_vals**h_exp * np.sqrt(lnln)
    vals = np.abs(ens.paths[:, idx])
    ratios = vals / denom[None, :]
    per_path = ratios.max(axis=1)
    med_abs = np.median(vals, axis=0)
    slope = float(np.polyfit(np.log(r_vals), np.log(med_abs), 1)[0])
    return StatReport(
        r_values=r_vals,
        statistic=np.median(ratios, axis=0),
        statistic_mean=ratios.mean(axis=0),
        statistic_max=ratios.max(axis=0),
        fitted_constant=float(np.median(per_path)),
        fitted_constant_mean=float(per_path.mean()),
        fitted_exponent=slope,
        prediction_exponent=h_exp,
        prediction_location_factor=1.0,
        n_paths=ens.n_paths,
        notes=note + "origin ladder",
    )


def location_scaling(reports: list[tuple[float, StatReport]]) -> float:
    """Slope of log fitted-constant against log center location."""
    t = np.array([x for x, _ in reports])
    c = np.array([rep.fitted_constant for _, rep in reports])
    return float(np.polyfit(np.log(t), np.log(c), 1)[0])


# ---------------------------------------------------------------------------
# Variogram regularity estimate and box-counting dimension
# ---------------------------------------------------------------------------


def holder_estimate(
    ens: PathEnsemble,
    interval: Optional[tuple[float, float]] = None,
    origin_window: Optional[tuple[float, float]] = None,
    decades: float = 2.0,
) -> float:
    """Regularity exponent from the variogram slope.

    Interval mode regresses log mean |X(t+h)-X(t)|^2 on log h over grid
    lags spanning the requested number of decades; origin mode regresses
    log mean X(h)^2 on log h over the window's grid points (increments
    anchored at the origin, where X vanishes).  Returns half the slope.
    """
    if (interval is None) == (origin_window is None):
        raise DomainError("exactly one of interval / origin_window is required")
    if origin_window is not None:
        lo, hi = origin_window
        pts = ens.grid.points
        m = (pts >= lo) & (pts <= hi)
        if m.sum() < 8:
            raise GridTooCoarse("too few grid points in the origin window")
        mean_sq = (ens.paths[:, m] ** 2).mean(axis=0)
        return 0.5 * float(np.polyfit(np.log(pts[m]), np.log(mean_sq), 1)[0])

    a, b = interval
    delta = _uniform_spacing(ens)
    pts = ens.grid.points
    window = np.flatnonzero((pts >= a - 1e-12) & (pts <= b + 1e-12))
    k_max = int(round((b - a) / delta / 4))
    k_min = max(1, int(round(k_max / 10.0**decades)))
    if k_max <= k_min + 4:
        raise GridTooCoarse("grid cannot span the requested decades of lags")
    lags = np.unique(np.round(np.geomspace(k_min, k_max, 24)).astype(int))
    mean_sq = np.empty(lags.size)
    for j, k in enumerate(lags):
        seg = window[window + k <= window[-1]]
        diff = ens.paths[:, seg + k] - ens.paths[:, seg]
        mean_sq[j] = float((diff**2).mean())
    h = lags * delta
    return 0.5 * float(np.polyfit(np.log(h), np.log(mean_sq), 1)[0])


def graph_box_dim(times: np.ndarray, values: np.ndarray, interval: tuple[float, float]) -> float:
    """Box-counting dimension estimate of a sample path graph.

    The graph restricted to the interval is normalized to the unit square
    and covered by dyadic boxes; the count regression runs over box sizes
    spanning at least three octaves, keeping at least eight samples per
    column so that column oscillations stay resolved.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    a, b = interval
    m = (times >= a) & (times <= b)
    n = int(m.sum())
    if n < 2**14:
        raise GridTooCoarse("box dimension needs at least 2^14 points in the interval")
    t = (times[m] - a) / (b - a)
    x = values[m]
    x = (x - x.min()) / max(x.max() - x.min(), 1e-300)

    # keep at least 64 samples per column: sparser sampling underestimates
    # column oscillation and drags the regression slope down
    # keep at least 64 samples per column: sparser sampling underestimates
    # column oscillation and drags the regression slope down
    k_hi = int(math.floor(math.log2(n / 64.0)))
    ks = np.arange(2, k_hi + 1)
    if ks.size < 3:
        raise GridTooCoarse("not enough scales for the box-count regression")
    counts = np.empty(ks.size)
    for i, k in enumerate(ks):
        eps = 2.0**-k
        col = np.minimum((t / eps).astype(int), 2**k - 1)
        lo = np.full(2**k, np.inf)
        hi = np.full(2**k, -np.inf)
        np.minimum.at(lo, col, x)
        np.maximum.at(hi, col, x)
        used = hi >= lo
        # oscillation (variation) count: boxes per column proportional to
        # the column's vertical range, floored at one occupied box
        counts[i] = float(np.sum(np.maximum((hi[used] - lo[used]) / eps, 1.0)))
    return float(np.polyfit(ks * math.log(2.0), np.log(counts), 1)[0])
