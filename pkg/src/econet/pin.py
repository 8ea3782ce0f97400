"""Portfolio-investment-network density series, the short-term memory model and warnings.

The edge density of the thresholded largest strongly connected component is
tracked over time and used as the input of a two-term power law

    V(t_n) = V_r * a_r * (rho_bar(t_n)**gamma1 + rho_bar(t_{n-1})**gamma2)

fitted to derivative market values, with a lead/lag search over the time
shift between network and market.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from .graph import FlowNetwork, edge_density, largest_scc, threshold_filter
from .stats import pearson

MONTH = np.timedelta64(1, "M")

A_GRID = np.round(np.arange(0.1, 3.0 + 1e-9, 0.1), 10)
GAMMA_GRID = np.round(np.arange(-15.0, 20.0 + 1e-9, 0.1), 10)
DEFAULT_DT_GRID = (-12, -6, 0, 6, 12)
ACCEPT_PR = 0.9
MAYBE_PR = 0.85


class PinError(ValueError):
    pass


def as_months(times) -> np.ndarray:
    """Coerce ``'YYYY-MM'`` strings, datetimes or month values to ``datetime64[M]``."""
    return np.asarray(times, dtype="datetime64[M]")


@dataclass(frozen=True)
class DensitySeries:
    times: np.ndarray
    rho: np.ndarray
    threshold_used: float = float("nan")
    reference_time: np.datetime64 | None = None

    def __post_init__(self):
        times = as_months(self.times)
        rho = np.asarray(self.rho, dtype=float)
        if times.shape != rho.shape:
            raise PinError("times and rho differ in length")
        if np.any(np.diff(times) <= np.timedelta64(0, "M")):
            raise PinError("density times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "rho", rho)
        ref = times[0] if self.reference_time is None and len(times) else self.reference_time
        object.__setattr__(self, "reference_time", None if ref is None else np.datetime64(ref, "M"))

    def normalized(self) -> np.ndarray:
        """``rho(t) / rho(t_r)``."""
        hit = np.nonzero(self.times == self.reference_time)[0]
        if hit.size == 0:
            raise PinError(f"reference time {self.reference_time} not in series")
        return self.rho / self.rho[hit[0]]


class DerivativeKind(str, Enum):
    NOA = "NOA"
    GMV = "GMV"


@dataclass(frozen=True)
class DerivativeSeries:
    times: np.ndarray
    values: np.ndarray
    kind: DerivativeKind = DerivativeKind.NOA
    label: str = ""

    def __post_init__(self):
        times = as_months(self.times)
        values = np.asarray(self.values, dtype=float)
        if times.shape != values.shape:
            raise PinError("times and values differ in length")
        if np.any(np.diff(times) <= np.timedelta64(0, "M")):
            raise PinError("series times must be strictly increasing")
        if np.any(values < 0):
            raise PinError("derivative values must be non-negative")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", DerivativeKind(self.kind))


class Verdict(str, Enum):
    ACCEPT = "accept"
    MAYBE = "maybe"
    REJECT = "reject"


def classify(p_r: float) -> Verdict:
    if p_r >= ACCEPT_PR:
        return Verdict.ACCEPT
    if p_r >= MAYBE_PR:
        return Verdict.MAYBE
    return Verdict.REJECT


@dataclass(frozen=True)
class NlsmmFit:
    a_r: float
    gamma1: float
    gamma2: float
    delta_t: int
    p_r: float
    verdict: Verdict
    label: str = ""
    kind: DerivativeKind = DerivativeKind.NOA
    reference_value: float = float("nan")
    objective: float = float("nan")
    times: np.ndarray = field(default=None, repr=False)
    model: np.ndarray = field(default=None, repr=False)
    target: np.ndarray = field(default=None, repr=False)
    scan: Mapping[int, float] = field(default_factory=dict, repr=False)

    @property
    def memory_ratio(self) -> float | None:
        """``gamma2 / gamma1``; ``None`` when ``gamma1 <= 0``."""
        return self.gamma2 / self.gamma1 if self.gamma1 > 0 else None

    def model_series(self) -> DerivativeSeries:
        return DerivativeSeries(self.times, self.model, self.kind, self.label)


def build_density_series(
    networks: Mapping[int, FlowNetwork],
    e_th: float,
    reference_year: int | None = None,
    month: int = 12,
) -> DensitySeries:
    """Edge density of each year's thresholded largest SCC.

    Annual positions are stamped at ``month`` of their year (default December).
    """
    years = sorted(networks)
    if not years:
        raise PinError("no networks given")
    rho = []
    for y in years:
        core = largest_scc(threshold_filter(networks[y], e_th))
        if core.n_nodes < 2:
            raise PinError(f"year {y}: largest SCC has {core.n_nodes} node(s) at threshold {e_th:g}")
        rho.append(edge_density(core))
    times = np.array([f"{y:04d}-{month:02d}" for y in years], dtype="datetime64[M]")
    ref = years[0] if reference_year is None else reference_year
    if ref not in networks:
        raise PinError(f"reference year {ref} has no network")
    return DensitySeries(times, np.array(rho), float(e_th), np.datetime64(f"{ref:04d}-{month:02d}", "M"))


def resample_density(series: DensitySeries, step_months: int = 6) -> DensitySeries:
    """Linear interpolation onto a ``step_months`` grid between the first and last point."""
    if len(series.times) < 2:
        raise PinError("resampling needs at least two points")
    t0 = series.times[0]
    span = int((series.times[-1] - t0) / MONTH)
    grid = t0 + np.arange(0, span + 1, step_months) * MONTH
    x = ((series.times - t0) / MONTH).astype(float)
    xi = ((grid - t0) / MONTH).astype(float)
    ref = series.reference_time if series.reference_time in grid else grid[0]
    return DensitySeries(grid, np.interp(xi, x, series.rho), series.threshold_used, ref)


def nlsmm_eval(rho_bar, a_r: float, gamma1: float, gamma2: float, V_r: float = 1.0) -> np.ndarray:
    """Model values for the 2nd..last point of ``rho_bar``."""
    rho_bar = np.asarray(rho_bar, dtype=float)
    if rho_bar.size < 2:
        raise PinError("model needs at least two density points")
    if np.any(rho_bar <= 0):
        raise PinError("normalised density must be positive")
    return V_r * a_r * (rho_bar[1:] ** gamma1 + rho_bar[:-1] ** gamma2)


def _aligned(rho_times, rho_bar, target: DerivativeSeries, delta_t: int, step: int):
    """Pairs (rho_bar(t - dt), rho_bar(t - dt - step), V(t)) for target times with data."""
    lookup = {t: r for t, r in zip(rho_times.astype("int64"), rho_bar)}
    cur, prev, vals, times = [], [], [], []
    for t, v in zip(target.times, target.values):
        tc = (t - delta_t * MONTH).astype("int64")
        tp = tc - step
        if tc in lookup and tp in lookup and v > 0:
            cur.append(lookup[tc])
            prev.append(lookup[tp])
            vals.append(v)
            times.append(t)
    return np.array(cur), np.array(prev), np.array(vals), np.array(times, dtype="datetime64[M]")


def _coarse_search(cur, prev, y):
    """Grid over both exponents with the scale profiled out in closed form.

    For fixed exponents the relative-error objective is quadratic in ``a``; its
    minimiser is clipped to the scale grid range.
    """
    P1 = cur[None, :] ** GAMMA_GRID[:, None]
    P2 = prev[None, :] ** GAMMA_GRID[:, None]
    with np.errstate(over="ignore", invalid="ignore"):
        q = (P1[:, None, :] + P2[None, :, :]) / y  # model/target for a = 1
        s1 = q.sum(axis=2)
        s2 = (q * q).sum(axis=2)
        a = np.clip(s1 / s2, A_GRID[0], A_GRID[-1])
        obj = (a * a) * s2 - 2 * a * s1 + y.size
    obj = np.where(np.isfinite(obj), obj, np.inf)
    i, j = np.unravel_index(int(np.argmin(obj)), obj.shape)
    return float(a[i, j]), float(GAMMA_GRID[i]), float(GAMMA_GRID[j])


def _refine(cur, prev, y, start):
    def resid(p):
        return p[0] * (cur ** p[1] + prev ** p[2]) / y - 1.0

    lo = [1e-9, GAMMA_GRID[0], GAMMA_GRID[0]]
    hi = [np.inf, GAMMA_GRID[-1], GAMMA_GRID[-1]]
    sol = least_squares(resid, np.asarray(start), bounds=(lo, hi), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    return sol.x, float(2 * sol.cost)


def nlsmm_fit(
    density: DensitySeries,
    target: DerivativeSeries,
    dt_grid: Sequence[int] = DEFAULT_DT_GRID,
    reference_value: float | None = None,
    min_overlap: int = 4,
) -> NlsmmFit:
    """Fit the memory model for every lead/lag shift and keep the best-correlated one.

    ``delta_t`` is in months; positive values mean the density leads the
    market. The previous point ``t_{n-1}`` is one density-grid step back.
    ``reference_value`` (``V_r``) defaults to the target's value at the
    density reference time, or its first positive value if that time is absent.
    Ties in ``p_r`` go to the smaller objective, then the smaller ``|delta_t|``.
    """
    if len(density.times) < 2:
        raise PinError("density series needs at least two points")
    step = int((density.times[1] - density.times[0]) / MONTH)
    if np.any(np.diff(density.times) != step * MONTH):
        raise PinError("density series must be evenly spaced")
    rho_bar = density.normalized()
    if reference_value is None:
        at_ref = target.values[(target.times == density.reference_time) & (target.values > 0)]
        positive = target.values[target.values > 0]
        if not positive.size:
            raise PinError("target series has no positive values")
        reference_value = float(at_ref[0] if at_ref.size else positive[0])
    if not reference_value > 0:
        raise PinError("reference value must be positive")
    V_r = float(reference_value)
    best = None
    scan = {}
    for dt in dt_grid:
        cur, prev, y, times = _aligned(density.times, rho_bar, target, int(dt), step)
        if y.size < min_overlap:
            continue
        yr = y / V_r
        a0, g10, g20 = _coarse_search(cur, prev, yr)
        (a, g1, g2), obj = _refine(cur, prev, yr, (a0, g10, g20))
        model = V_r * a * (cur**g1 + prev**g2)
        try:
            p_r = pearson(model, y)
        except ValueError:
            p_r = 0.0
        scan[int(dt)] = p_r
        cand = (p_r, -obj, -abs(int(dt)))
        if best is None or cand > best[0]:
            best = (cand, dict(a_r=float(a), gamma1=float(g1), gamma2=float(g2), delta_t=int(dt), p_r=float(p_r),
                               reference_value=V_r, objective=obj, times=times, model=model, target=y))
    if best is None:
        raise PinError(f"fewer than {min_overlap} overlapping points at every time shift")
    fit = best[1]
    return NlsmmFit(verdict=classify(fit["p_r"]), label=target.label, kind=target.kind, scan=scan, **fit)


@dataclass(frozen=True)
class WarningResult:
    times: np.ndarray
    threshold: np.ndarray
    exceeded: np.ndarray

    @property
    def warnings(self) -> np.ndarray:
        return self.times[self.exceeded]

    @property
    def first(self) -> np.datetime64 | None:
        w = self.warnings
        return w[0] if w.size else None

    @property
    def first_index(self) -> int | None:
        idx = np.nonzero(self.exceeded)[0]
        return int(idx[0]) if idx.size else None


def interpolate_reference(times, rv_times, rv_values) -> np.ndarray:
    """Linear interpolation of a reference variable onto ``times`` (no extrapolation)."""
    times = as_months(times)
    rv_times = as_months(rv_times)
    rv_values = np.asarray(rv_values, dtype=float)
    if np.any(rv_values <= 0):
        raise PinError("reference variable must be positive")
    x = rv_times.astype("int64").astype(float)
    xi = times.astype("int64").astype(float)
    inside = (xi >= x[0]) & (xi <= x[-1])
    out = np.full(times.shape, np.nan)
    out[inside] = np.interp(xi[inside], x, rv_values)
    return out


def warning_signal(model: DerivativeSeries, rv_times, rv_values, f_max: float) -> WarningResult:
    """Times where the modelled value exceeds ``f_max`` times the reference variable.

    The reference variable is interpolated linearly onto the model times; model
    points outside its range are dropped.
    """
    if not f_max > 0:
        raise PinError("f_max must be positive")
    rv = interpolate_reference(model.times, rv_times, rv_values)
    keep = ~np.isnan(rv)
    if not keep.any():
        raise PinError("model and reference series do not overlap in time")
    thr = f_max * rv[keep]
    return WarningResult(model.times[keep], thr, model.values[keep] > thr)
