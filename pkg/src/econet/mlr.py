"""Stepwise MLR fit of the balance-of-payments network and its uses.

Every indicator ``I_i(t+1)`` is regressed on time-lagged indicators
``I_j(t)``. The non-zero coefficients form a sparse directed network
(regressor -> regressand) that doubles as a one-year evolution operator.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .panel import IndicatorId, IndicatorPanel, PanelError
from .stats import (
    InsufficientDataError,
    SingularDesignError,
    condition_number,
    ols_fit,
    vif,
)

MIN_SAMPLES = 4
# an addition must lower the mean relative error by more than this to count
ERROR_FLOOR = 1e-12


class RowStatus(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    UNFITTABLE = "unfittable"


@dataclass(frozen=True)
class FitCriteria:
    alpha: float = 0.025
    max_mean_error: float = 0.10
    max_condition: float = 10.0
    max_vif: float = 5.0
    two_sided: bool = True

    def __post_init__(self):
        for name in ("alpha", "max_mean_error", "max_condition", "max_vif"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.alpha < 0.5:
            raise ValueError("alpha must be below 0.5")


@dataclass(frozen=True)
class RowFit:
    """Outcome of the stepwise search for one regressand."""

    regressand: IndicatorId
    status: RowStatus
    support: tuple[IndicatorId, ...] = ()
    coefficients: tuple[float, ...] = ()
    intercept: float = 0.0
    mean_error: float = float("nan")
    edge_r2: tuple[float, ...] = ()
    t_pvalues: tuple[float, ...] = ()
    f_pvalue: float = float("nan")
    vif: tuple[float, ...] = ()
    condition_number: float = float("nan")
    step1_order: tuple[tuple[IndicatorId, float], ...] = ()
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.status is RowStatus.ACCEPTED


@dataclass(frozen=True)
class CoefficientNetwork:
    """Sparse coefficient matrix with intercepts, per-edge R^2 and row verdicts."""

    ids: tuple[IndicatorId, ...]
    rows: Mapping[IndicatorId, RowFit]
    fit_years: tuple[int, int] = (0, 0)
    criteria: FitCriteria = field(default_factory=FitCriteria)

    def beta_matrix(self) -> np.ndarray:
        """Dense ``beta[i, j]`` (row regressand, column regressor); accepted rows only."""
        pos = {ind: k for k, ind in enumerate(self.ids)}
        B = np.zeros((len(self.ids), len(self.ids)))
        for ind, row in self.rows.items():
            if row.accepted:
                for j, b in zip(row.support, row.coefficients):
                    B[pos[ind], pos[j]] = b
        return B

    def intercepts(self) -> np.ndarray:
        return np.array([self.rows[i].intercept if self.rows[i].accepted else 0.0 for i in self.ids])

    def edges(self):
        """``(regressor, regressand, beta, r2)`` for every accepted non-zero coefficient."""
        for ind in self.ids:
            row = self.rows[ind]
            if row.accepted:
                for j, b, r2 in zip(row.support, row.coefficients, row.edge_r2):
                    yield j, ind, b, r2

    def summary(self) -> dict:
        errs = [r.mean_error for r in self.rows.values() if r.accepted]
        return {
            "indicators": len(self.ids),
            "accepted": len(errs),
            "rejected": sum(r.status is RowStatus.REJECTED for r in self.rows.values()),
            "unfittable": sum(r.status is RowStatus.UNFITTABLE for r in self.rows.values()),
            "mean_error": float(np.mean(errs)) if errs else float("nan"),
            "median_error": float(np.median(errs)) if errs else float("nan"),
        }


def _lagged(panel: IndicatorPanel):
    """Complete-data regressand targets (years 1..T) and regressor inputs (years 0..T-1)."""
    full = panel.complete()
    return full.ids, full.values[:, :-1], full.values[:, 1:]


def _try_addition(X, y, current_error: float, criteria: FitCriteria):
    """Fit the enlarged model; ``None`` unless every Step 3-4 test passes."""
    try:
        res = ols_fit(X, y, with_intercept=True, two_sided=criteria.two_sided)
    except (SingularDesignError, InsufficientDataError):
        return None
    if not res.mean_relative_error < current_error - ERROR_FLOOR:
        return None
    if np.any(res.t_pvalues > criteria.alpha):
        return None
    cond = condition_number(X)
    if not cond <= criteria.max_condition:
        return None
    v = vif(X)
    if not np.all(v <= criteria.max_vif):
        return None
    return res, v, cond


def _stepwise(ids, inputs, targets, i: int, criteria: FitCriteria) -> RowFit:
    me = ids[i]
    y = targets[i]
    n = y.shape[0]
    if n < MIN_SAMPLES:
        return RowFit(me, RowStatus.UNFITTABLE, reason=f"only {n} usable samples")
    if np.any(y == 0):
        return RowFit(me, RowStatus.UNFITTABLE, reason="regressand has zero observations")

    # Step 1: simple regressions against every other lagged series
    slr = []
    for j in range(len(ids)):
        if j == i or np.ptp(inputs[j]) == 0:
            continue
        try:
            res = ols_fit(inputs[j], y, two_sided=criteria.two_sided)
        except (SingularDesignError, InsufficientDataError):
            continue
        slr.append((float(res.residuals @ res.residuals), ids[j], j, res))
    if not slr:
        return RowFit(me, RowStatus.UNFITTABLE, reason="no usable candidate regressors")
    slr.sort(key=lambda s: (s[0], s[1]))
    order = tuple((s[1], s[0]) for s in slr)
    r2_of = {s[2]: s[3].r_squared for s in slr}

    # Step 2: seed with the smallest residuum
    _, _, j0, seed = slr[0]
    if seed.t_pvalues[0] > criteria.alpha:
        return RowFit(me, RowStatus.REJECTED, step1_order=order, reason="seed regressor not significant")
    support = [j0]
    best, best_vif, best_cond = seed, np.ones(1), condition_number(inputs[j0])

    # Steps 3-5: one pass over the remaining candidates in residuum order
    for _, _, j, _ in slr[1:]:
        trial = support + [j]
        if n < len(trial) + 2:
            break
        out = _try_addition(inputs[trial].T, y, best.mean_relative_error, criteria)
        if out is not None:
            support = trial
            best, best_vif, best_cond = out

    # Step 6: overall significance and error of the final model
    common = dict(
        support=tuple(ids[j] for j in support),
        coefficients=tuple(float(c) for c in best.coefficients),
        intercept=best.intercept,
        mean_error=best.mean_relative_error,
        edge_r2=tuple(r2_of[j] for j in support),
        t_pvalues=tuple(float(p) for p in best.t_pvalues),
        f_pvalue=best.f_pvalue,
        vif=tuple(float(x) for x in best_vif),
        condition_number=best_cond,
        step1_order=order,
    )
    if best.f_pvalue > criteria.alpha:
        return RowFit(me, RowStatus.REJECTED, reason="F-test not significant", **common)
    if best.mean_relative_error > criteria.max_mean_error:
        return RowFit(me, RowStatus.REJECTED, reason="mean relative error above bound", **common)
    return RowFit(me, RowStatus.ACCEPTED, **common)


def stepwise_fit(panel: IndicatorPanel, regressand: IndicatorId, criteria: FitCriteria | None = None) -> RowFit:
    """Iterative stepwise MLR for a single regressand.

    Indicators with any missing year are excluded from both roles. The
    regressand is explained by the other indicators lagged by one year.
    """
    criteria = criteria or FitCriteria()
    ids, inputs, targets = _lagged(panel)
    if regressand not in ids:
        if regressand in panel.ids:
            return RowFit(regressand, RowStatus.UNFITTABLE, reason="regressand has missing years")
        raise PanelError(f"unknown indicator {regressand}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return _stepwise(ids, inputs, targets, ids.index(regressand), criteria)


def fit_gbopn(
    panel: IndicatorPanel,
    criteria: FitCriteria | None = None,
    holdout_last_year: bool = False,
) -> CoefficientNetwork:
    """Fit every indicator independently and collect the rows into one network."""
    criteria = criteria or FitCriteria()
    if holdout_last_year:
        if len(panel.years) < 5:
            raise PanelError("holdout needs at least 5 panel years")
        panel = panel.window(int(panel.years[0]), int(panel.years[-2]))
    ids, inputs, targets = _lagged(panel)
    rows: dict[IndicatorId, RowFit] = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for k in range(len(ids)):
            rows[ids[k]] = _stepwise(ids, inputs, targets, k, criteria)
    for ind in panel.ids:
        if ind not in rows:
            rows[ind] = RowFit(ind, RowStatus.UNFITTABLE, reason="missing years in fit window")
    return CoefficientNetwork(
        ids=panel.ids,
        rows=rows,
        fit_years=(int(panel.years[0]), int(panel.years[-1])),
        criteria=criteria,
    )


@dataclass(frozen=True)
class Forecast:
    indicator: IndicatorId
    predicted: float
    actual: float | None
    relative_error: float | None
    skipped: str = ""


def forecast(coeffs: CoefficientNetwork, panel: IndicatorPanel, from_year: int) -> list[Forecast]:
    """Apply the evolution operator: ``I_i(t+1) = sum_j beta_ij I_j(t) + c_i``."""
    col = panel.year_index(from_year)
    nxt = col + 1 if col + 1 < len(panel.years) else None
    pos = {ind: k for k, ind in enumerate(panel.ids)}
    out = []
    for ind in coeffs.ids:
        row = coeffs.rows[ind]
        if not row.accepted:
            continue
        missing = [j for j in row.support if j not in pos or np.isnan(panel.values[pos[j], col])]
        if missing:
            out.append(Forecast(ind, float("nan"), None, None, skipped=f"regressor {missing[0]} missing at {from_year}"))
            continue
        pred = row.intercept + sum(b * panel.values[pos[j], col] for j, b in zip(row.support, row.coefficients))
        actual = None
        rel = None
        if nxt is not None and ind in pos and not np.isnan(panel.values[pos[ind], nxt]):
            actual = float(panel.values[pos[ind], nxt])
            rel = abs(pred - actual) / abs(actual) if actual != 0 else None
        out.append(Forecast(ind, float(pred), actual, rel))
    return out


@dataclass(frozen=True)
class TrackingScore:
    T: Mapping[IndicatorId, float]
    S: Mapping[IndicatorId, float]
    edge_value: Mapping[tuple[IndicatorId, IndicatorId], float]


def tracking_centrality(coeffs: CoefficientNetwork, sizes: Mapping[IndicatorId, float]) -> TrackingScore:
    """``T_i = sum_j sqrt(R^2_ij) S_j`` over the regressands ``j`` that ``i`` helps explain."""
    T = {ind: 0.0 for ind in coeffs.ids}
    v = {}
    for regressor, regressand, _, r2 in coeffs.edges():
        val = float(np.sqrt(r2) * sizes[regressand])
        v[(regressor, regressand)] = val
        T[regressor] = T.get(regressor, 0.0) + val
    return TrackingScore(T=T, S=dict(sizes), edge_value=v)


@dataclass(frozen=True)
class TrackedPath:
    path: tuple[IndicatorId, ...] | None
    error_bound: float | None

    @property
    def found(self) -> bool:
        return self.path is not None


def path_track(coeffs: CoefficientNetwork, source: IndicatorId, target: IndicatorId) -> TrackedPath:
    """Shortest regressor -> regressand path and the summed row errors along it.

    Paths are ranked by hop count, then by summed error, then lexicographically.
    """
    if source == target:
        return TrackedPath((source,), 0.0)
    succ: dict[IndicatorId, list[IndicatorId]] = {}
    for regressor, regressand, _, _ in coeffs.edges():
        succ.setdefault(regressor, []).append(regressand)
    err = {ind: row.mean_error for ind, row in coeffs.rows.items()}
    heap = [(0, 0.0, (source,))]
    done = set()
    while heap:
        hops, total, path = heapq.heappop(heap)
        node = path[-1]
        if node == target:
            return TrackedPath(path, total)
        if node in done:
            continue
        done.add(node)
        for nxt in succ.get(node, ()):
            if nxt not in done:
                heapq.heappush(heap, (hops + 1, total + err[nxt], path + (nxt,)))
    return TrackedPath(None, None)


def audit_row(row: RowFit, criteria: FitCriteria) -> list[str]:
    """Re-check an accepted row against every bound; returns the violated ones."""
    bad = []
    if any(p > criteria.alpha for p in row.t_pvalues):
        bad.append("t-test")
    if row.f_pvalue > criteria.alpha:
        bad.append("F-test")
    if not row.mean_error <= criteria.max_mean_error:
        bad.append("error")
    if not row.condition_number <= criteria.max_condition:
        bad.append("condition")
    if any(not v <= criteria.max_vif for v in row.vif):
        bad.append("vif")
    return bad


def indicator_sizes(panel: IndicatorPanel) -> dict[IndicatorId, float]:
    return panel.time_average()
