"""Indicator panels: balance-of-payments series indexed by (country, account, direction) and year."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

ACCOUNTS = ("goods", "fdi", "equity", "debt")
DIRECTIONS = ("in", "out")


class PanelError(ValueError):
    pass


class IndicatorId(NamedTuple):
    country: str
    account: str
    direction: str

    def __str__(self) -> str:
        return f"{self.country}:{self.account}:{self.direction}"

    @classmethod
    def parse(cls, text: str) -> "IndicatorId":
        parts = text.split(":")
        if len(parts) != 3:
            raise PanelError(f"indicator id must look like COUNTRY:account:direction, got {text!r}")
        return cls.make(*parts)

    @classmethod
    def make(cls, country: str, account: str, direction: str) -> "IndicatorId":
        if account not in ACCOUNTS:
            raise PanelError(f"unknown account {account!r}; expected one of {ACCOUNTS}")
        if direction not in DIRECTIONS:
            raise PanelError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
        return cls(str(country), account, direction)


@dataclass(frozen=True)
class IndicatorPanel:
    """Rectangular panel ``values[indicator, year]``; ``nan`` marks a missing cell."""

    ids: tuple[IndicatorId, ...]
    years: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        years = np.asarray(self.years, dtype=int)
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.ids), len(years)):
            raise PanelError(f"values shape {values.shape} does not match {len(self.ids)} ids x {len(years)} years")
        if len(years) and np.any(np.diff(years) != 1):
            raise PanelError("panel years must be consecutive")
        if len(set(self.ids)) != len(self.ids):
            raise PanelError("duplicate indicator ids")
        if np.any(np.isinf(values)):
            raise PanelError("panel contains infinite values")
        values.setflags(write=False)
        years.setflags(write=False)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def row(self, ind: IndicatorId) -> np.ndarray:
        return self.values[self.ids.index(ind)]

    def year_index(self, year: int) -> int:
        pos = int(year) - int(self.years[0])
        if not 0 <= pos < len(self.years):
            raise PanelError(f"year {year} outside panel range {self.years[0]}-{self.years[-1]}")
        return pos

    def window(self, first: int, last: int) -> "IndicatorPanel":
        a, b = self.year_index(first), self.year_index(last)
        return IndicatorPanel(self.ids, self.years[a : b + 1], self.values[:, a : b + 1])

    def select(self, ids: Iterable[IndicatorId]) -> "IndicatorPanel":
        ids = tuple(ids)
        rows = [self.ids.index(i) for i in ids]
        return IndicatorPanel(ids, self.years, self.values[rows])

    def complete(self) -> "IndicatorPanel":
        """Indicators without any missing year."""
        keep = ~self.missing.any(axis=1)
        return IndicatorPanel(tuple(i for i, k in zip(self.ids, keep) if k), self.years, self.values[keep])

    def time_average(self) -> dict[IndicatorId, float]:
        with np.errstate(invalid="ignore"):
            means = np.nanmean(np.where(self.missing, np.nan, self.values), axis=1) if self.values.size else []
        return {i: float(m) for i, m in zip(self.ids, means)}


def panel_from_records(records: Iterable[tuple]) -> IndicatorPanel:
    """Build a panel from ``(country, account, direction, year, value)`` records.

    Missing (indicator, year) combinations become ``nan`` cells.
    """
    cells: dict[tuple[IndicatorId, int], float] = {}
    for country, account, direction, year, value in records:
        key = (IndicatorId.make(country, account, direction), int(year))
        if key in cells:
            raise PanelError(f"duplicate cell {key[0]} {key[1]}")
        cells[key] = float(value)
    if not cells:
        raise PanelError("empty panel")
    ids = tuple(sorted({k[0] for k in cells}))
    ys = [k[1] for k in cells]
    years = np.arange(min(ys), max(ys) + 1)
    values = np.full((len(ids), len(years)), np.nan)
    pos = {i: n for n, i in enumerate(ids)}
    for (ind, year), v in cells.items():
        values[pos[ind], year - years[0]] = v
    return IndicatorPanel(ids, years, values)


def deflate_panel(panel: IndicatorPanel, deflator: Mapping[int, float], base_year: int) -> IndicatorPanel:
    """Express values in constant ``base_year`` prices: ``v * D(base) / D(t)``."""
    needed = [int(y) for y in panel.years] + [int(base_year)]
    for y in needed:
        if y not in deflator:
            raise PanelError(f"deflator missing for year {y}")
        if not deflator[y] > 0:
            raise PanelError(f"deflator for year {y} must be positive")
    factors = np.array([deflator[base_year] / deflator[int(y)] for y in panel.years])
    return IndicatorPanel(panel.ids, panel.years, panel.values * factors[None, :])


def select_countries(panel: IndicatorPanel, coverage: float = 0.95) -> set[str]:
    """Union over indicator types of the fewest countries reaching ``coverage``.

    For every (account, direction) pair, countries are ranked by their
    time-averaged value and accumulated until their share of the type's
    average total reaches ``coverage``.
    """
    if not 0 < coverage <= 1:
        raise PanelError("coverage must lie in (0, 1]")
    avg = panel.time_average()
    groups: dict[tuple[str, str], list[tuple[str, float]]] = {}
    for ind, m in avg.items():
        if np.isfinite(m):
            groups.setdefault((ind.account, ind.direction), []).append((ind.country, m))
    chosen: set[str] = set()
    for members in groups.values():
        total = sum(v for _, v in members)
        if total <= 0:
            continue
        acc = 0.0
        for country, v in sorted(members, key=lambda cv: (-cv[1], cv[0])):
            chosen.add(country)
            acc += v
            # tolerate rounding when coverage is exactly 1
            if acc >= coverage * total * (1 - 1e-12):
                break
    return chosen
