"""CSV/JSON ingestion, validation and report writing.

Lines starting with ``#`` are comments (reports carry their provenance there)
and are skipped by every reader.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .graph import FlowNetwork, build_flow_network
from .panel import ACCOUNTS, DIRECTIONS, IndicatorPanel, panel_from_records
from .pin import DensitySeries, DerivativeKind, DerivativeSeries

FORMATS = {
    "panel": ("country", "account", "direction", "year", "value_usd"),
    "edges": ("source", "target", "year", "value_usd"),
    "series": ("time", "kind", "label", "value_usd"),
    "density": ("time", "rho"),
    "rv": ("time", "value_usd"),
    "gdp": ("country", "year", "gdp_usd"),
    "merge": ("member", "group"),
    "deflator": ("year", "deflator"),
    "gkp": ("country", "year", "gkp"),
}


class InputError(ValueError):
    """Malformed or unreadable input file."""


def _rows(path) -> Iterator[tuple[int, list[str]]]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, next(csv.reader([line]))


def read_table(path, fmt: str) -> list[tuple[int, dict[str, str]]]:
    """Rows of a CSV as ``(line number, {column: text})``; the header must match ``fmt``."""
    expected = FORMATS[fmt]
    rows = _rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise InputError(f"{path}: empty file") from None
    header = [h.strip() for h in header]
    if tuple(header[: len(expected)]) != expected:
        raise InputError(f"{path}: header {','.join(header)!r} does not match {','.join(expected)!r}")
    out = []
    for lineno, rec in rows:
        if len(rec) < len(expected):
            raise InputError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(rec)}")
        out.append((lineno, {k: rec[i].strip() for i, k in enumerate(header)}))
    return out


def _num(path, lineno, text, kind=float):
    try:
        v = kind(text)
    except ValueError:
        raise InputError(f"{path}:{lineno}: not a number: {text!r}") from None
    if kind is float and not math.isfinite(v):
        raise InputError(f"{path}:{lineno}: non-finite value {text!r}")
    return v


# --- readers -----------------------------------------------------------------


def read_panel(path) -> IndicatorPanel:
    recs = []
    for lineno, r in read_table(path, "panel"):
        if r["value_usd"] == "":
            continue
        recs.append((r["country"], r["account"], r["direction"], _num(path, lineno, r["year"], int),
                     _num(path, lineno, r["value_usd"])))
    try:
        return panel_from_records(recs)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def read_edges(path) -> dict[int | None, FlowNetwork]:
    """Networks keyed by year (``None`` when the year column is empty)."""
    by_year: dict[int | None, list] = {}
    for lineno, r in read_table(path, "edges"):
        year = _num(path, lineno, r["year"], int) if r["year"] else None
        by_year.setdefault(year, []).append((r["source"], r["target"], _num(path, lineno, r["value_usd"])))
    if not by_year:
        raise InputError(f"{path}: no edges")
    out = {}
    for year, recs in by_year.items():
        try:
            out[year] = build_flow_network(recs, year=year)
        except ValueError as exc:
            raise InputError(f"{path}: year {year}: {exc}") from None
    return out


def read_series(path) -> dict[tuple[str, str], DerivativeSeries]:
    groups: dict[tuple[str, str], list] = {}
    for lineno, r in read_table(path, "series"):
        try:
            kind = DerivativeKind(r["kind"]).value
        except ValueError:
            raise InputError(f"{path}:{lineno}: unknown kind {r['kind']!r}") from None
        groups.setdefault((kind, r["label"]), []).append((r["time"], _num(path, lineno, r["value_usd"])))
    out = {}
    for (kind, label), pts in groups.items():
        pts.sort()
        try:
            out[(kind, label)] = DerivativeSeries([p[0] for p in pts], [p[1] for p in pts], kind, label)
        except ValueError as exc:
            raise InputError(f"{path}: {kind}-{label}: {exc}") from None
    return out


def read_density(path) -> DensitySeries:
    pts = sorted((r["time"], _num(path, n, r["rho"])) for n, r in read_table(path, "density"))
    try:
        return DensitySeries([p[0] for p in pts], [p[1] for p in pts])
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def read_rv(path) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted((r["time"], _num(path, n, r["value_usd"])) for n, r in read_table(path, "rv"))
    return np.array([p[0] for p in pts], dtype="datetime64[M]"), np.array([p[1] for p in pts])


def read_gdp(path) -> dict[str, dict[int, float]]:
    out: dict[str, dict[int, float]] = {}
    for n, r in read_table(path, "gdp"):
        out.setdefault(r["country"], {})[_num(path, n, r["year"], int)] = _num(path, n, r["gdp_usd"])
    return out


def read_merge(path) -> dict[str, str]:
    return {r["member"]: r["group"] for _, r in read_table(path, "merge")}


def read_deflator(path) -> dict[int, float]:
    return {_num(path, n, r["year"], int): _num(path, n, r["deflator"]) for n, r in read_table(path, "deflator")}


def read_gkp(path) -> dict[str, dict[int, float]]:
    out: dict[str, dict[int, float]] = {}
    for n, r in read_table(path, "gkp"):
        out.setdefault(r["country"], {})[_num(path, n, r["year"], int)] = _num(path, n, r["gkp"])
    return out


# --- validation ----------------------------------------------------------------


@dataclass
class ValidationReport:
    path: str
    format: str
    rows: int = 0
    findings: list[dict] = field(default_factory=list)
    missing_cells: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, line: int | None, message: str):
        self.findings.append({"line": line, "message": message})

    def as_dict(self) -> dict:
        return {
            "file": self.path,
            "format": self.format,
            "rows": self.rows,
            "ok": self.ok,
            "findings": self.findings,
            "missing_cells": self.missing_cells,
        }


def validate_file(path, fmt: str) -> ValidationReport:
    """Schema, duplicate, value and missing-cell checks for panel/edges/series files.

    Raises ``InputError`` only for an unreadable file or a wrong header;
    everything else becomes a finding with its line number.
    """
    if fmt not in ("panel", "edges", "series"):
        raise InputError(f"unknown format {fmt!r}")
    report = ValidationReport(str(path), fmt)
    rows = list(_rows(path))
    if not rows:
        raise InputError(f"{path}: empty file")
    header = tuple(h.strip() for h in rows[0][1])
    expected = FORMATS[fmt]
    if header != expected:
        raise InputError(f"{path}: header {','.join(header)!r} does not match {','.join(expected)!r}")
    seen: dict[tuple, int] = {}
    cells: set[tuple] = set()
    for lineno, rec in rows[1:]:
        report.rows += 1
        if len(rec) != len(expected):
            report.add(lineno, f"expected {len(expected)} fields, got {len(rec)}")
            continue
        r = dict(zip(expected, (x.strip() for x in rec)))
        if fmt == "panel":
            key = (r["country"], r["account"], r["direction"], r["year"])
            if r["account"] not in ACCOUNTS:
                report.add(lineno, f"unknown account {r['account']!r}")
            if r["direction"] not in DIRECTIONS:
                report.add(lineno, f"unknown direction {r['direction']!r}")
            label = "indicator-year"
        elif fmt == "edges":
            key = (r["source"], r["target"], r["year"])
            if r["source"] == r["target"]:
                report.add(lineno, f"self-loop on {r['source']!r}")
            label = "edge"
        else:
            key = (r["kind"], r["label"], r["time"])
            if r["kind"] not in ("NOA", "GMV"):
                report.add(lineno, f"unknown kind {r['kind']!r}")
            try:
                np.datetime64(r["time"], "M")
            except ValueError:
                report.add(lineno, f"bad time {r['time']!r}; expected YYYY-MM")
            label = "series point"
        year_field = "year" if fmt != "series" else None
        if year_field and r[year_field]:
            try:
                int(r[year_field])
            except ValueError:
                report.add(lineno, f"bad year {r[year_field]!r}")
        if key in seen:
            report.add(lineno, f"duplicate {label} {key} (first on line {seen[key]})")
        else:
            seen[key] = lineno
        if r["value_usd"] == "":
            continue
        try:
            v = float(r["value_usd"])
        except ValueError:
            report.add(lineno, f"value_usd not a number: {r['value_usd']!r}")
            continue
        if not math.isfinite(v):
            report.add(lineno, f"value_usd not finite: {r['value_usd']!r}")
        elif v < 0:
            report.add(lineno, f"negative value_usd {v:g}")
        if fmt == "panel":
            cells.add(key)
    if fmt == "panel" and cells:
        indicators = sorted({k[:3] for k in cells})
        years = sorted({int(k[3]) for k in cells if k[3].lstrip("-").isdigit()})
        if years:
            for ind in indicators:
                for y in range(years[0], years[-1] + 1):
                    if ind + (str(y),) not in cells:
                        report.missing_cells.append({"indicator": ":".join(ind), "year": y})
    return report


# --- writers -------------------------------------------------------------------


def fmt6(x) -> str:
    """Six significant digits for CSV output."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def csv_text(header: Iterable[str], rows: Iterable[Iterable], comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt6(x) for x in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.datetime64):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def json_text(obj) -> str:
    """Stable JSON: sorted keys, full double precision, non-finite floats as null."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory so failures leave nothing behind."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
