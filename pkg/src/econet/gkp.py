"""Gate-keeping potential on trade flow networks and its link to GDP growth.

Edges point from exporter to importer, so a node's in-flow is its imports
and its out-flow its exports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .graph import FlowNetwork, GraphError
from .stats import UndefinedStatisticError, pearson


def bypass_flow(A: np.ndarray) -> np.ndarray:
    """Diagonal of ``Abar^T A Abar^T`` where ``Abar`` is the 0/1 support of ``A``.

    Entry ``i`` sums ``A[u, w]`` over upstream ``u`` (``u -> i``) and
    downstream ``w`` (``i -> w``) neighbours of ``i``.
    """
    S = (A > 0).astype(float)
    return np.einsum("ui,uw,iw->i", S, A, S)


def gkp_all(net: FlowNetwork) -> dict[str, float]:
    """Gate-keeping potential of every node."""
    A = net.adjacency()
    inflow = A.sum(axis=0)
    outflow = A.sum(axis=1)
    through = np.sqrt(inflow * outflow)
    byp = bypass_flow(A)
    denom = through + byp
    g = np.divide(through, denom, out=np.zeros_like(through), where=(inflow > 0) & (outflow > 0))
    return {n: float(v) for n, v in zip(net.nodes, g)}


def gkp(net: FlowNetwork, node: str) -> float:
    """``sqrt(in*out) / (sqrt(in*out) + bypass)``; zero for pure sources and sinks."""
    if node not in net.nodes:
        raise GraphError(f"unknown node {node!r}")
    return gkp_all(net)[node]


def gkp_series(networks: Mapping[int, FlowNetwork], nodes: Sequence[str]) -> dict[str, np.ndarray]:
    """Per-node GKP over the years of ``networks`` (ascending)."""
    years = sorted(networks)
    out = {n: np.empty(len(years)) for n in nodes}
    for k, y in enumerate(years):
        g = gkp_all(networks[y])
        for n in nodes:
            if n not in g:
                raise GraphError(f"node {n!r} absent from the {y} network")
            out[n][k] = g[n]
    return out


def merge_nodes(net: FlowNetwork, groups: Mapping[str, str]) -> FlowNetwork:
    """Collapse members into their group node; intra-group flows are dropped."""
    nodes = sorted({groups.get(n, n) for n in net.nodes})
    edges: dict[tuple[str, str], float] = {}
    for (s, t), w in net.edges.items():
        gs, gt = groups.get(s, s), groups.get(t, t)
        if gs != gt:
            edges[(gs, gt)] = edges.get((gs, gt), 0.0) + w
    return FlowNetwork(tuple(nodes), edges, net.year)


def trade_volumes(net: FlowNetwork) -> tuple[dict[str, float], dict[str, float]]:
    """(imports, exports) per node."""
    A = net.adjacency()
    imports = dict(zip(net.nodes, A.sum(axis=0).tolist()))
    exports = dict(zip(net.nodes, A.sum(axis=1).tolist()))
    return imports, exports


def gdp_change(gdp: Sequence[float], relative: bool = True) -> np.ndarray:
    """Year-on-year change, in percent by default; one element shorter than ``gdp``."""
    gdp = np.asarray(gdp, dtype=float)
    diff = np.diff(gdp)
    return 100.0 * diff / gdp[:-1] if relative else diff


@dataclass(frozen=True)
class CorrelationRow:
    country: str
    corr_gkp: float | None
    corr_imports: float | None
    corr_exports: float | None


def _safe_pearson(x, y) -> float | None:
    try:
        return pearson(x, y)
    except UndefinedStatisticError:
        return None


def correlate_gdp(
    country: str,
    gkp_values: Sequence[float],
    imports: Sequence[float],
    exports: Sequence[float],
    gdp_change_values: Sequence[float],
) -> CorrelationRow:
    """Pearson correlation of GDP change with GKP, imports and exports.

    All four series must cover the same years. A constant series yields
    ``None`` for its coefficient.
    """
    series = [np.asarray(s, dtype=float) for s in (gkp_values, imports, exports, gdp_change_values)]
    if len({s.shape for s in series}) != 1:
        raise ValueError(f"{country}: series are not aligned on the same years")
    if series[0].size < 3:
        raise ValueError(f"{country}: need at least 3 aligned years")
    g, im, ex, d = series
    return CorrelationRow(country, _safe_pearson(g, d), _safe_pearson(im, d), _safe_pearson(ex, d))
