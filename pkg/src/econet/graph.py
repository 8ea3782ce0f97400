"""Weighted directed flow networks, strongly connected components and percolation sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class NoPercolationPointError(GraphError):
    pass


@dataclass(frozen=True)
class FlowNetwork:
    """Immutable weighted digraph. Edge weights are strictly positive."""

    nodes: tuple[str, ...]
    edges: Mapping[tuple[str, str], float]
    year: int | None = None
    dropped_self_loops: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", MappingProxyType(dict(self.edges)))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    def adjacency(self) -> np.ndarray:
        """Dense weight matrix ``A[i, j]`` = weight of edge ``nodes[i] -> nodes[j]``."""
        idx = self.index()
        A = np.zeros((len(self.nodes), len(self.nodes)))
        for (s, t), w in self.edges.items():
            A[idx[s], idx[t]] = w
        return A

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {n: [] for n in self.nodes}
        for s, t in self.edges:
            succ[s].append(t)
        for v in succ.values():
            v.sort()
        return succ

    def subgraph(self, keep: Iterable[str]) -> "FlowNetwork":
        keep = set(keep)
        nodes = tuple(n for n in self.nodes if n in keep)
        edges = {e: w for e, w in self.edges.items() if e[0] in keep and e[1] in keep}
        return FlowNetwork(nodes, edges, self.year)

    def scaled(self, factor: float) -> "FlowNetwork":
        return FlowNetwork(self.nodes, {e: w * factor for e, w in self.edges.items()}, self.year)


def build_flow_network(
    edge_records: Iterable[Sequence],
    nodes: Iterable[str] = (),
    year: int | None = None,
) -> FlowNetwork:
    """Build a network from ``(source, target, weight)`` records.

    Zero-weight records mark absent edges but still register their endpoints.
    Self-loops are dropped and counted in ``dropped_self_loops``.
    """
    seen: set[tuple[str, str]] = set()
    edges: dict[tuple[str, str], float] = {}
    node_order: dict[str, None] = {str(n): None for n in nodes}
    loops = 0
    for rec in edge_records:
        s, t, w = str(rec[0]), str(rec[1]), float(rec[2])
        if (s, t) in seen:
            raise GraphError(f"duplicate edge ({s!r}, {t!r})")
        seen.add((s, t))
        if not np.isfinite(w) or w < 0:
            raise GraphError(f"invalid weight {w!r} on edge ({s!r}, {t!r})")
        node_order.setdefault(s)
        node_order.setdefault(t)
        if s == t:
            loops += 1
            continue
        if w > 0:
            edges[(s, t)] = w
    return FlowNetwork(tuple(sorted(node_order)), edges, year, dropped_self_loops=loops)


def threshold_filter(net: FlowNetwork, e_th: float) -> FlowNetwork:
    """Keep edges with weight >= ``e_th``; every node is retained."""
    if e_th < 0:
        raise GraphError("threshold must be non-negative")
    return FlowNetwork(net.nodes, {e: w for e, w in net.edges.items() if w >= e_th}, net.year)


def strongly_connected_components(net: FlowNetwork) -> list[tuple[str, ...]]:
    """Tarjan's algorithm, iterative. Each component is returned sorted."""
    succ = net.successors()
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[tuple[str, ...]] = []
    counter = 0

    for root in net.nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(tuple(sorted(comp)))
    return comps


def largest_scc(net: FlowNetwork) -> FlowNetwork:
    """Induced subgraph on the largest strongly connected component.

    Ties go to the component whose sorted node tuple is lexicographically
    smallest. An empty network gives an empty network.
    """
    comps = strongly_connected_components(net)
    if not comps:
        return FlowNetwork((), {}, net.year)
    best = min(comps, key=lambda c: (-len(c), c))
    return net.subgraph(best)


def edge_density(net: FlowNetwork) -> float:
    """``M / (N^2 - N)``."""
    n = net.n_nodes
    if n < 2:
        raise GraphError(f"edge density undefined for {n} node(s)")
    return net.n_edges / (n * n - n)


@dataclass(frozen=True)
class PercolationEntry:
    threshold: float
    scc_nodes: int
    scc_edges: int
    scc_density: float


@dataclass(frozen=True)
class PercolationProfile:
    entries: tuple[PercolationEntry, ...]
    grid_spec: Mapping = field(default_factory=dict)

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([e.threshold for e in self.entries])

    @property
    def scc_nodes(self) -> np.ndarray:
        return np.array([e.scc_nodes for e in self.entries], dtype=int)

    def __len__(self) -> int:
        return len(self.entries)


def log_grid(lo: float, hi: float, per_decade: int = 50) -> np.ndarray:
    """Log-spaced thresholds from ``lo`` to ``hi`` inclusive, ``per_decade`` steps per factor 10."""
    if not (0 < lo < hi):
        raise GraphError("log grid needs 0 < lo < hi")
    n = int(round(np.log10(hi / lo) * per_decade)) + 1
    return np.logspace(np.log10(lo), np.log10(hi), max(n, 2))


def percolation_sweep(net: FlowNetwork, grid: Sequence[float], grid_spec: Mapping | None = None) -> PercolationProfile:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise GraphError("empty threshold grid")
    if np.any(np.diff(grid) <= 0):
        raise GraphError("threshold grid must be strictly increasing")
    # sort edges once; each grid point then keeps a suffix
    items = sorted(net.edges.items(), key=lambda kv: kv[1])
    weights = np.array([w for _, w in items])
    entries = []
    for t in grid:
        start = int(np.searchsorted(weights, t, side="left"))
        filtered = FlowNetwork(net.nodes, dict(items[start:]), net.year)
        core = largest_scc(filtered)
        dens = edge_density(core) if core.n_nodes >= 2 else 0.0
        entries.append(PercolationEntry(float(t), core.n_nodes, core.n_edges, dens))
    spec = dict(grid_spec) if grid_spec else {"min": float(grid[0]), "max": float(grid[-1]), "points": int(grid.size)}
    return PercolationProfile(tuple(entries), spec)


def detect_percolation_point(profile: PercolationProfile) -> float:
    """Threshold at which the largest relative drop of SCC size is first observed.

    For consecutive grid points ``i, i+1`` the relative drop is
    ``(n_i - n_{i+1}) / n_i``; the threshold ``t_{i+1}`` of the largest drop is
    returned (earliest on ties).
    """
    if len(profile) < 3:
        raise GraphError("need at least 3 profile entries")
    n = profile.scc_nodes.astype(float)
    t = profile.thresholds
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(n[:-1] > 0, (n[:-1] - n[1:]) / n[:-1], 0.0)
    if not np.any(rel > 0):
        raise NoPercolationPointError("no percolation point: SCC size never drops")
    return float(t[int(np.argmax(rel)) + 1])
