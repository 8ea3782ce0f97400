"""Seeded synthetic data with planted ground truth.

Each generator returns the data together with a plain-dict ``truth`` that
can be serialised next to it and used as an oracle.
"""

from __future__ import annotations

import numpy as np

from .graph import FlowNetwork, build_flow_network
from .panel import ACCOUNTS, DIRECTIONS, IndicatorId, IndicatorPanel


class SynthError(ValueError):
    pass


def _country_codes(n: int) -> list[str]:
    return [f"C{k:02d}" for k in range(n)]


def planted_panel(
    seed: int,
    n_indicators: int = 40,
    n_planted: int = 30,
    n_years: int = 10,
    noise: float = 0.001,
    first_year: int = 2002,
    volatility: float = 0.06,
) -> tuple[IndicatorPanel, dict]:
    """Panel where ``n_planted`` indicators follow ``y(t+1) = beta x(t) + c + noise``.

    The remaining indicators are independent drivers: positive level series
    with a drift and log-normal year-on-year fluctuation. Each planted
    regressand is tied to one driver. Noise is Gaussian with standard
    deviation ``noise`` times the regressand's mean level.
    """
    n_drivers = n_indicators - n_planted
    if n_drivers < 1 or n_planted < 0:
        raise SynthError("need at least one driver indicator")
    if n_years < 5:
        raise SynthError("need at least 5 years")
    rng = np.random.default_rng(seed)
    kinds = [(a, d) for a in ACCOUNTS for d in DIRECTIONS]
    n_countries = -(-n_indicators // len(kinds))
    ids = [IndicatorId(c, a, d) for c in _country_codes(n_countries) for a, d in kinds][:n_indicators]
    order = rng.permutation(n_indicators)
    drivers = sorted(order[:n_drivers])
    planted = sorted(order[n_drivers:])

    # one extra leading year so every regressand has a lagged regressor
    T = n_years + 1
    values = np.zeros((n_indicators, T))
    for k in drivers:
        level = 10 ** rng.uniform(9, 12)
        drift = rng.uniform(-0.02, 0.10)
        steps = drift + volatility * rng.standard_normal(T)
        values[k] = level * np.exp(np.cumsum(steps) - steps[0])
    relations = []
    for k in planted:
        j = int(rng.choice(drivers))
        beta = float(rng.uniform(0.3, 1.5))
        x = values[j]
        c = float(rng.uniform(-0.2, 0.2) * beta * x.mean())
        y = np.empty(T)
        y[1:] = beta * x[:-1] + c
        y[0] = beta * x[0] + c
        scale = np.abs(y).mean()
        y = y + noise * scale * rng.standard_normal(T)
        values[k] = y
        relations.append({"regressand": str(ids[k]), "regressor": str(ids[j]), "beta": beta, "intercept": c})

    panel = IndicatorPanel(tuple(ids), np.arange(first_year, first_year + n_years), values[:, 1:])
    truth = {
        "kind": "panel",
        "seed": seed,
        "noise": noise,
        "relations": relations,
        "drivers": [str(ids[k]) for k in drivers],
    }
    return panel, truth


def noise_regressand_panel(seed: int, n_candidates: int = 39, n_years: int = 10) -> tuple[IndicatorPanel, IndicatorId]:
    """Driver panel plus one regressand that is zero-mean noise independent of everything."""
    panel, _ = planted_panel(seed, n_indicators=n_candidates, n_planted=0, n_years=n_years)
    rng = np.random.default_rng([seed, 1])
    scale = float(np.nanmean(panel.values))
    target = IndicatorId("ZZ", "goods", "in")
    values = np.vstack([panel.values, scale * rng.standard_normal(n_years)])
    return IndicatorPanel(panel.ids + (target,), panel.years, values), target


def two_scale_network(
    seed: int,
    n_core: int = 10,
    n_periphery: int = 40,
    core_scale: float = 100.0,
    periphery_scale: float = 10.0,
    core_spread: float = 3.0,
) -> tuple[FlowNetwork, dict]:
    """Dense core with weights >= ``core_scale`` and a periphery hanging on weak edges.

    Core edges are log-uniform in ``[core_scale, core_scale * 10**core_spread]``.
    Every periphery node has one edge from and one edge to randomly chosen
    core nodes, both of weight ``periphery_scale``, so the whole periphery
    detaches from the strongly connected core at the same threshold.
    """
    if n_core < 3 or n_periphery < 1:
        raise SynthError("need at least 3 core nodes and 1 periphery node")
    if not periphery_scale < core_scale:
        raise SynthError("periphery scale must lie below the core scale")
    rng = np.random.default_rng(seed)
    core = [f"K{k:03d}" for k in range(n_core)]
    peri = [f"P{k:03d}" for k in range(n_periphery)]
    records = []
    for a in core:
        for b in core:
            if a != b:
                records.append((a, b, core_scale * 10 ** rng.uniform(0, core_spread)))
    for p in peri:
        src, dst = rng.choice(n_core, size=2)
        records.append((core[src], p, periphery_scale))
        records.append((p, core[dst], periphery_scale))
    truth = {
        "kind": "two_scale",
        "seed": seed,
        "core": core,
        "periphery": peri,
        "core_scale": core_scale,
        "periphery_scale": periphery_scale,
    }
    return build_flow_network(records), truth


def pin_dataset(
    seed: int,
    first_year: int = 2002,
    last_year: int = 2012,
    n_core: int = 25,
    n_periphery: int = 25,
    e_th: float = 52e6,
    noise: float = 0.0,
    a_r: float = 0.9,
    gamma1: float = 11.0,
    gamma2: float = 6.6,
    delta_t: int = 6,
) -> tuple[dict[int, FlowNetwork], "DerivativeSeries", tuple[np.ndarray, np.ndarray], dict]:
    """Yearly holdings networks, a derivative series driven by their density, and world GDP.

    Core links carry weights >= ``e_th`` and switch on as the yearly link
    probability rises (peaking in 2007, dipping after 2008). Periphery
    countries hang on links of weight ``e_th / 10``. The derivative series
    follows the memory model on the semiannually resampled density with the
    given parameters, shifted by ``delta_t`` months, times log-normal noise.
    """
    from .pin import DerivativeSeries, build_density_series, nlsmm_eval, resample_density

    if n_core < 4:
        raise SynthError("need at least 4 core countries")
    if last_year - first_year < 4:
        raise SynthError("need at least 5 years")
    rng = np.random.default_rng(seed)
    years = list(range(first_year, last_year + 1))
    core = [f"K{k:03d}" for k in range(n_core)]
    peri = [f"P{k:03d}" for k in range(n_periphery)]
    birth = rng.uniform(size=(n_core, n_core))
    weight = e_th * 10 ** rng.uniform(0, 2, size=(n_core, n_core))
    # a directed ring keeps the core strongly connected in every year
    ring = {(k, (k + 1) % n_core) for k in range(n_core)}
    attach = rng.integers(0, n_core, size=(n_periphery, 2))
    x = np.array(years, dtype=float)
    prob = 0.25 + 0.3 / (1 + np.exp(-(x - 2005.0))) - 0.08 * (x >= 2009)
    networks = {}
    for y, p in zip(years, prob):
        recs = []
        for a in range(n_core):
            for b in range(n_core):
                if a != b and (birth[a, b] < p or (a, b) in ring):
                    recs.append((core[a], core[b], weight[a, b] * (1 + 0.02 * (y - first_year))))
        for k, q in enumerate(peri):
            recs.append((core[attach[k, 0]], q, e_th / 10))
            recs.append((q, core[attach[k, 1]], e_th / 10))
        networks[y] = build_flow_network(recs, year=y)

    dens = resample_density(build_density_series(networks, e_th, first_year))
    rho_bar = dens.normalized()
    V_r = 1e11
    model = nlsmm_eval(rho_bar, a_r, gamma1, gamma2, V_r)
    times = dens.times[1:] + np.timedelta64(delta_t, "M")
    values = model * np.exp(noise * rng.standard_normal(model.size))
    deriv = DerivativeSeries(times, values, "NOA", "CDS-synthetic")

    gdp_years = np.array(years + [last_year + 1])
    growth = 0.05 - 0.07 * (gdp_years == 2009) + 0.01 * rng.standard_normal(gdp_years.size)
    gdp = 3.3e13 * np.exp(np.cumsum(growth) - growth[0])
    gdp_times = np.array([f"{y:04d}-06" for y in gdp_years], dtype="datetime64[M]")

    truth = {
        "kind": "pin",
        "seed": seed,
        "e_th": e_th,
        "percolation_interval": [e_th / 10, e_th],
        "reference_value": V_r,
        "a_r": a_r,
        "gamma1": gamma1,
        "gamma2": gamma2,
        "delta_t": delta_t,
        "noise": noise,
    }
    return networks, deriv, (gdp_times, gdp), truth


def trade_dataset(
    seed: int,
    first_year: int = 1995,
    last_year: int = 2011,
    n_countries: int = 8,
    noise: float = 0.2,
) -> tuple[dict[int, FlowNetwork], dict[str, dict[int, float]], dict[str, str], dict]:
    """Unmerged yearly trade networks with a planted declining gate-keeper and GDP tied to GKP.

    Country ``G00`` sits between two partners whose direct (bypass) flow grows
    every year, so its GKP falls. Two EU members appear as separate nodes;
    the returned merge map collapses them, and GKP and GDP are computed on
    the merged networks. GDP growth of every country is ``2% + 20 * (g - mean g)``
    percentage points plus noise.
    """
    from .gkp import gkp_all, merge_nodes

    if n_countries < 4:
        raise SynthError("need at least 4 countries")
    rng = np.random.default_rng(seed)
    years = list(range(first_year, last_year + 1))
    names = [f"G{k:02d}" for k in range(n_countries)] + ["EU-DE", "EU-FR"]
    groups = {"EU-DE": "EU27", "EU-FR": "EU27"}
    base = 1e9 * 10 ** rng.uniform(0, 2, size=(len(names), len(names)))
    drift = rng.uniform(0.0, 0.08, size=(len(names), len(names)))
    up, down = 1, 2
    raw, networks = {}, {}
    for k, y in enumerate(years):
        recs = []
        for a, sa in enumerate(names):
            for b, sb in enumerate(names):
                if a == b:
                    continue
                w = base[a, b] * np.exp(drift[a, b] * k + 0.05 * rng.standard_normal())
                if (a, b) == (up, down):
                    w = base[a, b] * (1 + 0.4 * k) ** 2
                recs.append((sa, sb, w))
        raw[y] = build_flow_network(recs, year=y)
        networks[y] = merge_nodes(raw[y], groups)

    countries = networks[years[0]].nodes
    g = {c: np.array([gkp_all(networks[y])[c] for y in years]) for c in countries}
    gdp = {}
    for c in countries:
        change = 2.0 + 20.0 * (g[c] - g[c].mean()) + noise * rng.standard_normal(len(years))
        level = 1e12 * 10 ** rng.uniform(0, 1.5)
        series = [level]
        for d in change[1:]:
            series.append(series[-1] * (1 + d / 100.0))
        gdp[c] = {y: float(v) for y, v in zip(years, series)}
    truth = {
        "kind": "trade",
        "seed": seed,
        "declining_gatekeeper": names[0],
        "bypass_edge": [names[up], names[down]],
        "gdp_rule": "change_pct = 2 + 20 * (gkp - mean(gkp)) + noise",
        "noise": noise,
    }
    return raw, gdp, groups, truth
