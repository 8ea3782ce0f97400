"""Gate-keeping potential in a small trade network.

Starts from the five-node textbook case, then follows a synthetic trade
network in which two partners of one country start trading directly.

    python demos/gatekeepers.py
"""

import numpy as np

from econet.gkp import correlate_gdp, gdp_change, gkp_all, gkp_series, merge_nodes, trade_volumes
from econet.graph import build_flow_network
from econet.synth import trade_dataset

# two suppliers and two customers of A, one supplier also selling directly
net = build_flow_network([("U1", "A", 1), ("U2", "A", 1), ("A", "W1", 1), ("A", "W2", 1), ("U1", "W1", 1)])
print({k: round(v, 4) for k, v in gkp_all(net).items()})

# grow the bypass and watch A lose control
for c in (0.0, 1.0, 4.0, 16.0):
    recs = [("U1", "A", 1), ("U2", "A", 1), ("A", "W1", 1), ("A", "W2", 1)] + ([("U1", "W1", c)] if c else [])
    print(f"bypass {c:5.1f}: g(A) = {gkp_all(build_flow_network(recs))['A']:.3f}")

nets, gdp, groups, truth = trade_dataset(seed=0, noise=0.2)
merged = {y: merge_nodes(n, groups) for y, n in nets.items()}
years = sorted(merged)
countries = merged[years[0]].nodes
g = gkp_series(merged, countries)
who = truth["declining_gatekeeper"]
print(f"\n{who}: g {g[who][0]:.3f} ({years[0]}) -> {g[who][-1]:.3f} ({years[-1]})")


def fmt(v):
    return "   n/a" if v is None else f"{v:+.3f}"


print("\ncountry   corr_gkp  corr_imp  corr_exp")
corr = []
for c in countries:
    levels = [gdp[c][y] for y in years]
    imp = [trade_volumes(merged[y])[0][c] for y in years[1:]]
    exp = [trade_volumes(merged[y])[1][c] for y in years[1:]]
    row = correlate_gdp(c, g[c][1:], imp, exp, gdp_change(levels))
    corr.append(row.corr_gkp)
    print(f"{c:8s}  {fmt(row.corr_gkp):>8s}  {fmt(row.corr_imports):>8s}  {fmt(row.corr_exports):>8s}")
print(f"\nmean corr_gkp {np.mean(corr):+.3f}")
