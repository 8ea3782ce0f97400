"""Balance-of-payments coefficient network on a synthetic panel.

Fits every indicator against the lagged others, then looks at which
indicators track the most value and how well the fitted operator forecasts
a year it has not seen.

    python demos/bop_network.py
"""

import numpy as np

from econet import fit_gbopn, forecast, path_track, tracking_centrality
from econet.graph import build_flow_network, edge_density
from econet.mlr import indicator_sizes
from econet.panel import IndicatorId
from econet.synth import planted_panel

panel, truth = planted_panel(seed=2, noise=0.01)
print(f"panel: {len(panel.ids)} indicators, years {panel.years[0]}-{panel.years[-1]}")

# hold the last year back so the forecast below is out of sample
net = fit_gbopn(panel, holdout_last_year=True)
s = net.summary()
print(f"accepted {s['accepted']}/{s['indicators']} rows, mean fit error {s['mean_error']:.2%}, "
      f"median {s['median_error']:.2%}")

# how sparse is the resulting network
edges = list(net.edges())
g = build_flow_network([(str(j), str(i), abs(b)) for j, i, b, _ in edges], nodes=[str(i) for i in net.ids])
print(f"{len(edges)} edges, density {edge_density(g):.3%}")

# the planted relations are known, so count how many came back
found = sum(net.rows[IndicatorId.parse(r["regressand"])].support == (IndicatorId.parse(r["regressor"]),)
            for r in truth["relations"])
print(f"planted relations recovered: {found}/{len(truth['relations'])}")

# tracking centrality: who explains the most value downstream
sizes = indicator_sizes(panel.window(*net.fit_years))
score = tracking_centrality(net, sizes)
top = sorted(score.T.items(), key=lambda kv: -kv[1])[:5]
print("\ntop trackers (T / own size S):")
for ind, t in top:
    print(f"  {str(ind):16s} T={t:10.3e}  S={sizes[ind]:10.3e}  ratio={t / sizes[ind]:6.2f}")

# a tracking path from the strongest tracker to one of its regressands
src = top[0][0]
dst = next(i for j, i, _, _ in edges if j == src)
p = path_track(net, src, dst)
print(f"\npath {' -> '.join(map(str, p.path))}, accumulated error {p.error_bound:.2%}")

# one-step forecast of the held-out year
year = int(panel.years[-2])
errs = np.array([f.relative_error for f in forecast(net, panel, year) if f.relative_error is not None])
print(f"\nforecast {year}->{year + 1}: median error {np.median(errs):.2%}, "
      f"90th percentile {np.percentile(errs, 90):.2%}, n={errs.size}")
