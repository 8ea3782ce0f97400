"""Acceptance criteria, one test each.

Every criterion prints a single PASS/FAIL line (also collected into the
pytest terminal summary). Run standalone with ``python tests/test_acceptance.py``.
"""

import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from econet.cli import main as cli_main
from econet.gkp import bypass_flow, gkp_all
from econet.graph import build_flow_network, detect_percolation_point, log_grid, percolation_sweep
from econet.mlr import FitCriteria, RowStatus, audit_row, fit_gbopn, forecast, stepwise_fit
from econet.panel import IndicatorId
from econet.pin import DensitySeries, DerivativeSeries, Verdict, classify, nlsmm_eval, nlsmm_fit, warning_signal
from econet.stats import condition_number, ols_fit, vif
from econet.synth import noise_regressand_panel, planted_panel, two_scale_network

RESULTS: dict[str, str] = {}


def report(name, ok, detail, elapsed=None, limit=None):
    timing = "" if elapsed is None else f" [{elapsed:.1f}s" + (f" < {limit:g}s]" if limit else "]")
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}{timing}"
    RESULTS[name] = line
    print(line)
    return ok


# --- criteria ---------------------------------------------------------------------


def gkp_closed_form():
    t0 = time.perf_counter()
    net = build_flow_network([("U1", "A", 1), ("U2", "A", 1), ("A", "W1", 1), ("A", "W2", 1), ("U1", "W1", 1)])
    g = gkp_all(net)
    chain = gkp_all(build_flow_network([("u", "v", 1), ("v", "w", 1)]))
    dt = time.perf_counter() - t0
    ok = (abs(g["A"] - 2 / 3) <= 1e-12 and all(g[n] == 0.0 for n in ("U1", "U2", "W1", "W2"))
          and chain["v"] == 1.0 and chain["u"] == 0.0 and chain["w"] == 0.0 and dt < 1)
    return report("GKP closed form", ok, f"g(A)={g['A']:.15f}, sources/sinks 0, zero-bypass g={chain['v']}", dt, 1)


def gkp_bypass_brute_force():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 16))
        A = np.where(rng.random((n, n)) < rng.uniform(0.05, 0.95), rng.lognormal(0, 2, (n, n)), 0.0)
        np.fill_diagonal(A, 0.0)
        fast = bypass_flow(A)
        slow = np.zeros(n)
        for i in range(n):
            for u in range(n):
                for w in range(n):
                    if A[u, i] > 0 and A[i, w] > 0:
                        slow[i] += A[u, w]
        rel = np.abs(fast - slow) / np.where(slow > 0, slow, 1.0)
        worst = max(worst, float(rel.max()))
    dt = time.perf_counter() - t0
    return report("GKP matrix vs triple loop", worst <= 1e-10 and dt < 10,
                  f"200 digraphs, max relative deviation {worst:.2e}", dt, 10)


def stepwise_recovery():
    t0 = time.perf_counter()
    hits = total = 0
    for seed in range(20):
        panel, truth = planted_panel(seed, n_indicators=40, n_planted=30, n_years=10, noise=0.001)
        net = fit_gbopn(panel)
        for rel in truth["relations"]:
            row = net.rows[IndicatorId.parse(rel["regressand"])]
            total += 1
            hits += (row.accepted and row.support == (IndicatorId.parse(rel["regressor"]),)
                     and abs(row.coefficients[0] - rel["beta"]) <= 0.02)
    rejected = sum(stepwise_fit(*noise_regressand_panel(s), FitCriteria(alpha=0.025)).status is not RowStatus.ACCEPTED
                   for s in range(200))
    dt = time.perf_counter() - t0
    ok = hits / total >= 0.90 and rejected / 200 >= 0.95 and dt < 60
    return report("Stepwise-MLR recovery", ok,
                  f"recovered {hits}/{total} ({hits / total:.1%}), noise rejected {rejected}/200", dt, 60)


def refit_within_bounds(panel, row, crit):
    """Refit the accepted support from the raw panel and check every bound again."""
    X = np.column_stack([panel.row(j)[:-1] for j in row.support])
    y = panel.row(row.regressand)[1:]
    res = ols_fit(X, y)
    v = vif(X) if X.shape[1] > 1 else np.ones(1)
    return (np.all(res.t_pvalues <= crit.alpha) and res.f_pvalue <= crit.alpha
            and res.mean_relative_error <= crit.max_mean_error
            and condition_number(X) <= crit.max_condition and np.all(v <= crit.max_vif))


def diagnostics_correctness():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(9)
    b = 0.7 * a + 0.6 * rng.standard_normal(9)
    r = np.corrcoef(a, b)[0, 1]
    vif_err = float(np.max(np.abs(vif(np.column_stack([a, b])) - 1 / (1 - r**2))))
    Q, _ = np.linalg.qr(rng.standard_normal((9, 3)))
    cond_err = abs(condition_number(Q) - 1.0)
    crit = FitCriteria(alpha=0.025, max_mean_error=0.10, max_condition=10, max_vif=5)
    audited = violations = 0
    for seed in range(5):
        for noise in (0.001, 0.02):
            panel = planted_panel(seed, noise=noise)[0]
            net = fit_gbopn(panel, crit)
            for row in net.rows.values():
                if row.accepted:
                    audited += 1
                    violations += bool(audit_row(row, crit)) or not refit_within_bounds(panel, row, crit)
    ok = vif_err <= 1e-8 and cond_err <= 1e-10 and violations == 0
    return report("Diagnostics correctness", ok,
                  f"VIF err {vif_err:.1e}, cond err {cond_err:.1e}, {violations} violations in {audited} accepted rows")


def percolation_detection():
    t0 = time.perf_counter()
    grid = log_grid(1, 1000)
    inside = monotone = 0
    for seed in range(100):
        net, _ = two_scale_network(seed, core_scale=100, periphery_scale=10)
        prof = percolation_sweep(net, grid)
        monotone += bool(np.all(np.diff(prof.scc_nodes) <= 0))
        inside += 10 < detect_percolation_point(prof) <= 100
    dt = time.perf_counter() - t0
    ok = inside == 100 and monotone == 100 and dt < 30
    return report("Percolation detection", ok, f"{inside}/100 inside (10, 100], {monotone}/100 monotone", dt, 30)


def nlsmm_round_trip():
    t0 = time.perf_counter()
    times = np.datetime64("2002-12", "M") + 6 * np.arange(21) * np.timedelta64(1, "M")
    x = np.arange(21) / 2.0
    rho = 0.3 * (1 + 0.6 / (1 + np.exp(-(x - 3.5))) - 0.1 * np.clip(x - 6, 0, None) / 4)
    density = DensitySeries(times, rho, 52e6, times[0])
    V_r = 1e12
    target = DerivativeSeries(times[1:] + 6 * np.timedelta64(1, "M"),
                              nlsmm_eval(density.normalized(), 0.9, 11.0, 6.6, V_r), "NOA", "CDS")
    fit = nlsmm_fit(density, target, (-12, -6, 0, 6, 12), reference_value=V_r)
    verdicts = (classify(0.90) is Verdict.ACCEPT and classify(0.89999) is Verdict.MAYBE
                and classify(0.85) is Verdict.MAYBE and classify(0.84999) is Verdict.REJECT)
    dt = time.perf_counter() - t0
    ok = (abs(fit.a_r - 0.9) <= 0.05 and abs(fit.gamma1 - 11.0) <= 0.3 and abs(fit.gamma2 - 6.6) <= 0.3
          and fit.delta_t == 6 and fit.p_r > 0.999 and verdicts and dt < 60)
    return report("NLSMM round trip", ok,
                  f"a_r={fit.a_r:.4f} g1={fit.gamma1:.3f} g2={fit.gamma2:.3f} dt={fit.delta_t} p_r={fit.p_r:.6f}, "
                  f"verdict boundaries {'ok' if verdicts else 'wrong'}", dt, 60)


def warning_mechanism():
    times = np.datetime64("2003-06", "M") + 6 * np.arange(10) * np.timedelta64(1, "M")
    rv = np.linspace(100.0, 110.0, 10)
    model = np.array([5, 10, 20, 30, 40, 80, 90, 95, 99, 100.0])
    res = warning_signal(DerivativeSeries(times, model), times, rv, 0.6)
    # the oracle: direct comparison of the series against the scaled reference
    exact = res.first_index == int(np.argmax(model > 0.6 * rv)) == 5
    counts = [int(warning_signal(DerivativeSeries(times, model), times, rv, f).exceeded.sum())
              for f in np.linspace(0.05, 1.0, 10)]
    firsts = [warning_signal(DerivativeSeries(times, model), times, rv, f).first_index for f in np.linspace(0.05, 1.0, 10)]
    later = [10 if f is None else f for f in firsts]
    mono = all(a >= b for a, b in zip(counts, counts[1:])) and all(a <= b for a, b in zip(later, later[1:]))
    return report("Warning mechanism", exact and mono, f"first index {res.first_index} (planted 5), counts {counts}")


def evolution_forecast():
    t0 = time.perf_counter()
    worst = 0.0
    noisy = []
    for seed in range(20):
        panel, truth = planted_panel(seed, noise=0.0)
        net = fit_gbopn(panel, holdout_last_year=True)
        fc = {f.indicator: f for f in forecast(net, panel, int(panel.years[-2]))}
        for rel in truth["relations"]:
            f = fc.get(IndicatorId.parse(rel["regressand"]))
            worst = max(worst, np.inf if f is None or f.relative_error is None else f.relative_error)
        panel, _ = planted_panel(seed, noise=0.01)
        net = fit_gbopn(panel, holdout_last_year=True)
        noisy += [f.relative_error for f in forecast(net, panel, int(panel.years[-2])) if f.relative_error is not None]
    med = float(np.median(noisy))
    dt = time.perf_counter() - t0
    return report("Evolution-operator forecast", worst < 1e-9 and med < 0.05,
                  f"noiseless max error {worst:.1e}, 1% noise median {med:.2%} over {len(noisy)} forecasts", dt)


def cli_determinism():
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        d = root / "in"

        def run(*argv):
            return cli_main([str(a) for a in argv])

        for kind in ("panel", "pin", "trade"):
            run("synth", "--kind", kind, "--seed", 1, "--out", d / kind)
        run("fit-bop", "--panel", d / "panel/panel.csv", "--out", d / "fit")
        run("pin-density", "--holdings", d / "pin/holdings.csv", "--ref-year", 2002, "--out", d / "pin/rho.csv")
        run("nlsmm-fit", "--density", d / "pin/rho.csv", "--target", d / "pin/derivatives.csv",
            "--model-out", d / "pin/model.csv", "--out", d / "pin/fit.json")
        run("gkp", "--trade", d / "trade/trade.csv", "--merge", d / "trade/merge.csv", "--out", d / "trade/gkp.csv")
        edge = __import__("json").loads((d / "fit/gbopn.json").read_text())["edges"][0]

        def commands(o):
            return [
                ["fit-bop", "--panel", d / "panel/panel.csv", "--holdout-last", "--out", o / "fit"],
                ["forecast", "--model", d / "fit/gbopn.json", "--panel", d / "panel/panel.csv", "--from-year", 2010,
                 "--out", o / "forecast.json"],
                ["track", "--model", d / "fit/gbopn.json", "--source", edge["regressor"], "--target",
                 edge["regressand"], "--out", o / "track.json"],
                ["pin-density", "--holdings", d / "pin/holdings.csv", "--ref-year", 2002, "--semiannual",
                 "--profile-out", o / "profile.csv", "--out", o / "density.csv"],
                ["nlsmm-fit", "--density", d / "pin/rho.csv", "--target", d / "pin/derivatives.csv",
                 "--model-out", o / "model.csv", "--out", o / "nlsmm.json"],
                ["warn", "--model-series", d / "pin/model.csv", "--rv", d / "pin/world_gdp.csv", "--fmax", 0.56,
                 "--out", o / "warn.json"],
                ["gkp", "--trade", d / "trade/trade.csv", "--merge", d / "trade/merge.csv", "--out", o / "gkp.csv"],
                ["correlate", "--gkp", d / "trade/gkp.csv", "--trade", d / "trade/trade.csv", "--gdp",
                 d / "trade/gdp.csv", "--merge", d / "trade/merge.csv", "--out", o / "corr.csv"],
                ["synth", "--kind", "panel", "--seed", 5, "--out", o / "synth"],
                ["validate", "--file", d / "panel/panel.csv", "--format", "panel", "--out", o / "valid.json"],
            ]

        bad = []
        for k, (first, second) in enumerate(zip(commands(root / "a"), commands(root / "b"))):
            codes = (run("--seed", 7, *first), run("--seed", 7, *second))
            fa = sorted(p.relative_to(root / "a") for p in (root / "a").rglob("*") if p.is_file())
            fb = sorted(p.relative_to(root / "b") for p in (root / "b").rglob("*") if p.is_file())
            same = fa == fb and all((root / "a" / p).read_bytes() == (root / "b" / p).read_bytes() for p in fa)
            if codes != (0, 0) or not same:
                bad.append(first[0])
    dt = time.perf_counter() - t0
    return report("End-to-end determinism", not bad, f"10 commands, non-identical: {bad or 'none'}", dt)


CRITERIA = [
    gkp_closed_form,
    gkp_bypass_brute_force,
    stepwise_recovery,
    diagnostics_correctness,
    percolation_detection,
    nlsmm_round_trip,
    warning_mechanism,
    evolution_forecast,
    cli_determinism,
]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.__name__ for c in CRITERIA])
def test_acceptance(criterion):
    assert criterion(), RESULTS.get(criterion.__name__, criterion.__name__)


if __name__ == "__main__":
    passed = sum(bool(c()) for c in CRITERIA)
    print(f"{passed}/{len(CRITERIA)} acceptance criteria passed")
