import numpy as np
import pytest

from econet.mlr import (
    CoefficientNetwork,
    FitCriteria,
    RowFit,
    RowStatus,
    audit_row,
    fit_gbopn,
    forecast,
    indicator_sizes,
    path_track,
    stepwise_fit,
    tracking_centrality,
)
from econet.panel import IndicatorId, IndicatorPanel, PanelError
from econet.synth import noise_regressand_panel, planted_panel


def ind(k, acct="goods", d="in"):
    return IndicatorId(f"C{k:02d}", acct, d)


def driver_rows(rng, n_rows, T, vol=0.06):
    out = []
    for _ in range(n_rows):
        steps = rng.uniform(-0.02, 0.1) + vol * rng.standard_normal(T)
        out.append(10 ** rng.uniform(9, 11) * np.exp(np.cumsum(steps)))
    return np.array(out)


def test_planted_single_relation():
    rng = np.random.default_rng(7)
    T = 10
    X = driver_rows(rng, 6, T)
    y = np.empty(T)
    y[1:] = 0.7 * X[0, :-1] + 5
    y[0] = 0.7 * X[0, 0] + 5
    y = y + 0.001 * y.mean() * rng.standard_normal(T)
    ids = tuple(ind(k) for k in range(7))
    panel = IndicatorPanel(ids, np.arange(2003, 2003 + T), np.vstack([y, X]))
    row = stepwise_fit(panel, ids[0])
    assert row.status is RowStatus.ACCEPTED
    assert row.support == (ids[1],)
    assert row.coefficients[0] == pytest.approx(0.7, abs=0.02)
    assert audit_row(row, FitCriteria()) == []


def test_collinear_pair_gives_single_regressor():
    rng = np.random.default_rng(11)
    T = 10
    X = driver_rows(rng, 5, T)
    x3 = X[0] * (1 + 0.002 * rng.standard_normal(T))
    assert np.corrcoef(X[0], x3)[0, 1] > 0.99
    y = np.empty(T)
    y[1:] = X[0, :-1] + x3[:-1]
    y[0] = y[1]
    ids = tuple(ind(k) for k in range(7))
    panel = IndicatorPanel(ids, np.arange(2003, 2003 + T), np.vstack([y, X, x3]))
    row = stepwise_fit(panel, ids[0])
    assert row.status is RowStatus.ACCEPTED
    assert len(row.support) == 1
    assert set(row.support) <= {ids[1], ids[6]}


@pytest.mark.parametrize("seed", range(20))
def test_noise_regressand_rejected(seed):
    panel, target = noise_regressand_panel(seed)
    assert stepwise_fit(panel, target).status is not RowStatus.ACCEPTED


def test_noise_rejection_rate():
    rejected = sum(stepwise_fit(*noise_regressand_panel(s)).status is not RowStatus.ACCEPTED for s in range(200))
    assert rejected >= 190


def test_single_indicator_unfittable():
    panel = IndicatorPanel((ind(0),), np.arange(2000, 2010), [np.arange(1.0, 11.0)])
    net = fit_gbopn(panel)
    assert net.rows[ind(0)].status is RowStatus.UNFITTABLE
    assert net.summary()["unfittable"] == 1


def test_missing_year_excluded():
    rng = np.random.default_rng(0)
    vals = driver_rows(rng, 4, 8)
    vals[2, 3] = np.nan
    ids = tuple(ind(k) for k in range(4))
    panel = IndicatorPanel(ids, np.arange(2000, 2008), vals)
    assert stepwise_fit(panel, ids[2]).status is RowStatus.UNFITTABLE
    net = fit_gbopn(panel)
    assert all(ids[2] not in r.support for r in net.rows.values())


def test_unknown_regressand():
    panel, _ = planted_panel(0, n_indicators=10, n_planted=5)
    with pytest.raises(PanelError):
        stepwise_fit(panel, IndicatorId("XX", "goods", "in"))


def planted_rows(net, truth):
    return {IndicatorId.parse(r["regressand"]): r for r in truth["relations"]}


@pytest.mark.parametrize("seed", range(3))
def test_planted_recovery(seed):
    panel, truth = planted_panel(seed)
    net = fit_gbopn(panel)
    hits = 0
    for i, rel in planted_rows(net, truth).items():
        row = net.rows[i]
        if (row.accepted and row.support == (IndicatorId.parse(rel["regressor"]),)
                and abs(row.coefficients[0] - rel["beta"]) <= 0.02):
            hits += 1
    assert hits >= 27


@pytest.mark.parametrize("seed", range(3))
def test_accepted_rows_pass_audit(seed):
    panel, _ = planted_panel(seed, noise=0.02)
    crit = FitCriteria()
    net = fit_gbopn(panel, crit)
    for row in net.rows.values():
        if row.accepted:
            assert audit_row(row, crit) == []


def test_noiseless_panel_exact_support():
    panel, truth = planted_panel(4, noise=0.0)
    net = fit_gbopn(panel)
    for i, rel in planted_rows(net, truth).items():
        assert net.rows[i].support == (IndicatorId.parse(rel["regressor"]),)
        assert net.rows[i].coefficients[0] == pytest.approx(rel["beta"], rel=1e-9)


def test_holdout_drops_last_year():
    panel, _ = planted_panel(0)
    net = fit_gbopn(panel, holdout_last_year=True)
    assert net.fit_years == (int(panel.years[0]), int(panel.years[-2]))
    with pytest.raises(PanelError):
        fit_gbopn(panel.window(2002, 2005), holdout_last_year=True)


def test_criteria_validation():
    with pytest.raises(ValueError):
        FitCriteria(alpha=0.0)


# --- forecast ------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_forecast_noiseless(seed):
    panel, truth = planted_panel(seed, noise=0.0)
    net = fit_gbopn(panel, holdout_last_year=True)
    fc = {f.indicator: f for f in forecast(net, panel, int(panel.years[-2]))}
    for i in planted_rows(net, truth):
        assert fc[i].relative_error < 1e-9


def test_forecast_noisy_median():
    meds = []
    for seed in range(5):
        panel, _ = planted_panel(seed, noise=0.01)
        net = fit_gbopn(panel, holdout_last_year=True)
        errs = [f.relative_error for f in forecast(net, panel, int(panel.years[-2])) if f.relative_error is not None]
        meds.append(np.median(errs))
    assert np.median(meds) < 0.05


def test_forecast_last_year_has_no_actual():
    panel, _ = planted_panel(0, noise=0.0)
    net = fit_gbopn(panel)
    fc = forecast(net, panel, int(panel.years[-1]))
    assert fc and all(f.actual is None and f.relative_error is None for f in fc)


# --- tracking centrality and paths ------------------------------------------------------------


def hand_network(edges, errors):
    """``edges``: (regressor, regressand, beta, r2); ``errors``: regressand -> mean error."""
    nodes = sorted({e[0] for e in edges} | {e[1] for e in edges} | set(errors))
    rows = {}
    for n in nodes:
        inc = [e for e in edges if e[1] == n]
        if inc:
            rows[n] = RowFit(n, RowStatus.ACCEPTED, support=tuple(e[0] for e in inc),
                             coefficients=tuple(e[2] for e in inc), edge_r2=tuple(e[3] for e in inc),
                             mean_error=errors.get(n, 0.01))
        else:
            rows[n] = RowFit(n, RowStatus.REJECTED)
    return CoefficientNetwork(tuple(nodes), rows)


def test_tracking_nothing_is_zero():
    net = hand_network([(ind(0), ind(1), 1.0, 0.5)], {})
    score = tracking_centrality(net, {ind(0): 3.0, ind(1): 4.0})
    assert score.T[ind(1)] == 0.0


def test_tracking_single_edge():
    net = hand_network([(ind(0), ind(1), 1.0, 1.0)], {})
    assert tracking_centrality(net, {ind(0): 3.0, ind(1): 4.0}).T[ind(0)] == 4.0


@pytest.mark.parametrize("seed", range(10))
def test_tracking_matches_double_loop(seed):
    rng = np.random.default_rng(seed)
    n = 15
    nodes = [ind(k) for k in range(n)]
    beta = np.where(rng.random((n, n)) < 0.15, rng.normal(size=(n, n)), 0.0)
    np.fill_diagonal(beta, 0.0)
    r2 = rng.uniform(size=(n, n))
    S = rng.uniform(1, 100, size=n)
    edges = [(nodes[j], nodes[i], beta[i, j], r2[i, j]) for i in range(n) for j in range(n) if beta[i, j] != 0]
    net = hand_network(edges, {v: 0.01 for v in nodes})
    T = tracking_centrality(net, dict(zip(nodes, S))).T
    for j in range(n):
        expected = 0.0
        for i in range(n):
            if beta[i, j] != 0:
                expected += np.sqrt(r2[i, j]) * S[i]
        assert T[nodes[j]] == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_path_direct_edge():
    net = hand_network([(ind(0), ind(1), 1.0, 0.9)], {ind(1): 0.045})
    res = path_track(net, ind(0), ind(1))
    assert res.path == (ind(0), ind(1))
    assert res.error_bound == pytest.approx(0.045)


def test_path_two_edges():
    net = hand_network([(ind(0), ind(1), 1.0, 0.9), (ind(1), ind(2), 1.0, 0.9)], {ind(1): 0.02, ind(2): 0.03})
    res = path_track(net, ind(0), ind(2))
    assert res.path == (ind(0), ind(1), ind(2))
    assert res.error_bound == pytest.approx(0.05)


def test_path_self_and_missing():
    net = hand_network([(ind(0), ind(1), 1.0, 0.9)], {})
    assert path_track(net, ind(0), ind(0)).error_bound == 0.0
    res = path_track(net, ind(1), ind(0))
    assert not res.found and res.error_bound is None


def all_simple_paths(succ, src, dst, path=None):
    path = path or (src,)
    if path[-1] == dst:
        yield path
        return
    for nxt in succ.get(path[-1], ()):
        if nxt not in path:
            yield from all_simple_paths(succ, src, dst, path + (nxt,))


@pytest.mark.parametrize("seed", range(15))
def test_path_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = 12
    nodes = [ind(k) for k in range(n)]
    edges = [(nodes[a], nodes[b], 1.0, 0.5) for a in range(n) for b in range(n) if a != b and rng.random() < 0.2]
    errors = {v: float(rng.uniform(0.001, 0.1)) for v in nodes}
    net = hand_network(edges, errors)
    succ = {}
    for a, b, *_ in edges:
        succ.setdefault(a, []).append(b)
    for src in nodes[:4]:
        for dst in nodes[-4:]:
            paths = list(all_simple_paths(succ, src, dst))
            res = path_track(net, src, dst)
            if not paths:
                assert not res.found
                continue
            best = min((len(p), sum(errors[v] for v in p[1:])) for p in paths)
            assert len(res.path) == best[0]
            assert res.error_bound == pytest.approx(best[1], rel=1e-12)


def test_sizes_are_time_averages():
    panel, _ = planted_panel(0, n_indicators=10, n_planted=5)
    S = indicator_sizes(panel)
    assert S[panel.ids[0]] == pytest.approx(panel.values[0].mean())
