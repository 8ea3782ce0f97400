"""``econet`` command-line interface.

Exit codes: 0 success, 2 invalid input or arguments, 3 computation failure.
Reports are written atomically; a failed run leaves no report file behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .gkp import correlate_gdp, gdp_change, gkp_all, merge_nodes, trade_volumes
from .graph import detect_percolation_point, log_grid, percolation_sweep
from .ingest import (
    InputError,
    csv_text,
    json_text,
    read_deflator,
    read_density,
    read_edges,
    read_gdp,
    read_gkp,
    read_merge,
    read_panel,
    read_rv,
    read_series,
    validate_file,
    write_atomic,
)
from .mlr import (
    CoefficientNetwork,
    FitCriteria,
    RowFit,
    RowStatus,
    fit_gbopn,
    forecast,
    indicator_sizes,
    path_track,
    tracking_centrality,
)
from .panel import IndicatorId, deflate_panel, select_countries
from .pin import build_density_series, nlsmm_fit, resample_density, warning_signal

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3

OUTPUT_ARGS = ("out", "profile_out", "model_out")


class CliInputError(Exception):
    pass


def _meta(args) -> dict:
    # output locations do not influence results and are left out so reruns elsewhere match byte for byte
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
              if k != "func" and k not in OUTPUT_ARGS}
    return {"tool": "econet", "version": __version__, "command": args.command, "seed": args.seed, "config": config}


def _comments(args) -> list[str]:
    m = _meta(args)
    return [f"tool={m['tool']} {m['version']}", f"command={m['command']}", f"seed={m['seed']}",
            "config=" + json.dumps(m["config"], sort_keys=True, separators=(",", ":"))]


def _emit(args, path, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _need(path, what: str):
    if path is not None and not Path(path).is_file():
        raise CliInputError(f"{what} file not found: {path}")


# --- model (de)serialisation -----------------------------------------------------


def model_to_dict(coeffs: CoefficientNetwork, sizes: dict, gdp: dict | None = None) -> dict:
    score = tracking_centrality(coeffs, sizes)
    nodes = [{"id": str(i), "S": sizes.get(i), "T": score.T[i],
              "country_gdp": (gdp or {}).get(i.country)} for i in coeffs.ids]
    edges = [{"regressor": str(j), "regressand": str(i), "beta": b, "r2": r2, "v": score.edge_value[(j, i)]}
             for j, i, b, r2 in coeffs.edges()]
    rows = []
    for i in coeffs.ids:
        r = coeffs.rows[i]
        rows.append({
            "id": str(i), "status": r.status.value, "reason": r.reason,
            "support": [str(s) for s in r.support], "coefficients": list(r.coefficients),
            "intercept": r.intercept, "mean_error": r.mean_error, "edge_r2": list(r.edge_r2),
            "t_pvalues": list(r.t_pvalues), "f_pvalue": r.f_pvalue, "vif": list(r.vif),
            "condition_number": r.condition_number,
        })
    c = coeffs.criteria
    return {
        "nodes": nodes, "edges": edges, "rows": rows, "summary": coeffs.summary(),
        "fit_years": list(coeffs.fit_years),
        "criteria": {"alpha": c.alpha, "max_mean_error": c.max_mean_error,
                     "max_condition": c.max_condition, "max_vif": c.max_vif, "two_sided": c.two_sided},
    }


def model_from_dict(d: dict) -> CoefficientNetwork:
    def num(x):
        return float("nan") if x is None else float(x)

    rows = {}
    ids = []
    for r in d["rows"]:
        ind = IndicatorId.parse(r["id"])
        ids.append(ind)
        rows[ind] = RowFit(
            regressand=ind, status=RowStatus(r["status"]), reason=r.get("reason", ""),
            support=tuple(IndicatorId.parse(s) for s in r["support"]),
            coefficients=tuple(num(x) for x in r["coefficients"]), intercept=num(r["intercept"]),
            mean_error=num(r["mean_error"]), edge_r2=tuple(num(x) for x in r["edge_r2"]),
            t_pvalues=tuple(num(x) for x in r["t_pvalues"]), f_pvalue=num(r["f_pvalue"]),
            vif=tuple(num(x) for x in r["vif"]), condition_number=num(r["condition_number"]),
        )
    crit = FitCriteria(**d.get("criteria", {}))
    return CoefficientNetwork(tuple(ids), rows, tuple(d.get("fit_years", (0, 0))), crit)


def _load_model(path) -> CoefficientNetwork:
    _need(path, "model")
    try:
        with open(path, encoding="utf-8") as fh:
            return model_from_dict(json.load(fh))
    except (ValueError, KeyError, TypeError) as exc:
        raise CliInputError(f"{path}: not a GBoPN model file ({exc})") from None


# --- commands --------------------------------------------------------------------


def cmd_fit_bop(args):
    _need(args.panel, "panel")
    if args.base_year is not None and args.deflator is None:
        raise CliInputError("--base-year requires --deflator")
    _need(args.deflator, "deflator")
    panel = read_panel(args.panel)
    deflator = read_deflator(args.deflator) if args.deflator else None
    try:
        criteria = FitCriteria(args.alpha, args.max_error, args.max_cond, args.max_vif, not args.one_sided)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    if deflator is not None:
        base = args.base_year if args.base_year is not None else int(panel.years[-1])
        try:
            panel = deflate_panel(panel, deflator, base)
        except ValueError as exc:
            raise CliInputError(f"{args.deflator}: {exc}") from None
    if args.coverage is not None:
        keep = select_countries(panel, args.coverage)
        panel = panel.select(i for i in panel.ids if i.country in keep)
    coeffs = fit_gbopn(panel, criteria, holdout_last_year=args.holdout_last)
    sizes = indicator_sizes(panel.window(*coeffs.fit_years))
    model = model_to_dict(coeffs, sizes)
    model["meta"] = _meta(args)
    out = Path(args.out)
    plot_rows = [(n["id"], n["S"], n["T"]) for n in model["nodes"]]
    texts = {
        out / "gbopn.json": json_text(model),
        out / "tracking.csv": csv_text(("id", "S", "T"), plot_rows, _comments(args)),
    }
    for path, text in texts.items():
        write_atomic(path, text)


def cmd_forecast(args):
    coeffs = _load_model(args.model)
    _need(args.panel, "panel")
    panel = read_panel(args.panel)
    try:
        rows = forecast(coeffs, panel, args.from_year)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    errs = [r.relative_error for r in rows if r.relative_error is not None]
    report = {
        "meta": _meta(args),
        "from_year": args.from_year,
        "forecasts": [{"id": str(r.indicator), "predicted": r.predicted, "actual": r.actual,
                       "relative_error": r.relative_error, "skipped": r.skipped} for r in rows],
        "summary": {"count": len(errs),
                    "median_error": float(np.median(errs)) if errs else None,
                    "mean_error": float(np.mean(errs)) if errs else None},
    }
    _emit(args, args.out, json_text(report))


def cmd_track(args):
    coeffs = _load_model(args.model)
    try:
        src, dst = IndicatorId.parse(args.source), IndicatorId.parse(args.target)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    for ind in (src, dst):
        if ind not in coeffs.rows:
            raise CliInputError(f"indicator {ind} not in model")
    res = path_track(coeffs, src, dst)
    report = {"meta": _meta(args), "source": str(src), "target": str(dst), "found": res.found,
              "path": [str(p) for p in res.path] if res.found else None, "error_bound": res.error_bound}
    _emit(args, args.out, json_text(report))


def cmd_pin_density(args):
    _need(args.holdings, "holdings")
    nets = read_edges(args.holdings)
    if None in nets:
        raise CliInputError(f"{args.holdings}: every holdings record needs a year")
    density = build_density_series(nets, args.threshold, args.ref_year)
    if args.semiannual:
        density = resample_density(density)
    rows = [(str(t), r, rb) for t, r, rb in zip(density.times, density.rho, density.normalized())]
    texts = [(args.out, csv_text(("time", "rho", "rho_bar"), rows, _comments(args)))]
    if args.profile_out:
        grid = log_grid(args.sweep_min, args.sweep_max, args.per_decade)
        prow = []
        for year in sorted(nets):
            prof = percolation_sweep(nets[year], grid)
            try:
                point = detect_percolation_point(prof)
            except ValueError:
                point = None
            for e in prof.entries:
                prow.append((year, e.threshold, e.scc_nodes, e.scc_edges, e.scc_density,
                             int(point is not None and e.threshold == point)))
        header = ("year", "threshold", "scc_nodes", "scc_edges", "scc_density", "is_percolation_point")
        texts.append((args.profile_out, csv_text(header, prow, _comments(args))))
    for path, text in texts:
        _emit(args, path, text)


def cmd_nlsmm_fit(args):
    _need(args.density, "density")
    _need(args.target, "target")
    density = read_density(args.density)
    if len(density.times) >= 2 and int((density.times[1] - density.times[0]).astype(int)) == 12:
        density = resample_density(density)
    targets = read_series(args.target)
    fits = []
    model_rows = []
    for key in sorted(targets):
        fit = nlsmm_fit(density, targets[key], args.dt_grid, reference_value=args.reference_value)
        fits.append({"label": fit.label, "kind": fit.kind.value, "a_r": fit.a_r, "gamma1": fit.gamma1,
                     "gamma2": fit.gamma2, "m": fit.memory_ratio, "delta_t": fit.delta_t, "p_r": fit.p_r,
                     "verdict": fit.verdict.value, "reference_value": fit.reference_value,
                     "p_r_by_delta_t": {str(k): v for k, v in sorted(fit.scan.items())}})
        model_rows += [(str(t), fit.kind.value, fit.label, v) for t, v in zip(fit.times, fit.model)]
    texts = [(args.out, json_text({"meta": _meta(args), "fits": fits}))]
    if args.model_out:
        texts.append((args.model_out, csv_text(("time", "kind", "label", "value_usd"), model_rows, _comments(args))))
    for path, text in texts:
        _emit(args, path, text)


def cmd_warn(args):
    _need(args.model_series, "model series")
    _need(args.rv, "reference variable")
    series = read_series(args.model_series)
    rv_t, rv_v = read_rv(args.rv)
    out = []
    for key in sorted(series):
        res = warning_signal(series[key], rv_t, rv_v, args.fmax)
        out.append({"kind": key[0], "label": key[1], "f_max": args.fmax,
                    "warnings": [str(t) for t in res.warnings],
                    "first_warning": None if res.first is None else str(res.first)})
    _emit(args, args.out, json_text({"meta": _meta(args), "signals": out}))


def _trade_networks(args):
    _need(args.trade, "trade")
    _need(args.merge, "merge map")
    nets = read_edges(args.trade)
    if None in nets:
        raise CliInputError(f"{args.trade}: every trade record needs a year")
    if args.merge:
        groups = read_merge(args.merge)
        nets = {y: merge_nodes(n, groups) for y, n in nets.items()}
    return nets


def cmd_gkp(args):
    nets = _trade_networks(args)
    rows = []
    for y in sorted(nets):
        for country, g in sorted(gkp_all(nets[y]).items()):
            rows.append((country, y, g))
    _emit(args, args.out, csv_text(("country", "year", "gkp"), rows, _comments(args)))


def cmd_correlate(args):
    _need(args.gkp, "gkp")
    _need(args.gdp, "gdp")
    g = read_gkp(args.gkp)
    nets = _trade_networks(args)
    gdp = read_gdp(args.gdp)
    vols = {y: trade_volumes(n) for y, n in nets.items()}
    rows = []
    for country in sorted(g):
        levels = gdp.get(country, {})
        years = [y for y in sorted(g[country])
                 if y in levels and y - 1 in levels and y in vols and country in vols[y][0]]
        if len(years) < 3:
            rows.append((country, None, None, None))
            continue
        change = np.concatenate([gdp_change([levels[y - 1], levels[y]], relative=not args.absolute_change)
                                 for y in years])
        r = correlate_gdp(country, [g[country][y] for y in years], [vols[y][0][country] for y in years],
                          [vols[y][1][country] for y in years], change)
        rows.append((country, r.corr_gkp, r.corr_imports, r.corr_exports))
    _emit(args, args.out, csv_text(("country", "corr_gkp", "corr_imports", "corr_exports"), rows, _comments(args)))


def cmd_synth(args):
    from . import synth

    out = Path(args.out)
    cm = _comments(args)
    texts = {}
    try:
        if args.kind == "panel":
            panel, truth = synth.planted_panel(args.seed, args.indicators, args.planted, args.years,
                                               noise=args.noise if args.noise is not None else 0.001)
            rows = [(i.country, i.account, i.direction, int(y), v)
                    for i, vals in zip(panel.ids, panel.values) for y, v in zip(panel.years, vals)]
            texts[out / "panel.csv"] = csv_text(("country", "account", "direction", "year", "value_usd"),
                                                [r[:4] + (repr(float(r[4])),) for r in rows], cm)
        elif args.kind == "pin":
            nets, deriv, (gt, gv), truth = synth.pin_dataset(args.seed, noise=args.noise or 0.0)
            rows = [(s, t, y, repr(w)) for y in sorted(nets) for (s, t), w in sorted(nets[y].edges.items())]
            texts[out / "holdings.csv"] = csv_text(("source", "target", "year", "value_usd"), rows, cm)
            texts[out / "derivatives.csv"] = csv_text(
                ("time", "kind", "label", "value_usd"),
                [(str(t), deriv.kind.value, deriv.label, repr(float(v))) for t, v in zip(deriv.times, deriv.values)], cm)
            texts[out / "world_gdp.csv"] = csv_text(("time", "value_usd"),
                                                    [(str(t), repr(float(v))) for t, v in zip(gt, gv)], cm)
        else:
            nets, gdp, groups, truth = synth.trade_dataset(args.seed, noise=args.noise if args.noise is not None else 0.2)
            rows = [(s, t, y, repr(w)) for y in sorted(nets) for (s, t), w in sorted(nets[y].edges.items())]
            texts[out / "trade.csv"] = csv_text(("source", "target", "year", "value_usd"), rows, cm)
            texts[out / "gdp.csv"] = csv_text(("country", "year", "gdp_usd"),
                                              [(c, y, repr(v)) for c in sorted(gdp) for y, v in sorted(gdp[c].items())], cm)
            texts[out / "merge.csv"] = csv_text(("member", "group"), sorted(groups.items()), cm)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    truth["meta"] = _meta(args)
    texts[out / "truth.json"] = json_text(truth)
    for path, text in texts.items():
        write_atomic(path, text)


def cmd_validate(args):
    _need(args.file, "input")
    report = validate_file(args.file, args.format)
    body = report.as_dict()
    body["meta"] = _meta(args)
    _emit(args, args.out, json_text(body))
    return EXIT_OK if report.ok else EXIT_INPUT


# --- argument parsing ----------------------------------------------------------------


def _dt_grid(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --dt-grid {text!r}") from None
    if any(v % 6 for v in vals):
        raise argparse.ArgumentTypeError("time shifts must be multiples of 6 months")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="econet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"econet {__version__}")
    p.add_argument("--seed", type=int, default=0, help="recorded in every report (default 0)")
    # --seed is accepted before or after the command name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit-bop", parents=[common], help="fit the balance-of-payments network")
    s.add_argument("--panel", required=True)
    s.add_argument("--deflator")
    s.add_argument("--base-year", type=int)
    s.add_argument("--holdout-last", action="store_true")
    s.add_argument("--coverage", type=float, help="keep only countries selected by the cumulative-share rule")
    s.add_argument("--alpha", type=float, default=0.025)
    s.add_argument("--max-error", type=float, default=0.10)
    s.add_argument("--max-cond", type=float, default=10.0)
    s.add_argument("--max-vif", type=float, default=5.0)
    s.add_argument("--one-sided", action="store_true")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_fit_bop)

    s = sub.add_parser("forecast", parents=[common], help="one-step forecast with a fitted model")
    s.add_argument("--model", required=True)
    s.add_argument("--panel", required=True)
    s.add_argument("--from-year", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_forecast)

    s = sub.add_parser("track", parents=[common], help="shortest tracking path between two indicators")
    s.add_argument("--model", required=True)
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_track)

    s = sub.add_parser("pin-density", parents=[common], help="edge density at the percolation threshold")
    s.add_argument("--holdings", required=True)
    s.add_argument("--threshold", type=float, default=52e6)
    s.add_argument("--ref-year", type=int)
    s.add_argument("--semiannual", action="store_true")
    s.add_argument("--profile-out", help="also write per-year percolation sweeps here")
    s.add_argument("--sweep-min", type=float, default=1e6)
    s.add_argument("--sweep-max", type=float, default=1e9)
    s.add_argument("--per-decade", type=int, default=50)
    s.add_argument("--out")
    s.set_defaults(func=cmd_pin_density)

    s = sub.add_parser("nlsmm-fit", parents=[common], help="fit the memory model to derivative series")
    s.add_argument("--density", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--dt-grid", type=_dt_grid, default=(-12, -6, 0, 6, 12))
    s.add_argument("--reference-value", type=float)
    s.add_argument("--model-out", help="write fitted model series (series CSV format)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_nlsmm_fit)

    s = sub.add_parser("warn", parents=[common], help="warning signals against a reference variable")
    s.add_argument("--model-series", required=True)
    s.add_argument("--rv", required=True)
    s.add_argument("--fmax", type=float, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_warn)

    s = sub.add_parser("gkp", parents=[common], help="gate-keeping potential per country and year")
    s.add_argument("--trade", required=True)
    s.add_argument("--merge")
    s.add_argument("--out")
    s.set_defaults(func=cmd_gkp)

    s = sub.add_parser("correlate", parents=[common], help="correlate GDP change with GKP, imports and exports")
    s.add_argument("--gkp", required=True)
    s.add_argument("--trade", required=True)
    s.add_argument("--gdp", required=True)
    s.add_argument("--merge")
    s.add_argument("--absolute-change", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("synth", parents=[common], help="generate synthetic data with planted truth")
    s.add_argument("--kind", choices=("panel", "pin", "trade"), required=True)
    s.add_argument("--indicators", type=int, default=40)
    s.add_argument("--planted", type=int, default=30)
    s.add_argument("--years", type=int, default=10)
    s.add_argument("--noise", type=float)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("validate", parents=[common], help="check an input file")
    s.add_argument("--file", required=True)
    s.add_argument("--format", choices=("panel", "edges", "series"), required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        code = args.func(args)
    except (CliInputError, InputError) as exc:
        print(f"econet {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ArithmeticError) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"econet {args.command}: {module}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
