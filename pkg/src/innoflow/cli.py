"""Command-line front end.

Every command writes its artifacts plus a ``manifest.txt`` recording the
command, all parameter values, input digests, seed and tool version. The
manifest is the only file carrying a wall-clock timestamp; all other outputs
are bit-reproducible given the same inputs and seed.

Exit codes: 0 success, 2 usage, 3 data validation, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, econ, metrics, netcore, predict, pwa, stats
from .errors import DataValidationError, NumericError

USAGE_EXIT = 2
DATA_EXIT = 3
NUMERIC_EXIT = 4


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def write_manifest(out_dir: Path, command: str, params: dict, inputs: dict[str, Path]) -> None:
    lines = [
        f"command={command}",
        f"version={__version__}",
        f"timestamp={datetime.now(timezone.utc).isoformat()}",
    ]
    for key in sorted(params):
        lines.append(f"param.{key}={params[key]}")
    for name in sorted(inputs):
        lines.append(f"input.{name}.path={inputs[name]}")
        lines.append(f"input.{name}.sha256={_digest(Path(inputs[name]))}")
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n")


def _out_dir(arg: str) -> Path:
    path = Path(arg)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_log(args) -> netcore.TemporalEdgeLog:
    if not args.edge_log or not args.universe:
        raise DataValidationError("--edge-log and --universe are required")
    return netcore.load_edge_log(args.edge_log, args.universe)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        out.writerows(rows)


def _write_ccdf(path: Path, series: netcore.CcdfSeries) -> None:
    _write_csv(path, ["value", "prob"], [(repr(v), repr(p)) for v, p in zip(series.values, series.probs)])


# ---------------------------------------------------------------------------
# Commands


def cmd_simulate(args) -> int:
    out = _out_dir(args.out)
    if args.profile == "sweden":
        config = pwa.sweden_profile(args.horizon, args.seed, args.weight_mode)
        if args.alpha is not None or args.lam is not None or args.m is not None:
            config = pwa.SimConfig(
                alpha=args.alpha if args.alpha is not None else config.alpha,
                lam=args.lam if args.lam is not None else config.lam,
                m=args.m if args.m is not None else config.m,
                edge_universe=config.edge_universe,
                horizon=args.horizon,
                seed=args.seed,
                weight_mode=args.weight_mode,
            )
    else:
        if args.universe:
            nodes, eligible = netcore.load_universe(args.universe)
            universe = pwa.full_edge_universe(nodes, eligible)
        else:
            nodes = tuple(f"I{k:02d}" for k in range(1, args.nodes + 1))
            universe = pwa.full_edge_universe(nodes, nodes[: args.sources])
        if args.alpha is None or args.lam is None or args.m is None:
            raise DataValidationError("--alpha, --lambda and --m are required without --profile")
        config = pwa.SimConfig(
            alpha=args.alpha,
            lam=args.lam,
            m=args.m,
            edge_universe=universe,
            horizon=args.horizon,
            seed=args.seed,
            weight_mode=args.weight_mode,
        )
    log = pwa.simulate(config)
    netcore.save_edge_log(log, out / "edges.csv")
    netcore.save_universe(log, out / "universe.csv")
    params = dict(
        alpha=config.alpha,
        **{"lambda": config.lam},
        m=config.m,
        horizon=config.horizon,
        seed=config.seed,
        weight_mode=config.weight_mode,
        edges=len(config.edge_universe),
        profile=args.profile or "",
    )
    write_manifest(out, "simulate", params, {})
    print(f"simulate: wrote {log.n_events} events to {out / 'edges.csv'}")
    return 0


def cmd_structure(args) -> int:
    out = _out_dir(args.out)
    log = _load_log(args)
    until = args.until if args.until is not None else log.times[-1]
    g = netcore.snapshot(log, until)
    mask = netcore.eligible_mask(log)

    s_out = g.s_out[g.s_out > 0]
    s_in = g.s_in[g.s_in > 0]
    if s_out.size:
        _write_ccdf(out / "strength_out_ccdf.csv", netcore.ccdf(s_out))
    if s_in.size:
        _write_ccdf(out / "strength_in_ccdf.csv", netcore.ccdf(s_in))
    weights = netcore.positive_edge_weights(g, mask)
    series = netcore.ccdf(weights)
    _write_ccdf(out / "weight_ccdf.csv", series)

    alpha, lam = args.alpha, args.lam
    fit_note = ""
    if alpha is None or lam is None:
        fit = stats.two_step_pwa_fit(log)
        alpha = alpha if alpha is not None else min(max(fit.alpha_hat, 1e-3), 1.0)
        lam = lam if lam is not None else min(max(fit.lambda_hat, 0.5), 0.999)
        fit_note = f"alpha/lambda from two-step fit: {fit.alpha_hat:.4f}, {fit.lambda_hat:.4f}"
    grid = np.geomspace(max(series.values[0], 1e-9), series.values[-1], 200)
    tail_pts = [(v, p) for v, p in zip(series.values, series.probs) if v >= args.tail_cutoff]
    rows = []
    linear_fn = pwa.theoretical_ccdf_linear(alpha, 1.0)
    if tail_pts:
        scale_lin = float(np.exp(np.mean([np.log(p) - np.log(linear_fn(v)) for v, p in tail_pts])))
    else:
        scale_lin = 1.0
    linear_fn = pwa.theoretical_ccdf_linear(alpha, scale_lin)
    sub_fn = None
    if 0.5 <= lam < 1:
        mu = pwa.estimate_mu(log, lam)
        kappa = pwa.kappa_from(alpha, args.m, mu)
        if kappa > 0:
            base = pwa.theoretical_ccdf_sublinear(lam, kappa, 1.0)
            if tail_pts:
                scale_sub = float(np.exp(np.mean([np.log(p) - np.log(base(v)) for v, p in tail_pts])))
            else:
                scale_sub = 1.0
            sub_fn = pwa.theoretical_ccdf_sublinear(lam, kappa, scale_sub)
    for v in grid:
        rows.append(
            (
                repr(float(v)),
                repr(float(linear_fn(v))),
                repr(float(sub_fn(v))) if sub_fn is not None else "",
            )
        )
    _write_csv(out / "weight_ccdf_overlays.csv", ["value", "linear", "sublinear"], rows)

    profile = netcore.clustering_profile(g)
    _write_csv(
        out / "clustering.csv",
        ["node", "degree", "coefficient"],
        [(p.node, p.degree, "" if p.coefficient is None else repr(p.coefficient)) for p in profile],
    )
    summary = []
    try:
        summary.append(f"global_transitivity={netcore.global_transitivity(g)!r}")
    except DataValidationError as exc:
        summary.append(f"global_transitivity=undefined ({exc})")
    partition = netcore.greedy_communities(g)
    _write_csv(
        out / "communities.csv",
        ["node", "community"],
        sorted(partition.assignment.items()),
    )
    summary.append(f"modularity={partition.modularity!r}")
    summary.append(f"n_communities={len(set(partition.assignment.values()))}")
    summary.append(f"total_weight={g.total_weight!r}")
    if fit_note:
        summary.append(fit_note)
    (out / "structure_summary.txt").write_text("\n".join(summary) + "\n")
    params = dict(until=until, alpha=alpha, **{"lambda": lam}, m=args.m, tail_cutoff=args.tail_cutoff)
    write_manifest(out, "structure", params, {"edge_log": args.edge_log, "universe": args.universe})
    print(f"structure: wrote figures data to {out}")
    return 0


def cmd_metrics(args) -> int:
    out = _out_dir(args.out)
    log = _load_log(args)
    until = args.until if args.until is not None else log.times[-1]
    g = netcore.snapshot(log, until)
    mask = netcore.eligible_mask(log)
    names = [p.strip() for p in args.predictors.split(",") if p.strip()]
    predictors = predict.make_predictors(names, beta=args.beta, seed=args.seed)
    for name, fn in predictors.items():
        scores = fn(g, mask)
        rows = []
        for i, src in enumerate(g.nodes):
            rows.append([src] + [repr(float(v)) for v in scores.scores[i]])
        _write_csv(out / f"scores_{name}.csv", [""] + list(g.nodes), rows)
    params = dict(until=until, predictors=",".join(names), beta=args.beta, seed=args.seed)
    write_manifest(out, "metrics", params, {"edge_log": args.edge_log, "universe": args.universe})
    print(f"metrics: wrote {len(names)} score matrices to {out}")
    return 0


def cmd_predict(args) -> int:
    out = _out_dir(args.out)
    log = _load_log(args)
    names = [p.strip() for p in args.predictors.split(",") if p.strip()]
    predictors = predict.make_predictors(names, beta=args.beta, seed=args.seed)
    outcomes, notes = predict.rolling_eval(log, predictors)
    _write_csv(
        out / "rolling_eval.csv",
        ["year", "predictor", "n", "tp", "fp", "tn", "fn", "accuracy", "precision"],
        [
            (
                o.year,
                o.predictor,
                o.n,
                o.counts.tp,
                o.counts.fp,
                o.counts.tn,
                o.counts.fn,
                repr(o.accuracy),
                repr(o.precision),
            )
            for o in outcomes
        ],
    )
    if notes:
        (out / "rolling_eval_notes.txt").write_text("\n".join(notes) + "\n")
    params = dict(predictors=",".join(names), beta=args.beta, seed=args.seed)
    write_manifest(out, "predict", params, {"edge_log": args.edge_log, "universe": args.universe})
    print(f"predict: wrote {len(outcomes)} year/predictor rows to {out}")
    return 0


def cmd_stimulus(args) -> int:
    out = _out_dir(args.out)
    log = _load_log(args)
    panel = predict.stimulus_panel(log, args.period_length)
    _write_csv(
        out / "stimulus_panel.csv",
        ["industry", "period", "period_start", "period_end", "x", "xf_hat", "xb_hat"],
        [
            (r.industry, r.period, r.period_start, r.period_end, r.x, repr(r.xf_hat), repr(r.xb_hat))
            for r in panel.rows
        ],
    )
    params = dict(period_length=args.period_length)
    write_manifest(out, "stimulus", params, {"edge_log": args.edge_log, "universe": args.universe})
    print(f"stimulus: wrote {len(panel.rows)} panel rows to {out}")
    return 0


def cmd_econ(args) -> int:
    out = _out_dir(args.out)
    mapping = econ.SectorMapping.load(args.map) if args.map else None
    inputs = {"table": args.table}
    if args.map:
        inputs["map"] = args.map
    if args.kind == "skill":
        matrix = econ.load_exogenous_matrix(args.table, "skill", mapping)
    else:
        table = econ.load_io_table(args.table, mapping)
        if args.kind == "leontief":
            matrix = econ.leontief(table.a, table.sector_ids)
        elif args.kind == "rd_flows":
            matrix = econ.rd_flows(table)
        elif args.kind == "los":
            matrix = econ.los_index(table.a, table.sector_ids, args.los_orientation)
        elif args.kind == "gravity":
            matrix = econ.gravity(table.y, args.gravity_g, table.sector_ids)
        else:
            raise DataValidationError(f"unknown kind {args.kind!r}")
    if args.drop_diagonal:
        matrix = matrix.drop_diagonal()
    econ.save_proximity(matrix, out / f"proximity_{args.kind}.csv")
    params = dict(
        kind=args.kind,
        drop_diagonal=args.drop_diagonal,
        gravity_g=args.gravity_g,
        los_orientation=args.los_orientation,
    )
    write_manifest(out, "econ", params, inputs)
    print(f"econ: wrote proximity_{args.kind}.csv to {out}")
    return 0


def _emit_result(out: Path, stem: str, result: stats.RegressionResult) -> None:
    (out / f"{stem}.txt").write_text(result.summary() + "\n")
    (out / f"{stem}.kv").write_text(result.key_values() + "\n")
    print(result.summary())


def cmd_fit(args) -> int:
    out = _out_dir(args.out)
    log = _load_log(args)
    inputs = {"edge_log": args.edge_log, "universe": args.universe}
    if args.fit_command == "pwa-two-step":
        fit = stats.two_step_pwa_fit(log, se_type=args.se_type)
        text = [
            f"lambda_hat={fit.lambda_hat!r}",
            f"alpha_hat={fit.alpha_hat!r}",
            f"n_years={fit.n_years}",
        ]
        (out / "two_step.kv").write_text(
            "\n".join(
                text
                + ["[step1]"]
                + [fit.step1.key_values()]
                + ["[step2]"]
                + [fit.step2.key_values()]
            )
            + "\n"
        )
        (out / "two_step.txt").write_text(
            f"step 1 (attachment exponent)\n{fit.step1.summary()}\n\n"
            f"step 2 (preferential share)\n{fit.step2.summary()}\n"
        )
        print(f"lambda_hat={fit.lambda_hat:.4f} alpha_hat={fit.alpha_hat:.4f}")
        write_manifest(out, "fit pwa-two-step", dict(se_type=args.se_type), inputs)
        return 0
    if args.fit_command == "evolution":
        proximities = []
        for spec in args.proximity or []:
            if "=" not in spec:
                raise DataValidationError("--proximity expects KIND=PATH")
            kind, path = spec.split("=", 1)
            proximities.append(econ.load_exogenous_matrix(path, kind.strip()))
            inputs[f"proximity_{kind.strip()}"] = path
        result = stats.evolution_regression(
            log, proximities, spec=args.spec, effects=args.effects, se_type=args.se_type
        )
        _emit_result(out, f"evolution_{args.spec}", result)
        write_manifest(
            out,
            "fit evolution",
            dict(spec=args.spec, effects=args.effects, se_type=args.se_type),
            inputs,
        )
        return 0
    if args.fit_command == "stimulus":
        panel = predict.stimulus_panel(log, args.period_length)
        result = stats.stimulus_regression(
            panel, effects=args.effects, time_dummies_on=args.time_dummies, se_type=args.se_type
        )
        _emit_result(out, "stimulus_regression", result)
        write_manifest(
            out,
            "fit stimulus",
            dict(
                period_length=args.period_length,
                effects=args.effects,
                time_dummies=args.time_dummies,
                se_type=args.se_type,
            ),
            inputs,
        )
        return 0
    raise DataValidationError(f"unknown fit subcommand {args.fit_command!r}")


def cmd_report(args) -> int:
    """Desk-scale end-to-end run on simulated data."""
    out = _out_dir(args.out)
    horizon = args.horizon
    config = pwa.sweden_profile(horizon, args.seed)
    log = pwa.simulate(config)
    yearly = netcore.rebin_times(log, args.steps_per_year, start_year=1971)
    netcore.save_edge_log(yearly, out / "edges.csv")
    netcore.save_universe(yearly, out / "universe.csv")

    ns = argparse.Namespace(
        edge_log=out / "edges.csv",
        universe=out / "universe.csv",
        until=None,
        alpha=config.alpha,
        lam=config.lam,
        m=config.m,
        tail_cutoff=5.0,
        out=out / "structure",
    )
    cmd_structure(ns)

    g = netcore.snapshot(yearly, yearly.times[-1])
    radius = metrics.spectral_radius(metrics.normalized_weights(g))
    beta = min(20.0, 0.5 / radius) if radius > 0 else 20.0

    ns = argparse.Namespace(
        edge_log=out / "edges.csv",
        universe=out / "universe.csv",
        until=None,
        predictors="pwa,pa,jaccard,adamic_adar,katz",
        beta=beta,
        seed=args.seed,
        out=out / "metrics",
    )
    cmd_metrics(ns)

    ns = argparse.Namespace(
        edge_log=out / "edges.csv",
        universe=out / "universe.csv",
        predictors="pwa,pa,jaccard,adamic_adar,katz,random",
        beta=beta,
        seed=args.seed,
        out=out / "predict",
    )
    cmd_predict(ns)

    ns = argparse.Namespace(
        edge_log=out / "edges.csv",
        universe=out / "universe.csv",
        period_length=5,
        out=out / "stimulus",
    )
    cmd_stimulus(ns)

    fit = stats.two_step_pwa_fit(yearly)
    (out / "two_step.kv").write_text(
        f"lambda_hat={fit.lambda_hat!r}\nalpha_hat={fit.alpha_hat!r}\nn_years={fit.n_years}\n"
    )

    panel = predict.stimulus_panel(yearly, 5)
    result = stats.stimulus_regression(panel)
    (out / "stimulus_regression.kv").write_text(result.key_values() + "\n")

    rng = np.random.default_rng(args.seed)
    n = g.n
    a = rng.random((n, n))
    a *= 0.7 / a.sum(axis=1, keepdims=True)
    table = econ.IoTable(
        g.nodes,
        a,
        x=rng.uniform(50, 150, n),
        y=rng.uniform(10, 30, n),
        r=rng.uniform(0, 5, n),
        q=rng.uniform(50, 150, n),
    )
    proximities = [
        econ.leontief(table.a, table.sector_ids).drop_diagonal(),
        econ.rd_flows(table),
        econ.los_index(table.a, table.sector_ids),
        econ.gravity(table.y, 1.0, table.sector_ids),
    ]
    for prox in proximities:
        econ.save_proximity(prox, out / f"proximity_{prox.kind}.csv")
    evo = stats.evolution_regression(yearly, proximities, spec="linear")
    (out / "evolution_linear.kv").write_text(evo.key_values() + "\n")
    evo_log = stats.evolution_regression(yearly, proximities, spec="loglog")
    (out / "evolution_loglog.kv").write_text(evo_log.key_values() + "\n")

    params = dict(seed=args.seed, horizon=horizon, steps_per_year=args.steps_per_year, katz_beta=beta)
    write_manifest(out, "report", params, {})
    print(f"report: full desk-scale run written to {out}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="innoflow",
        description="Innovation-flow network simulation, estimation and link prediction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_log_args(p):
        p.add_argument("--edge-log", help="edge log CSV (year,source,target,weight[,event_id])")
        p.add_argument("--universe", help="node universe file (id[,eligible_source])")

    p = sub.add_parser("simulate", help="run the assignment process")
    p.add_argument("--profile", choices=["sweden"], default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--weight-mode", choices=[pwa.UNIT, pwa.FRACTIONAL], default=pwa.FRACTIONAL)
    p.add_argument("--universe", default=None, help="optional node universe file")
    p.add_argument("--nodes", type=int, default=98)
    p.add_argument("--sources", type=int, default=65)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("structure", help="strength/weight CCDFs, clustering, communities")
    add_log_args(p)
    p.add_argument("--until", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--tail-cutoff", type=float, default=5.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("metrics", help="emit similarity score matrices")
    add_log_args(p)
    p.add_argument("--until", type=int, default=None)
    p.add_argument("--predictors", default="pwa,pa,common_neighbors,jaccard,adamic_adar,katz")
    p.add_argument("--beta", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("predict", help="rolling link-prediction evaluation")
    add_log_args(p)
    p.add_argument("--predictors", default="pwa,pa,jaccard,adamic_adar,katz")
    p.add_argument("--beta", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("stimulus", help="stimulus predictor panel")
    add_log_args(p)
    p.add_argument("--period-length", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stimulus)

    p = sub.add_parser("econ", help="proximity matrices from IO data")
    p.add_argument("--table", required=True)
    p.add_argument("--map", default=None)
    p.add_argument("--kind", required=True, choices=list(econ.KINDS))
    p.add_argument("--drop-diagonal", action="store_true")
    p.add_argument("--gravity-g", type=float, default=1.0)
    p.add_argument("--los-orientation", choices=[econ.ROWS, econ.COLUMNS], default=econ.ROWS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_econ)

    p = sub.add_parser("fit", help="estimation commands")
    fit_sub = p.add_subparsers(dest="fit_command", required=True)

    q = fit_sub.add_parser("pwa-two-step")
    add_log_args(q)
    q.add_argument("--se-type", default="classic", choices=["classic", "hc1"])
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_fit)

    q = fit_sub.add_parser("evolution")
    add_log_args(q)
    q.add_argument("--proximity", action="append", help="KIND=PATH, repeatable")
    q.add_argument("--spec", default="linear", choices=["linear", "logit", "loglog"])
    q.add_argument("--effects", default="none", choices=["none", "fixed"])
    q.add_argument("--se-type", default="hc1", choices=["classic", "hc1", "cluster"])
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_fit)

    q = fit_sub.add_parser("stimulus")
    add_log_args(q)
    q.add_argument("--period-length", type=int, default=5)
    q.add_argument("--effects", default="none", choices=["none", "fixed"])
    q.add_argument("--time-dummies", action="store_true")
    q.add_argument("--se-type", default="hc1", choices=["classic", "hc1", "cluster"])
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="bundled desk-scale reproduction run")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--horizon", type=int, default=2000)
    p.add_argument("--steps-per-year", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except DataValidationError as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return DATA_EXIT
    except NumericError as exc:
        print(f"error[numeric]: {exc}", file=sys.stderr)
        return NUMERIC_EXIT
    except FileNotFoundError as exc:
        print(f"error[data]: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
