"""Command-line front end: ``grounded-spectra <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 input or parse failure, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .bounds import design_optimal_network
from .dde import MAX_DT_LAMBDA, SimConfig, bracket_threshold, probe_config, simulate
from .graph import GraphError, ground
from .leaders import (
    DEFAULT_CAP,
    delay_dominance_certificate,
    exhaustive_ranking,
    simultaneous_certificate,
)
from .numerics import NumericalError, spectral_summary
from .random_graphs import CSV_FIELDS, Manifest, records_to_rows, run_manifest
from .robustness import robustness_report

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4
DEFAULT_SEED = 42
METRIC_FIELDS = {"h2": "h2_cost", "hinf": "grounding_centrality", "delay": "delay_threshold"}


class UsageError(Exception):
    pass


def parse_leaders(text: str | None) -> list[int]:
    if text is None or not text.strip():
        raise UsageError("--leaders needs at least one vertex index")
    try:
        out = [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"--leaders must be integers, got {text!r}") from None
    return out


def _common(p: argparse.ArgumentParser, graph: bool = True) -> None:
    if graph:
        p.add_argument("--graph", required=True, help="edge-list or JSON graph file")
    p.add_argument("--format", choices=("json", "csv", "text"), default=None)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default {DEFAULT_SEED})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grounded-spectra", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="robustness report for a leader set")
    _common(p)
    p.add_argument("--leaders", required=True, help="comma-separated vertex indices")
    p.add_argument("--subset-budget", type=int, default=4096)

    p = sub.add_parser("select-leader", help="rank every vertex as a single leader")
    _common(p)
    p.add_argument("--metric", choices=("h2", "hinf", "delay", "all"), default="all")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum graph size to rank")

    p = sub.add_parser("design", help="minimum-lambda_max network with lambda_1 >= beta")
    _common(p, graph=False)
    p.add_argument("--followers", type=int, required=True)
    p.add_argument("--n-leaders", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)

    p = sub.add_parser("experiment", help="run a random-graph experiment manifest")
    _common(p, graph=False)
    p.add_argument("--manifest", required=True)

    p = sub.add_parser("simulate", help="integrate the (delayed, disturbed) follower dynamics")
    _common(p)
    p.add_argument("--leaders", required=True)
    p.add_argument("--leader-states", default=None, help="values for the leaders (default all 1)")
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--horizon", type=float, default=20.0)
    p.add_argument("--noise-std", type=float, default=0.0)
    p.add_argument("--stride", type=int, default=10)

    p = sub.add_parser("bracket", help="bracket the delay stability threshold by simulation")
    _common(p)
    p.add_argument("--leaders", required=True)
    p.add_argument("--tol", type=float, default=None, help="absolute bracket width")
    return ap


def _format(args) -> str:
    if args.format:
        return args.format
    return "text" if args.out is None and sys.stdout.isatty() else "json"


def _emit(args, payload: dict, csv_text: str | None = None) -> None:
    fmt = _format(args)
    if fmt == "json":
        text = io.dumps(payload) + "\n"
    elif fmt == "csv":
        if csv_text is None:
            raise UsageError(f"'{args.command}' has no CSV output")
        text = csv_text
    else:
        text = io.format_text(io.jsonable(payload)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> dict:
    g = io.load_graph(args.graph)
    leaders = parse_leaders(args.leaders)
    seed = DEFAULT_SEED if args.seed is None else args.seed
    report = robustness_report(g, leaders, args.subset_budget, seed).to_dict()
    certs = {"delay_dominance": None, "simultaneous": None, "simultaneous_margin": None}
    if len(leaders) == 1:
        k = leaders[0]
        sc = simultaneous_certificate(g, k)
        certs = {"delay_dominance": delay_dominance_certificate(g, k), "simultaneous": sc.holds,
                 "simultaneous_margin": sc.margin}
    report["certificates"] = certs
    report["n"] = g.n
    report["m"] = g.m
    return report


def _ranking_csv(ranking) -> str:
    winners = {m: ranking.argbest(m) for m in METRIC_FIELDS}
    rows = []
    for rec in ranking.records():
        rec["flags"] = ";".join(f"best_{m}" for m, v in winners.items() if v == rec["vertex"])
        rows.append(rec)
    return io.to_csv(rows, ["vertex", "grounding_centrality", "h2_cost", "delay_threshold", "flags"])


def cmd_select_leader(args):
    g = io.load_graph(args.graph)
    if g.n > args.cap:
        raise UsageError(f"graph has {g.n} vertices, above --cap {args.cap}; pass a larger --cap to proceed")
    ranking = exhaustive_ranking(g, cap=args.cap)
    metrics = list(METRIC_FIELDS) if args.metric == "all" else [args.metric]
    winners = {}
    for m in metrics:
        k = ranking.argbest(m)
        field = METRIC_FIELDS[m]
        winners[m] = {"vertex": k, field: float(getattr(ranking, field)[k])}
        if args.metric == "all":
            sc = simultaneous_certificate(g, k)
            winners[m]["certificates"] = {
                "delay_dominance": delay_dominance_certificate(g, k),
                "simultaneous": sc.holds,
                "simultaneous_margin": sc.margin,
                "x_min": sc.xmin,
            }
    payload = {"n": g.n, "metric": args.metric, "winners": winners}
    if _format(args) == "json":
        payload["ranking"] = ranking.records()
    return payload, _ranking_csv(ranking)


def cmd_design(args) -> dict:
    try:
        g, p = design_optimal_network(args.followers, args.n_leaders, args.beta)
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    _, gs = ground(g, p.leaders)
    s = spectral_summary(gs.grounded_laplacian)
    lg = gs.grounded_laplacian
    return {
        "graph": io.graph_to_dict(g),
        "leaders": list(p.leaders),
        "followers": list(p.followers),
        "lambda1": s.lambda_min,
        "lambda_max": s.lambda_max,
        "grounded_laplacian_diagonal": bool(np.count_nonzero(lg - np.diag(np.diag(lg))) == 0),
    }


def cmd_experiment(args):
    try:
        data = json.loads(Path(args.manifest).read_text())
    except OSError as exc:
        raise io.ParseError(f"cannot read manifest: {exc.strerror}", None, args.manifest) from None
    except json.JSONDecodeError as exc:
        raise io.ParseError(f"invalid JSON: {exc.msg}", exc.lineno, args.manifest) from None
    if not isinstance(data, dict):
        raise io.ParseError("manifest must be a JSON object", None, args.manifest)
    if args.seed is not None:
        data["base_seed"] = args.seed
    try:
        m = Manifest.from_dict(data)
    except ValueError as exc:
        raise io.ParseError(str(exc), None, args.manifest) from None
    results, records = run_manifest(m)
    summaries = [r.summary() for r in results]
    for s in summaries:
        print(
            f"n={s['n']} metric={s['metric']} mean={s['mean']:.6g} std={s['std']:.3g} "
            f"target={s['target']} rel_err={s['relative_error']}",
            file=sys.stderr,
        )
    payload = {"manifest": m.to_dict(), "summary": summaries, "records": records_to_rows(records)}
    return payload, io.to_csv(records_to_rows(records), CSV_FIELDS)


def _grounded(args):
    g = io.load_graph(args.graph)
    leaders = parse_leaders(args.leaders)
    return g, leaders, ground(g, leaders)


def cmd_simulate(args):
    g, leaders, (p, gs) = _grounded(args)
    if args.leader_states is None:
        xs = np.ones(len(p.leaders))
    else:
        try:
            xs = np.array([float(t) for t in args.leader_states.replace(",", " ").split()])
        except ValueError:
            raise UsageError("--leader-states must be numbers") from None
        if len(xs) != len(p.leaders):
            raise UsageError("--leader-states needs one value per leader")
    seed = DEFAULT_SEED if args.seed is None else args.seed
    base = probe_config(gs, args.tau, args.horizon, stride=args.stride, seed=seed) if args.tau > 0 else None
    if args.dt is not None:
        dt = args.dt
    else:
        dt = base.dt if base else MAX_DT_LAMBDA / np.abs(gs.grounded_laplacian).sum(axis=1).max()
    try:
        cfg = SimConfig(
            dt=dt, horizon=args.horizon, tau=args.tau, leader_states=xs,
            x0=None if base is None else base.x0,
            disturbance="white" if args.noise_std > 0 else "zero",
            noise_std=args.noise_std, seed=seed, record_stride=args.stride,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    traj = simulate(gs, cfg)
    payload = {
        "classification": traj.classification,
        "terminal_error": traj.terminal_error,
        "initial_error": traj.initial_error,
        "horizon": traj.horizon,
        "overflow_time": traj.overflow_time,
        "equilibrium": traj.x_star.tolist(),
        "followers": list(p.followers),
    }
    return payload, io.trajectory_csv(traj.times, traj.states)


def cmd_bracket(args) -> dict:
    g, leaders, (p, gs) = _grounded(args)
    rep = bracket_threshold(gs, tol=args.tol)
    return rep.to_dict() | {"leaders": list(p.leaders), "contains_analytic": rep.contains_analytic()}


COMMANDS = {
    "analyze": cmd_analyze,
    "select-leader": cmd_select_leader,
    "design": cmd_design,
    "experiment": cmd_experiment,
    "simulate": cmd_simulate,
    "bracket": cmd_bracket,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = COMMANDS[args.command](args)
        payload, csv_text = result if isinstance(result, tuple) else (result, None)
        _emit(args, payload, csv_text)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (io.ParseError, GraphError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
