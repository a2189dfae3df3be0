"""Command-line front end.

Subcommands: sweep, converge, degree-bias, clustering, majorization, qbound,
metrics. Every command requires --seed (there is no wall-clock fallback) and
writes CSV to --out. Config files are JSON objects whose keys mirror the
SweepConfig / rule parameter field names; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import experiments as ex
from .graph import (
    generate_sbm,
    read_edge_list,
    sbm_from_homophily,
)
from .metrics import exposure_summary, perception_report, structure_report
from .outcomes import bernoulli_realize, generate_outcomes
from .theory import gamma_statistic


class UsageError(Exception):
    """Bad flag/config combination; maps to exit code 2."""


_RULE_FLAGS = {
    "mixed": "mixed",
    "dp-exact": "dp_exact",
    "degree-linear": "degree_linear",
    "constant": "constant",
}

_GENERATION_FLAGS = ("n_a", "n_b", "p_base", "rho_grid")


def _parse_rho_grid(text: str):
    """Either a single rho ("0.4") or a linspace spec "start:stop:count"."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            return np.linspace(start, stop, count).tolist()
    except ValueError:
        pass
    raise UsageError(
        f"--rho-grid expects RHO or START:STOP:COUNT, got {text!r}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairsight",
        description=(
            "Perceived versus global fairness on labeled graphs: homophily "
            "sweeps, depth convergence, exposure audits, and rewiring studies."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, load_graph=True):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", required=True, type=int,
                       help="master seed; all randomness derives from it")
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel workers (default: machine cores); "
                            "results are identical for any value")
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--rho-grid", dest="rho_grid", default=None,
                       help="RHO or START:STOP:COUNT (single-graph commands "
                            "take one value)")
        p.add_argument("--n-a", dest="n_a", type=int, default=None)
        p.add_argument("--n-b", dest="n_b", type=int, default=None)
        p.add_argument("--p-base", dest="p_base", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None,
                       help="mixed-rule group weight")
        p.add_argument("--depth", type=int, default=None,
                       help="perception depth (max depth for converge)")
        p.add_argument("--rule", choices=sorted(_RULE_FLAGS), default=None)
        if load_graph:
            p.add_argument("--load-graph", dest="load_graph", default=None,
                           help="edge-list file instead of SBM generation")

    p = sub.add_parser("sweep", help="homophily grid sweep; also writes "
                                     "<out stem>.agg.csv with per-point "
                                     "means and standard errors")
    add_common(p, load_graph=False)
    p = sub.add_parser("converge", help="visibility by depth for realized "
                                        "decisions on one graph")
    add_common(p)
    p = sub.add_parser("degree-bias", help="edge-exposure audit on one graph")
    add_common(p)
    p = sub.add_parser("clustering", help="triangle-biased rewiring "
                                          "trajectories at fixed degrees")
    add_common(p, load_graph=False)
    p = sub.add_parser("majorization", help="degree-balancing transfer walk")
    add_common(p)
    p = sub.add_parser("qbound", help="|modularity| vs |perceived gap| trend "
                                      "under exact demographic parity")
    add_common(p, load_graph=False)
    p = sub.add_parser("metrics", help="one-row structure and perception "
                                       "summary for one graph")
    add_common(p)
    return parser


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return cfg


def _pick(args_value, cfg, key, fallback):
    if args_value is not None:
        return args_value
    if key in cfg:
        return cfg[key]
    return fallback


def _rule_setup(args, cfg):
    rule = args.rule
    if rule is not None:
        rule = _RULE_FLAGS[rule]
    else:
        rule = cfg.get("rule", "mixed")
    rule_params = dict(cfg.get("rule_params", {}))
    if args.alpha is not None:
        if rule != "mixed":
            raise UsageError("--alpha only applies to the mixed rule")
        rule_params["alpha"] = args.alpha
    return rule, rule_params


def _sweep_config(args, cfg, forced_rule=None) -> ex.SweepConfig:
    rule, rule_params = _rule_setup(args, cfg)
    if forced_rule is not None:
        if args.rule is not None and _RULE_FLAGS[args.rule] != forced_rule:
            raise UsageError(
                f"this command requires the {forced_rule} rule"
            )
        rule = forced_rule
    rho_grid = args.rho_grid
    if rho_grid is not None:
        rho_grid = _parse_rho_grid(rho_grid)
    else:
        rho_grid = cfg.get("rho_grid", np.linspace(0.0, 0.8, 10).tolist())
    config = ex.SweepConfig(
        master_seed=args.seed,
        n_a=int(_pick(args.n_a, cfg, "n_a", 200)),
        n_b=int(_pick(args.n_b, cfg, "n_b", 200)),
        p_base=float(_pick(args.p_base, cfg, "p_base", 0.05)),
        rho_grid=[float(r) for r in rho_grid],
        reps=int(_pick(args.reps, cfg, "reps", 30)),
        rule=rule,
        rule_params=rule_params,
        depth=int(_pick(args.depth, cfg, "depth", 1)),
        sigma=float(cfg.get("sigma", 0.1)),
    )
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return config


def _single_rho(args, cfg) -> float:
    raw = args.rho_grid
    if raw is not None:
        grid = _parse_rho_grid(raw)
    else:
        grid = cfg.get("rho_grid", [0.0])
        if isinstance(grid, (int, float)):
            grid = [grid]
    if len(grid) != 1:
        raise UsageError(
            "this command works on a single graph; give one rho value"
        )
    return float(grid[0])


def _one_graph(args, cfg, seed):
    """Either load an edge list or draw one SBM graph."""
    load_path = getattr(args, "load_graph", None)
    if load_path is not None:
        explicit = [f for f in _GENERATION_FLAGS if getattr(args, f) is not None]
        if explicit:
            raise UsageError(
                "--load-graph conflicts with generation flags: "
                + ", ".join(explicit)
            )
        try:
            g = read_edge_list(load_path)
        except OSError as exc:
            raise UsageError(f"cannot read graph: {exc}") from None
        return g, None
    rho = _single_rho(args, cfg)
    try:
        params = sbm_from_homophily(
            int(_pick(args.n_a, cfg, "n_a", 200)),
            int(_pick(args.n_b, cfg, "n_b", 200)),
            float(_pick(args.p_base, cfg, "p_base", 0.05)),
            rho,
        )
        params.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return generate_sbm(params, seed), params


def _jobs(args) -> int:
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {jobs}")
    return jobs


def _agg_path(out_path: str) -> str:
    stem, ext = os.path.splitext(out_path)
    return f"{stem}.agg{ext or '.csv'}"


def _cmd_sweep(args, cfg) -> str:
    config = _sweep_config(args, cfg)
    t0 = time.perf_counter()
    records = ex.run_homophily_sweep(config, jobs=_jobs(args))
    ex.write_csv(records, args.out)
    agg = _agg_path(args.out)
    ex.write_csv(ex.aggregate(records), agg)
    dt = time.perf_counter() - t0
    return (f"sweep: {len(config.rho_grid)} grid points x {config.reps} reps "
            f"-> {len(records)} records; wrote {args.out} and {agg} "
            f"({dt:.2f}s)")


def _cmd_qbound(args, cfg) -> str:
    config = _sweep_config(args, cfg, forced_rule="dp_exact")
    if not config.rule_params:
        config.rule_params = {"base": "degree"}
    t0 = time.perf_counter()
    records = ex.run_homophily_sweep(config, jobs=_jobs(args))
    points = ex.run_qbound_trend(config, records=records)
    ex.write_csv(points, args.out)
    dt = time.perf_counter() - t0
    return (f"qbound: {len(points)} grid points from {len(records)} records; "
            f"wrote {args.out} ({dt:.2f}s)")


def _cmd_converge(args, cfg) -> str:
    t0 = time.perf_counter()
    rule, rule_params = _rule_setup(args, cfg)
    g, _ = _one_graph(args, cfg, ex.derive_seed(args.seed, "graph"))
    h = generate_outcomes(g, rule, rule_params, ex.derive_seed(args.seed, "rule"))
    decisions = bernoulli_realize(h, ex.derive_seed(args.seed, "decisions"))
    profile = ex.run_convergence(g, decisions, d_max=args.depth)
    rows = [
        {
            "depth": int(d),
            "vis_a": float(profile.vis_a[i]),
            "vis_b": float(profile.vis_b[i]),
            "gap": float(profile.gap[i]),
            "rate_a": profile.rate_a,
            "rate_b": profile.rate_b,
            "diameter": profile.diameter,
            "saturation_depth": profile.saturation_depth,
        }
        for i, d in enumerate(profile.depths)
    ]
    ex.write_csv(rows, args.out)
    dt = time.perf_counter() - t0
    return (f"converge: {len(rows)} depths, saturation at "
            f"{profile.saturation_depth}; wrote {args.out} ({dt:.2f}s)")


def _cmd_degree_bias(args, cfg) -> str:
    t0 = time.perf_counter()
    rule, rule_params = _rule_setup(args, cfg)
    g, _ = _one_graph(args, cfg, ex.derive_seed(args.seed, "graph"))
    h = generate_outcomes(g, rule, rule_params, ex.derive_seed(args.seed, "rule"))
    report = ex.run_degree_bias(g, h)
    s = report.summary
    row = {
        "node_avg": s.node_avg,
        "edge_avg": s.edge_avg,
        "peer_mean_degree_weighted": s.peer_mean_degree_weighted,
        "peer_mean_unweighted": s.peer_mean_unweighted,
        "cov_dh": s.cov_dh,
        "mean_degree": s.mean_degree,
        "cov_identity_residual": s.cov_identity_residual,
        "weighted_identity_residual": report.weighted_identity_residual,
        "unweighted_minus_edge_avg": report.unweighted_minus_edge_avg,
        "sign_consistent": int(report.sign_consistent),
    }
    ex.write_csv([row], args.out)
    dt = time.perf_counter() - t0
    return (f"degree-bias: edge_avg - node_avg = {s.edge_avg - s.node_avg:.6g},"
            f" cov/mean = {s.cov_dh / s.mean_degree:.6g}; wrote {args.out} "
            f"({dt:.2f}s)")


def _cmd_clustering(args, cfg) -> str:
    t0 = time.perf_counter()
    rule, rule_params = _rule_setup(args, cfg)
    rho = _single_rho(args, cfg)
    try:
        params = sbm_from_homophily(
            int(_pick(args.n_a, cfg, "n_a", 150)),
            int(_pick(args.n_b, cfg, "n_b", 150)),
            float(_pick(args.p_base, cfg, "p_base", 0.06)),
            rho,
        )
        params.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    steps = int(cfg.get("steps", 40))
    reps = int(_pick(args.reps, cfg, "reps", 10))
    depth = int(_pick(args.depth, cfg, "depth", 1))
    rows = ex.run_clustering_study(
        params, rule, rule_params, steps=steps, reps=reps,
        seed=args.seed, depth=depth,
    )
    ex.write_csv(rows, args.out)
    truncated = sum(r.truncated for r in rows)
    dt = time.perf_counter() - t0
    return (f"clustering: {reps} reps x 2 biases x {steps} steps -> "
            f"{len(rows)} rows ({truncated} truncated trajectories); "
            f"wrote {args.out} ({dt:.2f}s)")


def _cmd_majorization(args, cfg) -> str:
    t0 = time.perf_counter()
    rule, rule_params = _rule_setup(args, cfg)
    g, _ = _one_graph(args, cfg, ex.derive_seed(args.seed, "graph"))
    transfers = int(cfg.get("transfers", 60))
    depth = int(_pick(args.depth, cfg, "depth", 1))
    rows = ex.run_majorization_study(
        g, rule, rule_params, transfers=transfers, seed=args.seed, depth=depth
    )
    ex.write_csv(rows, args.out)
    dt = time.perf_counter() - t0
    increases = sum(
        1 for a, b in zip(rows, rows[1:]) if b.var_f > a.var_f
    )
    return (f"majorization: {len(rows) - 1} transfers accepted, "
            f"{increases} raised the indicator variance; wrote {args.out} "
            f"({dt:.2f}s)")


def _cmd_metrics(args, cfg) -> str:
    t0 = time.perf_counter()
    rule, rule_params = _rule_setup(args, cfg)
    g, params = _one_graph(args, cfg, ex.derive_seed(args.seed, "graph"))
    h = generate_outcomes(g, rule, rule_params, ex.derive_seed(args.seed, "rule"))
    depth = int(_pick(args.depth, cfg, "depth", 1))
    p_in = params.p_in if params is not None else None
    p_out = params.p_out if params is not None else None
    sr = structure_report(g, h, p_in=p_in, p_out=p_out)
    expo = exposure_summary(g, h)
    report = perception_report(g, h, depth)
    nan = float("nan")
    row = {
        "n": g.n,
        "m": g.m,
        "mean_degree": sr.mean_degree,
        "rho_param": sr.rho_param if sr.rho_param is not None else nan,
        "rho_sym": sr.rho_sym if sr.rho_sym is not None else nan,
        "rho_emp": sr.rho_emp,
        "q": sr.q,
        "clustering": sr.clustering,
        "cov_dh": sr.cov_dh,
        "node_avg": expo.node_avg,
        "edge_avg": expo.edge_avg,
        "depth": depth,
        "vis_a": report.vis_a,
        "vis_b": report.vis_b,
        "perceived_gap": report.gap,
        "var_f": report.variance,
        "gamma": gamma_statistic(g, h),
    }
    ex.write_csv([row], args.out)
    dt = time.perf_counter() - t0
    return (f"metrics: n={g.n} m={g.m} gap={report.gap:.6g}; "
            f"wrote {args.out} ({dt:.2f}s)")


_COMMANDS = {
    "sweep": _cmd_sweep,
    "qbound": _cmd_qbound,
    "converge": _cmd_converge,
    "degree-bias": _cmd_degree_bias,
    "clustering": _cmd_clustering,
    "majorization": _cmd_majorization,
    "metrics": _cmd_metrics,
}


def parse_and_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _load_config(args.config)
        if args.seed < 0 or args.seed >= 2**64:
            raise UsageError(f"--seed must be in [0, 2**64 - 1], got {args.seed}")
        summary = _COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


def main():
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
