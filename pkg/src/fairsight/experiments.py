"""Monte Carlo harness: homophily sweeps, depth-convergence profiles,
degree-bias audits, rewiring studies, aggregation, and CSV output."""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import (
    GROUP_A,
    GROUP_B,
    Graph,
    RewiringExhaustedError,
    SbmParams,
    bfs_distances,
    check_seed,
    degree_balancing_transfer,
    degree_preserving_switch,
    derive_seed,
    diameter,
    generate_sbm,
    is_connected,
    sbm_from_homophily,
)
from .metrics import (
    ExposureSummary,
    avg_clustering,
    empirical_homophily,
    exposure_summary,
    global_gap,
    homophily_index,
    homophily_sym,
    modularity,
    perception_report,
)
from .outcomes import RULE_KINDS, generate_outcomes
from .theory import TheoryParams, gamma_statistic, predicted_gap


@dataclass
class SweepConfig:
    """One homophily sweep: an SBM grid over rho with repeated draws.

    ``rho_grid`` holds symmetric homophily levels; each grid point uses
    p_in = p_base (1 + rho) and p_out = p_base (1 - rho). Per-cell seeds are
    derived from ``master_seed`` XOR blake2b64(tag, rho_bits, rep), keyed on
    the rho value itself so reordering the grid cannot change any cell.
    """

    master_seed: int
    n_a: int = 200
    n_b: int = 200
    p_base: float = 0.05
    rho_grid: Sequence[float] = field(
        default_factory=lambda: np.linspace(0.0, 0.8, 10).tolist()
    )
    reps: int = 30
    rule: str = "mixed"
    rule_params: dict = field(default_factory=dict)
    depth: int = 1
    sigma: float = 0.1

    def validate(self):
        check_seed(self.master_seed)
        if self.n_a < 1 or self.n_b < 1:
            raise ValueError("both groups need at least one node")
        if self.p_base <= 0:
            raise ValueError(f"p_base must be positive, got {self.p_base}")
        if len(self.rho_grid) == 0:
            raise ValueError("rho_grid must not be empty")
        for rho in self.rho_grid:
            if not 0.0 <= rho < 1.0:
                raise ValueError(f"rho values must lie in [0, 1), got {rho}")
            # raises when p_base * (1 + rho) > 1
            sbm_from_homophily(self.n_a, self.n_b, self.p_base, rho)
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.rule not in RULE_KINDS:
            raise ValueError(f"rule must be one of {RULE_KINDS}, got {self.rule!r}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass
class SweepRecord:
    """One replication at one grid point. Field order is the CSV column
    order; float fields must be finite."""

    grid_index: int
    rep: int
    seed: int
    rho_param: float
    rho_sym: float
    rho_emp: float
    q: float
    clustering: float
    mean_degree: float
    connected: int
    global_gap: float
    perceived_gap: float
    vis_a: float
    vis_b: float
    var_f: float
    gamma: float
    pred_gap_headline: float
    pred_gap_expansion: float
    cov_dh: float


_FLOAT_RECORD_FIELDS = [
    "rho_param", "rho_sym", "rho_emp", "q", "clustering", "mean_degree",
    "global_gap", "perceived_gap", "vis_a", "vis_b", "var_f", "gamma",
    "pred_gap_headline", "pred_gap_expansion", "cov_dh",
]


def _sweep_cell(config: SweepConfig, grid_index: int, rep: int) -> SweepRecord:
    rho = float(config.rho_grid[grid_index])
    cell_seed = derive_seed(config.master_seed, "sweep-cell", rho, rep)
    graph_seed = derive_seed(cell_seed, "graph")
    rule_seed = derive_seed(cell_seed, "rule")

    params = sbm_from_homophily(config.n_a, config.n_b, config.p_base, rho)
    g = generate_sbm(params, graph_seed)
    h = generate_outcomes(g, config.rule, config.rule_params, rule_seed)

    report = perception_report(g, h, config.depth)
    expo = exposure_summary(g, h) if g.m else None
    gamma = gamma_statistic(g, h)
    mu_a = float(h[g.group_mask(GROUP_A)].mean())
    mu_b = float(h[g.group_mask(GROUP_B)].mean())
    tp = TheoryParams(
        pi_a=config.n_a / (config.n_a + config.n_b),
        rho=rho,
        mu_a=mu_a,
        mu_b=mu_b,
        sigma=config.sigma,
    )
    pred = predicted_gap(tp, gamma)

    record = SweepRecord(
        grid_index=grid_index,
        rep=rep,
        seed=cell_seed,
        rho_param=homophily_index(params.p_in, params.p_out),
        rho_sym=homophily_sym(params.p_in, params.p_out),
        rho_emp=empirical_homophily(g),
        q=modularity(g),
        clustering=avg_clustering(g),
        mean_degree=float(g.degrees.mean()),
        connected=int(is_connected(g)),
        global_gap=global_gap(h, g.labels),
        perceived_gap=report.gap,
        vis_a=report.vis_a,
        vis_b=report.vis_b,
        var_f=report.variance,
        gamma=gamma,
        pred_gap_headline=pred.headline_gap,
        pred_gap_expansion=pred.expansion_gap,
        cov_dh=expo.cov_dh if expo else 0.0,
    )
    for name in _FLOAT_RECORD_FIELDS:
        if not math.isfinite(getattr(record, name)):
            raise ArithmeticError(f"non-finite {name} in sweep cell "
                                  f"(grid_index={grid_index}, rep={rep})")
    return record


def _sweep_cell_task(args) -> SweepRecord:
    return _sweep_cell(*args)


def run_homophily_sweep(config: SweepConfig, jobs: int = 1):
    """All grid cells and replications, as a flat sorted record list.

    Cells are computed independently from per-cell seeds, so results do not
    depend on execution order or on ``jobs``. Disconnected draws are flagged
    in the record, never dropped.
    """
    config.validate()
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    tasks = [
        (config, gi, rep)
        for gi in range(len(config.rho_grid))
        for rep in range(config.reps)
    ]
    if jobs == 1 or len(tasks) == 1:
        records = [_sweep_cell_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, len(tasks) // (4 * jobs))
            records = list(pool.map(_sweep_cell_task, tasks, chunksize=chunk))
    records.sort(key=lambda r: (r.grid_index, r.rep))
    return records


def aggregate(records: Sequence[SweepRecord]):
    """Per-grid-point mean and standard error of every metric column.

    Rows come back as ordered dicts keyed grid_index, n_reps, then
    ``<col>_mean``/``<col>_se`` per metric. A single record yields its own
    value with zero standard error.
    """
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    by_grid = {}
    for r in records:
        by_grid.setdefault(r.grid_index, []).append(r)
    rows = []
    for gi in sorted(by_grid):
        cell = by_grid[gi]
        row = {"grid_index": gi, "n_reps": len(cell)}
        for name in _FLOAT_RECORD_FIELDS:
            vals = np.array([getattr(r, name) for r in cell], dtype=np.float64)
            row[f"{name}_mean"] = float(vals.mean())
            if vals.size > 1:
                row[f"{name}_se"] = float(vals.std(ddof=1) / math.sqrt(vals.size))
            else:
                row[f"{name}_se"] = 0.0
        rows.append(row)
    return rows


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(rows, path):
    """Write dataclass instances or mappings as CSV with a header row.

    Floats are rendered at 12 significant digits, which round-trips well
    inside 1e-12 relative error. Identical rows always produce identical
    bytes; newlines are plain ``\\n``.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("refusing to write a CSV with no rows")
    first = rows[0]
    if dataclasses.is_dataclass(first):
        headers = [f.name for f in dataclasses.fields(first)]
        get = lambda row, name: getattr(row, name)
    else:
        headers = list(first.keys())
        get = lambda row, name: row[name]
    lines = [",".join(headers)]
    for row in rows:
        lines.append(",".join(_format_cell(get(row, name)) for name in headers))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Small reader for the CSVs this module writes: numeric columns come
    back as float lists, anything else (e.g. rewiring bias names) as str."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    headers = lines[0].split(",")
    columns = {name: [] for name in headers}
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(headers):
            raise ValueError(f"{path}: ragged row {ln!r}")
        for name, raw in zip(headers, parts):
            try:
                columns[name].append(float(raw))
            except ValueError:
                columns[name].append(raw)
    return columns


@dataclass
class ConvergenceProfile:
    """Group visibility by neighborhood depth, with the binary acceptance
    rates the curves must reach once neighborhoods cover the graph."""

    depths: np.ndarray
    vis_a: np.ndarray
    vis_b: np.ndarray
    gap: np.ndarray
    rate_a: float
    rate_b: float
    diameter: int
    saturation_depth: int


def run_convergence(g: Graph, decisions, d_max: Optional[int] = None) -> ConvergenceProfile:
    """Visibility per depth for realized 0/1 decisions on a connected graph.

    Requires both decision values in each group. For every depth at or past
    max(diameter, 2) each node's neighborhood is the whole node set, the
    indicator collapses to the decision itself, and group visibility equals
    the group acceptance rate exactly; this is asserted, not approximated.
    """
    decisions = np.asarray(decisions)
    if decisions.shape != (g.n,):
        raise ValueError(f"decisions must have shape ({g.n},)")
    if not np.isin(decisions, (0, 1)).all():
        raise ValueError("decisions must be 0/1 valued")
    if not is_connected(g):
        raise ValueError("convergence profile requires a connected graph")
    rates = {}
    for group in (GROUP_A, GROUP_B):
        mask = g.group_mask(group)
        if not mask.any():
            raise ValueError(f"group {'AB'[group]} is empty")
        vals = decisions[mask]
        if vals.min() == vals.max():
            raise ValueError(
                f"decisions are degenerate in group {'AB'[group]}: "
                "need both accepted and rejected nodes"
            )
        rates[group] = float(vals.mean())

    diam = diameter(g)
    saturation = max(diam, 2)
    if d_max is None:
        d_max = saturation + 2
    if d_max < 1:
        raise ValueError(f"d_max must be >= 1, got {d_max}")

    h = decisions.astype(np.float64)
    f_by_depth = np.zeros((d_max, g.n), dtype=np.int8)
    for i in range(g.n):
        dist = bfs_distances(g, i)
        far = dist[dist >= 1]
        counts = np.bincount(far, minlength=d_max + 1).astype(np.float64)
        sums = np.bincount(far, weights=h[dist >= 1], minlength=d_max + 1)
        ccum = np.cumsum(counts[1:d_max + 1])
        scum = np.cumsum(sums[1:d_max + 1])
        # self joins the neighborhood from depth 2 on (closed 2-walk)
        ccum[1:] += 1.0
        scum[1:] += h[i]
        with np.errstate(invalid="ignore"):
            peers = scum / ccum
        f_by_depth[:, i] = np.where(ccum > 0, peers <= h[i], 0)

    mask_a = g.group_mask(GROUP_A)
    mask_b = g.group_mask(GROUP_B)
    vis_a = f_by_depth[:, mask_a].mean(axis=1)
    vis_b = f_by_depth[:, mask_b].mean(axis=1)
    for d in range(saturation, d_max + 1):
        idx = d - 1
        if idx >= d_max:
            break
        if vis_a[idx] != rates[GROUP_A] or vis_b[idx] != rates[GROUP_B]:
            raise AssertionError(
                f"visibility at depth {d} should equal group acceptance "
                "rates exactly on a covered graph"
            )
    return ConvergenceProfile(
        depths=np.arange(1, d_max + 1),
        vis_a=vis_a,
        vis_b=vis_b,
        gap=vis_a - vis_b,
        rate_a=rates[GROUP_A],
        rate_b=rates[GROUP_B],
        diameter=diam,
        saturation_depth=saturation,
    )


@dataclass
class DegreeBiasReport:
    """Exposure audit: both degree-bias identities and the sign relation
    between Cov(d, h) and the edge-vs-node average difference."""

    summary: ExposureSummary
    weighted_identity_residual: float
    unweighted_minus_edge_avg: float
    sign_consistent: bool


def run_degree_bias(g: Graph, h) -> DegreeBiasReport:
    summary = exposure_summary(g, h)
    weighted_residual = summary.peer_mean_degree_weighted - summary.edge_avg
    diff = summary.edge_avg - summary.node_avg
    sign_ok = (
        diff == 0.0 and summary.cov_dh == 0.0
    ) or (diff * summary.cov_dh >= 0.0)
    return DegreeBiasReport(
        summary=summary,
        weighted_identity_residual=float(weighted_residual),
        unweighted_minus_edge_avg=float(
            summary.peer_mean_unweighted - summary.edge_avg
        ),
        sign_consistent=bool(sign_ok),
    )


@dataclass
class ClusteringStudyRow:
    rep: int
    bias: str
    step: int
    clustering: float
    var_f: float
    truncated: int


def run_clustering_study(
    base: SbmParams,
    rule: str,
    rule_params: dict,
    steps: int,
    reps: int,
    seed: int,
    depth: int = 1,
):
    """Rewiring trajectories that close or open triangles at fixed degrees.

    Each replication draws a base SBM graph and one outcome vector, then
    walks two biased double-edge-swap trajectories from it, recording average
    clustering and the perception-indicator variance after every accepted
    switch. The outcome vector stays fixed along a trajectory so only
    structure moves. A trajectory that runs out of acceptable swaps keeps its
    rows and has its final row flagged truncated.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    check_seed(seed)
    rows = []
    for rep in range(reps):
        g0 = generate_sbm(base, derive_seed(seed, "clustering-graph", rep))
        h = generate_outcomes(
            g0, rule, rule_params, derive_seed(seed, "clustering-rule", rep)
        )
        base_degrees = np.sort(g0.degrees)
        for bias in ("close_triangle", "open_triangle"):
            g = g0
            rows.append(ClusteringStudyRow(
                rep=rep, bias=bias, step=0,
                clustering=avg_clustering(g),
                var_f=perception_report(g, h, depth).variance,
                truncated=0,
            ))
            for step in range(1, steps + 1):
                try:
                    g = degree_preserving_switch(
                        g, derive_seed(seed, "switch", rep, bias, step), bias
                    )
                except RewiringExhaustedError:
                    rows[-1].truncated = 1
                    break
                if not np.array_equal(np.sort(g.degrees), base_degrees):
                    raise AssertionError("switch changed the degree sequence")
                rows.append(ClusteringStudyRow(
                    rep=rep, bias=bias, step=step,
                    clustering=avg_clustering(g),
                    var_f=perception_report(g, h, depth).variance,
                    truncated=0,
                ))
    return rows


@dataclass
class MajorizationStep:
    step: int
    degree_variance: float
    var_f: float


def run_majorization_study(
    base: Graph,
    rule: str,
    rule_params: dict,
    transfers: int,
    seed: int,
    depth: int = 1,
    max_attempts: int = 500,
):
    """Repeated random degree-balancing transfers on one graph.

    Every accepted transfer moves an edge endpoint from a node with degree
    at least two above the recipient, so the degree variance strictly
    decreases step over step. The outcome vector is generated once on the
    base graph and held fixed. The walk stops early, without error, when no
    valid transfer can be sampled.
    """
    if transfers < 0:
        raise ValueError(f"transfers must be >= 0, got {transfers}")
    check_seed(seed)
    h = generate_outcomes(base, rule, rule_params, derive_seed(seed, "maj-rule"))
    g = base
    rows = [MajorizationStep(
        step=0,
        degree_variance=float(g.degrees.astype(np.float64).var()),
        var_f=perception_report(g, h, depth).variance,
    )]
    for t in range(1, transfers + 1):
        rng = np.random.default_rng(derive_seed(seed, "maj-transfer", t))
        found = None
        for _ in range(max_attempts):
            e = int(rng.integers(g.m))
            ell, j = (int(x) for x in g.edges[e])
            if rng.random() < 0.5:
                ell, j = j, ell
            k = int(rng.integers(g.n))
            if k == ell or k == j:
                continue
            # strict equalization: a one-apart transfer only swaps degrees
            if g.degrees[k] > g.degrees[j] - 2:
                continue
            if g.has_edge(ell, k):
                continue
            found = (ell, j, k)
            break
        if found is None:
            break
        g = degree_balancing_transfer(g, *found)
        var_d = float(g.degrees.astype(np.float64).var())
        if not var_d < rows[-1].degree_variance:
            raise AssertionError("transfer failed to reduce degree variance")
        rows.append(MajorizationStep(
            step=t,
            degree_variance=var_d,
            var_f=perception_report(g, h, depth).variance,
        ))
    return rows


@dataclass
class QboundPoint:
    grid_index: int
    rho_sym: float
    n_reps: int
    mean_abs_q: float
    mean_abs_perceived_gap: float


def run_qbound_trend(config: SweepConfig, jobs: int = 1, records=None):
    """Ensemble |modularity| against |perceived gap| per grid point, for
    demographic-parity rules only (the bound is about gaps that survive
    exact parity)."""
    if config.rule != "dp_exact":
        raise ValueError(
            f"qbound trend requires the dp_exact rule, got {config.rule!r}"
        )
    if records is None:
        records = run_homophily_sweep(config, jobs=jobs)
    by_grid = {}
    for r in records:
        by_grid.setdefault(r.grid_index, []).append(r)
    points = []
    for gi in sorted(by_grid):
        cell = by_grid[gi]
        points.append(QboundPoint(
            grid_index=gi,
            rho_sym=float(np.mean([r.rho_sym for r in cell])),
            n_reps=len(cell),
            mean_abs_q=float(np.mean([abs(r.q) for r in cell])),
            mean_abs_perceived_gap=float(
                np.mean([abs(r.perceived_gap) for r in cell])
            ),
        ))
    return points
