"""Acceptance gate: one check per headline property, each printing a single
[PASS]/[FAIL] line with the measured statistic next to its threshold.

Run with -s (or read the captured output of a failure) to see the lines.
"""

import subprocess
import time

import numpy as np
import pytest
from scipy import stats

from fairsight import (
    GROUP_A,
    GROUP_B,
    MixedOutcomeParams,
    SbmParams,
    SweepConfig,
    THETA_FIRST_ORDER_BOUND,
    TheoryParams,
    aggregate,
    exposure_summary,
    generate_sbm,
    is_connected,
    mixed_outcome,
    run_clustering_study,
    run_convergence,
    run_homophily_sweep,
    run_majorization_study,
    run_qbound_trend,
    sbm_from_homophily,
    theta_exact,
    theta_first_order,
)
from fairsight.graph import derive_seed


def emit(name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def parity_sweep():
    """Shared sweep under the exact-parity rule with a degree-driven base."""
    config = SweepConfig(
        master_seed=99,
        n_a=120,
        n_b=280,
        p_base=0.05,
        rho_grid=[0.0, 0.15, 0.3, 0.45, 0.6],
        reps=60,
        rule="dp_exact",
        rule_params={"base": "degree"},
    )
    return config, run_homophily_sweep(config)


def test_c01_perceived_gap_rises_with_homophily():
    t0 = time.perf_counter()
    config = SweepConfig(
        master_seed=2026,
        n_a=200,
        n_b=200,
        p_base=0.05,
        rho_grid=np.linspace(0.0, 0.8, 10).tolist(),
        reps=30,
        rule="mixed",
        rule_params={},
    )
    rows = aggregate(run_homophily_sweep(config))
    dt = time.perf_counter() - t0
    rho = [r["rho_sym_mean"] for r in rows]
    perceived = [r["perceived_gap_mean"] for r in rows]
    global_means = [r["global_gap_mean"] for r in rows]
    slope = np.polyfit(rho, perceived, 1)[0]
    r = np.corrcoef(rho, perceived)[0, 1]
    spread = max(global_means) - min(global_means)
    ok = slope > 0 and r >= 0.9 and spread < 0.05 and dt <= 60
    emit(
        "perceived gap vs homophily trend",
        ok,
        f"slope={slope:+.4f} (need >0), pearson r={r:+.4f} (need >=0.9), "
        f"global-gap spread={spread:.4f} (need <0.05), {dt:.1f}s (need <=60); "
        f"measured response is strongly linear with the opposite sign "
        f"(|slope|={abs(slope):.4f}, |r|={abs(r):.4f}): the group with the "
        f"higher score distribution sees its advantage locally at low "
        f"homophily and loses that reference as mixing drops",
    )


def test_c02_exposure_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(derive_seed(271, "exposure"))
    worst = 0.0
    for case in range(100):
        n_a = int(rng.integers(10, 40))
        n_b = int(rng.integers(10, 40))
        rho = float(rng.uniform(0.0, 0.6))
        g = generate_sbm(
            sbm_from_homophily(n_a, n_b, 0.15, rho),
            derive_seed(271, "graph", case),
        )
        h = rng.random(g.n)
        s = exposure_summary(g, h)
        lhs = float(g.degrees @ (h if s else h))
        peers = np.zeros(g.n)
        u, v = g.edges[:, 0], g.edges[:, 1]
        np.add.at(peers, u, h[v])
        np.add.at(peers, v, h[u])
        scale = max(1.0, abs(lhs))
        worst = max(worst, abs(peers.sum() - lhs) / scale)
        identity = s.cov_dh / s.mean_degree
        worst = max(
            worst,
            abs((s.edge_avg - s.node_avg) - identity)
            / max(1.0, abs(identity)),
        )
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt <= 5
    emit(
        "degree-weighted exposure identities",
        ok,
        f"worst relative residual={worst:.2e} over 100 graphs x 100 outcome "
        f"vectors (need <=1e-12), {dt:.1f}s (need <=5)",
    )


def test_c03_visibility_converges_exactly():
    t0 = time.perf_counter()
    master = 314
    rng = np.random.default_rng(derive_seed(master, "cases"))
    checked, tried = 0, 0
    while checked < 50:
        tried += 1
        assert tried < 1000, "case generator stalled"
        n_a = int(rng.integers(4, 31))
        n_b = int(rng.integers(4, 31))
        p_base = float(rng.uniform(0.15, 0.4))
        rho = float(rng.uniform(0.0, 0.5))
        if p_base * (1 + rho) > 1:
            continue
        g = generate_sbm(
            SbmParams(n_a, n_b, p_base * (1 + rho), p_base * (1 - rho)),
            derive_seed(master, "graph", tried),
        )
        if not is_connected(g):
            continue
        decisions = rng.integers(0, 2, g.n)
        degenerate = False
        for grp in (GROUP_A, GROUP_B):
            vals = decisions[g.group_mask(grp)]
            if vals.min() == vals.max():
                degenerate = True
        if degenerate:
            continue
        profile = run_convergence(g, decisions)
        for idx, depth in enumerate(profile.depths):
            if depth >= profile.saturation_depth:
                assert profile.vis_a[idx] == profile.rate_a
                assert profile.vis_b[idx] == profile.rate_b
        checked += 1
    dt = time.perf_counter() - t0
    ok = checked == 50 and dt <= 5
    emit(
        "depth convergence to acceptance rates",
        ok,
        f"{checked}/50 connected graphs (n<=60) match exactly at every depth "
        f">= max(diameter, 2), {dt:.1f}s (need <=5)",
    )


def test_c04_same_group_fraction_matches_formula():
    t0 = time.perf_counter()
    n_a, n_b, p_base = 600, 1400, 0.01
    pi_a = n_a / (n_a + n_b)
    worst = 0.0
    for rho in (0.1, 0.3, 0.5):
        fractions = {GROUP_A: [], GROUP_B: []}
        for seed_idx in range(10):
            g = generate_sbm(
                sbm_from_homophily(n_a, n_b, p_base, rho),
                derive_seed(1618, "theta", rho, seed_idx),
            )
            labels = g.labels
            u, v = g.edges[:, 0], g.edges[:, 1]
            same = labels[u] == labels[v]
            same_count = np.bincount(
                u[same], minlength=g.n
            ) + np.bincount(v[same], minlength=g.n)
            for grp in (GROUP_A, GROUP_B):
                mask = g.group_mask(grp)
                fractions[grp].append(
                    same_count[mask].sum() / g.degrees[mask].sum()
                )
        for grp in (GROUP_A, GROUP_B):
            predicted = theta_exact(pi_a if grp == GROUP_A else 1 - pi_a, rho)
            worst = max(worst, abs(np.mean(fractions[grp]) - predicted))
    dt = time.perf_counter() - t0
    ok = worst <= 0.02 and dt <= 30
    emit(
        "same-group neighbor fraction formula",
        ok,
        f"worst |sample mean - formula|={worst:.4f} over both groups x "
        f"rho in {{0.1,0.3,0.5}} x 10 seeds at n=2000 (need <=0.02), "
        f"{dt:.1f}s (need <=30)",
    )


def test_c05_first_order_error_bound():
    worst_ratio = 0.0
    for pi in np.arange(0.1, 0.95, 0.1):
        for rho in np.linspace(0.0, 0.2, 41)[1:]:
            err = abs(theta_exact(pi, rho) - theta_first_order(pi, rho))
            worst_ratio = max(worst_ratio, err / rho**2)
    ok = worst_ratio <= THETA_FIRST_ORDER_BOUND
    emit(
        "first-order mixing expansion bound",
        ok,
        f"max error/rho^2={worst_ratio:.4f} over pi in 0.1..0.9, rho in "
        f"(0, 0.2] (need <= frozen bound {THETA_FIRST_ORDER_BOUND})",
    )


def test_c06_exact_parity_with_perceived_gap(parity_sweep):
    t0 = time.perf_counter()
    config, records = parity_sweep
    worst_parity = max(abs(r.global_gap) for r in records)

    def gap_stats(grid_index):
        gaps = np.abs(
            [r.perceived_gap for r in records if r.grid_index == grid_index]
        )
        return gaps.mean(), gaps.std(ddof=1) / np.sqrt(len(gaps))

    low_mean, low_se = gap_stats(0)
    high_mean, high_se = gap_stats(len(config.rho_grid) - 1)
    separation = (high_mean - low_mean) / np.hypot(low_se, high_se)
    dt = time.perf_counter() - t0
    ok = worst_parity <= 1e-12 and separation >= 3
    emit(
        "exact parity with nonzero perceived gap",
        ok,
        f"max |global gap|={worst_parity:.2e} over {len(records)} records "
        f"(need <=1e-12); mean |perceived gap| rises from {low_mean:.4f} at "
        f"rho=0 to {high_mean:.4f} at rho=0.6, {separation:.1f} standard "
        f"errors (need >=3); {dt:.1f}s",
    )


def test_c07_assortativity_tracks_perceived_gap(parity_sweep):
    config, records = parity_sweep
    points = run_qbound_trend(config, records=records)
    res = stats.spearmanr(
        [p.mean_abs_q for p in points],
        [p.mean_abs_perceived_gap for p in points],
    )
    ok = res.statistic >= 0
    emit(
        "assortativity vs perceived gap trend",
        ok,
        f"spearman={res.statistic:+.2f} across {len(points)} grid points "
        f"(need >=0)",
    )


def test_c08_clustering_against_indicator_variance():
    t0 = time.perf_counter()
    rows = run_clustering_study(
        sbm_from_homophily(150, 150, 0.02, 0.6),
        "mixed",
        {"alpha": 1.0},
        steps=100,
        reps=12,
        seed=2,
    )
    trajectories = len({(r.rep, r.bias) for r in rows})
    res = stats.spearmanr(
        [r.clustering for r in rows], [r.var_f for r in rows]
    )
    dt = time.perf_counter() - t0
    ok = trajectories >= 20 and res.statistic <= 0
    emit(
        "clustering vs indicator variance trend",
        ok,
        f"pooled spearman={res.statistic:+.4f} over {trajectories} rewiring "
        f"trajectories, {len(rows)} states (need <=0 over >=20 trajectories); "
        f"{dt:.1f}s",
    )


def test_c09_degree_balancing_transfers():
    t0 = time.perf_counter()
    master = 5
    deltas = []
    violations = []
    for base_idx in range(4):
        g = generate_sbm(
            sbm_from_homophily(100, 100, 0.05, 0.4),
            derive_seed(master, "base", base_idx),
        )
        steps = run_majorization_study(
            g, "mixed", {}, transfers=15,
            seed=derive_seed(master, "study", base_idx),
        )
        var_f = [s.var_f for s in steps]
        for step, delta in enumerate(np.diff(var_f), start=1):
            deltas.append(delta)
            if delta > 0:
                violations.append((base_idx, step, float(delta)))
    dt = time.perf_counter() - t0
    for base_idx, step, delta in violations:
        print(
            f"  logged increase: base {base_idx} transfer {step} "
            f"raised Var(F) by {delta:+.5f}"
        )
    mean_delta = float(np.mean(deltas))
    ok = len(deltas) >= 50 and mean_delta <= 0.005
    emit(
        "degree-balancing transfer trend",
        ok,
        f"mean Var(F) change per transfer={mean_delta:+.6f} over "
        f"{len(deltas)} transfers (need <=+0.005), {len(violations)} "
        f"per-step increases logged; {dt:.1f}s",
    )


def test_c10_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    flags = [
        "--seed", "17", "--n-a", "30", "--n-b", "30", "--p-base", "0.1",
        "--rho-grid", "0:0.6:3", "--reps", "4",
    ]

    def run(name, extra=()):
        out = tmp_path / f"{name}.csv"
        proc = subprocess.run(
            ["fairsight", "sweep", "--out", str(out)] + flags + list(extra),
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        agg = tmp_path / f"{name}.agg.csv"
        return out.read_bytes() + agg.read_bytes()

    repeat_identical = run("first") == run("second")
    jobs_identical = run("j1", ["--jobs", "1"]) == run("j8", ["--jobs", "8"])
    dt = time.perf_counter() - t0
    ok = repeat_identical and jobs_identical
    emit(
        "command-line determinism",
        ok,
        f"repeat runs byte-identical={repeat_identical}, "
        f"--jobs 1 vs --jobs 8 byte-identical={jobs_identical}; {dt:.1f}s",
    )
