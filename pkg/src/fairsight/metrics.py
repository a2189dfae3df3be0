"""Perception, visibility, exposure, and structure metrics on labeled graphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import ndtr

from .graph import GROUP_A, GROUP_B, Graph, bfs_distances


def as_outcome(h, n: int) -> np.ndarray:
    """Validate an outcome vector: shape (n,), finite, inside [0, 1]."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (n,):
        raise ValueError(f"outcome vector must have shape ({n},), got {h.shape}")
    if not np.isfinite(h).all():
        raise ValueError("outcome vector contains non-finite entries")
    if h.size and (h.min() < 0.0 or h.max() > 1.0):
        raise ValueError("outcome values must lie in [0, 1]")
    return h


def peer_values(g: Graph, h, d: int = 1):
    """Mean outcome over each node's d-hop neighborhood.

    Returns (values, valid): ``values[i]`` is the average of ``h`` over the
    set of nodes reachable from i by a walk of length <= d; ``valid[i]`` is
    False when that set is empty (isolated node), in which case the value
    entry is meaningless. At d = 1 the node itself is excluded; at d >= 2 a
    non-isolated node reaches itself via any incident edge and is included.
    """
    if d < 1:
        raise ValueError(f"depth must be >= 1, got {d}")
    h = as_outcome(h, g.n)
    if d == 1:
        sums = np.zeros(g.n)
        if g.m:
            e = g.edges
            sums = np.bincount(e[:, 0], weights=h[e[:, 1]], minlength=g.n)
            sums += np.bincount(e[:, 1], weights=h[e[:, 0]], minlength=g.n)
        counts = g.degrees.astype(np.float64)
    else:
        sums = np.zeros(g.n)
        counts = np.zeros(g.n)
        for i in range(g.n):
            dist = bfs_distances(g, i)
            sel = (dist >= 1) & (dist <= d)
            c = int(sel.sum())
            s = float(h[sel].sum())
            if g.degrees[i] > 0:  # self reachable via a length-2 closed walk
                c += 1
                s += h[i]
            sums[i] = s
            counts[i] = c
    valid = counts > 0
    values = np.zeros(g.n)
    np.divide(sums, counts, out=values, where=valid)
    return values, valid


def peer_expectation(g: Graph, h, i: int, d: int = 1) -> Optional[float]:
    """Average outcome among the peers node i can see within d hops.

    Returns None when the neighborhood is empty.
    """
    if not 0 <= i < g.n:
        raise ValueError(f"node {i} out of range")
    values, valid = peer_values(g, h, d)
    return float(values[i]) if valid[i] else None


def perception_indicator(g: Graph, h, i: int, d: int = 1) -> Optional[int]:
    """1 if node i's outcome is at least its peer expectation (ties count as
    fair), 0 if below, None when the comparison set is empty."""
    h = as_outcome(h, g.n)
    e = peer_expectation(g, h, i, d)
    if e is None:
        return None
    return int(e <= h[i])


def smooth_perception(
    g: Graph, h, i: int, d: int = 1, sigma: float = 0.1
) -> Optional[float]:
    """Gaussian-CDF relaxation of the perception indicator.

    Value is Phi((h(i) - peer_expectation) / sigma); exactly 0.5 at a tie.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    h = as_outcome(h, g.n)
    e = peer_expectation(g, h, i, d)
    if e is None:
        return None
    return float(ndtr((h[i] - e) / sigma))


@dataclass
class PerceptionReport:
    """Group-level view of who perceives their outcome as fair.

    ``f`` holds the per-node indicators (meaningful where ``valid``),
    ``vis_a``/``vis_b`` are group means over valid nodes, ``gap`` their
    difference (A minus B), and ``variance`` the population variance of the
    indicator across all valid nodes.
    """

    depth: int
    f: np.ndarray
    valid: np.ndarray
    vis_a: float
    vis_b: float
    gap: float
    variance: float
    n_valid_a: int
    n_valid_b: int


def perception_report(g: Graph, h, d: int = 1) -> PerceptionReport:
    values, valid = peer_values(g, h, d)
    h = as_outcome(h, g.n)
    f = np.zeros(g.n, dtype=np.int8)
    f[valid] = values[valid] <= h[valid]

    report = {}
    for group, name in ((GROUP_A, "a"), (GROUP_B, "b")):
        mask = g.group_mask(group) & valid
        count = int(mask.sum())
        if count == 0:
            raise ValueError(
                f"group {'AB'[group]} has no nodes with a non-empty "
                f"depth-{d} neighborhood"
            )
        report[name] = (float(f[mask].mean()), count)
    fv = f[valid].astype(np.float64)
    return PerceptionReport(
        depth=d,
        f=f,
        valid=valid,
        vis_a=report["a"][0],
        vis_b=report["b"][0],
        gap=report["a"][0] - report["b"][0],
        variance=float(fv.var()),
        n_valid_a=report["a"][1],
        n_valid_b=report["b"][1],
    )


def global_gap(h, labels) -> float:
    """Difference of group means, A minus B. ``h`` may hold scores or
    realized 0/1 decisions."""
    h = np.asarray(h, dtype=np.float64)
    labels = np.asarray(labels)
    if h.shape != labels.shape:
        raise ValueError("outcomes and labels must have matching shapes")
    mask_a = labels == GROUP_A
    mask_b = labels == GROUP_B
    if not mask_a.any() or not mask_b.any():
        raise ValueError("both groups must be non-empty")
    return float(h[mask_a].mean() - h[mask_b].mean())


@dataclass
class ExposureSummary:
    """Node-average vs edge-exposure view of an outcome vector.

    ``edge_avg`` weights each node by its degree (the average seen when
    sampling an edge endpoint). ``peer_mean_degree_weighted`` is the
    degree-weighted mean of the 1-hop peer expectations, with isolated
    nodes contributing zero weight; it coincides with ``edge_avg``.
    ``cov_identity_residual`` is (edge_avg - node_avg) - Cov(d, h)/E[d],
    which is zero up to rounding.
    """

    node_avg: float
    edge_avg: float
    peer_mean_degree_weighted: float
    peer_mean_unweighted: float
    cov_dh: float
    mean_degree: float
    cov_identity_residual: float


def exposure_summary(g: Graph, h) -> ExposureSummary:
    if g.m == 0:
        raise ValueError("exposure is undefined on a graph with no edges")
    h = as_outcome(h, g.n)
    deg = g.degrees.astype(np.float64)
    node_avg = float(h.mean())
    mean_degree = float(deg.mean())
    edge_avg = float((deg * h).sum() / (2.0 * g.m))
    cov_dh = float((deg * h).mean() - mean_degree * node_avg)

    values, valid = peer_values(g, h, 1)
    # isolated nodes carry zero degree weight, so the convention E_i = 0
    # there does not affect the weighted mean
    peer_w = float((deg[valid] * values[valid]).sum() / (2.0 * g.m))
    peer_u = float(values[valid].mean())
    residual = (edge_avg - node_avg) - cov_dh / mean_degree

    summary = ExposureSummary(
        node_avg=node_avg,
        edge_avg=edge_avg,
        peer_mean_degree_weighted=peer_w,
        peer_mean_unweighted=peer_u,
        cov_dh=cov_dh,
        mean_degree=mean_degree,
        cov_identity_residual=float(residual),
    )
    scale = max(1.0, abs(edge_avg))
    if abs(peer_w - edge_avg) > 1e-9 * scale or abs(residual) > 1e-9 * scale:
        raise ArithmeticError(
            "exposure identities violated beyond rounding; input is corrupt"
        )
    return summary


def homophily_index(p_in: float, p_out: float, k: int = 2) -> float:
    """Block-model homophily normalized against k equal groups:
    (p_in - p_out) / (p_in + (k - 1) p_out)."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if p_in < 0 or p_out < 0:
        raise ValueError("probabilities must be non-negative")
    denom = p_in + (k - 1) * p_out
    if denom == 0:
        raise ValueError("homophily undefined: p_in + (k-1) p_out is zero")
    return (p_in - p_out) / denom


def homophily_sym(p_in: float, p_out: float) -> float:
    """Symmetric homophily (p_in - p_out)/(p_in + p_out); this is the rho
    recovered exactly from the p_base*(1 +/- rho) parameterization."""
    if p_in < 0 or p_out < 0:
        raise ValueError("probabilities must be non-negative")
    denom = p_in + p_out
    if denom == 0:
        raise ValueError("homophily undefined: p_in + p_out is zero")
    return (p_in - p_out) / denom


def empirical_homophily(g: Graph) -> float:
    """Observed same-group edge fraction, rescaled so that 0 means the level
    a label-blind random graph would show and 1 means fully assortative:
    (f_same - f_rand) / (1 - f_rand) with f_rand = pi_A^2 + pi_B^2."""
    if g.m == 0:
        raise ValueError("empirical homophily is undefined without edges")
    pi_a = float((g.labels == GROUP_A).mean())
    pi_b = 1.0 - pi_a
    f_rand = pi_a * pi_a + pi_b * pi_b
    if 1.0 - f_rand == 0.0:
        raise ValueError(
            "empirical homophily is undefined with a single group present"
        )
    same = float((g.labels[g.edges[:, 0]] == g.labels[g.edges[:, 1]]).mean())
    return (same - f_rand) / (1.0 - f_rand)


def modularity(g: Graph) -> float:
    """Two-group Newman modularity via the +/-1 signed-label quadratic form:
    Q = (s^T A s - (s^T d)^2 / 2m) / 4m."""
    if g.m == 0:
        raise ValueError("modularity is undefined without edges")
    s = np.where(g.labels == GROUP_A, 1.0, -1.0)
    two_m = 2.0 * g.m
    sas = 2.0 * (s[g.edges[:, 0]] * s[g.edges[:, 1]]).sum()
    sd = float((s * g.degrees).sum())
    return float((sas - sd * sd / two_m) / (2.0 * two_m))


def avg_clustering(g: Graph) -> float:
    """Mean local clustering coefficient; degree < 2 contributes zero."""
    deg = g.degrees
    if g.n == 0:
        raise ValueError("clustering is undefined on an empty graph")
    if g.m == 0:
        return 0.0
    data = np.ones(g.indices.size, dtype=np.float64)
    a = sp.csr_matrix((data, g.indices, g.indptr), shape=(g.n, g.n))
    # row sums of (A @ A) restricted to the support of A count, per node,
    # ordered paths through it that close a triangle: twice its triangle count
    paths = (a @ a).multiply(a)
    tri2 = np.asarray(paths.sum(axis=1)).ravel()
    coeff = np.zeros(g.n)
    eligible = deg >= 2
    denom = (deg * (deg - 1)).astype(np.float64)
    np.divide(tri2, denom, out=coeff, where=eligible)
    return float(coeff.mean())


@dataclass
class StructureReport:
    """Graph-level structure summary; the rho_param/rho_sym entries are only
    available when generative block probabilities are known."""

    rho_param: Optional[float]
    rho_sym: Optional[float]
    rho_emp: float
    q: float
    clustering: float
    mean_degree: float
    cov_dh: float


def structure_report(
    g: Graph, h, p_in: Optional[float] = None, p_out: Optional[float] = None
) -> StructureReport:
    h = as_outcome(h, g.n)
    deg = g.degrees.astype(np.float64)
    cov_dh = float((deg * h).mean() - deg.mean() * h.mean())
    has_params = p_in is not None and p_out is not None
    return StructureReport(
        rho_param=homophily_index(p_in, p_out) if has_params else None,
        rho_sym=homophily_sym(p_in, p_out) if has_params else None,
        rho_emp=empirical_homophily(g),
        q=modularity(g),
        clustering=avg_clustering(g),
        mean_degree=float(deg.mean()),
        cov_dh=cov_dh,
    )
