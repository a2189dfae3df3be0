"""Undirected labeled graphs: construction, two-block SBM sampling, BFS
neighborhoods, and degree-aware rewiring operators."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

GROUP_A = 0
GROUP_B = 1

_LABEL_CHARS = {GROUP_A: "A", GROUP_B: "B"}
_CHAR_LABELS = {"A": GROUP_A, "B": GROUP_B}

MAX_SEED = 2**64 - 1


class TransferError(ValueError):
    """A degree-balancing transfer violated its preconditions."""


class RewiringExhaustedError(RuntimeError):
    """No valid degree-preserving switch was found within the attempt budget."""


def check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64 - 1], got {seed}")
    return int(seed)


def derive_seed(master_seed: int, *parts) -> int:
    """Split ``master_seed`` into a stream-specific seed.

    The scheme is stable across platforms and sessions: the parts are
    canonicalized to text (floats via ``float.hex`` so the exact bits count),
    hashed with blake2b, and the low 64 bits are XORed into the master seed.
    """
    check_seed(master_seed)
    canon = []
    for p in parts:
        if isinstance(p, float) or isinstance(p, np.floating):
            canon.append(float(p).hex())
        else:
            canon.append(repr(p))
    digest = hashlib.blake2b("|".join(canon).encode(), digest_size=8).digest()
    return master_seed ^ int.from_bytes(digest, "big")


class Graph:
    """Immutable simple undirected graph with binary node labels.

    Nodes are 0..n-1. Edges are stored once with u < v and also as sorted
    CSR-style adjacency (``indptr``/``indices``). Labels are 0 (group A) or
    1 (group B). Arrays are marked read-only; construct a new Graph to
    modify.
    """

    __slots__ = ("n", "edges", "labels", "indptr", "indices", "degrees",
                 "_edge_keys", "_adjacency")

    def __init__(self, n: int, edges, labels):
        if n < 1:
            raise ValueError(f"graph needs at least one node, got n={n}")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        labels = np.asarray(labels, dtype=np.int8)
        if labels.shape != (n,):
            raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
        if labels.size and not np.isin(labels, (GROUP_A, GROUP_B)).all():
            raise ValueError("labels must be 0 (group A) or 1 (group B)")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint out of range")
            if (edges[:, 0] == edges[:, 1]).any():
                raise ValueError("self-loops are not allowed")
            lo = edges.min(axis=1)
            hi = edges.max(axis=1)
            edges = np.column_stack([lo, hi])
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            keys = edges[:, 0] * n + edges[:, 1]
            if keys.size > 1 and (np.diff(keys) == 0).any():
                raise ValueError("duplicate edges are not allowed")

        self.n = int(n)
        self.edges = edges
        self.labels = labels
        self.degrees = (
            np.bincount(edges[:, 0], minlength=n)
            + np.bincount(edges[:, 1], minlength=n)
        ).astype(np.int64)
        # sorted adjacency in CSR form
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=self.indptr[1:])
        both = np.concatenate([edges, edges[:, ::-1]]) if edges.size else edges
        if both.size:
            order = np.lexsort((both[:, 1], both[:, 0]))
            self.indices = np.ascontiguousarray(both[order, 1])
        else:
            self.indices = np.zeros(0, dtype=np.int64)
        for arr in (self.edges, self.labels, self.degrees, self.indptr, self.indices):
            arr.setflags(write=False)
        self._edge_keys = None
        self._adjacency = None

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edge_keys(self):
        if self._edge_keys is None:
            self._edge_keys = set(
                (self.edges[:, 0] * self.n + self.edges[:, 1]).tolist()
            )
        return self._edge_keys

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return u * self.n + v in self.edge_keys()

    def adjacency_sets(self):
        if self._adjacency is None:
            self._adjacency = [
                frozenset(self.neighbors(i).tolist()) for i in range(self.n)
            ]
        return self._adjacency

    def group_mask(self, group: int) -> np.ndarray:
        return self.labels == group

    def same_graph(self, other: "Graph") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass
class SbmParams:
    """Two-block stochastic block model parameters.

    Group A occupies node ids [0, n_a) and group B [n_a, n_a + n_b).
    ``p_in`` is the within-group edge probability, ``p_out`` cross-group.
    """

    n_a: int
    n_b: int
    p_in: float
    p_out: float

    def validate(self):
        if self.n_a < 0 or self.n_b < 0 or self.n_a + self.n_b < 2:
            raise ValueError(
                f"need at least two nodes, got n_a={self.n_a} n_b={self.n_b}"
            )
        for name, p in (("p_in", self.p_in), ("p_out", self.p_out)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")

    @property
    def n(self) -> int:
        return self.n_a + self.n_b


def sbm_from_homophily(n_a: int, n_b: int, p_base: float, rho: float) -> SbmParams:
    """Parameterize the SBM by a base density and a symmetric homophily level:
    p_in = p_base * (1 + rho), p_out = p_base * (1 - rho)."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    p_in = p_base * (1.0 + rho)
    p_out = p_base * (1.0 - rho)
    if p_in > 1.0:
        raise ValueError(
            f"p_base * (1 + rho) = {p_in} exceeds 1; lower p_base or rho"
        )
    return SbmParams(n_a=n_a, n_b=n_b, p_in=p_in, p_out=p_out)


def generate_sbm(params: SbmParams, seed: int) -> Graph:
    """Sample a two-block SBM.

    Every unordered pair is an independent Bernoulli draw; pairs are consumed
    in a fixed order (within-A, within-B, cross) so a given seed always
    produces the same graph.
    """
    params.validate()
    rng = np.random.default_rng(check_seed(seed))
    n_a, n_b = params.n_a, params.n_b
    n = params.n

    chunks = []
    ia, ja = np.triu_indices(n_a, k=1)
    if ia.size:
        keep = rng.random(ia.size) < params.p_in
        chunks.append(np.column_stack([ia[keep], ja[keep]]))
    ib, jb = np.triu_indices(n_b, k=1)
    if ib.size:
        keep = rng.random(ib.size) < params.p_in
        chunks.append(np.column_stack([ib[keep] + n_a, jb[keep] + n_a]))
    if n_a and n_b:
        ic = np.repeat(np.arange(n_a), n_b)
        jc = np.tile(np.arange(n_a, n), n_a)
        keep = rng.random(ic.size) < params.p_out
        chunks.append(np.column_stack([ic[keep], jc[keep]]))

    edges = np.concatenate(chunks) if chunks else np.zeros((0, 2), dtype=np.int64)
    labels = np.concatenate([
        np.full(n_a, GROUP_A, dtype=np.int8),
        np.full(n_b, GROUP_B, dtype=np.int8),
    ])
    return Graph(n, edges, labels)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Shortest-path distances from ``source``; -1 where unreachable."""
    if not 0 <= source < g.n:
        raise ValueError(f"source {source} out of range")
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    while frontier.size:
        parts = [g.indices[g.indptr[u]:g.indptr[u + 1]] for u in frontier]
        if not parts:
            break
        cand = np.unique(np.concatenate(parts))
        new = cand[dist[cand] < 0]
        if not new.size:
            break
        d += 1
        dist[new] = d
        frontier = new
    return dist


def neighborhood(g: Graph, i: int, d: int) -> np.ndarray:
    """Nodes reachable from ``i`` by a walk of length at most ``d``, sorted.

    At d = 1 this is the open neighborhood (``i`` excluded). For d >= 2 a
    non-isolated ``i`` is reachable from itself through any incident edge,
    so it is included.
    """
    if d < 1:
        raise ValueError(f"depth must be >= 1, got {d}")
    dist = bfs_distances(g, i)
    members = np.flatnonzero((dist >= 1) & (dist <= d))
    if d >= 2 and g.degrees[i] > 0:
        members = np.union1d(members, [i])
    return members


def is_connected(g: Graph) -> bool:
    if g.n == 1:
        return True
    return not (bfs_distances(g, 0) < 0).any()


def diameter(g: Graph) -> int:
    """Maximum shortest-path distance over all node pairs.

    Raises ValueError on disconnected input.
    """
    if g.n == 1:
        return 0
    best = 0
    for i in range(g.n):
        dist = bfs_distances(g, i)
        if (dist < 0).any():
            raise ValueError("diameter is undefined: graph is not connected")
        best = max(best, int(dist.max()))
    return best


def degree_balancing_transfer(g: Graph, ell: int, j: int, k: int) -> Graph:
    """Replace edge (ell, j) by (ell, k) where deg(k) < deg(j).

    This moves one unit of degree from a higher-degree node to a
    lower-degree one while keeping ell's degree fixed.
    """
    for name, node in (("ell", ell), ("j", j), ("k", k)):
        if not 0 <= node < g.n:
            raise TransferError(f"node {name}={node} out of range")
    if k == ell:
        raise TransferError("k must differ from ell")
    if not g.has_edge(ell, j):
        raise TransferError(f"({ell}, {j}) is not an edge")
    if g.has_edge(ell, k):
        raise TransferError(f"({ell}, {k}) is already an edge")
    if not g.degrees[k] < g.degrees[j]:
        raise TransferError(
            f"transfer needs deg(k) < deg(j), got deg(k)={g.degrees[k]} "
            f"deg(j)={g.degrees[j]}"
        )
    lo, hi = (ell, j) if ell < j else (j, ell)
    keep = ~((g.edges[:, 0] == lo) & (g.edges[:, 1] == hi))
    new_edge = np.array([[min(ell, k), max(ell, k)]], dtype=np.int64)
    return Graph(g.n, np.concatenate([g.edges[keep], new_edge]), g.labels)


SWITCH_BIASES = ("uniform", "close_triangle", "open_triangle")


def _switch_triangle_delta(g: Graph, a, b, c, d) -> int:
    """Change in total triangle count when (a,b),(c,d) -> (a,c),(b,d)."""
    adj = g.adjacency_sets()
    removed = len(adj[a] & adj[b]) + len(adj[c] & adj[d])
    # after removing both old edges: a-b and c-d are no longer adjacent
    added = len((adj[a] - {b}) & (adj[c] - {d}))
    added += len((adj[b] - {a}) & (adj[d] - {c}))
    return added - removed


def degree_preserving_switch(
    g: Graph, seed: int, bias: str = "uniform", max_attempts: int = 1000
) -> Graph:
    """One double-edge swap: (a,b),(c,d) -> (a,c),(b,d), degrees unchanged.

    ``bias`` filters proposals by their effect on the number of triangles:
    "close_triangle" accepts only swaps that do not decrease it,
    "open_triangle" only swaps that do not increase it, "uniform" accepts
    any simple swap. Raises RewiringExhaustedError when no acceptable swap
    appears within ``max_attempts`` proposals.
    """
    if bias not in SWITCH_BIASES:
        raise ValueError(f"bias must be one of {SWITCH_BIASES}, got {bias!r}")
    if g.m < 2:
        raise RewiringExhaustedError("fewer than two edges; no swap exists")
    rng = np.random.default_rng(check_seed(seed))
    edges = g.edges
    for _ in range(max_attempts):
        e1, e2 = rng.choice(g.m, size=2, replace=False)
        a, b = edges[e1]
        c, d = edges[e2]
        if rng.random() < 0.5:
            a, b = b, a
        if rng.random() < 0.5:
            c, d = d, c
        a, b, c, d = int(a), int(b), int(c), int(d)
        if len({a, b, c, d}) < 4:
            continue
        if g.has_edge(a, c) or g.has_edge(b, d):
            continue
        if bias != "uniform":
            delta = _switch_triangle_delta(g, a, b, c, d)
            if bias == "close_triangle" and delta < 0:
                continue
            if bias == "open_triangle" and delta > 0:
                continue
        keep = np.ones(g.m, dtype=bool)
        keep[[e1, e2]] = False
        new_edges = np.array(
            [[min(a, c), max(a, c)], [min(b, d), max(b, d)]], dtype=np.int64
        )
        return Graph(g.n, np.concatenate([edges[keep], new_edges]), g.labels)
    raise RewiringExhaustedError(
        f"no acceptable {bias} swap in {max_attempts} attempts"
    )


def write_edge_list(g: Graph, path):
    """Text format: header ``n <n> m <m>``, one ``i j`` line per edge with
    i < j, then a ``labels`` line with A/B per node."""
    lines = [f"n {g.n} m {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges.tolist())
    lines.append("labels " + " ".join(_LABEL_CHARS[int(x)] for x in g.labels))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw:
        raise ValueError(f"{path}: empty edge-list file")
    head = raw[0].split()
    if len(head) != 4 or head[0] != "n" or head[2] != "m":
        raise ValueError(f"{path}: malformed header {raw[0]!r}")
    n, m = int(head[1]), int(head[3])
    if len(raw) != m + 2:
        raise ValueError(
            f"{path}: expected {m} edge lines plus a labels line, "
            f"got {len(raw) - 1} lines after the header"
        )
    edges = []
    for ln in raw[1:m + 1]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed edge line {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if not u < v:
            raise ValueError(f"{path}: edge lines must have i < j, got {ln!r}")
        edges.append((u, v))
    lab = raw[m + 1].split()
    if not lab or lab[0] != "labels" or len(lab) != n + 1:
        raise ValueError(f"{path}: malformed labels line")
    try:
        labels = [_CHAR_LABELS[c] for c in lab[1:]]
    except KeyError as exc:
        raise ValueError(f"{path}: unknown label {exc}") from None
    return Graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), labels)
