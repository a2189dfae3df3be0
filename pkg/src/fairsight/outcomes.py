"""Outcome (score) generators and realized-decision sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .graph import GROUP_A, GROUP_B, Graph, check_seed
from .metrics import as_outcome


def normalized_degree(g: Graph) -> np.ndarray:
    """Min-max normalized degrees in [0, 1]; 0.5 everywhere on a regular
    graph, where the spread is zero."""
    deg = g.degrees.astype(np.float64)
    lo, hi = float(deg.min()), float(deg.max())
    if hi == lo:
        return np.full(g.n, 0.5)
    return (deg - lo) / (hi - lo)


@dataclass
class MixedOutcomeParams:
    """Weights for the group + degree + noise score model.

    ``alpha`` mixes a per-group Beta draw against the normalized-degree
    term; ``noise_sd`` is the scale of additive Gaussian noise; ``clamp``
    clips the result back into [0, 1].
    """

    alpha: float = 0.7
    beta_a: tuple = (4.0, 2.0)
    beta_b: tuple = (2.0, 4.0)
    noise_sd: float = 0.05
    clamp: bool = True

    def validate(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        for name, shape in (("beta_a", self.beta_a), ("beta_b", self.beta_b)):
            if len(shape) != 2 or shape[0] <= 0 or shape[1] <= 0:
                raise ValueError(f"{name} must be two positive shapes, got {shape}")
        if self.noise_sd < 0:
            raise ValueError(f"noise_sd must be >= 0, got {self.noise_sd}")


def mixed_outcome(g: Graph, params: MixedOutcomeParams, seed: int) -> np.ndarray:
    """Score = alpha * Beta(group shapes) + (1 - alpha) * normalized degree,
    plus Gaussian noise. Draw order is fixed (all group terms, then noise)."""
    params.validate()
    rng = np.random.default_rng(check_seed(seed))
    a_mask = g.labels == GROUP_A
    shape1 = np.where(a_mask, params.beta_a[0], params.beta_b[0])
    shape2 = np.where(a_mask, params.beta_a[1], params.beta_b[1])
    group_term = rng.beta(shape1, shape2)
    h = params.alpha * group_term + (1.0 - params.alpha) * normalized_degree(g)
    if params.noise_sd > 0:
        h = h + rng.normal(0.0, params.noise_sd, size=g.n)
    if params.clamp:
        h = np.clip(h, 0.0, 1.0)
    return as_outcome(h, g.n)


DP_BASES = ("uniform", "degree")


def _dp_base_scores(g: Graph, base, rng) -> np.ndarray:
    if callable(base):
        return np.asarray(base(g, rng), dtype=np.float64)
    if base == "uniform":
        return rng.random(g.n)
    if base == "degree":
        # convex in degree: keeps the degree-weighted neighbor inflation
        # distinguishable between groups with different mean degrees (a base
        # linear in degree cancels the exposure difference at first order)
        dn = normalized_degree(g)
        return 0.8 * dn**3 + 0.2 * rng.random(g.n)
    raise ValueError(f"unknown dp base {base!r}; expected one of {DP_BASES}")


def dp_exact(
    g: Graph, base: Union[str, Callable] = "uniform", seed: int = 0
) -> np.ndarray:
    """Scores satisfying exact demographic parity at the group-mean level.

    A common pool of base scores is drawn independently of group membership,
    then each group is shifted so both group means match the overall mean.
    If the shift pushes values outside [0, 1] the whole vector is rescaled
    (a global affine map, which preserves the equality). Group means agree
    to within 1e-12 afterwards.
    """
    if not g.group_mask(GROUP_A).any() or not g.group_mask(GROUP_B).any():
        raise ValueError("demographic parity needs both groups present")
    rng = np.random.default_rng(check_seed(seed))
    x = _dp_base_scores(g, base, rng)
    if x.shape != (g.n,):
        raise ValueError("base scores must be one per node")

    h = x.copy()
    target = float(x.mean())
    for group in (0, 1):
        mask = g.labels == group
        h[mask] += target - float(x[mask].mean())
    lo, hi = float(h.min()), float(h.max())
    if lo < 0.0 or hi > 1.0:
        h = (h - lo) / (hi - lo)
    # one exact correction pass soaks up affine rounding drift
    target = float(h.mean())
    for group in (0, 1):
        mask = g.labels == group
        h[mask] += target - float(h[mask].mean())
    h = np.clip(h, 0.0, 1.0)

    gap = abs(float(h[g.labels == 0].mean()) - float(h[g.labels == 1].mean()))
    if gap > 1e-12:
        raise ArithmeticError(f"parity shift left a residual group gap of {gap}")
    return as_outcome(h, g.n)


def degree_linear_outcome(g: Graph) -> np.ndarray:
    """Deterministic score: the min-max normalized degree itself."""
    return as_outcome(normalized_degree(g), g.n)


def constant_outcome(g: Graph, value: float = 0.5) -> np.ndarray:
    """Same score for every node; every comparison is a tie."""
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"value must be in [0, 1], got {value}")
    return np.full(g.n, float(value))


def bernoulli_realize(h, seed: int) -> np.ndarray:
    """Realize binary decisions from acceptance scores, one independent
    Bernoulli(h_i) draw per node."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 1:
        raise ValueError("scores must be a flat vector")
    as_outcome(h, h.shape[0])
    rng = np.random.default_rng(check_seed(seed))
    return (rng.random(h.shape[0]) < h).astype(np.int8)


RULE_KINDS = ("mixed", "dp_exact", "degree_linear", "constant")


def generate_outcomes(g: Graph, rule: str, rule_params: dict, seed: int) -> np.ndarray:
    """Dispatch by rule name; ``rule_params`` mirrors the rule's own
    parameter names (ignored by deterministic rules)."""
    rule_params = dict(rule_params or {})
    if rule == "mixed":
        params = MixedOutcomeParams(**{
            k: tuple(v) if k in ("beta_a", "beta_b") else v
            for k, v in rule_params.items()
        })
        return mixed_outcome(g, params, seed)
    if rule == "dp_exact":
        return dp_exact(g, base=rule_params.get("base", "uniform"), seed=seed)
    if rule == "degree_linear":
        return degree_linear_outcome(g)
    if rule == "constant":
        return constant_outcome(g, value=rule_params.get("value", 0.5))
    raise ValueError(f"unknown rule {rule!r}; expected one of {RULE_KINDS}")


def write_outcome_vector(h, path):
    """Two-column audit dump: node id and score, one row per node."""
    h = np.asarray(h, dtype=np.float64)
    lines = ["node_id h"]
    lines.extend(f"{i} {v:.12g}" for i, v in enumerate(h.tolist()))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
