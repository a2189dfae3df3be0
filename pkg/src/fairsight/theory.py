"""Closed-form mean-field predictions for two-block graphs: same-group
neighbor rates, expected peer means, and first-order perceived-gap slopes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import GROUP_A, GROUP_B, Graph
from .metrics import as_outcome, peer_values

# Calibrated upper bound for |theta_exact - theta_first_order| / rho^2 over
# rho in (0, 0.2], pi in {0.1, ..., 0.9}; measured maximum 0.21818 (attained
# at pi = 0.2, rho = 0.2) plus ~5% headroom. Frozen; tests regress against it.
THETA_FIRST_ORDER_BOUND = 0.23


def _check_pi_rho(pi_s: float, rho: float):
    if not 0.0 < pi_s < 1.0:
        raise ValueError(f"group share must lie strictly inside (0, 1), got {pi_s}")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")


def theta_exact(pi_s: float, rho: float) -> float:
    """Probability that a random neighbor of a group-s node is also group s,
    under edge densities p(1 + rho) within and p(1 - rho) across:
    pi_s (1 + rho) / (1 + rho (pi_s - pi_s'))."""
    _check_pi_rho(pi_s, rho)
    pi_other = 1.0 - pi_s
    return pi_s * (1.0 + rho) / (1.0 + rho * (pi_s - pi_other))


def theta_first_order(pi_s: float, rho: float) -> float:
    """Linearization of ``theta_exact`` around rho = 0:
    pi_s + 2 rho pi_s pi_s'."""
    _check_pi_rho(pi_s, rho)
    return pi_s + 2.0 * rho * pi_s * (1.0 - pi_s)


def gaussian_density_at_zero(sigma: float) -> float:
    """Peak density of the smoothing kernel: 1 / (sigma sqrt(2 pi))."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return 1.0 / (sigma * math.sqrt(2.0 * math.pi))


@dataclass
class TheoryParams:
    """Inputs to the mean-field gap predictions.

    ``pi_a`` is group A's node share, ``rho`` the symmetric homophily level,
    ``mu_a``/``mu_b`` the group mean outcomes, ``sigma`` the smoothing scale
    of the Gaussian relaxation.
    """

    pi_a: float
    rho: float
    mu_a: float
    mu_b: float
    sigma: float = 0.1

    def validate(self):
        _check_pi_rho(self.pi_a, self.rho)
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def predicted_neighbor_mean(params: TheoryParams, group: int) -> float:
    """Expected 1-hop peer mean for a node of ``group``:
    theta_s mu_s + (1 - theta_s) mu_s'."""
    params.validate()
    if group == GROUP_A:
        theta = theta_exact(params.pi_a, params.rho)
        return theta * params.mu_a + (1.0 - theta) * params.mu_b
    if group == GROUP_B:
        theta = theta_exact(1.0 - params.pi_a, params.rho)
        return theta * params.mu_b + (1.0 - theta) * params.mu_a
    raise ValueError(f"group must be {GROUP_A} or {GROUP_B}, got {group}")


def gamma_statistic(g: Graph, h) -> float:
    """Between-group contrast of own outcome versus 1-hop peer exposure:
    (mean_A h - mean_B h) - (mean_A E[h|peers] - mean_B E[h|peers]).

    Peer means are averaged over nodes with at least one neighbor.
    """
    h = as_outcome(h, g.n)
    values, valid = peer_values(g, h, 1)
    out = {}
    for group in (GROUP_A, GROUP_B):
        mask = g.group_mask(group)
        vmask = mask & valid
        if not mask.any() or not vmask.any():
            raise ValueError(
                f"group {'AB'[group]} needs at least one non-isolated node"
            )
        out[group] = (float(h[mask].mean()), float(values[vmask].mean()))
    own = out[GROUP_A][0] - out[GROUP_B][0]
    exposure = out[GROUP_A][1] - out[GROUP_B][1]
    return own - exposure


@dataclass
class GapPrediction:
    """Two analytic estimates of the group perception gap (A minus B).

    ``headline_gap`` scales the contrast statistic by the small-rho slope
    constant 2 psi(0) pi_A pi_B; ``expansion_gap`` is the alternative
    first-order form psi(0) (mu_A - mu_B)(1 - 4 rho pi_A pi_B). The two are
    distinct estimators and generally disagree; both are reported.
    """

    gamma: float
    slope_constant: float
    headline_gap: float
    expansion_gap: float


def predicted_gap(params: TheoryParams, gamma: float) -> GapPrediction:
    params.validate()
    psi0 = gaussian_density_at_zero(params.sigma)
    pi_a = params.pi_a
    pi_b = 1.0 - pi_a
    slope = 2.0 * psi0 * pi_a * pi_b
    headline = slope * params.rho * gamma
    expansion = psi0 * (params.mu_a - params.mu_b) * (
        1.0 - 4.0 * params.rho * pi_a * pi_b
    )
    return GapPrediction(
        gamma=float(gamma),
        slope_constant=float(slope),
        headline_gap=float(headline),
        expansion_gap=float(expansion),
    )


def expected_degrees(n: int, pi_a: float, p_in: float, p_out: float):
    """Expected degree per group, (n - 1) (pi_s p_in + pi_s' p_out)."""
    if n < 2:
        raise ValueError("need at least two nodes")
    _check_pi_rho(pi_a, 0.0)
    d_a = (n - 1) * (pi_a * p_in + (1.0 - pi_a) * p_out)
    d_b = (n - 1) * ((1.0 - pi_a) * p_in + pi_a * p_out)
    return d_a, d_b
