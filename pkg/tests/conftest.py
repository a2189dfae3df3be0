"""Shared small-graph builders used across the test modules.

Hand graphs are small enough that every expected statistic can be recomputed
by direct enumeration in the tests that use them.
"""

import numpy as np
import pytest

from fairsight import GROUP_A, GROUP_B, Graph, SbmParams, generate_sbm


def build_triangle(labels=(GROUP_A, GROUP_A, GROUP_B)) -> Graph:
    return Graph(3, [(0, 1), (0, 2), (1, 2)], labels)


def build_path(n=3) -> Graph:
    labels = [GROUP_A] * (n // 2) + [GROUP_B] * (n - n // 2)
    return Graph(n, [(i, i + 1) for i in range(n - 1)], labels)


def build_star(leaves=3, extra_isolated=0) -> Graph:
    """Hub node 0 with the given number of leaves, then isolated nodes."""
    n = 1 + leaves + extra_isolated
    labels = [GROUP_A] + [GROUP_B] * (n - 1)
    return Graph(n, [(0, i) for i in range(1, leaves + 1)], labels)


def build_two_triangles() -> Graph:
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]
    labels = [GROUP_A] * 3 + [GROUP_B] * 3
    return Graph(6, edges, labels)


def build_k4_minus_edge() -> Graph:
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]
    labels = [GROUP_A, GROUP_A, GROUP_B, GROUP_B]
    return Graph(4, edges, labels)


def build_cycle(n=6) -> Graph:
    edges = [(i, (i + 1) % n) for i in range(n)]
    labels = [GROUP_A if i % 2 == 0 else GROUP_B for i in range(n)]
    return Graph(n, edges, labels)


def build_complete(n, n_a=None) -> Graph:
    if n_a is None:
        n_a = n // 2
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    labels = [GROUP_A] * n_a + [GROUP_B] * (n - n_a)
    return Graph(n, edges, labels)


def random_sbm(seed, n_a=30, n_b=30, p_base=0.15, rho=0.3) -> Graph:
    from fairsight import sbm_from_homophily

    return generate_sbm(sbm_from_homophily(n_a, n_b, p_base, rho), seed)


def dyadic_outcomes(rng, n) -> np.ndarray:
    """Outcome vectors on a 1/64 grid.

    Dyadic values keep peer means exactly representable so indicator ties
    are decided identically under any summation order.
    """
    return rng.integers(0, 65, size=n) / 64.0


@pytest.fixture
def triangle():
    return build_triangle()


@pytest.fixture
def star():
    return build_star()


@pytest.fixture
def two_triangles():
    return build_two_triangles()
