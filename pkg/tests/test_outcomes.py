import numpy as np
import pytest

from fairsight import (
    GROUP_A,
    GROUP_B,
    Graph,
    MixedOutcomeParams,
    SbmParams,
    bernoulli_realize,
    constant_outcome,
    degree_linear_outcome,
    dp_exact,
    generate_outcomes,
    generate_sbm,
    global_gap,
    mixed_outcome,
    normalized_degree,
)
from conftest import build_complete, build_star, random_sbm


def big_edgeless_graph(n=12_000):
    half = n // 2
    return Graph(n, [], [GROUP_A] * half + [GROUP_B] * (n - half))


class TestNormalizedDegree:
    def test_star_spans_unit_interval(self):
        nd = normalized_degree(build_star(leaves=3))
        assert nd[0] == 1.0
        assert list(nd[1:]) == [0.0, 0.0, 0.0]

    def test_regular_graph_collapses_to_half(self):
        nd = normalized_degree(build_complete(5))
        assert list(nd) == [0.5] * 5


class TestMixedOutcomeParams:
    def test_defaults_match_reference_configuration(self):
        params = MixedOutcomeParams()
        assert params.alpha == 0.7
        assert params.beta_a == (4.0, 2.0)
        assert params.beta_b == (2.0, 4.0)
        assert params.noise_sd == 0.05
        assert params.clamp

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            MixedOutcomeParams(alpha=1.5).validate()

    def test_rejects_bad_beta_shapes(self):
        with pytest.raises(ValueError):
            MixedOutcomeParams(beta_a=(0.0, 2.0)).validate()

    def test_rejects_negative_noise(self):
        with pytest.raises(ValueError):
            MixedOutcomeParams(noise_sd=-0.1).validate()


class TestMixedOutcome:
    def test_group_means_match_beta_expectations(self):
        g = big_edgeless_graph()
        params = MixedOutcomeParams(alpha=1.0, noise_sd=0.0)
        h = mixed_outcome(g, params, seed=99)
        mean_a = h[g.group_mask(GROUP_A)].mean()
        mean_b = h[g.group_mask(GROUP_B)].mean()
        assert mean_a == pytest.approx(4 / 6, abs=0.02)
        assert mean_b == pytest.approx(2 / 6, abs=0.02)

    def test_pure_degree_term_is_deterministic_and_degree_increasing(self):
        g = build_star(leaves=4)
        params = MixedOutcomeParams(alpha=0.0, noise_sd=0.0)
        h1 = mixed_outcome(g, params, seed=1)
        h2 = mixed_outcome(g, params, seed=2)
        assert np.array_equal(h1, h2)
        assert h1[0] > h1[1]
        d = g.degrees.astype(float)
        assert np.cov(d, h1, bias=True)[0, 1] > 0

    def test_clamped_into_unit_interval(self):
        g = random_sbm(seed=5)
        params = MixedOutcomeParams(noise_sd=0.8)
        h = mixed_outcome(g, params, seed=5)
        assert h.min() >= 0.0 and h.max() <= 1.0

    def test_deterministic_in_seed(self):
        g = random_sbm(seed=6)
        params = MixedOutcomeParams()
        assert np.array_equal(
            mixed_outcome(g, params, seed=77), mixed_outcome(g, params, seed=77)
        )

    def test_reference_configuration_runs_at_paper_scale(self):
        g = generate_sbm(SbmParams(200, 200, 0.06, 0.04), seed=3)
        h = mixed_outcome(g, MixedOutcomeParams(), seed=3)
        assert h.shape == (400,)
        assert h.min() >= 0.0 and h.max() <= 1.0

    def test_degree_outcome_coupling_fades_as_alpha_rises(self):
        params = SbmParams(40, 40, 0.15, 0.05)
        grid = (0.0, 0.5, 1.0)
        means = []
        for alpha in grid:
            covs = []
            for seed in range(20):
                g = generate_sbm(params, seed=1000 + seed)
                h = mixed_outcome(
                    g,
                    MixedOutcomeParams(alpha=alpha, noise_sd=0.0),
                    seed=2000 + seed,
                )
                covs.append(np.cov(g.degrees.astype(float), h, bias=True)[0, 1])
            means.append(np.mean(covs))
        assert means[0] > means[1] > means[2]


class TestDpExact:
    def test_parity_is_exact_for_every_base(self):
        g = random_sbm(seed=9, n_a=25, n_b=35)
        for base in ("uniform", "degree"):
            for seed in (1, 2, 3):
                h = dp_exact(g, base=base, seed=seed)
                gap = global_gap(h, g.labels)
                assert abs(gap) <= 1e-12
                assert h.min() >= 0.0 and h.max() <= 1.0

    def test_callable_base_is_supported(self):
        g = random_sbm(seed=10)

        def lopsided(graph, rng):
            return 0.9 * (graph.labels == GROUP_A) + 0.1 * rng.random(graph.n)

        h = dp_exact(g, base=lopsided, seed=4)
        assert abs(global_gap(h, g.labels)) <= 1e-12

    def test_degree_base_keeps_degree_correlation(self):
        correlated = 0
        for seed in (11, 12, 13, 14, 15):
            g = random_sbm(seed=seed, n_a=50, n_b=50, p_base=0.1, rho=0.4)
            h = dp_exact(g, base="degree", seed=seed)
            cov = np.cov(g.degrees.astype(float), h, bias=True)[0, 1]
            correlated += cov > 0
        assert correlated == 5

    def test_unknown_base_rejected(self):
        with pytest.raises(ValueError, match="base"):
            dp_exact(random_sbm(seed=1), base="zipf", seed=0)

    def test_single_group_rejected(self):
        g = Graph(4, [(0, 1), (2, 3)], [GROUP_A] * 4)
        with pytest.raises(ValueError):
            dp_exact(g, seed=0)

    def test_deterministic(self):
        g = random_sbm(seed=14)
        assert np.array_equal(dp_exact(g, seed=8), dp_exact(g, seed=8))


class TestSimpleRules:
    def test_degree_linear_equals_normalized_degree(self):
        g = build_star(leaves=3)
        assert np.array_equal(degree_linear_outcome(g), normalized_degree(g))

    def test_constant_rule(self):
        g = build_star(leaves=3)
        assert list(constant_outcome(g, 0.25)) == [0.25] * 4
        with pytest.raises(ValueError):
            constant_outcome(g, 1.25)


class TestBernoulliRealize:
    def test_degenerate_scores_pass_through(self):
        zeros = np.zeros(8)
        ones = np.ones(8)
        assert np.array_equal(bernoulli_realize(zeros, seed=1), zeros)
        assert np.array_equal(bernoulli_realize(ones, seed=1), ones)

    def test_acceptance_frequency_matches_rate(self):
        n = 10_000
        h = np.full(n, 0.5)
        out = bernoulli_realize(h, seed=123)
        assert set(np.unique(out)) <= {0.0, 1.0}
        sd = np.sqrt(0.25 / n)
        assert abs(out.mean() - 0.5) < 4 * sd

    def test_deterministic(self):
        h = np.linspace(0, 1, 50)
        assert np.array_equal(
            bernoulli_realize(h, seed=9), bernoulli_realize(h, seed=9)
        )

    def test_rejects_matrix_input(self):
        with pytest.raises(ValueError):
            bernoulli_realize(np.zeros((3, 3)), seed=0)


class TestRuleDispatch:
    def test_each_rule_kind_produces_valid_scores(self):
        g = random_sbm(seed=21, n_a=20, n_b=20)
        for rule, params in (
            ("mixed", {"alpha": 0.5}),
            ("dp_exact", {"base": "degree"}),
            ("degree_linear", {}),
            ("constant", {"value": 0.3}),
        ):
            h = generate_outcomes(g, rule, params, seed=5)
            assert h.shape == (g.n,)
            assert h.min() >= 0.0 and h.max() <= 1.0

    def test_beta_shape_lists_accepted(self):
        # JSON configs deliver shapes as lists, not tuples
        g = random_sbm(seed=22)
        h = generate_outcomes(
            g,
            "mixed",
            {"alpha": 1.0, "beta_a": [6.0, 2.0], "beta_b": [2.0, 6.0]},
            seed=6,
        )
        assert h.shape == (g.n,)

    def test_unknown_rule_rejected(self):
        with pytest.raises(ValueError, match="rule"):
            generate_outcomes(random_sbm(seed=1), "quantile", {}, seed=0)


class TestOutcomeExport:
    def test_two_column_format_round_trips(self, tmp_path):
        from fairsight import write_outcome_vector

        h = np.array([0.25, 0.5, 1.0])
        path = tmp_path / "scores.txt"
        write_outcome_vector(h, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "node_id h"
        parsed = np.array([float(line.split()[1]) for line in lines[1:]])
        assert np.allclose(parsed, h, rtol=0, atol=1e-12)
