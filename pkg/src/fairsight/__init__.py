"""Measure how algorithmic fairness is perceived through local network
comparisons, and how that perception diverges from global group statistics.

The core objects are labeled graphs (two groups, A and B), outcome vectors
in [0, 1], and the perception indicator: a node counts itself fairly treated
when its outcome is at least the average over the peers it can see within d
hops. Group means of that indicator (visibility), their gap, exposure
identities, homophily and structure metrics, closed-form mean-field
predictions, and a Monte Carlo experiment harness live in the submodules.
"""

from .graph import (
    GROUP_A,
    GROUP_B,
    MAX_SEED,
    SWITCH_BIASES,
    Graph,
    RewiringExhaustedError,
    SbmParams,
    TransferError,
    bfs_distances,
    check_seed,
    degree_balancing_transfer,
    degree_preserving_switch,
    derive_seed,
    diameter,
    generate_sbm,
    is_connected,
    neighborhood,
    read_edge_list,
    sbm_from_homophily,
    write_edge_list,
)
from .metrics import (
    ExposureSummary,
    PerceptionReport,
    StructureReport,
    avg_clustering,
    empirical_homophily,
    exposure_summary,
    global_gap,
    homophily_index,
    homophily_sym,
    modularity,
    peer_expectation,
    peer_values,
    perception_indicator,
    perception_report,
    smooth_perception,
    structure_report,
)
from .outcomes import (
    MixedOutcomeParams,
    bernoulli_realize,
    constant_outcome,
    degree_linear_outcome,
    dp_exact,
    generate_outcomes,
    mixed_outcome,
    normalized_degree,
    write_outcome_vector,
)
from .theory import (
    THETA_FIRST_ORDER_BOUND,
    GapPrediction,
    TheoryParams,
    expected_degrees,
    gamma_statistic,
    gaussian_density_at_zero,
    predicted_gap,
    predicted_neighbor_mean,
    theta_exact,
    theta_first_order,
)
from .experiments import (
    ClusteringStudyRow,
    ConvergenceProfile,
    DegreeBiasReport,
    MajorizationStep,
    QboundPoint,
    SweepConfig,
    SweepRecord,
    aggregate,
    read_csv,
    run_clustering_study,
    run_convergence,
    run_degree_bias,
    run_homophily_sweep,
    run_majorization_study,
    run_qbound_trend,
    write_csv,
)

__version__ = "0.1.0"
