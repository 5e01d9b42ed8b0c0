"""De-anonymization of community-structured networks.

Generates correlated graph pairs from a stochastic block model, scores
candidate node mappings with MAP-derived cost functions (bilateral and
unilateral community information), and recovers mappings with four solvers:
brute force, a genetic algorithm, a quadratic-assignment pipeline, and a
convex relaxation with greedy projection.
"""

from .convex import (
    ConvexConfig,
    RelaxedProblem,
    SpectralReport,
    project_to_mapping,
    relax_and_project,
    residual_norm_identity,
    solve_relaxed,
    spectral_recovery_report,
    weighted_adjacency,
)
from .core import (
    CommunityAssignment,
    DeanonInstance,
    Graph,
    Mapping,
    ModelParams,
    apply_mapping,
    invert,
    observes_communities,
)
from .cost import (
    CostReport,
    WeightMatrix,
    accuracy,
    bilateral_cost,
    relative_value,
    total_edge_weight,
    total_pair_weight,
    unilateral_cost,
    unweighted_cost,
    weight,
)
from .qap import (
    AssignmentSolution,
    QapInstance,
    additive_approximation,
    build_qap,
    reverse_violation_cycles,
    solve_qap,
)
from .sbm import (
    DegreePreset,
    community_sizes,
    dense_bridge_preset,
    generate_sbm,
    make_instance,
    preset_affinity,
    sample_edges,
)
from .search import GaConfig, brute_force, genetic_algorithm, genetic_algorithm_full
from .theory import (
    ConditionReport,
    bad_mapping_bound,
    exact_recovery_condition,
    partial_recovery_condition,
)

__all__ = [
    "AssignmentSolution",
    "CommunityAssignment",
    "ConditionReport",
    "ConvexConfig",
    "CostReport",
    "DeanonInstance",
    "DegreePreset",
    "GaConfig",
    "Graph",
    "Mapping",
    "ModelParams",
    "QapInstance",
    "RelaxedProblem",
    "SpectralReport",
    "WeightMatrix",
    "accuracy",
    "additive_approximation",
    "apply_mapping",
    "bad_mapping_bound",
    "bilateral_cost",
    "brute_force",
    "build_qap",
    "community_sizes",
    "dense_bridge_preset",
    "exact_recovery_condition",
    "generate_sbm",
    "genetic_algorithm",
    "genetic_algorithm_full",
    "invert",
    "make_instance",
    "observes_communities",
    "partial_recovery_condition",
    "preset_affinity",
    "project_to_mapping",
    "relative_value",
    "relax_and_project",
    "residual_norm_identity",
    "reverse_violation_cycles",
    "sample_edges",
    "solve_qap",
    "solve_relaxed",
    "spectral_recovery_report",
    "total_edge_weight",
    "total_pair_weight",
    "unilateral_cost",
    "unweighted_cost",
    "weight",
    "weighted_adjacency",
]

__version__ = "0.1.0"
