"""Couplings with fixed margins: independence and indetermination.

The package builds the two canonical joint distributions of a pair of
discrete margins, samples exactly from the indetermination one, scores
contingency tables against either reference (chi-square vs
Janson-Vegelius), clusters weighted graphs by either deviation
(Newman-Girvan modularity vs its indetermination analogue), evaluates
guessing-problem and task-partitioning performance bounds, and extends
indetermination to densities on rectangles.
"""

from __future__ import annotations

from .errors import (
    ConditionHViolation,
    DegenerateInput,
    EmptyClassWarning,
    IndeterminationError,
    InvalidDistribution,
    OutOfSupport,
    SizeExceeded,
    ToleranceBreach,
)
from .coupling import (
    CouplingKind,
    JointDistribution,
    Margin,
    SignedCouplingMatrix,
    check_condition_h,
    couple_matching_probability,
    divergence_kl_to_uniform,
    divergence_l2_to_uniform,
    generate_feasible_margins,
    independence_coupling,
    indetermination_cells,
    indetermination_coupling,
    is_full_monge,
    perturb_coupling,
)
from .sampling import (
    GENERATOR_VERSION,
    IndetDecomposition,
    SampleBatch,
    decompose,
    derive_rng,
    draw,
    empirical_joint,
    reconstruct,
)
from .association import (
    ContingencyTable,
    JVIndex,
    RelationalMatrix,
    chi_square,
    jv_contingency,
    jv_index,
    jv_relational,
    relational_encode,
)
from .graphs import (
    LocalWeights,
    Partition,
    WeightedGraph,
    brute_force_best,
    global_score,
    local_weights_indetermination,
    local_weights_independence,
    louvain,
    louvain_detailed,
    set_partitions,
)
from .guessing import (
    GuessingInstance,
    Strategy,
    StrategyRule,
    gain,
    k_shot,
    lower_bound_generalized,
    lower_bound_original,
    one_shot,
    one_shot_bounds_margin_strategy,
    one_shot_mc,
    optimal_order,
    plackett_luce_rank_probabilities,
    rho_moment,
    rho_moment_mc,
    sender_optimal_coupling,
)
from .tasks import (
    PartitionOneShotBound,
    TaskPartition,
    class_size_moment,
    induced_coupling,
    partition_moment_bound,
    partition_one_shot_bound,
    simulate_tasks_before,
)
from .continuous import (
    ContinuousCoupling,
    DensityKind,
    DensitySpec,
    cdf_eval,
    check_condition_continuous,
    construct_margins,
    density_eval,
    density_eval_callable,
    l2_optimality_check,
    margins_of_density,
)

__version__ = "0.1.0"
