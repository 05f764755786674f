"""Entropy-based network coding outer bounds and recovery of distributions
from the entropies of their binary partition variables."""

from __future__ import annotations

from .auxgen import (
    CommonInfoResult,
    SubspaceBasis,
    delta_star_search,
    gk_common_information,
    linearly_correlated,
)
from .netmodel import (
    NetworkCode,
    NetworkSpec,
    check_tuple,
    compile_bound,
    evaluate_code,
    load_network,
    min_scaling,
    validate,
)
from .partitions import (
    DistributionOracle,
    PartitionLabel,
    PartitionSystem,
    RecoveredDistribution,
    TableOracle,
    build_partition_system,
    check_indicator_properties,
    check_lemma2_properties,
    check_oracle_consistency,
    enumerate_partitions,
    find_indicators,
    find_isomorphism,
    recover_scalar,
    recover_vector,
)
from .polycone import (
    LinearConstraint,
    LinearProgram,
    LpOutcome,
    elemental_inequalities,
    lp_solve,
    verify_certificate,
    verify_witness,
)
from .probdist import (
    EntropyMeasure,
    JointDistribution,
    SetFunction,
    binary_entropy,
    conditional_entropy,
    entropy,
    entropy_vector,
    invert_binary_entropy,
    is_function_of,
    joint_from_table,
    load_distribution,
    marginalize,
)

__version__ = "0.1.0"
