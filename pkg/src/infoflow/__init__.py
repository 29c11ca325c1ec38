"""Causal information flow through finite channels.

Builds, for every subset of a channel's inputs, the partition of input
configurations the channel can actually distinguish, repairs these into a
projective family (smallest extension or largest reduction), and evaluates
flow measures and exact chain-rule decompositions on top.
"""

from .channel import (
    Channel,
    CoarseKernel,
    InputDistribution,
    Model,
    ModelFormatError,
    classical_marginal,
    coarse_marginal,
    input_marginal,
    load_model,
    model_from_dict,
    model_to_dict,
    pushforward,
    save_model,
)
from .families import (
    PartitionFamily,
    channel_partition,
    check_projectivity,
    classical_family,
    context_partition,
    extension_family,
    family_from_parts,
    reduction_family,
    subset_trace,
    trace_family,
)
from .measures import (
    AuditReport,
    CheckResult,
    FlowReport,
    chain_decomposition,
    classical_cmi,
    conditional_entropy,
    entropy,
    flow_properties_audit,
    information_flow,
    mutual_information,
    verify_model,
)
from .partitions import (
    FiniteSet,
    Partition,
    ProductSpace,
    hyperedge_components,
    join,
    lift,
    refines,
)
from .sampling import random_model, random_model_corpus
from .scenarios import (
    SweepSpec,
    build_copy,
    build_sum,
    build_transfer,
    copy_closed_forms,
    run_sweep,
    scenario_model,
    transfer_report,
    transfer_scenario,
)

__version__ = "0.1.0"
