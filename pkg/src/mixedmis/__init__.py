"""Simulator and analysis toolkit for randomized MIS selection among
mixed-strength agents.

Agents repeatedly draw values from their own strength distributions; local
minima join the maximal independent set and their neighbors retire.  The
package provides exact strength-distribution queries, graph generators
(including the weakening clique chain), an exact protocol engine, closed-form
bound calculators, a brute-force probability oracle for tiny instances, and a
CLI experiment harness.
"""

from .strength import (
    BiasedBits,
    BitSchedule,
    BitStreamSample,
    ConditionParams,
    FairBits,
    StrengthDistribution,
    TabulatedDyadic,
    cdf_dyadic,
    check_conditions,
    decay_upper_bound_check,
    distribution_from_spec,
    next_bit,
)
from .graph import (
    CliqueChainSpec,
    Graph,
    StrengthProfile,
    active_edge_count,
    clique_chain,
    complete,
    generate,
    gnp,
    star,
)
from .engine import (
    ProtocolState,
    RoundStats,
    RunResult,
    run_protocol,
    run_round,
    simulate_single_rounds,
    verify_mis,
)
from .theory import (
    BoundReport,
    LevelReport,
    check_elimination_floor,
    compute_levels,
    level_ceiling,
    neighborhood_total_cdf,
    round_bound,
    wilson_lower_bound,
)
from .oracle import ExactRoundDistribution, exact_round

__version__ = "0.1.0"

__all__ = [
    "BiasedBits",
    "BitSchedule",
    "BitStreamSample",
    "BoundReport",
    "CliqueChainSpec",
    "ConditionParams",
    "ExactRoundDistribution",
    "FairBits",
    "Graph",
    "LevelReport",
    "ProtocolState",
    "RoundStats",
    "RunResult",
    "StrengthDistribution",
    "StrengthProfile",
    "TabulatedDyadic",
    "active_edge_count",
    "cdf_dyadic",
    "check_conditions",
    "check_elimination_floor",
    "clique_chain",
    "complete",
    "compute_levels",
    "decay_upper_bound_check",
    "distribution_from_spec",
    "exact_round",
    "generate",
    "gnp",
    "level_ceiling",
    "neighborhood_total_cdf",
    "next_bit",
    "round_bound",
    "run_protocol",
    "run_round",
    "simulate_single_rounds",
    "star",
    "verify_mis",
    "wilson_lower_bound",
]
