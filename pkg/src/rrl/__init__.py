"""Rational-agent consensus on a synchronous unidirectional ring."""
from .protocol import CheaterDetected, ConfigError, Decision, NodeState, Triplet, finalize, init_node, relay_step, verify_own_return
from .ring_sim import RingConfig, Trace, honest_behavior, run_ring
from .adversary import (
    ForgeScript,
    Literal,
    Pinned,
    UtilityModel,
    compute_view_partition,
    enumerate_fixed_strategies,
    fixed_stream_forger,
    input_cheater,
    parity_rigger,
    relay,
)
from .analysis import (
    CapacityError,
    Outcome,
    OutcomeDistribution,
    best_response_search,
    check_conditional_half,
    check_fairness,
    check_leader_uniformity,
    coalition_utility,
    exact_distribution,
    monte_carlo,
)
from .impossibility import (
    ConsensusFunction,
    derive_constraints,
    equilibrium_functions_bruteforce,
    forced_decision,
    is_input_cheater_equilibrium,
)

__version__ = "0.1.0"
