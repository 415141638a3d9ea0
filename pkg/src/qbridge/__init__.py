"""Most likely evolution of pre- and post-selected quantum experiments.

Given a prior Kraus evolution and reported fractions of initial and final
measurement outcomes, find the most likely joint outcome distribution, the
updated channel that realizes it, its time reversal, and the most likely
statistics of intermediate (projective, generalized or weak) measurements.
"""

from .bridge import (
    BridgeSolution,
    ScalingPotentials,
    rate_function,
    schrodinger_system,
    solve_bridge,
    solve_coupling,
)
from .ensemble import (
    exhaustive_most_likely_coupling,
    sample_experiment,
    sample_from_coupling,
    sanov_decay_check,
)
from .errors import (
    ConsistencyViolation,
    EquivalenceViolation,
    InputError,
    NoConvergence,
    PriorDegenerate,
    QBridgeError,
    VerificationError,
)
from .estimator import QuantumBridge, SinkhornCoupling
from .experiment import (
    ExperimentSpec,
    Generalized,
    Projective,
    SplitChannel,
    Weak,
    prior_intermediate_state,
    prior_joint,
)
from .inference import (
    conditional_outcome_prob,
    finite_delta_weak_average,
    generalized_distribution,
    intermediate_state_and_split,
    most_likely_projective_distribution,
    most_likely_weak_value,
    reversed_projective_distribution,
    weak_operator,
    weak_value,
)
from .qcore import (
    AmplitudeDamping,
    DepolarizingFamily,
    IdentityFamily,
    KrausChannel,
    UnitaryFamily,
    apply_adjoint_channel,
    apply_channel,
    named_basis,
)
from .reversal import ReversedBridge, check_equivalence, reverse_channel, solve_reverse_bridge

__version__ = "0.1.0"

__all__ = [
    "BridgeSolution",
    "ScalingPotentials",
    "rate_function",
    "solve_bridge",
    "solve_coupling",
    "exhaustive_most_likely_coupling",
    "sample_experiment",
    "sample_from_coupling",
    "sanov_decay_check",
    "ConsistencyViolation",
    "EquivalenceViolation",
    "InputError",
    "NoConvergence",
    "PriorDegenerate",
    "QBridgeError",
    "VerificationError",
    "QuantumBridge",
    "SinkhornCoupling",
    "ExperimentSpec",
    "Generalized",
    "Projective",
    "SplitChannel",
    "Weak",
    "prior_intermediate_state",
    "prior_joint",
    "conditional_outcome_prob",
    "finite_delta_weak_average",
    "generalized_distribution",
    "intermediate_state_and_split",
    "most_likely_projective_distribution",
    "most_likely_weak_value",
    "reversed_projective_distribution",
    "weak_operator",
    "weak_value",
    "AmplitudeDamping",
    "DepolarizingFamily",
    "IdentityFamily",
    "KrausChannel",
    "UnitaryFamily",
    "apply_adjoint_channel",
    "apply_channel",
    "named_basis",
    "ReversedBridge",
    "check_equivalence",
    "reverse_channel",
    "solve_reverse_bridge",
    "schrodinger_system",
]
