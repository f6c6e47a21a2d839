"""Differentially private distributed Nash equilibrium seeking for
aggregative games: stochastic event-triggering plus stochastic quantization,
a seeded simulation engine, privacy-budget accounting and an eavesdropper
evaluation."""

from .adversary import AttackReport, infer_gradient
from .games import (
    ActiveConstraintError,
    GameInstance,
    QuadraticAggregativeGame,
    check_monotonicity,
    energy_game,
    make_game,
    ne_oracle_quadratic,
    project,
    pseudo_gradient,
)
from .mechanism import (
    MechanismParams,
    QuantizationSample,
    TriggerState,
    mechanism_step,
    stochastic_quantize,
    trigger_decide,
    trigger_probability,
)
from .privacy import (
    AdjacencySpec,
    CTildeEstimate,
    CumulativeDeltaReport,
    PrivacyLedger,
    cumulative_delta,
    delta_per_iteration,
    delta_series,
    estimate_c_tilde,
    make_adjacent,
)
from .ratefit import RateFit, fit_rate
from .schedules import ScheduleReport, Schedules, energy_schedules, validate_schedules
from .seeker import (
    BaselineParams,
    InvariantViolation,
    ObservationRecord,
    PlayerState,
    Trajectory,
    run,
    run_noisy_baseline,
    step,
)
from .streams import RunStreams, channel_uniforms, uniform_initials
from .topology import Topology, build, complete, path, ring, second_eigenvalue

__version__ = "0.1.0"

__all__ = [
    "ActiveConstraintError",
    "AdjacencySpec",
    "AttackReport",
    "BaselineParams",
    "CTildeEstimate",
    "CumulativeDeltaReport",
    "GameInstance",
    "InvariantViolation",
    "MechanismParams",
    "ObservationRecord",
    "PlayerState",
    "PrivacyLedger",
    "QuadraticAggregativeGame",
    "QuantizationSample",
    "RateFit",
    "RunStreams",
    "ScheduleReport",
    "Schedules",
    "Topology",
    "Trajectory",
    "TriggerState",
    "build",
    "channel_uniforms",
    "check_monotonicity",
    "complete",
    "cumulative_delta",
    "delta_per_iteration",
    "delta_series",
    "energy_game",
    "energy_schedules",
    "estimate_c_tilde",
    "fit_rate",
    "infer_gradient",
    "make_adjacent",
    "make_game",
    "mechanism_step",
    "ne_oracle_quadratic",
    "path",
    "project",
    "pseudo_gradient",
    "ring",
    "run",
    "run_noisy_baseline",
    "second_eigenvalue",
    "step",
    "stochastic_quantize",
    "trigger_decide",
    "trigger_probability",
    "uniform_initials",
    "validate_schedules",
]
