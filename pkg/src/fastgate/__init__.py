"""Toolkit for designing fast momentum-kick entangling gates and their laser chain."""

from .core import (
    GateResult,
    KickSequence,
    ModeParameters,
    PhaseSpaceTrajectory,
    SPIN_CONFIGURATIONS,
    SpinConfiguration,
    TrapIonConfig,
    closure_from_times,
    closure_sums,
    derive_parameters,
    displacements,
    evaluate_gate,
    gate_error,
    gate_phase,
    phase_from_times,
    phase_kernel,
    trajectory,
)
from .exceptions import (
    BudgetError,
    CapacityError,
    CollisionError,
    ConfigurationError,
    DomainError,
    FastgateError,
    IntegrationError,
)
from .hardware import (
    DispersionComponent,
    HardwareConstraints,
    PulsePattern,
    compile_pattern,
    dispersion_budget,
    tbp_check,
    validate_pattern,
)
from .infidelity import KickErrorBudget, per_kick_error, sequence_infidelity
from .interferometry import (
    EllipseFitResult,
    PulsePairSamples,
    fit_ellipse,
    phase_from_ellipse,
    synthesize,
)
from .optimizer import (
    Candidate,
    EvolveResult,
    OptimizerConfig,
    balance_kick_times,
    continuous_seed,
    evolve,
    exhaustive_small_search,
)
from .rap import (
    ChirpedPulse,
    RapScanResult,
    evolve_two_level,
    rap_scan,
    stretch,
)

__version__ = "0.1.0"
