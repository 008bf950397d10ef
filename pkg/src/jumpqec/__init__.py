"""Stabilizer-code and feedback synthesis for continuously detected error
channels, with seeded jump-trajectory verification.

Given a set of monitored single-qubit error channels (each a 2x2 operator
with an optional complex unraveling offset), the package synthesizes a
stabilizer code whose codespace the errors cannot distort, the driving
Hamiltonian that cancels no-jump backaction, and per-channel correction
unitaries; a Monte Carlo trajectory engine and a master-equation
integrator check the construction end to end.
"""

__version__ = "0.1.0"

from .channels import (
    Backaction,
    ErrorChannel,
    KrausSet,
    cptp_defect,
    effective_jump_operator,
    jump_backaction,
    kraus_set,
    lindblad_rhs,
)
from .codes import (
    CorrectabilityReport,
    EvenQubitCountRequired,
    RankThreeError,
    StabilizerCode,
    build_code,
    codespace_basis,
    generator_matrix,
    null_space_involution,
    verify_correctability,
)
from .control import (
    ControlPlan,
    Correction,
    CorrectabilityError,
    NoJumpInvariance,
    build_control_plan,
    correction_unitary,
    driving_hamiltonian,
    nojump_invariance_check,
    sector_assignment,
)
from .linalg import (
    bloch_decompose,
    bloch_matrix,
    tensor_embed,
    traceless_decompose,
    unitary_completion,
)
from .trajectory import (
    EnsembleResult,
    FidelityRecord,
    SimConfig,
    StepSizeError,
    TrajectoryState,
    fidelity,
    master_equation_oracle,
    prepare,
    run_ensemble,
    run_trajectory,
    simulation_code,
    step,
    trace_distance,
)

__all__ = [
    "__version__",
    "Backaction",
    "ErrorChannel",
    "KrausSet",
    "cptp_defect",
    "effective_jump_operator",
    "jump_backaction",
    "kraus_set",
    "lindblad_rhs",
    "CorrectabilityReport",
    "EvenQubitCountRequired",
    "RankThreeError",
    "StabilizerCode",
    "build_code",
    "codespace_basis",
    "generator_matrix",
    "null_space_involution",
    "verify_correctability",
    "ControlPlan",
    "Correction",
    "CorrectabilityError",
    "NoJumpInvariance",
    "build_control_plan",
    "correction_unitary",
    "driving_hamiltonian",
    "nojump_invariance_check",
    "sector_assignment",
    "bloch_decompose",
    "bloch_matrix",
    "tensor_embed",
    "traceless_decompose",
    "unitary_completion",
    "EnsembleResult",
    "FidelityRecord",
    "SimConfig",
    "StepSizeError",
    "TrajectoryState",
    "fidelity",
    "master_equation_oracle",
    "prepare",
    "run_ensemble",
    "run_trajectory",
    "simulation_code",
    "step",
    "trace_distance",
]
