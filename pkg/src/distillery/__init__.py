"""Fock-basis simulator for entanglement distillation in lossy memories."""

__version__ = "0.1.0"

from .channels import (
    LossChannelParams,
    MashResult,
    SubtractionParams,
    bs_amplitude,
    detect_one_mode,
    detect_phonons,
    fock_bs_element,
    loss_event,
    loss_kraus,
    mash_step,
    repeated_loss,
)
from .core import (
    NotHermitianError,
    TruncationConfig,
    TwoModeState,
    ZeroTraceError,
    auto_n_max,
    check_state,
    hermiticity_defect,
    min_eigenvalue,
    normalize,
    state_from_coeffs,
    swap_modes,
    tmss,
    trace_of,
    vacuum,
)
from .negativity import (
    NegativityResult,
    log_negativity,
    partial_transpose,
    trace_distance,
    trace_norm,
)
from .protocol import (
    AvgEntanglement,
    CriticalCount,
    DistillationOutcome,
    MaltingRecord,
    MaltingSchedule,
    NoConvergenceError,
    average_entanglement,
    critical_attempts,
    full_protocol,
    malt,
    mash_iterate,
    subtraction_probability_matrix,
)
from .sweep import RunConfig, SweepResult, run, write_csv

__all__ = [
    "AvgEntanglement",
    "CriticalCount",
    "DistillationOutcome",
    "LossChannelParams",
    "MaltingRecord",
    "MaltingSchedule",
    "MashResult",
    "NegativityResult",
    "NoConvergenceError",
    "NotHermitianError",
    "RunConfig",
    "SubtractionParams",
    "SweepResult",
    "TruncationConfig",
    "TwoModeState",
    "ZeroTraceError",
    "auto_n_max",
    "average_entanglement",
    "bs_amplitude",
    "check_state",
    "critical_attempts",
    "detect_one_mode",
    "detect_phonons",
    "fock_bs_element",
    "full_protocol",
    "hermiticity_defect",
    "log_negativity",
    "loss_event",
    "loss_kraus",
    "malt",
    "mash_iterate",
    "mash_step",
    "min_eigenvalue",
    "normalize",
    "partial_transpose",
    "repeated_loss",
    "run",
    "state_from_coeffs",
    "subtraction_probability_matrix",
    "swap_modes",
    "tmss",
    "trace_distance",
    "trace_norm",
    "trace_of",
    "vacuum",
    "write_csv",
]
