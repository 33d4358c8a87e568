"""Transmission of microwaves through qubit-loaded transmission lines.

Linear, bistable, and resonant-transparency regimes for a single
superconducting qubit or a periodic array embedded in a low-loss line, with
exact lattice oracles backing every closed form.
"""

from .bistability import (
    BranchCurve,
    BranchPoint,
    single_qubit_nonlinear_roots,
    trace_d_vs_power,
)
from .continuum import (
    AmplitudePhaseState,
    NonlinearArrayParams,
    closed_form_nonlinear_d,
    shoot_nonlinear_bvp,
    shooting_trajectory,
    z_parameter,
)
from .lattice import (
    LatticeField,
    lattice_dispersion_check,
    linear_transfer_matrix_d,
    nonlinear_backward_recursion_d,
)
from .linear import (
    BarrierCoefficient,
    array_linear_d,
    barrier_coefficient,
    single_qubit_linear_d,
)
from .model import (
    DriveSpec,
    MicroscopicParams,
    ModelParams,
    QubitResponse,
    TransmissionResult,
    bloch_oracle,
    derive_dimensionless,
    linear_beta,
    qubit_response,
)
from .sweep import GridSpec, ResultRow, SweepConfig, repro, run_sweep, validate_config

__version__ = "0.1.0"

__all__ = [
    "AmplitudePhaseState",
    "BarrierCoefficient",
    "BranchCurve",
    "BranchPoint",
    "DriveSpec",
    "GridSpec",
    "LatticeField",
    "MicroscopicParams",
    "ModelParams",
    "NonlinearArrayParams",
    "QubitResponse",
    "ResultRow",
    "SweepConfig",
    "TransmissionResult",
    "array_linear_d",
    "barrier_coefficient",
    "bloch_oracle",
    "closed_form_nonlinear_d",
    "derive_dimensionless",
    "lattice_dispersion_check",
    "linear_beta",
    "linear_transfer_matrix_d",
    "nonlinear_backward_recursion_d",
    "qubit_response",
    "repro",
    "run_sweep",
    "shoot_nonlinear_bvp",
    "shooting_trajectory",
    "single_qubit_linear_d",
    "single_qubit_nonlinear_roots",
    "trace_d_vs_power",
    "validate_config",
    "z_parameter",
]
