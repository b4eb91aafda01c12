"""Probe-qubit dynamics on an XX spin chain.

A single qubit coupled to the first site of an open XX chain, with
optional chain dephasing and on-site disorder.  Exact single-excitation
dynamics, second-order time-local (TCL2) populations, information-backflow
analysis, transport diagnostics, and disorder averaging, plus a CLI that
reproduces the standard experiment set as CSV data.
"""

from ._kernels import BACKEND as kernel_backend
from .analysis import (
    BounceResult,
    GammaCEstimate,
    arrival_time,
    bounce_function,
    bounce_is_zero,
    current_peak_table,
    current_series,
    first_revival,
    gamma_c_numeric,
    gamma_c_single_mode,
    lambert_w,
    lightcone_grid,
    loglog_slope,
    max_current_scan,
)
from .closed import evolve_closed, qubit_occupation, tcl2_closed_n0, tcl2_closed_rate
from .disorder import DisorderSpec, ensemble_average_n0, sample_fields
from .lindblad import (
    IntegratorInstabilityError,
    build_dissipator_mask,
    classical_walk_evolve,
    evolve_lindblad_full,
    evolve_lindblad_sector,
    fit_hop_rate,
    tcl2_dephasing_n0,
    tcl2_dephasing_rate,
)
from .model import (
    ModeDecomposition,
    ModelConfig,
    TimeSeries,
    build_hamiltonian,
    chain_modes,
    config_from_file,
    config_from_mapping,
    correlation_function,
    grid_times,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "BounceResult",
    "DisorderSpec",
    "GammaCEstimate",
    "IntegratorInstabilityError",
    "ModeDecomposition",
    "ModelConfig",
    "TimeSeries",
    "arrival_time",
    "bounce_function",
    "bounce_is_zero",
    "build_dissipator_mask",
    "current_peak_table",
    "build_hamiltonian",
    "chain_modes",
    "classical_walk_evolve",
    "config_from_file",
    "config_from_mapping",
    "correlation_function",
    "current_series",
    "ensemble_average_n0",
    "evolve_closed",
    "evolve_lindblad_full",
    "evolve_lindblad_sector",
    "first_revival",
    "fit_hop_rate",
    "gamma_c_numeric",
    "gamma_c_single_mode",
    "grid_times",
    "kernel_backend",
    "lambert_w",
    "lightcone_grid",
    "loglog_slope",
    "max_current_scan",
    "qubit_occupation",
    "sample_fields",
    "tcl2_closed_n0",
    "tcl2_closed_rate",
    "tcl2_dephasing_n0",
    "tcl2_dephasing_rate",
    "validate_config",
    "__version__",
]
