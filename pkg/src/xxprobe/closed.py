"""Closed-system dynamics: exact sector evolution and the perturbative rate.

The exact path diagonalizes the (N+1)x(N+1) sector Hamiltonian once and
evaluates psi(t) = exp(-iHt) psi(0) on the whole grid, so there is no
time-stepping error anywhere in the closed results.  The second-order
time-local rate and its integral are evaluated per chain mode in closed
form, with the resonant mode handled as a removable limit.
"""

from __future__ import annotations

import warnings

import numpy as np

from .model import (
    RESONANCE_TOL,
    ModeDecomposition,
    ModelConfig,
    TimeSeries,
    as_uniform_grid,
    build_hamiltonian,
    grid_times,
    validate_config,
)

__all__ = [
    "evolve_closed",
    "qubit_occupation",
    "tcl2_closed_rate",
    "tcl2_closed_n0",
]


def evolve_closed(cfg: ModelConfig, times: np.ndarray | None = None) -> TimeSeries:
    """Exact single-excitation wavefunctions on a uniform grid.

    Initial state: qubit up, chain empty (amplitude vector e_0).  Returns a
    TimeSeries whose values have shape (T, N+1), complex.
    """
    validate_config(cfg)
    if cfg.gamma != 0:
        warnings.warn(
            "evolve_closed ignores gamma != 0; use evolve_lindblad_sector for dephasing",
            stacklevel=2,
        )
    if times is None:
        times = grid_times(cfg)
    times, dt = as_uniform_grid(times)
    energies, vecs = np.linalg.eigh(build_hamiltonian(cfg))
    # overlap of each eigenvector with the initial state e_0
    coeff = vecs[0, :]
    phases = np.exp(-1j * np.multiply.outer(times, energies))
    amplitudes = (phases * coeff) @ vecs.T
    return TimeSeries(t0=times[0], dt=dt, values=amplitudes)


def qubit_occupation(series: TimeSeries) -> TimeSeries:
    """Qubit population |amplitude_0|^2 from a wavefunction series.

    Clipped to [0, 1]: eigendecomposition rounding can overshoot by ~1e-16.
    """
    return series.map(lambda vals: np.clip(np.abs(vals[:, 0]) ** 2, 0.0, 1.0))


def _sin_x_over_x(x: np.ndarray, t: float) -> np.ndarray:
    """sin(x t)/x per mode, with the removable limit t at x -> 0."""
    small = np.abs(x) < RESONANCE_TOL
    safe_x = np.where(small, 1.0, x)
    return np.where(small, t, np.sin(safe_x * t) / safe_x)


def tcl2_closed_rate(modes: ModeDecomposition, cfg: ModelConfig, t: float) -> float:
    """Time-local decay rate of the qubit population, closed chain.

    lambda(t) = 2 g^2 sum_q w_q sin(x_q t)/x_q with x_q = E_q + omega0; the
    resonant term |x_q| < 1e-12 contributes its removable limit t.
    """
    x = modes.energies + cfg.omega0
    terms = _sin_x_over_x(x, float(t))
    return 2.0 * cfg.g_coupling**2 * float(modes.boundary_weights @ terms)


def _closed_rate_integral(modes: ModeDecomposition, cfg: ModelConfig, times: np.ndarray) -> np.ndarray:
    """int_0^t lambda(s) ds per grid point, evaluated analytically per mode."""
    x = modes.energies + cfg.omega0
    small = np.abs(x) < RESONANCE_TOL
    safe_x = np.where(small, 1.0, x)
    # int_0^t sin(x s)/x ds = (1 - cos(x t))/x^2, with limit t^2/2 at x -> 0
    per_mode = (1.0 - np.cos(np.outer(times, safe_x))) / safe_x**2
    per_mode[:, small] = 0.5 * np.outer(times**2, np.ones(small.sum()))
    return 2.0 * cfg.g_coupling**2 * (per_mode @ modes.boundary_weights)


def tcl2_closed_n0(
    modes: ModeDecomposition, cfg: ModelConfig, times: np.ndarray | None = None
) -> TimeSeries:
    """Perturbative qubit population n0(t) = exp(-int_0^t lambda), closed chain."""
    validate_config(cfg)
    if times is None:
        times = grid_times(cfg)
    times, dt = as_uniform_grid(times)
    n0 = np.exp(-_closed_rate_integral(modes, cfg, times))
    return TimeSeries(t0=times[0], dt=dt, values=n0)
