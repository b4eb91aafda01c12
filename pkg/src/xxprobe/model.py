"""Physical configuration, single-excitation Hamiltonians, chain modes.

The probe qubit sits at index 0, chain sites at indices 1..N.  Everything
downstream (exact evolution, perturbative rates, transport analysis) is
built from the three objects defined here: the tridiagonal sector
Hamiltonian, the chain-only mode decomposition, and the boundary-site
correlation function of the chain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ModelConfig",
    "RESONANCE_TOL",
    "ModeDecomposition",
    "TimeSeries",
    "validate_config",
    "build_hamiltonian",
    "chain_block",
    "chain_modes",
    "correlation_function",
    "grid_times",
    "config_from_mapping",
    "config_from_file",
    "config_to_mapping",
]

# |E_q + omega0| below this is treated as an exact resonance and replaced by
# its removable limit in the TCL2 rate formulas.  Well below any physical
# level spacing at desk scale, well above float noise.
RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    """All physical and grid parameters for one qubit + XX-chain setup.

    Parameters
    ----------
    n_sites : chain length N (the qubit is extra, so the sector has N+1 states).
    j_coupling : intra-chain XX coupling J; single-particle hopping is J/2.
    g_coupling : qubit to first-site coupling g.
    omega0 : qubit level splitting.
    gamma : dephasing rate of the chain sites (0 for a closed chain).
    fields : on-site energies h_i, one per chain site; None means all zero.
    time_step : default integration/sampling step.
    t_max : default time horizon.
    """

    n_sites: int
    j_coupling: float = 4.0
    g_coupling: float = 0.2
    omega0: float = 0.0
    gamma: float = 0.0
    fields: tuple[float, ...] | None = None
    time_step: float = 0.01
    t_max: float = 60.0

    def __post_init__(self):
        if self.fields is None:
            object.__setattr__(self, "fields", (0.0,) * int(self.n_sites))
        else:
            object.__setattr__(self, "fields", tuple(float(h) for h in self.fields))

    @property
    def dim(self) -> int:
        """Dimension of the single-excitation sector (qubit + N sites)."""
        return self.n_sites + 1

    def with_(self, **kwargs) -> "ModelConfig":
        """Copy with selected parameters replaced (fields reset if n_sites changes)."""
        if "n_sites" in kwargs and "fields" not in kwargs:
            kwargs["fields"] = None
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ModeDecomposition:
    """Eigenmodes of the chain-only block.

    energies are ascending; boundary_weights[q] is the squared amplitude of
    mode q at the first chain site, the weight with which each mode enters
    the boundary correlation function.  Weights sum to 1 (completeness).
    """

    energies: np.ndarray
    boundary_weights: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class TimeSeries:
    """Samples on a uniform time grid.

    values has shape (T,) for scalar observables or (T, ...) for vector and
    matrix observables (site populations, wavefunctions, density matrices).
    """

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape[0] < 1:
            raise ValueError("TimeSeries needs at least one sample")
        if not self.dt > 0:
            raise ValueError("TimeSeries dt must be positive")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    def map(self, fn) -> "TimeSeries":
        """New series on the same grid with values = fn(values)."""
        return TimeSeries(self.t0, self.dt, fn(self.values))


def validate_config(cfg: ModelConfig) -> ModelConfig:
    """Return cfg unchanged if every invariant holds; raise on the first violation."""
    if int(cfg.n_sites) < 1:
        raise ValueError("n_sites must be at least 1")
    if cfg.gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if not cfg.time_step > 0:
        raise ValueError("time_step must be positive")
    if cfg.t_max < cfg.time_step:
        raise ValueError("t_max must be at least one time_step")
    if len(cfg.fields) != cfg.n_sites:
        raise ValueError(
            f"fields length mismatch: expected {cfg.n_sites}, got {len(cfg.fields)}"
        )
    if not all(np.isfinite(h) for h in cfg.fields):
        raise ValueError("fields must be finite")
    return cfg


def grid_times(cfg: ModelConfig, t_max: float | None = None, dt: float | None = None) -> np.ndarray:
    """Uniform grid 0..t_max inclusive with the config's (or given) step."""
    dt = cfg.time_step if dt is None else dt
    t_max = cfg.t_max if t_max is None else t_max
    n = int(np.floor(t_max / dt + 1e-9))
    return dt * np.arange(n + 1)


def as_uniform_grid(times) -> tuple[np.ndarray, float]:
    """Validate a time grid (>= 2 samples, uniform spacing) and return (times, dt)."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise ValueError("time grid needs at least 2 samples")
    dt = times[1] - times[0]
    if not dt > 0 or not np.allclose(np.diff(times), dt, rtol=1e-9, atol=1e-12):
        raise ValueError("time grid must be uniformly spaced")
    return times, float(dt)


def build_hamiltonian(cfg: ModelConfig) -> np.ndarray:
    """Single-excitation-sector Hamiltonian, (N+1) x (N+1) real symmetric.

    Index 0 is the qubit.  Tridiagonal: diagonal (omega0, h_1..h_N),
    first off-diagonal (g, J/2, ..., J/2).  Constant offsets from the
    spin-to-number conversion are dropped; they shift the whole sector
    spectrum uniformly and affect no observable.
    """
    validate_config(cfg)
    n = cfg.n_sites
    h = np.zeros((n + 1, n + 1))
    h[0, 0] = cfg.omega0
    idx = np.arange(1, n + 1)
    h[idx, idx] = cfg.fields
    h[0, 1] = h[1, 0] = cfg.g_coupling
    half_j = 0.5 * cfg.j_coupling
    for i in range(1, n):
        h[i, i + 1] = h[i + 1, i] = half_j
    return h


def tridiagonal_parts(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(diagonal, first off-diagonal) of a tridiagonal sector Hamiltonian."""
    return np.ascontiguousarray(np.diag(h)), np.ascontiguousarray(np.diag(h, 1))


def chain_block(cfg: ModelConfig) -> np.ndarray:
    """N x N chain-only Hamiltonian block (no qubit row/column)."""
    return build_hamiltonian(cfg)[1:, 1:]


def chain_modes(cfg: ModelConfig) -> ModeDecomposition:
    """Diagonalize the chain block; energies ascending.

    boundary_weights[q] = |amplitude of eigenvector q at chain site 1|^2.
    For h=0 this equals (2/(N+1))*sin^2(q pi/(N+1)); computed generally so
    disordered chains are covered by the same code path.
    """
    energies, vecs = np.linalg.eigh(chain_block(cfg))
    weights = vecs[0, :] ** 2
    return ModeDecomposition(energies=energies, boundary_weights=weights)


def correlation_function(modes: ModeDecomposition, tau):
    """Boundary-site correlation of the chain vacuum: sum_q w_q exp(-i tau E_q).

    tau may be a scalar or an array; the return matches.
    """
    tau_arr = np.asarray(tau, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(tau_arr, modes.energies))
    out = phases @ modes.boundary_weights
    return complex(out) if np.isscalar(tau) or tau_arr.ndim == 0 else out


_CONFIG_KEYS = {
    "n": "n_sites",
    "j": "j_coupling",
    "g": "g_coupling",
    "omega0": "omega0",
    "gamma": "gamma",
    "fields": "fields",
    "dt": "time_step",
    "t_max": "t_max",
}


def config_from_mapping(mapping: dict) -> ModelConfig:
    """Build a validated config from flat keys n, j, g, omega0, gamma, fields, dt, t_max."""
    unknown = set(mapping) - set(_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, attr in _CONFIG_KEYS.items():
        if key in mapping and mapping[key] is not None:
            value = mapping[key]
            if key == "n":
                value = int(value)
            elif key == "fields":
                value = tuple(float(v) for v in value)
            else:
                value = float(value)
            kwargs[attr] = value
    if "n_sites" not in kwargs:
        raise ValueError("config requires key 'n'")
    return validate_config(ModelConfig(**kwargs))


def config_from_file(path) -> ModelConfig:
    """Load a JSON config file with the flat key layout of config_from_mapping."""
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_mapping(json.load(fh))


def config_to_mapping(cfg: ModelConfig) -> dict:
    """Inverse of config_from_mapping (fields always materialized)."""
    return {
        "n": cfg.n_sites,
        "j": cfg.j_coupling,
        "g": cfg.g_coupling,
        "omega0": cfg.omega0,
        "gamma": cfg.gamma,
        "fields": list(cfg.fields),
        "dt": cfg.time_step,
        "t_max": cfg.t_max,
    }
