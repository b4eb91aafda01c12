"""Dephasing dynamics of the qubit + chain.

Production path: the Lindblad equation restricted to the single-excitation
sector, where the dissipator becomes an entrywise damping mask on the
(N+1) x (N+1) density matrix; integrated with fixed-step RK4 (compiled
kernel when available).  The full 2^(N+1) Liouvillian exists only as a
brute-force oracle for N <= 3.  The dephasing TCL2 rate and the
strong-dephasing classical walk live here too.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from . import _kernels
from .closed import tcl2_closed_rate, _closed_rate_integral
from .model import (
    ModeDecomposition,
    ModelConfig,
    TimeSeries,
    as_uniform_grid,
    build_hamiltonian,
    grid_times,
    tridiagonal_parts,
    validate_config,
)

__all__ = [
    "IntegratorInstabilityError",
    "build_dissipator_mask",
    "evolve_lindblad_sector",
    "evolve_lindblad_full",
    "tcl2_dephasing_rate",
    "tcl2_dephasing_n0",
    "classical_walk_evolve",
    "fit_hop_rate",
]

TRACE_DRIFT_TOL = 1e-9
POSITIVITY_TOL = 1e-6
# RK4 is stable for |generator eigenvalue| * dt below ~2.8; stay clear of it.
_STABILITY_SAFETY = 2.0
_MAX_HALVINGS = 22


class IntegratorInstabilityError(RuntimeError):
    """Raised when the RK4 run cannot reach the trace/positivity tolerances."""


def build_dissipator_mask(cfg: ModelConfig) -> np.ndarray:
    """Entrywise coherence damping rates of the sector-reduced dissipator.

    Dephasing acts on chain sites only.  Populations are untouched,
    qubit-chain coherences decay at 2*gamma, chain-chain coherences at
    4*gamma.
    """
    validate_config(cfg)
    d = cfg.dim
    mask = np.full((d, d), 4.0 * cfg.gamma)
    mask[0, :] = mask[:, 0] = 2.0 * cfg.gamma
    np.fill_diagonal(mask, 0.0)
    return mask


def _stability_step(cfg: ModelConfig, h: np.ndarray) -> float:
    """Largest RK4-stable step for the sector generator (Gershgorin bound)."""
    radius = float(np.max(np.sum(np.abs(h), axis=1)))
    scale = 4.0 * cfg.gamma + 2.0 * radius
    return _STABILITY_SAFETY / scale if scale > 0 else np.inf


def _check_positivity(values: np.ndarray, record: str) -> float:
    if record == "full":
        worst = min(float(np.linalg.eigvalsh(rho)[0]) for rho in values)
    elif record == "diag":
        worst = float(values.min())
    else:
        worst = float(values.min())
    return worst


def evolve_lindblad_sector(
    cfg: ModelConfig,
    times: np.ndarray | None = None,
    record: str = "full",
) -> TimeSeries:
    """Integrate the sector Lindblad equation from rho(0) = |e0><e0|.

    record selects what is kept per sample: "full" density matrices
    (default, shape (T, N+1, N+1)), "diag" populations (T, N+1), or "n0"
    the qubit population alone (T,).  The integrator substeps between grid
    points; the substep is halved until the trace drift over the whole run
    is below 1e-9, and a positivity violation beyond 1e-6 at any sample
    raises IntegratorInstabilityError.
    """
    validate_config(cfg)
    if record not in ("full", "diag", "n0"):
        raise ValueError(f"unknown record mode {record!r}")
    if times is None:
        times = grid_times(cfg)
    times, dt_grid = as_uniform_grid(times)

    h = build_hamiltonian(cfg)
    diag, offdiag = tridiagonal_parts(h)
    mask = build_dissipator_mask(cfg)
    rho0 = np.zeros((cfg.dim, cfg.dim), dtype=np.complex128)
    rho0[0, 0] = 1.0

    dt_target = min(cfg.time_step, _stability_step(cfg, h))
    n_sub = max(1, int(np.ceil(dt_grid / dt_target - 1e-12)))
    record_code = {"full": _kernels.RECORD_FULL, "diag": _kernels.RECORD_DIAG, "n0": _kernels.RECORD_N0}[record]

    for _ in range(_MAX_HALVINGS):
        values, drift = _kernels.rk4_lindblad(
            diag, offdiag, mask, rho0, dt_grid / n_sub, n_sub, len(times) - 1, record_code
        )
        if drift < TRACE_DRIFT_TOL:
            break
        n_sub *= 2
    else:
        raise IntegratorInstabilityError(
            f"trace drift {drift:.3e} not below {TRACE_DRIFT_TOL} after {_MAX_HALVINGS} halvings"
        )

    worst = _check_positivity(values, record)
    if worst < -POSITIVITY_TOL:
        raise IntegratorInstabilityError(
            f"positivity violation {worst:.3e} exceeds {POSITIVITY_TOL}; reduce time_step"
        )
    return TimeSeries(t0=times[0], dt=dt_grid, values=values)


# ---------------------------------------------------------------------------
# full-Hilbert-space oracle (N <= 3)

_SZ = np.diag([1.0, -1.0])
_SPLUS = np.array([[0.0, 1.0], [0.0, 0.0]])


def _embed(op: np.ndarray, site: int, n_factors: int) -> np.ndarray:
    """op acting on tensor factor `site` of n_factors qubits (factor 0 = probe)."""
    out = np.array([[1.0]])
    for k in range(n_factors):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def _full_hamiltonian(cfg: ModelConfig) -> np.ndarray:
    n = cfg.n_sites
    nf = n + 1
    sp = [_embed(_SPLUS, k, nf) for k in range(nf)]
    sm = [s.T for s in sp]
    sz_half = [0.5 * _embed(_SZ, k, nf) for k in range(nf)]
    h = cfg.omega0 * sp[0] @ sm[0]
    h = h + cfg.g_coupling * (sp[0] @ sm[1] + sm[0] @ sp[1])
    for i in range(1, n):
        # S^x S^x + S^y S^y = (S^+ S^- + S^- S^+)/2
        h = h + 0.5 * cfg.j_coupling * (sp[i] @ sm[i + 1] + sm[i] @ sp[i + 1])
    for i in range(1, n + 1):
        h = h + cfg.fields[i - 1] * sz_half[i]
    return h


def evolve_lindblad_full(cfg: ModelConfig, times: np.ndarray | None = None) -> TimeSeries:
    """Brute-force qubit population from the complete 2^(N+1) Liouvillian.

    Vectorizes the full density matrix, exponentiates the Liouvillian once
    per grid interval, and steps exactly.  Oracle only: N <= 3.
    """
    validate_config(cfg)
    if cfg.n_sites > 3:
        raise ValueError("full-space oracle limited to n_sites <= 3")
    if times is None:
        times = grid_times(cfg)
    times, dt_grid = as_uniform_grid(times)

    nf = cfg.n_sites + 1
    dim = 2**nf
    h = _full_hamiltonian(cfg)
    eye = np.eye(dim)
    liou = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for i in range(1, nf):
        sz = _embed(_SZ, i, nf)
        liou = liou + cfg.gamma * (np.kron(sz, sz.T) - np.kron(eye, eye))

    # qubit up = index 0 of the first factor, chain all down
    psi0 = np.zeros(dim)
    psi0[np.ravel_multi_index((0,) + (1,) * cfg.n_sites, (2,) * nf)] = 1.0
    rho = np.outer(psi0, psi0).astype(complex).reshape(-1)
    number_op = (_embed(_SPLUS, 0, nf) @ _embed(_SPLUS, 0, nf).T).diagonal().real

    prop = expm(liou * dt_grid)
    n0 = np.empty(len(times))
    for k in range(len(times)):
        if k > 0:
            rho = prop @ rho
        n0[k] = float(np.real(rho.reshape(dim, dim).diagonal() @ number_op))
    return TimeSeries(t0=times[0], dt=dt_grid, values=n0)


# ---------------------------------------------------------------------------
# dephasing TCL2

def _dephasing_bracket(x: np.ndarray, gamma: float, t: float) -> np.ndarray:
    """[e^{-2g t}(-2g cos(xt) + x sin(xt)) + 2g] / (x^2 + 4g^2) per mode, g = gamma."""
    decay = np.exp(-2.0 * gamma * t)
    num = decay * (-2.0 * gamma * np.cos(x * t) + x * np.sin(x * t)) + 2.0 * gamma
    return num / (x**2 + 4.0 * gamma**2)


def tcl2_dephasing_rate(modes: ModeDecomposition, cfg: ModelConfig, t: float) -> float:
    """Time-local qubit decay rate with chain dephasing at rate gamma.

    Reduces to the closed-chain rate as gamma -> 0; that exact limit (where
    the resonant-mode denominator would vanish) is delegated to
    tcl2_closed_rate.
    """
    if cfg.gamma == 0.0:
        return tcl2_closed_rate(modes, cfg, t)
    x = modes.energies + cfg.omega0
    terms = _dephasing_bracket(x, cfg.gamma, float(t))
    return 2.0 * cfg.g_coupling**2 * float(modes.boundary_weights @ terms)


def _dephasing_rate_integral(
    modes: ModeDecomposition, cfg: ModelConfig, times: np.ndarray
) -> np.ndarray:
    """int_0^t lambda_gamma(s) ds via exponential-trig antiderivatives per mode."""
    gamma = cfg.gamma
    x = modes.energies + cfg.omega0
    xt = np.outer(times, x)
    decay = np.exp(-2.0 * gamma * times)[:, None]
    denom = x**2 + 4.0 * gamma**2
    # A = int e^{-2g s} cos(xs), B = int e^{-2g s} sin(xs) over [0, t]
    a_int = (decay * (-2.0 * gamma * np.cos(xt) + x * np.sin(xt)) + 2.0 * gamma) / denom
    b_int = (decay * (-2.0 * gamma * np.sin(xt) - x * np.cos(xt)) + x) / denom
    per_mode = (-2.0 * gamma * a_int + x * b_int + 2.0 * gamma * times[:, None]) / denom
    return 2.0 * cfg.g_coupling**2 * (per_mode @ modes.boundary_weights)


def tcl2_dephasing_n0(
    modes: ModeDecomposition, cfg: ModelConfig, times: np.ndarray | None = None
) -> TimeSeries:
    """Perturbative qubit population under dephasing, n0 = exp(-int lambda_gamma)."""
    validate_config(cfg)
    if times is None:
        times = grid_times(cfg)
    times, dt = as_uniform_grid(times)
    if cfg.gamma == 0.0:
        integral = _closed_rate_integral(modes, cfg, times)
    else:
        integral = _dephasing_rate_integral(modes, cfg, times)
    return TimeSeries(t0=times[0], dt=dt, values=np.exp(-integral))


# ---------------------------------------------------------------------------
# strong-dephasing classical walk

def _walk_generator(cfg: ModelConfig, hop_rate: float) -> np.ndarray:
    d = cfg.dim
    rates = np.full(d - 1, hop_rate)
    # the qubit bond hops with the squared amplitude ratio relative to a
    # chain bond; qualitative light-cone use only
    rates[0] = hop_rate * (cfg.g_coupling / (0.5 * cfg.j_coupling)) ** 2
    gen = np.zeros((d, d))
    for i, r in enumerate(rates):
        gen[i, i + 1] = gen[i + 1, i] = r
        gen[i, i] -= r
        gen[i + 1, i + 1] -= r
    return gen


def classical_walk_evolve(
    cfg: ModelConfig,
    hop_rate: float,
    times: np.ndarray | None = None,
    p0: np.ndarray | None = None,
) -> TimeSeries:
    """Classical hopping populations on qubit + chain, reflecting ends.

    Solves dp/dt = W p exactly through the eigendecomposition of the
    symmetric rate matrix W; probability is conserved.  p0 defaults to all
    population on the qubit.
    """
    validate_config(cfg)
    if not hop_rate > 0:
        raise ValueError("hop_rate must be positive")
    if times is None:
        times = grid_times(cfg)
    times, dt = as_uniform_grid(times)
    if p0 is None:
        p0 = np.zeros(cfg.dim)
        p0[0] = 1.0
    evals, vecs = np.linalg.eigh(_walk_generator(cfg, hop_rate))
    coeff = vecs.T @ np.asarray(p0, dtype=float)
    pops = (np.exp(np.outer(times, evals)) * coeff) @ vecs.T
    return TimeSeries(t0=times[0], dt=dt, values=pops)


def fit_hop_rate(
    cfg: ModelConfig,
    populations: TimeSeries,
    bounds: tuple[float, float] | None = None,
) -> float:
    """Least-squares hop rate of the classical walk against exact populations.

    populations is a "diag"-style series (T, N+1), e.g. from
    evolve_lindblad_sector(record="diag").  Only the 1/gamma scaling of the
    fitted rate is quantitative; the absolute value inherits the crude
    qubit-bond extrapolation.
    """
    times = populations.times
    target = np.asarray(populations.values, dtype=float)
    if bounds is None:
        scale = cfg.j_coupling**2 / (8.0 * cfg.gamma) if cfg.gamma > 0 else 1.0
        bounds = (1e-3 * scale, 1e3 * scale)

    def sse(rate):
        walk = classical_walk_evolve(cfg, rate, times)
        return float(np.sum((walk.values - target) ** 2))

    res = minimize_scalar(sse, bounds=bounds, method="bounded",
                          options={"xatol": 1e-6 * bounds[1]})
    return float(res.x)
