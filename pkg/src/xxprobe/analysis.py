"""Non-Markovianity and transport analysis.

The bounce integral collects every interval where the qubit population
rises, i.e. where population previously lost to the chain flows back.  Its
zero crossing in gamma is the Markovian transition point; that point is
located numerically by bisection and estimated in closed form from the
dominant chain mode via the Lambert W function.  Transport diagnostics
(bond currents, light cones, log-log slopes) share this module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .lindblad import evolve_lindblad_sector, tcl2_dephasing_n0
from .model import ModelConfig, TimeSeries, chain_modes, grid_times, validate_config

__all__ = [
    "BounceResult",
    "GammaCEstimate",
    "bounce_function",
    "bounce_is_zero",
    "gamma_c_numeric",
    "gamma_c_single_mode",
    "lambert_w",
    "current_series",
    "max_current_scan",
    "current_peak_table",
    "loglog_slope",
    "lightcone_grid",
    "arrival_time",
    "first_revival",
]

GAMMA_C_METHODS = ("numeric-tcl2", "numeric-exact", "single-mode-closed-form")


@dataclass(frozen=True)
class BounceResult:
    """Integrated population backflow over one run.

    capped means positive derivative activity persisted into the trailing
    5% of the window, so the true integral is cut off by the horizon
    (always the case for a closed finite chain, where it diverges).
    """

    value: float
    capped: bool
    horizon: float
    threshold: float


@dataclass(frozen=True)
class GammaCEstimate:
    gamma_c: float
    method: str
    n_sites: int

    def __post_init__(self):
        if not self.gamma_c > 0:
            raise ValueError("gamma_c must be positive")
        if self.method not in GAMMA_C_METHODS:
            raise ValueError(f"method must be one of {GAMMA_C_METHODS}")


def bounce_function(n0: TimeSeries, threshold: float | None = None) -> BounceResult:
    """Integral of the positive part of dn0/dt above a noise threshold.

    Central differences in the interior, one-sided at the ends; threshold
    defaults to 1e-9/dt and filters discretization noise.
    """
    values = np.asarray(n0.values, dtype=float)
    if values.ndim != 1 or len(values) < 3:
        raise ValueError("bounce_function needs a scalar series with at least 3 samples")
    dt = n0.dt
    if threshold is None:
        threshold = 1e-9 / dt
    deriv = np.empty_like(values)
    deriv[1:-1] = (values[2:] - values[:-2]) / (2.0 * dt)
    deriv[0] = (values[1] - values[0]) / dt
    deriv[-1] = (values[-1] - values[-2]) / dt
    rising = deriv > threshold
    value = float(dt * deriv[rising].sum())
    tail = max(2, int(0.05 * len(values)))
    capped = bool(rising[-tail:].any())
    horizon = n0.t0 + dt * (len(values) - 1)
    return BounceResult(value=value, capped=capped, horizon=horizon, threshold=threshold)


def bounce_is_zero(result: BounceResult) -> bool:
    """Zero-bounce predicate used by the gamma_c bisection (grid-robust)."""
    return result.value < max(1e-6, 10.0 * result.threshold * result.horizon)


def _bounce_at_gamma(cfg: ModelConfig, gamma: float, method: str, horizon: float) -> BounceResult:
    run_cfg = cfg.with_(gamma=gamma)
    t_end = max(horizon, 8.0 / gamma)
    times = grid_times(run_cfg, t_max=t_end)
    if method == "tcl2":
        n0 = tcl2_dephasing_n0(chain_modes(run_cfg), run_cfg, times)
    elif method == "exact":
        n0 = evolve_lindblad_sector(run_cfg, times, record="n0")
    else:
        raise ValueError(f"unknown gamma_c method {method!r}")
    return bounce_function(n0)


def gamma_c_numeric(
    cfg: ModelConfig,
    method: str = "tcl2",
    bracket: tuple[float, float] = (0.01, 0.3),
    horizon: float = 200.0,
    tol: float = 2e-3,
) -> GammaCEstimate:
    """Critical dephasing strength by bisection on the zero-bounce predicate.

    method "tcl2" uses the perturbative population, "exact" the sector
    integrator.  The horizon grows as 8/gamma at small gamma so the
    e^{-2 gamma t} transient has died before the window ends.
    """
    validate_config(cfg)
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")
    if bounce_is_zero(_bounce_at_gamma(cfg, lo, method, horizon)):
        raise ValueError(f"bracket failure: bounce already zero at gamma={lo}")
    if not bounce_is_zero(_bounce_at_gamma(cfg, hi, method, horizon)):
        raise ValueError(f"bracket failure: bounce still nonzero at gamma={hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bounce_is_zero(_bounce_at_gamma(cfg, mid, method, horizon)):
            hi = mid
        else:
            lo = mid
    return GammaCEstimate(
        gamma_c=0.5 * (lo + hi),
        method="numeric-tcl2" if method == "tcl2" else "numeric-exact",
        n_sites=cfg.n_sites,
    )


def lambert_w(x: float) -> float:
    """Principal-branch Lambert W for x >= 0 by Halley iteration.

    Starts from ln(1+x) and converges to |w e^w - x| <= 1e-12.
    """
    if x < 0:
        raise ValueError("lambert_w requires x >= 0")
    if x == 0.0:
        return 0.0
    w = math.log1p(x)
    for _ in range(100):
        ew = math.exp(w)
        resid = w * ew - x
        if abs(resid) <= 1e-12:
            return w
        # Halley step for f(w) = w e^w - x
        fprime = ew * (1.0 + w)
        w -= resid / (fprime - resid * (w + 2.0) / (2.0 * (w + 1.0)))
    raise RuntimeError(f"lambert_w failed to converge for x={x}")


def gamma_c_single_mode(n_sites: int, j_coupling: float) -> GammaCEstimate:
    """Dominant-mode closed-form estimate of the critical dephasing strength.

    gamma_c = J * W(3 pi / 2) / (3 pi) * sin(pi / (2 (N+1))).  The dominant
    mode sits at the band center, which exists only for even N; odd N gets
    a warning, not an error.
    """
    if n_sites % 2:
        warnings.warn(
            "single-mode gamma_c estimate assumes even n_sites", stacklevel=2
        )
    value = (
        j_coupling
        * lambert_w(1.5 * math.pi)
        / (3.0 * math.pi)
        * math.sin(math.pi / (2.0 * (n_sites + 1)))
    )
    return GammaCEstimate(gamma_c=value, method="single-mode-closed-form", n_sites=n_sites)


def current_series(rho: TimeSeries, bond: int) -> TimeSeries:
    """Particle current across one bond from a density-matrix series.

    Bond 0 is qubit to site 1; bond i connects sector indices i and i+1.
    The expectation is 8 Im rho_{i,i+1}, signed so that positive current
    flows away from the qubit.
    """
    dim = rho.values.shape[-1]
    if not 0 <= bond <= dim - 2:
        raise ValueError(f"bond must be in [0, {dim - 2}]")
    return rho.map(lambda vals: 8.0 * np.imag(vals[:, bond, bond + 1]))


def _peak_current(rho: TimeSeries, bond: int, gamma: float) -> float:
    current = np.abs(current_series(rho, bond).values)
    peak = int(np.argmax(current))
    if peak == len(current) - 1:
        raise RuntimeError(
            f"horizon too short: max |current| at the final sample for gamma={gamma}"
        )
    return float(current[peak])


def max_current_scan(
    cfg: ModelConfig,
    bond: int,
    gammas,
    times: np.ndarray | None = None,
) -> list[tuple[float, float]]:
    """Peak |current| on one bond for each dephasing strength.

    Each gamma gets its own sector run on the same grid.  The peak must be
    interior; a maximum at the final sample means the horizon was too
    short and raises.
    """
    return [(g, peaks[0]) for g, peaks in current_peak_table(cfg, [bond], gammas, times)]


def current_peak_table(
    cfg: ModelConfig,
    bonds,
    gammas,
    times: np.ndarray | None = None,
) -> list[tuple[float, list[float]]]:
    """max_current_scan over several bonds, sharing one sector run per gamma."""
    validate_config(cfg)
    bonds = [int(b) for b in bonds]
    gammas = [float(g) for g in gammas]
    if any(g <= 0 for g in gammas):
        raise ValueError("all gammas must be positive")
    out = []
    for gamma in gammas:
        rho = evolve_lindblad_sector(cfg.with_(gamma=gamma), times, record="full")
        out.append((gamma, [_peak_current(rho, b, gamma) for b in bonds]))
    return out


def loglog_slope(points) -> float:
    """Ordinary least-squares slope of ln y versus ln x."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError("loglog_slope needs at least 2 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("loglog_slope needs positive coordinates")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    if np.allclose(lx, lx[0]):
        raise ValueError("degenerate fit: all x equal")
    return float(np.polyfit(lx, ly, 1)[0])


def lightcone_grid(cfg: ModelConfig, times: np.ndarray | None = None) -> TimeSeries:
    """Site populations (qubit first) over time; rows sum to 1."""
    return evolve_lindblad_sector(cfg, times, record="diag")


def arrival_time(populations: TimeSeries, site: int, threshold: float) -> float | None:
    """First grid time at which a site's population reaches the threshold."""
    hits = np.nonzero(populations.values[:, site] >= threshold)[0]
    if len(hits) == 0:
        return None
    return float(populations.t0 + populations.dt * hits[0])


def first_revival(n0: TimeSeries, threshold: float | None = None) -> tuple[float, float] | None:
    """Time and height of the first partial revival of a qubit-population series.

    Finds the first interval where the population rises above noise and
    returns its peak; None when the series never rises (Markovian decay).
    """
    values = np.asarray(n0.values, dtype=float)
    if threshold is None:
        threshold = 1e-9 / n0.dt
    deriv = np.gradient(values, n0.dt)
    rising = np.nonzero(deriv > threshold)[0]
    if len(rising) == 0:
        return None
    start = rising[0]
    falling = np.nonzero(deriv[start:] < -threshold)[0]
    end = start + falling[0] if len(falling) else len(values) - 1
    peak = start + int(np.argmax(values[start : end + 1]))
    return float(n0.t0 + n0.dt * peak), float(values[peak])
