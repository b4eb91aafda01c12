"""Pure-numpy RK4 stepper for the sector Lindblad equation.

Reference implementation and import-time fallback for the compiled kernel.
Same contract as _rk4_cy.rk4_lindblad; the Hamiltonian is passed as its
tridiagonal parts so one step costs O(d^2).
"""

import numpy as np

RECORD_FULL = 0
RECORD_DIAG = 1
RECORD_N0 = 2


def _rhs(diag, offdiag, damp, rho):
    """-i(H rho - rho H) - damp o rho for tridiagonal H = (diag, offdiag)."""
    hr = diag[:, None] * rho
    hr[:-1] += offdiag[:, None] * rho[1:]
    hr[1:] += offdiag[:, None] * rho[:-1]
    rh = rho * diag[None, :]
    rh[:, :-1] += rho[:, 1:] * offdiag[None, :]
    rh[:, 1:] += rho[:, :-1] * offdiag[None, :]
    return -1j * (hr - rh) - damp * rho


def rk4_lindblad(diag, offdiag, damp, rho0, dt, n_sub, n_samples, record=RECORD_FULL):
    """Integrate d rho/dt = -i[H, rho] - damp o rho with fixed-step RK4.

    Performs n_sub steps of size dt between consecutive samples and records
    n_samples + 1 snapshots (the initial state included).

    record: RECORD_FULL -> (n_samples+1, d, d) complex matrices,
            RECORD_DIAG -> (n_samples+1, d) real populations,
            RECORD_N0   -> (n_samples+1,) real qubit population.

    Returns (records, max |trace - 1| over recorded samples).
    """
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    offdiag = np.ascontiguousarray(offdiag, dtype=np.float64)
    damp = np.ascontiguousarray(damp, dtype=np.float64)
    rho = np.array(rho0, dtype=np.complex128)
    d = rho.shape[0]

    if record == RECORD_FULL:
        out = np.empty((n_samples + 1, d, d), dtype=np.complex128)
    elif record == RECORD_DIAG:
        out = np.empty((n_samples + 1, d), dtype=np.float64)
    else:
        out = np.empty(n_samples + 1, dtype=np.float64)

    def store(i):
        if record == RECORD_FULL:
            out[i] = rho
        elif record == RECORD_DIAG:
            out[i] = rho.diagonal().real
        else:
            out[i] = rho[0, 0].real
        drift = abs(np.trace(rho) - 1.0)
        # a blown-up run may cancel to NaN; report it as infinite drift
        return drift if np.isfinite(drift) else np.inf

    max_drift = store(0)
    sixth = dt / 6.0
    half = dt / 2.0
    for i in range(1, n_samples + 1):
        for _ in range(n_sub):
            k1 = _rhs(diag, offdiag, damp, rho)
            k2 = _rhs(diag, offdiag, damp, rho + half * k1)
            k3 = _rhs(diag, offdiag, damp, rho + half * k2)
            k4 = _rhs(diag, offdiag, damp, rho + dt * k3)
            rho += sixth * (k1 + 2.0 * (k2 + k3) + k4)
        max_drift = max(max_drift, store(i))
    return out, max_drift
