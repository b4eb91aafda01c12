# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 stepper for the sector Lindblad equation.

Hot kernel: small complex matrices, tens of thousands of steps.  Explicit
loops over the tridiagonal Hamiltonian keep one step at O(d^2) with no
per-step Python or numpy dispatch overhead.  Contract mirrors _rk4_py.
"""

import numpy as np

cimport cython

RECORD_FULL = 0
RECORD_DIAG = 1
RECORD_N0 = 2


cdef void _rhs(const double[::1] diag, const double[::1] offdiag,
               const double[:, ::1] damp, const double complex[:, ::1] rho,
               double complex[:, ::1] out, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t m, n
    cdef double complex hr, rh, minus_i
    minus_i = -1j
    for m in range(d):
        for n in range(d):
            hr = diag[m] * rho[m, n]
            if m > 0:
                hr = hr + offdiag[m - 1] * rho[m - 1, n]
            if m < d - 1:
                hr = hr + offdiag[m] * rho[m + 1, n]
            rh = rho[m, n] * diag[n]
            if n > 0:
                rh = rh + rho[m, n - 1] * offdiag[n - 1]
            if n < d - 1:
                rh = rh + rho[m, n + 1] * offdiag[n]
            out[m, n] = minus_i * (hr - rh) - damp[m, n] * rho[m, n]


cdef void _axpy(const double complex[:, ::1] x, double a,
                const double complex[:, ::1] k, double complex[:, ::1] out,
                Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t m, n
    for m in range(d):
        for n in range(d):
            out[m, n] = x[m, n] + a * k[m, n]


cdef void _step(const double[::1] diag, const double[::1] offdiag,
                const double[:, ::1] damp, double complex[:, ::1] rho,
                double complex[:, ::1] k1, double complex[:, ::1] k2,
                double complex[:, ::1] k3, double complex[:, ::1] k4,
                double complex[:, ::1] tmp, double dt, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t m, n
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    _rhs(diag, offdiag, damp, rho, k1, d)
    _axpy(rho, half, k1, tmp, d)
    _rhs(diag, offdiag, damp, tmp, k2, d)
    _axpy(rho, half, k2, tmp, d)
    _rhs(diag, offdiag, damp, tmp, k3, d)
    _axpy(rho, dt, k3, tmp, d)
    _rhs(diag, offdiag, damp, tmp, k4, d)
    for m in range(d):
        for n in range(d):
            rho[m, n] = rho[m, n] + sixth * (k1[m, n] + 2.0 * (k2[m, n] + k3[m, n]) + k4[m, n])


def rk4_lindblad(diag, offdiag, damp, rho0, double dt, Py_ssize_t n_sub,
                 Py_ssize_t n_samples, int record=RECORD_FULL):
    """See _rk4_py.rk4_lindblad; identical contract, compiled inner loop."""
    cdef const double[::1] dg = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] od = np.ascontiguousarray(offdiag, dtype=np.float64)
    cdef const double[:, ::1] dp = np.ascontiguousarray(damp, dtype=np.float64)
    rho_arr = np.array(rho0, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] rho = rho_arr
    cdef Py_ssize_t d = rho_arr.shape[0]

    scratch = [np.empty((d, d), dtype=np.complex128) for _ in range(5)]
    cdef double complex[:, ::1] k1 = scratch[0]
    cdef double complex[:, ::1] k2 = scratch[1]
    cdef double complex[:, ::1] k3 = scratch[2]
    cdef double complex[:, ::1] k4 = scratch[3]
    cdef double complex[:, ::1] tmp = scratch[4]

    cdef object out
    cdef double complex[:, :, ::1] out_full = None
    cdef double[:, ::1] out_diag = None
    cdef double[::1] out_n0 = None
    if record == RECORD_FULL:
        out = np.empty((n_samples + 1, d, d), dtype=np.complex128)
        out_full = out
    elif record == RECORD_DIAG:
        out = np.empty((n_samples + 1, d), dtype=np.float64)
        out_diag = out
    else:
        out = np.empty(n_samples + 1, dtype=np.float64)
        out_n0 = out

    cdef double max_drift = 0.0
    cdef double drift
    cdef double complex tr
    cdef Py_ssize_t i, s, m, n

    with nogil:
        for i in range(n_samples + 1):
            if i > 0:
                for s in range(n_sub):
                    _step(dg, od, dp, rho, k1, k2, k3, k4, tmp, dt, d)
            if record == 0:  # full
                for m in range(d):
                    for n in range(d):
                        out_full[i, m, n] = rho[m, n]
            elif record == 1:  # diag
                for m in range(d):
                    out_diag[i, m] = rho[m, m].real
            else:  # n0
                out_n0[i] = rho[0, 0].real
            tr = 0
            for m in range(d):
                tr = tr + rho[m, m]
            drift = abs(tr - 1.0)
            if drift > max_drift:
                max_drift = drift
    return out, max_drift
