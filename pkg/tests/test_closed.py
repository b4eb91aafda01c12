"""Exact closed evolution and the closed-chain TCL2 population."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

import xxprobe as xp

CFG10 = xp.ModelConfig(n_sites=10, j_coupling=4.0, g_coupling=0.2, omega0=0.0)


def test_two_level_rabi():
    cfg = xp.ModelConfig(n_sites=1, g_coupling=0.2)
    times = np.linspace(0.0, 25.0, 501)
    n0 = xp.qubit_occupation(xp.evolve_closed(cfg, times))
    assert np.allclose(n0.values, np.cos(0.2 * times) ** 2, atol=1e-12)


def test_decoupled_qubit_stays_put():
    cfg = xp.ModelConfig(n_sites=5, g_coupling=0.0)
    series = xp.evolve_closed(cfg, np.linspace(0, 10, 50))
    assert np.allclose(series.values[:, 0], 1.0, atol=1e-12)
    assert np.allclose(series.values[:, 1:], 0.0, atol=1e-12)


def test_norm_and_energy_conserved():
    cfg = xp.ModelConfig(n_sites=8, fields=(0.5, -1, 0, 2, 1, -0.3, 0, 0.7))
    series = xp.evolve_closed(cfg, xp.grid_times(cfg, t_max=30))
    norms = np.linalg.norm(series.values, axis=1)
    assert np.abs(norms - 1.0).max() <= 1e-10
    h = xp.build_hamiltonian(cfg)
    energies = np.real(np.einsum("ti,ij,tj->t", series.values.conj(), h, series.values))
    assert np.abs(energies - energies[0]).max() <= 1e-9


def test_gamma_warned_not_used():
    cfg = xp.ModelConfig(n_sites=2, gamma=1.0)
    with pytest.warns(UserWarning, match="ignores gamma"):
        xp.evolve_closed(cfg, np.linspace(0, 1, 5))


def test_occupation_against_expm_oracle():
    # frozen from the dense matrix-exponential propagator at t=5
    times = np.array([0.0, 5.0])
    n0 = xp.qubit_occupation(xp.evolve_closed(CFG10, times))
    assert n0.values[0] == pytest.approx(1.0, abs=1e-12)
    assert n0.values[1] == pytest.approx(0.8297489230184159, abs=1e-10)
    oracle = np.abs((expm(-1j * xp.build_hamiltonian(CFG10) * 5.0) @ np.eye(11)[0])[0]) ** 2
    assert n0.values[1] == pytest.approx(oracle, abs=1e-10)


def test_first_revival_golden():
    # golden data recorded from this exact solver after the expm cross-check
    n0 = xp.qubit_occupation(xp.evolve_closed(CFG10, xp.grid_times(CFG10, t_max=15)))
    t_rev, height = xp.first_revival(n0)
    assert t_rev == pytest.approx(11.16, abs=0.01)
    assert height == pytest.approx(0.9940246720416261, abs=1e-9)
    # revival sits near the expected boundary round trip 2(N+1)/J, order one factor
    assert 0.5 < t_rev / (2 * 11 / 4.0) < 2.5


class TestClosedRate:
    def test_zero_at_t0(self):
        modes = xp.chain_modes(CFG10)
        assert xp.tcl2_closed_rate(modes, CFG10, 0.0) == 0.0

    def test_single_zero_mode_grows_linearly(self):
        cfg = xp.ModelConfig(n_sites=1, g_coupling=0.3)
        modes = xp.chain_modes(cfg)
        for t in (0.5, 2.0, 7.0):
            assert xp.tcl2_closed_rate(modes, cfg, t) == pytest.approx(
                2 * 0.3**2 * t, rel=1e-12
            )

    def test_matches_quadrature_oracle(self):
        # lambda(t) = 2 g^2 Re int_0^t C(tau) dtau at omega0 = 0
        modes = xp.chain_modes(CFG10)
        value = xp.tcl2_closed_rate(modes, CFG10, 1.0)
        assert value == pytest.approx(0.04363109949936485, abs=1e-12)  # frozen quad result
        live, _ = quad(
            lambda tau: 2 * CFG10.g_coupling**2 * np.real(xp.correlation_function(modes, tau)),
            0.0, 1.0, limit=200,
        )
        assert value == pytest.approx(live, abs=1e-8)


class TestClosedN0:
    def test_starts_at_one_and_stays_in_unit_interval(self):
        modes = xp.chain_modes(CFG10)
        n0 = xp.tcl2_closed_n0(modes, CFG10, xp.grid_times(CFG10, t_max=40))
        assert n0.values[0] == 1.0
        assert (n0.values > 0).all() and (n0.values <= 1.0).all()

    def test_decoupled_is_flat(self):
        cfg = xp.ModelConfig(n_sites=4, g_coupling=0.0)
        n0 = xp.tcl2_closed_n0(xp.chain_modes(cfg), cfg, np.linspace(0, 20, 100))
        assert np.allclose(n0.values, 1.0, atol=1e-14)

    def test_derivative_consistent_with_rate(self):
        # d n0/dt must equal -lambda(t) n0(t) up to O(dt^2) differencing error
        modes = xp.chain_modes(CFG10)
        dt = 0.002
        times = np.arange(0, 8.0, dt)
        n0 = xp.tcl2_closed_n0(modes, CFG10, times).values
        deriv = np.gradient(n0, dt)[2:-2]
        lam = np.array([xp.tcl2_closed_rate(modes, CFG10, t) for t in times])[2:-2]
        assert np.abs(deriv + lam * n0[2:-2]).max() <= 5 * dt**2

    def test_tracks_exact_solution(self):
        times = xp.grid_times(CFG10, t_max=15)
        exact = xp.qubit_occupation(xp.evolve_closed(CFG10, times))
        tcl = xp.tcl2_closed_n0(xp.chain_modes(CFG10), CFG10, times)
        assert np.abs(exact.values - tcl.values).max() <= 0.05


def test_odd_chain_breakdown_and_cure():
    # resonant zero mode at omega0 = 0 wrecks the perturbative solution for
    # odd N; a detuned qubit restores even-N-level agreement
    def deviation(n, omega0):
        cfg = xp.ModelConfig(n_sites=n, omega0=omega0)
        times = xp.grid_times(cfg, t_max=30)
        exact = xp.qubit_occupation(xp.evolve_closed(cfg, times)).values
        tcl = xp.tcl2_closed_n0(xp.chain_modes(cfg), cfg, times).values
        return np.abs(exact - tcl).max()

    even = deviation(10, 0.0)
    odd = deviation(11, 0.0)
    cured = deviation(11, 0.5)
    assert odd >= 5 * even
    assert cured <= 0.08
