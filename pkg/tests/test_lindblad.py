"""Sector Lindblad integrator, full-space oracle, dephasing TCL2, classical walk."""

import numpy as np
import pytest
from scipy.integrate import quad

import xxprobe as xp
import xxprobe.lindblad as lb


class TestDissipatorMask:
    def test_zero_gamma_is_all_zeros(self):
        mask = xp.build_dissipator_mask(xp.ModelConfig(n_sites=4, gamma=0.0))
        assert np.array_equal(mask, np.zeros((5, 5)))

    def test_n2_unit_gamma_rates(self):
        mask = xp.build_dissipator_mask(xp.ModelConfig(n_sites=2, gamma=1.0))
        assert np.array_equal(mask, [[0, 2, 2], [2, 0, 4], [2, 4, 0]])

    def test_populations_never_damped(self):
        mask = xp.build_dissipator_mask(xp.ModelConfig(n_sites=7, gamma=3.3))
        assert np.array_equal(np.diag(mask), np.zeros(8))


class TestSectorEvolution:
    def test_gamma_zero_reduces_to_closed_projector(self):
        cfg = xp.ModelConfig(n_sites=5)
        times = xp.grid_times(cfg, t_max=10)
        rho = xp.evolve_lindblad_sector(cfg, times, record="full")
        psi = xp.evolve_closed(cfg, times).values
        proj = np.einsum("ti,tj->tij", psi, psi.conj())
        assert np.abs(rho.values - proj).max() <= 1e-8

    def test_decoupled_qubit_is_stationary(self):
        cfg = xp.ModelConfig(n_sites=3, g_coupling=0.0, gamma=1.5)
        rho = xp.evolve_lindblad_sector(cfg, np.linspace(0, 8, 81), record="full")
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        assert np.abs(rho.values - expected).max() <= 1e-12

    def test_trace_hermiticity_positivity_along_trajectory(self):
        cfg = xp.ModelConfig(n_sites=6, gamma=0.8)
        rho = xp.evolve_lindblad_sector(cfg, xp.grid_times(cfg, t_max=25), record="full")
        traces = np.einsum("tii->t", rho.values)
        assert np.abs(traces - 1.0).max() <= 1e-9
        herm = np.abs(rho.values - rho.values.conj().transpose(0, 2, 1)).max()
        assert herm <= 1e-10
        min_eig = min(np.linalg.eigvalsh(r)[0] for r in rho.values)
        assert min_eig >= -1e-8

    def test_purity_never_increases(self):
        cfg = xp.ModelConfig(n_sites=6, gamma=1.0)
        rho = xp.evolve_lindblad_sector(cfg, xp.grid_times(cfg, t_max=20), record="full")
        purity = np.real(np.einsum("tij,tji->t", rho.values, rho.values))
        assert np.diff(purity).max() <= 1e-9

    def test_record_modes_agree(self):
        cfg = xp.ModelConfig(n_sites=4, gamma=0.6)
        times = np.linspace(0, 5, 26)
        full = xp.evolve_lindblad_sector(cfg, times, record="full")
        diag = xp.evolve_lindblad_sector(cfg, times, record="diag")
        n0 = xp.evolve_lindblad_sector(cfg, times, record="n0")
        assert np.allclose(np.real(full.values.diagonal(axis1=1, axis2=2)), diag.values, atol=1e-14)
        assert np.allclose(diag.values[:, 0], n0.values, atol=1e-14)

    def test_long_run_reaches_maximally_mixed(self):
        cfg = xp.ModelConfig(n_sites=10, gamma=2.0)
        diag = xp.evolve_lindblad_sector(cfg, np.arange(0.0, 2000.1, 2.0), record="diag")
        assert np.abs(diag.values[-1] - 1.0 / 11).max() <= 0.02

    def test_unknown_record_mode_rejected(self):
        with pytest.raises(ValueError, match="record"):
            xp.evolve_lindblad_sector(xp.ModelConfig(n_sites=2), np.linspace(0, 1, 5), record="bogus")

    def test_instability_error_when_halving_exhausted(self, monkeypatch):
        # force a too-coarse substep and forbid recovery
        monkeypatch.setattr(lb, "_stability_step", lambda cfg, h: np.inf)
        monkeypatch.setattr(lb, "_MAX_HALVINGS", 1)
        cfg = xp.ModelConfig(n_sites=6, gamma=40.0, time_step=0.5)
        with pytest.raises(xp.IntegratorInstabilityError, match="trace drift"):
            xp.evolve_lindblad_sector(cfg, np.arange(0.0, 10.5, 0.5), record="n0")

    def test_halving_recovers_from_coarse_step(self):
        # same coarse request, but the halving loop is allowed to fix it
        cfg = xp.ModelConfig(n_sites=4, gamma=6.0, time_step=0.5)
        n0 = xp.evolve_lindblad_sector(cfg, np.arange(0.0, 10.5, 0.5), record="n0")
        assert np.isfinite(n0.values).all()
        assert (n0.values >= -1e-9).all() and (n0.values <= 1 + 1e-9).all()


class TestFullOracle:
    def test_rejects_large_chains(self):
        with pytest.raises(ValueError, match="n_sites <= 3"):
            xp.evolve_lindblad_full(xp.ModelConfig(n_sites=4), np.linspace(0, 1, 3))

    def test_rabi_limit(self):
        cfg = xp.ModelConfig(n_sites=1, g_coupling=0.2, gamma=0.0)
        times = np.linspace(0, 20, 201)
        n0 = xp.evolve_lindblad_full(cfg, times)
        assert np.abs(n0.values - np.cos(0.2 * times) ** 2).max() <= 1e-8

    def test_closed_limit_matches_exact(self):
        cfg = xp.ModelConfig(n_sites=3, gamma=0.0)
        times = np.linspace(0, 15, 151)
        full = xp.evolve_lindblad_full(cfg, times)
        closed = xp.qubit_occupation(xp.evolve_closed(cfg, times))
        assert np.abs(full.values - closed.values).max() <= 1e-8

    @pytest.mark.parametrize("n, gamma", [(1, 0.3), (2, 0.7), (3, 1.0), (2, 5.0)])
    def test_sector_reduction_agrees_with_full_liouvillian(self, n, gamma):
        cfg = xp.ModelConfig(n_sites=n, gamma=gamma)
        times = np.arange(0.0, 20.0001, 0.02)
        full = xp.evolve_lindblad_full(cfg, times)
        sector = xp.evolve_lindblad_sector(cfg, times, record="n0")
        assert np.abs(full.values - sector.values).max() <= 1e-8

    def test_disordered_sector_reduction(self):
        cfg = xp.ModelConfig(n_sites=3, gamma=0.5, fields=(1.2, -0.4, 2.0), omega0=0.3)
        times = np.arange(0.0, 10.0001, 0.02)
        full = xp.evolve_lindblad_full(cfg, times)
        sector = xp.evolve_lindblad_sector(cfg, times, record="n0")
        assert np.abs(full.values - sector.values).max() <= 1e-8


class TestDephasingRate:
    def test_vanishes_at_t0(self):
        cfg = xp.ModelConfig(n_sites=10, gamma=0.7)
        modes = xp.chain_modes(cfg)
        assert xp.tcl2_dephasing_rate(modes, cfg, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_gamma_to_zero_limit_is_closed_rate(self):
        cfg = xp.ModelConfig(n_sites=10)
        modes = xp.chain_modes(cfg)
        for t in (0.5, 2.0, 9.0):
            closed = xp.tcl2_closed_rate(modes, cfg, t)
            assert xp.tcl2_dephasing_rate(modes, cfg, t) == pytest.approx(closed, abs=1e-15)
            near = xp.tcl2_dephasing_rate(modes, cfg.with_(gamma=1e-9), t)
            assert near == pytest.approx(closed, abs=1e-7)

    def test_long_time_rate_matches_quadrature_oracle(self):
        gamma = 0.8
        cfg = xp.ModelConfig(n_sites=10, gamma=gamma)
        modes = xp.chain_modes(cfg)
        value = xp.tcl2_dephasing_rate(modes, cfg, 1e6)
        assert value == pytest.approx(0.02706515056637653, abs=1e-10)  # frozen quad result
        live, _ = quad(
            lambda tau: 2 * cfg.g_coupling**2
            * np.real(xp.correlation_function(modes, tau)) * np.exp(-2 * gamma * tau),
            0.0, 60.0, limit=400,
        )
        assert value == pytest.approx(live, abs=1e-8)
        assert value > 0


class TestDephasingN0:
    def test_gamma_zero_identical_to_closed(self):
        cfg = xp.ModelConfig(n_sites=8)
        modes = xp.chain_modes(cfg)
        times = xp.grid_times(cfg, t_max=20)
        a = xp.tcl2_dephasing_n0(modes, cfg, times)
        b = xp.tcl2_closed_n0(modes, cfg, times)
        assert np.abs(a.values - b.values).max() <= 1e-10

    def test_decoupled_is_flat(self):
        cfg = xp.ModelConfig(n_sites=4, g_coupling=0.0, gamma=2.0)
        n0 = xp.tcl2_dephasing_n0(xp.chain_modes(cfg), cfg, np.linspace(0, 30, 100))
        assert np.allclose(n0.values, 1.0, atol=1e-14)

    def test_strong_dephasing_is_monotone(self):
        cfg = xp.ModelConfig(n_sites=10, gamma=2.0)
        n0 = xp.tcl2_dephasing_n0(xp.chain_modes(cfg), cfg, xp.grid_times(cfg))
        assert np.diff(n0.values).max() <= 0.0

    def test_derivative_consistent_with_rate(self):
        cfg = xp.ModelConfig(n_sites=6, gamma=0.4)
        modes = xp.chain_modes(cfg)
        dt = 0.002
        times = np.arange(0, 6.0, dt)
        n0 = xp.tcl2_dephasing_n0(modes, cfg, times).values
        deriv = np.gradient(n0, dt)[2:-2]
        lam = np.array([xp.tcl2_dephasing_rate(modes, cfg, t) for t in times])[2:-2]
        assert np.abs(deriv + lam * n0[2:-2]).max() <= 5 * dt**2


class TestClassicalWalk:
    def test_short_time_leak_rates(self):
        cfg = xp.ModelConfig(n_sites=10)
        times = np.array([0.0, 0.001])
        interior = np.zeros(11)
        interior[5] = 1.0
        walk = xp.classical_walk_evolve(cfg, 1.0, times, p0=interior)
        assert walk.values[1, 5] == pytest.approx(1 - 2e-3, abs=5e-6)
        edge = np.zeros(11)
        edge[10] = 1.0
        walk = xp.classical_walk_evolve(cfg, 1.0, times, p0=edge)
        assert walk.values[1, 10] == pytest.approx(1 - 1e-3, abs=5e-6)

    def test_uniform_distribution_is_stationary(self):
        cfg = xp.ModelConfig(n_sites=7)
        uniform = np.full(8, 1 / 8)
        walk = xp.classical_walk_evolve(cfg, 2.0, np.array([0.0, 3.0]), p0=uniform)
        assert np.abs(walk.values[1] - 1 / 8).max() <= 1e-12

    def test_probability_conserved_from_qubit_start(self):
        cfg = xp.ModelConfig(n_sites=6)
        walk = xp.classical_walk_evolve(cfg, 0.7, np.linspace(0, 50, 200))
        assert np.abs(walk.values.sum(axis=1) - 1.0).max() <= 1e-12
        assert (walk.values >= -1e-13).all()

    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError, match="hop_rate"):
            xp.classical_walk_evolve(xp.ModelConfig(n_sites=3), 0.0, np.linspace(0, 1, 5))

    def test_fitted_rate_halves_when_gamma_doubles(self):
        fits = {}
        for gamma in (10.0, 20.0):
            cfg = xp.ModelConfig(n_sites=10, gamma=gamma)
            pops = xp.evolve_lindblad_sector(cfg, xp.grid_times(cfg, t_max=400, dt=0.5), record="diag")
            fits[gamma] = xp.fit_hop_rate(cfg, pops)
        assert fits[10.0] / fits[20.0] == pytest.approx(2.0, rel=0.15)
