"""Exact sub-steps, Strang splitting, trajectories and checkpoints."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerlab import checkpoint
from wignerlab.boperator import apply_B, kick_symbol
from wignerlab.errors import ParameterError, SimulationError, TailMassWarning
from wignerlab.evolution import (
    SimConfig,
    evolve,
    kick_resolution,
    step_kick_vlasov,
    step_kick_wigner,
    step_transport,
    strang_step,
)
from wignerlab.potentials import defocusing_cubic, screened_coulomb, zero_potential
from wignerlab.profiles import modulated_maxwellian
from wignerlab.spectral import DensityField, PhaseField, PhaseGrid, density

from conftest import smooth_density, smooth_field


def _diff(a, b):
    return a.with_data(a.data - b.data).l2_norm()


@pytest.fixture
def mm_field():
    grid = PhaseGrid.make(32, 2 * np.pi, 64, 16.0)
    return modulated_maxwellian(0.2, 1.0).evaluate(grid)


class TestTransport:
    def test_zero_step_is_identity(self, rng, medium_grid):
        f = smooth_field(rng, medium_grid)
        assert np.abs(step_transport(f, 0.0).data - f.data).max() < 1e-14

    def test_single_mode(self, medium_grid):
        X, V = medium_grid.mesh()
        g = np.exp(-0.5 * V**2)
        f = PhaseField(medium_grid, np.exp(2j * X) * g)
        dt = 0.37
        out = step_transport(f, dt)
        assert np.abs(out.data - np.exp(2j * (X - V * dt)) * g).max() < 1e-12

    def test_group_property(self, rng, medium_grid):
        f = smooth_field(rng, medium_grid)
        one = step_transport(f, 0.4)
        two = step_transport(step_transport(f, 0.2), 0.2)
        assert np.abs(one.data - two.data).max() <= 1e-13 * np.abs(f.data).max()

    def test_conserves_mass_and_l2(self, rng, medium_grid):
        f = smooth_field(rng, medium_grid)
        g = step_transport(f, 1.3)
        assert abs(g.mass() - f.mass()) <= 1e-12 * f.l2_norm()
        assert abs(g.l2_norm() - f.l2_norm()) <= 1e-12 * f.l2_norm()


class TestKickWigner:
    def test_constant_density_identity(self, rng, medium_grid, V1):
        f = smooth_field(rng, medium_grid)
        rho = DensityField(medium_grid.gx, np.full(medium_grid.gx.n, 1.7))
        assert np.abs(step_kick_wigner(f, rho, 0.1, 0.2, V1).data - f.data).max() < 1e-14

    @given(st.integers(0, 2**31 - 1), st.floats(0.02, 1.0), st.floats(-1.0, 1.0))
    @settings(max_examples=25, deadline=None)
    def test_density_l2_invariance(self, seed, eps, dt):
        r = np.random.default_rng(seed)
        grid = PhaseGrid.make(16, 2 * np.pi, 32, 12.0)
        f, rho = smooth_field(r, grid), smooth_density(r, grid.gx)
        g = step_kick_wigner(f, rho, dt, eps, defocusing_cubic())
        r0 = density(f).data
        assert np.abs(density(g).data - r0).max() <= 1e-12 * max(np.abs(r0).max(), 1e-300)
        assert abs(g.l2_norm() - f.l2_norm()) <= 1e-12 * f.l2_norm()
        assert g.max_imag_ratio() <= 1e-12

    def test_reversibility(self, rng, medium_grid, V1):
        f, rho = smooth_field(rng, medium_grid), smooth_density(rng, medium_grid.gx)
        back = step_kick_wigner(step_kick_wigner(f, rho, 0.3, 0.1, V1), rho, -0.3, 0.1, V1)
        assert np.abs(back.data - f.data).max() <= 1e-12 * np.abs(f.data).max()

    def test_short_time_consistency(self, rng, medium_grid, V1):
        f, rho = smooth_field(rng, medium_grid), smooth_density(rng, medium_grid.gx)
        B = apply_B(rho, f, 0.2, V1)

        def err(dt):
            g = step_kick_wigner(f, rho, dt, 0.2, V1)
            return f.with_data((g.data - f.data) / dt + B.data).l2_norm()

        ratio = err(0.01) / err(0.005)
        assert 1.8 <= ratio <= 2.2

    def test_symbol_odd(self, rng, medium_grid, V1):
        a = kick_symbol(smooth_density(rng, medium_grid.gx), 0.1, V1, medium_grid.gv)
        idx = (-np.arange(medium_grid.gv.n)) % medium_grid.gv.n
        assert np.abs(a + a[:, idx]).max() < 1e-14

    def test_resolution_diagnostic(self, rng, medium_grid, V1):
        rho = smooth_density(rng, medium_grid.gx)
        assert kick_resolution(rho, 0.2, 0.1, V1, medium_grid.gv) == pytest.approx(
            2 * kick_resolution(rho, 0.1, 0.1, V1, medium_grid.gv)
        )


class TestKickVlasov:
    def test_constant_density_identity(self, rng, medium_grid, V1):
        f = smooth_field(rng, medium_grid)
        rho = DensityField(medium_grid.gx, np.full(medium_grid.gx.n, 0.4))
        assert np.abs(step_kick_vlasov(f, rho, 0.3, V1).data - f.data).max() < 1e-14

    def test_semi_lagrangian_shift(self):
        grid = PhaseGrid.make(32, 2 * np.pi, 256, 32.0)
        X, V = grid.mesh()
        f0 = lambda x, v: (1 + 0.3 * np.cos(x)) * np.exp(-0.5 * (v - 0.4) ** 2)  # noqa: E731
        f = PhaseField(grid, f0(X, V), real=True)
        rho = DensityField(grid.gx, 1 + 0.2 * np.sin(grid.gx.points))
        Vc = screened_coulomb(1.0)
        dt = 0.35
        out = step_kick_vlasov(f, rho, dt, Vc)
        drho = 0.2 * np.cos(X)
        assert np.abs(out.data - f0(X, V + dt * Vc.cV * drho)).max() <= 1e-8

    def test_agrees_with_wigner_to_second_order(self, V1):
        grid = PhaseGrid.make(32, 2 * np.pi, 128, 24.0)
        f = modulated_maxwellian(0.2, 1.0).evaluate(grid)
        rho = DensityField(grid.gx, 1 + 0.2 * np.cos(grid.gx.points) + 0.1 * np.sin(2 * grid.gx.points))
        cl = step_kick_vlasov(f, rho, 0.2, V1)
        errs = [np.abs(step_kick_wigner(f, rho, 0.2, e, V1).data - cl.data).max() for e in (0.2, 0.1)]
        assert 3.0 <= errs[0] / errs[1] <= 5.0


class TestStrang:
    def test_small_step_close_to_identity(self, mm_field, V1):
        cfg = SimConfig(0.1, 1.0, 1.0, V1)
        d1 = _diff(strang_step(mm_field, 1e-3, cfg), mm_field)
        d2 = _diff(strang_step(mm_field, 5e-4, cfg), mm_field)
        assert d1 < 1e-2 * mm_field.l2_norm()
        assert 1.8 <= d1 / d2 <= 2.2

    @pytest.mark.parametrize("eps", [0.2, None])
    def test_self_convergence_order(self, mm_field, eps):
        V = defocusing_cubic()
        T = 0.5

        def run(dt):
            return evolve(mm_field, SimConfig(eps, dt, T, V)).final

        f1, f2, f4 = run(0.1), run(0.05), run(0.025)
        order = np.log2(_diff(f1, f2) / _diff(f2, f4))
        assert 1.8 <= order <= 2.2

    def test_long_run_l2_drift(self, V1):
        f = modulated_maxwellian(0.2, 1.0).evaluate(PhaseGrid.make(32, 2 * np.pi, 64, 20.0))
        cfg = SimConfig(0.1, 0.01, 10.0, V1, diag_every=1000, tail_tol=None)  # filamentation outruns 64 v-points by t=10
        tr = evolve(f, cfg)
        l2 = tr.diagnostics["l2"]
        assert tr.meta["n_steps"] == 1000
        assert abs(l2[-1] - l2[0]) <= 1e-10 * l2[0]

    def test_tail_warning(self, V1):
        grid = PhaseGrid.make(16, 2 * np.pi, 16, 4.0)
        X, V = grid.mesh()
        f = PhaseField(grid, np.exp(-0.5 * V**2), real=True)
        with pytest.warns(TailMassWarning):
            strang_step(f, 0.1, SimConfig(0.1, 0.1, 0.1, V1, tail_tol=1e-8))


class TestEvolve:
    def test_free_streaming(self, mm_field):
        cfg = SimConfig(0.1, 0.05, 0.5, zero_potential(), snapshot_every=5)
        tr = evolve(mm_field, cfg)
        X, V = mm_field.grid.mesh()
        ref = (1 + 0.2 * np.cos(X - V * 0.5)) * np.exp(-0.5 * V**2) / np.sqrt(2 * np.pi)
        assert np.abs(tr.final.data - ref).max() <= 1e-10
        assert tr.times == pytest.approx([0.0, 0.25, 0.5])
        d = tr.diagnostics
        assert np.ptp(d["mass"]) <= 1e-12 and np.ptp(d["l2"]) <= 1e-12

    def test_conservation_short_run(self, V1):
        grid = PhaseGrid.make(64, 2 * np.pi, 128, 20.0)
        f = modulated_maxwellian(0.05, 1.0).evaluate(grid)
        tr = evolve(f, SimConfig(0.1, 0.01, 0.5, V1))
        d = tr.diagnostics
        assert np.abs(d["mass"] - d["mass"][0]).max() <= 1e-12 * d["mass"][0]
        assert np.abs(d["l2"] - d["l2"][0]).max() <= 1e-12 * d["l2"][0]
        assert d["max_imag"].max() <= 1e-12
        assert tr.densities.shape == (51, 64)

    def test_dt_shrunk_to_divide_horizon(self, mm_field, V1):
        tr = evolve(mm_field, SimConfig(0.1, 0.03, 0.1, V1))
        assert tr.meta["n_steps"] == 4
        assert tr.meta["dt"] == pytest.approx(0.025)
        assert tr.density_times[-1] == pytest.approx(0.1)

    def test_zero_horizon(self, mm_field, V1):
        tr = evolve(mm_field, SimConfig(0.1, 0.1, 0.0, V1))
        assert tr.meta["n_steps"] == 0
        assert tr.final is mm_field or np.all(tr.final.data == mm_field.data)

    def test_semiclassical_distance_shrinks(self, mm_field, V1):
        T = 0.25
        ref = evolve(mm_field, SimConfig(None, 0.01, T, V1)).final
        d = [_diff(evolve(mm_field, SimConfig(e, 0.01, T, V1)).final, ref) for e in (0.1, 0.05)]
        assert 1.5 <= d[0] / d[1] <= 4.5

    def test_norm_diagnostics_tracked(self, mm_field, V1):
        from wignerlab.norms import NormSpec

        cfg = SimConfig(0.2, 0.05, 0.1, V1, norm_specs=(("l2", NormSpec(0, 0, "Hmr_standard")),))
        tr = evolve(mm_field, cfg)
        assert np.allclose(tr.diagnostics["l2"], tr.diagnostics["l2"][0])

    def test_rejects_complex_and_nan(self, medium_grid, V1):
        f = PhaseField(medium_grid, np.ones(medium_grid.shape), real=False)
        with pytest.raises(ParameterError):
            evolve(f, SimConfig(0.1, 0.1, 0.1, V1))
        bad = PhaseField(medium_grid, np.full(medium_grid.shape, np.nan), real=True)
        with pytest.raises(ParameterError):
            evolve(bad, SimConfig(0.1, 0.1, 0.1, V1))

    def test_blow_up_reported(self, monkeypatch, mm_field, V1):
        import wignerlab.evolution as ev

        monkeypatch.setattr(ev, "step_transport", lambda f, dt: f.with_data(np.full(f.grid.shape, np.nan)))
        with pytest.raises(SimulationError) as info:
            evolve(mm_field, SimConfig(0.1, 0.1, 0.3, V1, tail_tol=None))
        assert info.value.record["step"] == 1

    def test_config_validation(self, V1):
        with pytest.raises(ParameterError):
            SimConfig(0.1, 0.0, 1.0, V1)
        with pytest.raises(ParameterError):
            SimConfig(0.1, 0.1, -1.0, V1)
        with pytest.raises(ParameterError):
            SimConfig(2.0, 0.1, 1.0, V1)
        with pytest.raises(ParameterError):
            SimConfig(0.1, 0.1, 1.0, V1, diag_every=0)
        assert SimConfig(None, 0.1, 1.0, V1).classical


class TestCheckpoint:
    def test_roundtrip(self, tmp_path, mm_field):
        path = tmp_path / "f.wvl"
        checkpoint.write(path, mm_field, 0.05, 1.25)
        g, eps, t = checkpoint.read(path)
        assert eps == 0.05 and t == 1.25
        assert g.grid == mm_field.grid
        assert np.array_equal(g.data, mm_field.data)

    def test_layout(self, mm_field):
        buf = checkpoint.to_bytes(mm_field, None, 0.0)
        assert buf[:4] == b"WVL1"
        assert len(buf) == checkpoint.HEADER.size + 8 * 32 * 64
        assert checkpoint.from_bytes(buf)[1] is None

    def test_bad_input(self, mm_field, medium_grid):
        buf = checkpoint.to_bytes(mm_field, 0.1, 0.0)
        with pytest.raises(ParameterError):
            checkpoint.from_bytes(b"XXXX" + buf[4:])
        with pytest.raises(ParameterError):
            checkpoint.from_bytes(buf[:-8])
        with pytest.raises(ParameterError):
            checkpoint.to_bytes(PhaseField(medium_grid, np.zeros(medium_grid.shape)), 0.1, 0.0)
