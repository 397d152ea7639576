"""Seeded invariant suite behind ``wignerlab check``."""

from __future__ import annotations

import numpy as np

from ..boperator import apply_B, apply_B_split
from ..evolution import step_kick_vlasov, step_kick_wigner, step_transport
from ..norms import NormSpec, norm, vector_field_apply
from ..penrose import penrose_quant, penrose_vb
from ..potentials import defocusing_cubic
from ..profiles import maxwellian, two_stream
from ..spectral import DensityField, PhaseField, PhaseGrid, density, fourier_1d, spectral_derivative, transform
from ..wigner import PureState, wigner_of_pure


def _smooth_field(rng, grid, modes=3):
    """Random real field, band-limited in x and Gaussian-localized in v."""
    X, V = grid.mesh()
    f = np.zeros(grid.shape)
    for _ in range(modes):
        k = rng.integers(0, 4) * 2 * np.pi / grid.gx.length
        a, ph, c, w = rng.normal(), rng.uniform(0, 2 * np.pi), rng.uniform(-1, 1), rng.uniform(0.7, 1.3)
        f += a * np.cos(k * (X - grid.gx.origin) + ph) * np.exp(-0.5 * ((V - c) / w) ** 2)
    return PhaseField(grid, f, "physical", True)


def _smooth_density(rng, gx):
    x = gx.points - gx.origin
    rho = 1.0 + sum(0.2 * rng.normal() * np.cos(k * 2 * np.pi * x / gx.length + rng.uniform(0, 6)) for k in (1, 2, 3))
    return DensityField(gx, rho)


def run_checks(seed=0, strict=False):
    """List of ``(name, value, tolerance, passed)`` rows."""
    rng = np.random.default_rng(seed)
    n = 64 if strict else 32
    grid = PhaseGrid.make(n, 2 * np.pi, 2 * n, 20.0)
    V = defocusing_cubic()
    f = _smooth_field(rng, grid)
    rho = _smooth_density(rng, grid.gx)
    eps = 0.1
    rows = []

    def add(name, value, tol):
        rows.append((name, float(value), float(tol), bool(value <= tol)))

    fx = transform(transform(f, "both", "forward"), "both", "inverse")
    add("transform_roundtrip", np.abs(fx.data - f.data).max() / np.abs(f.data).max(), 1e-12)
    u = rng.normal(size=n) + 1j * rng.normal(size=n)
    uh = fourier_1d(u, grid.gx, "forward")
    lhs = grid.gx.spacing * np.sum(np.abs(u) ** 2)
    rhs = grid.gx.dfreq / (2 * np.pi) * np.sum(np.abs(uh) ** 2)
    add("parseval", abs(lhs - rhs) / lhs, 1e-12)
    vs = f.vspectrum[:, 0] * grid.gv.spacing
    add("density_two_routes", np.abs(density(f).data - vs.real).max() / np.abs(vs).max(), 1e-12)

    B = apply_B(rho, f, eps, V)
    scale = np.abs(B.data).max()
    add("B_reality", B.max_imag_ratio(), 1e-12)
    add("B_skew", abs(B.inner(f).real) / (B.l2_norm() * f.l2_norm()), 1e-11)
    add("B_mass", abs(B.mass()) / (scale * grid.gx.length * grid.gv.length), 1e-11)
    add("B_density", np.abs(density(B).data).max() / scale, 1e-11)
    Bp, Bm = apply_B_split(rho, f, eps, V, "+"), apply_B_split(rho, f, eps, V, "-")
    add("B_split", np.abs(Bp.data - Bm.data - B.data).max() / scale, 1e-12)

    r0 = density(f).data
    fk = step_kick_wigner(f, rho, 0.05, eps, V)
    add("kick_density_invariance", np.abs(density(fk).data - r0).max() / np.abs(r0).max(), 1e-12)
    add("kick_l2", abs(fk.l2_norm() - f.l2_norm()) / f.l2_norm(), 1e-12)
    back = step_kick_wigner(fk, rho, -0.05, eps, V)
    add("kick_reversibility", np.abs(back.data - f.data).max() / np.abs(f.data).max(), 1e-12)
    fv = step_kick_vlasov(f, rho, 0.05, V)
    add("vlasov_kick_density_invariance", np.abs(density(fv).data - r0).max() / np.abs(r0).max(), 1e-12)
    ft = step_transport(f, 0.3)
    add("transport_mass", abs(ft.mass() - f.mass()) / abs(f.l2_norm()), 1e-12)
    add("transport_l2", abs(ft.l2_norm() - f.l2_norm()) / f.l2_norm(), 1e-12)

    wgrid = PhaseGrid.make(128, 32.0, 128, 8.0, -16.0)
    psi = np.exp(-0.5 * (wgrid.gx.points - 0.5) ** 2 + 0.7j * wgrid.gx.points)
    W = wigner_of_pure(PureState(wgrid.gx, psi), 0.25, wgrid)
    add("wigner_marginal", np.abs(density(W).data - np.abs(psi) ** 2).max(), 1e-10)
    add("wigner_reality", W.max_imag_ratio(), 1e-12)

    M, T = maxwellian(), two_stream(1.5)
    p = (0.3, 0.4, 0.9)
    lin = abs(penrose_quant(p, M.combine(T, 2.0, -0.5), V) - (2.0 * penrose_quant(p, M, V) - 0.5 * penrose_quant(p, T, V)))
    add("penrose_linearity", lin, 1e-12)
    conj = abs(penrose_vb((0.3, -0.4, 0.9), M) - np.conj(penrose_vb(p, M)))
    add("penrose_conjugation", conj, 1e-12)
    even = abs(penrose_quant((0.3, 0.4, -0.9), M, V) - penrose_quant(p, M, V))
    add("penrose_even_eta", even, 1e-12)

    vp, vm = vector_field_apply(W, "V+", 0.25), vector_field_apply(W, "V-", 0.25)
    dx = 0.25 * spectral_derivative(W.data, wgrid.gx, axis=0)
    add("vector_field_identity", np.abs(0.5 * (vp.data + vm.data) - dx).max() / np.abs(dx).max(), 1e-12)
    spec = NormSpec(1, 1, "Hmr_eps")
    n1, n2 = norm(W, spec, 0.25), norm(W.with_data(-2.0 * W.data), spec, 0.25)
    add("norm_homogeneity", abs(n2 - 2.0 * n1) / n1, 1e-12)
    return rows
