"""Strang splitting for the Wigner and Vlasov-Benney equations.

Both equations share the free-transport sub-step and differ only in the kick:

* Wigner:  ``F_v f <- exp(-i (dt/eps) a(x, xi_v)) F_v f`` with ``a`` from
  :func:`wignerlab.boperator.kick_symbol`;
* Vlasov-Benney: ``F_v f <- exp(i xi_v dt cV d_x rho) F_v f``, an exact shift
  ``f(x, v + dt cV d_x rho)``.

Every sub-step is a unit-modulus Fourier multiplier, so mass and L2 norm are
conserved to round-off and each kick leaves ``rho`` unchanged pointwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .boperator import check_eps, kick_symbol
from .errors import ParameterError, SimulationError
from .potentials import PairPotential
from .spectral import PhaseField, density, spectral_derivative


@dataclass(frozen=True)
class SimConfig:
    """Run parameters. ``eps=None`` selects the classical (Vlasov-Benney) kick."""

    eps: float | None
    dt: float
    t_end: float
    V: PairPotential
    diag_every: int = 1
    snapshot_every: int = 0
    tail_tol: float = 1e-8
    norm_specs: tuple = ()

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ParameterError(f"t_end must be nonnegative, got {self.t_end}")
        if self.eps is not None:
            object.__setattr__(self, "eps", check_eps(self.eps))
        if self.diag_every < 1:
            raise ParameterError("diag_every must be >= 1")

    @property
    def classical(self):
        return self.eps is None


@dataclass
class Trajectory:
    """Snapshots, diagnostics and the per-step density history of one run."""

    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    density_times: np.ndarray | None = None
    densities: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.snapshots[-1]


def step_transport(f, dt):
    """Exact solution of ``d_t f + v d_x f = 0`` over ``dt``."""
    f = f.physical()
    kx = f.grid.gx.odd_frequencies
    v = f.grid.gv.points
    mult = np.exp(-1j * dt * np.outer(kx, v))
    out = np.fft.ifft(mult * np.fft.fft(f.data, axis=0), axis=0)
    return f.with_data(out)


def step_kick_wigner(f, rho_frozen, dt, eps, V):
    """Exact solution of ``d_t f + B_eps[rho_frozen, f] = 0`` over ``dt``."""
    f = f.physical()
    a = kick_symbol(rho_frozen, check_eps(eps), V, f.grid.gv)
    out = np.fft.ifft(np.exp(-1j * (dt / eps) * a) * f.vspectrum, axis=1)
    return f.with_data(out)


def step_kick_vlasov(f, rho_frozen, dt, V):
    """Exact solution of ``d_t f - cV d_x rho_frozen d_v f = 0`` over ``dt``."""
    f = f.physical()
    drho = spectral_derivative(rho_frozen.data, rho_frozen.grid)
    xi = f.grid.gv.odd_frequencies
    mult = np.exp(1j * dt * V.cV * np.outer(drho, xi))
    out = np.fft.ifft(mult * f.vspectrum, axis=1)
    return f.with_data(out)


def kick_resolution(rho, dt, eps, V, gv):
    """``dt max|a| / eps``; values above ``pi`` mean the kick phase is under-resolved."""
    return float(dt * np.abs(kick_symbol(rho, eps, V, gv)).max() / eps)


def _kick(f, rho, dt, cfg):
    if cfg.classical:
        return step_kick_vlasov(f, rho, dt, cfg.V)
    return step_kick_wigner(f, rho, dt, cfg.eps, cfg.V)


def strang_step(f, dt, cfg):
    """Half kick, full transport, half kick (density recomputed before each kick)."""
    f = _kick(f, density(f), 0.5 * dt, cfg)
    f = step_transport(f, dt)
    f = _kick(f, density(f), 0.5 * dt, cfg)
    if cfg.tail_tol is not None:
        f.check_tails(cfg.tail_tol)
    return f


def _diagnose(f, t, cfg):
    row = {
        "t": t,
        "mass": float(np.real(f.mass())),
        "l2": f.l2_norm(),
        "max_imag": f.max_imag_ratio(),
        "tail": f.tail_ratio(),
    }
    if cfg.norm_specs:
        from .norms import norm

        eps = cfg.eps if cfg.eps is not None else 1.0
        for label, spec in cfg.norm_specs:
            row[label] = norm(f, spec, eps)
    return row


def evolve(f0, cfg):
    """Integrate from ``f0`` to ``cfg.t_end``; ``dt`` is shrunk to divide ``t_end`` evenly."""
    f = f0.physical()
    if not f.real:
        raise ParameterError("evolve expects a real-valued initial field")
    if not np.all(np.isfinite(f.data)):
        raise ParameterError("initial field has non-finite values")
    n_steps = max(0, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    dt = cfg.t_end / n_steps if n_steps else 0.0

    traj = Trajectory()
    rows = [_diagnose(f, 0.0, cfg)]
    rho0 = density(f)
    dens = [rho0.data.real.copy()]
    traj.times.append(0.0)
    traj.snapshots.append(f)
    if not cfg.classical and n_steps:
        traj.meta["kick_resolution"] = kick_resolution(rho0, dt, cfg.eps, cfg.V, f.grid.gv)

    n_tail_warnings = 0
    for n in range(1, n_steps + 1):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                f = strang_step(f, dt, cfg)
            except ParameterError as exc:
                # parameters were validated up front, so this is a blow-up inside the step
                raise SimulationError(f"step {n} failed: {exc}", {"step": n, "t": n * dt, "last": rows[-1]}) from exc
        for w in caught:
            n_tail_warnings += 1
            if n_tail_warnings == 1:
                warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
        t = n * dt
        if not np.all(np.isfinite(f.data)):
            raise SimulationError(f"non-finite values at step {n} (t={t:.6g})", {"step": n, "t": t, "last": rows[-1]})
        dens.append(density(f).data.real.copy())
        if n % cfg.diag_every == 0 or n == n_steps:
            rows.append(_diagnose(f, t, cfg))
        if (cfg.snapshot_every and n % cfg.snapshot_every == 0) or n == n_steps:
            traj.times.append(t)
            traj.snapshots.append(f)

    traj.diagnostics = {k: np.array([r[k] for r in rows]) for k in rows[0]}
    traj.density_times = dt * np.arange(n_steps + 1)
    traj.densities = np.array(dens)
    traj.meta.update(dt=dt, n_steps=n_steps, eps=cfg.eps, tail_warnings=n_tail_warnings)
    return traj
