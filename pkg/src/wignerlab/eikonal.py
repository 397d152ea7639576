"""Eikonal phase of the Wigner parametrix by the method of bicharacteristics.

The Hamiltonian is ``a(t, z, xi) = v xi_x + a_rho(t, x, xi_v)`` with
``a_rho(t, x, xi_v) = Vrho(t, x - xi_v/2) - Vrho(t, x + xi_v/2)``. Rays solve

    X' = v,                V' = -(Vrho'(x - xi_v/2) + Vrho'(x + xi_v/2)) / 2,
    Xi_x' = -(Vrho'(x - xi_v/2) - Vrho'(x + xi_v/2)),   Xi_v' = -xi_x,

and carry ``psi' = -a_rho + Xi_v d_{xi_v} a_rho``. The phase is
``phi_{t,s}(z, xi) = psi_{t,s}(Y_{t,s}(z, xi), xi)`` where ``Y`` inverts
``z0 -> Z_{t,s}(z0, xi)``. Frequencies are unscaled; the semiclassical
phase is ``phi(z, eps xi)``.

All ray functions are vectorized: ``z`` and ``xi`` have shape ``(2,)`` or
``(2, n)``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .boperator import potential_coefficients
from .errors import HistoryRangeError, ParameterError, ResolutionWarning, WindowTooLargeError
from .spectral import DensityField, evaluate_interpolant


class Hamiltonian:
    """Time-dependent ``Vrho`` given through its raw DFT coefficients on ``gx``.

    Parameters
    ----------
    gx : Grid1
    coeff_fn : callable
        ``t -> fft(Vrho(t, x_i))``.
    t_range : tuple of float
        Times at which ``coeff_fn`` is valid.
    """

    def __init__(self, gx, coeff_fn, t_range=(-np.inf, np.inf), name="custom"):
        self.gx = gx
        self._coeff_fn = coeff_fn
        self.t_range = (float(t_range[0]), float(t_range[1]))
        self.name = name
        self._check_smooth()

    def _check_smooth(self):
        lo, hi = self.t_range
        t = 0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else (lo if np.isfinite(lo) else 0.0)
        C = np.abs(self._coeff_fn(t))
        k = np.abs(self.gx.frequencies)
        tot = np.sum(C**2)
        if tot > 0 and np.sum(C[k > 0.75 * k.max()] ** 2) / tot > 1e-20:
            warnings.warn("Vrho is not spectrally resolved on the x-grid", ResolutionWarning, stacklevel=3)

    @classmethod
    def zero(cls, gx):
        return cls(gx, lambda t: np.zeros(gx.n, dtype=complex), name="zero")

    @classmethod
    def analytic(cls, gx, vrho, t_range=(-np.inf, np.inf)):
        """``vrho(t, x)`` sampled on the grid at each requested time."""
        x = gx.points
        return cls(gx, lambda t: np.fft.fft(vrho(t, x)), t_range, "analytic")

    @classmethod
    def from_history(cls, gx, times, densities, V, eps=None):
        """Cubic-spline interpolation in time of ``V_eps * rho`` from stored densities."""
        times = np.asarray(times, dtype=float)
        if times.size < 2 or np.any(np.diff(times) <= 0):
            raise ParameterError("history times must be strictly increasing with at least two entries")
        C = np.array([potential_coefficients(DensityField(gx, r), eps, V) for r in np.asarray(densities)])
        spline = CubicSpline(times, np.concatenate([C.real, C.imag], axis=1), axis=0)
        n = gx.n
        fn = lambda t: (lambda y: y[:n] + 1j * y[n:])(spline(t))  # noqa: E731
        return cls(gx, fn, (times[0], times[-1]), "history")

    def frozen(self, t0):
        """The time-independent Hamiltonian with ``Vrho(t) = Vrho(t0)``."""
        C = self.coeffs(t0)
        return Hamiltonian(self.gx, lambda t: C, name=f"{self.name}@{t0:g}")

    def coeffs(self, t):
        lo, hi = self.t_range
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if not lo - tol <= t <= hi + tol:
            raise HistoryRangeError(f"time {t:g} outside the potential history [{lo:g}, {hi:g}]")
        return self._coeff_fn(min(max(t, lo), hi))

    def vrho(self, t, x):
        """``(Vrho, d_x Vrho)`` at arbitrary points (real parts)."""
        val, der = evaluate_interpolant(self.coeffs(t), self.gx, x)
        return val.real, der.real

    def a_rho(self, t, x, xi_v):
        m, _ = self.vrho(t, np.asarray(x) - 0.5 * np.asarray(xi_v))
        p, _ = self.vrho(t, np.asarray(x) + 0.5 * np.asarray(xi_v))
        return m - p

    def rhs(self, t, y):
        """Right-hand side for the state ``(X, V, Xi_x, Xi_v, psi)``."""
        x, v, xx, xv = y[0], y[1], y[2], y[3]
        m, dm = self.vrho(t, x - 0.5 * xv)
        p, dp = self.vrho(t, x + 0.5 * xv)
        dav = -0.5 * (dm + dp)
        return np.stack([v, dav, -(dm - dp), -xx, -(m - p) + xv * dav])


@dataclass
class BicharState:
    """Ray end point ``(Z, Xi)`` with the accumulated ``psi``, integrated from ``s`` to ``t``."""

    Z: np.ndarray
    Xi: np.ndarray
    psi: np.ndarray
    s: float
    t: float
    steps: int


def _as_pts(a):
    a = np.asarray(a, dtype=float)
    if a.shape[0] != 2:
        raise ParameterError(f"phase-space points must have leading dimension 2, got shape {a.shape}")
    return a


def integrate_bichar(ham, z0, xi0, s, t, dt_ode=1e-2):
    """Classical RK4 along the bicharacteristics from time ``s`` to ``t``.

    The step is ``(t - s)/n`` with ``n = ceil(|t - s| / dt_ode)``; ``psi``
    is integrated with the same tableau.
    """
    if not dt_ode > 0:
        raise ParameterError("dt_ode must be positive")
    z0, xi0 = _as_pts(z0), _as_pts(xi0)
    z0, xi0 = np.broadcast_arrays(z0, xi0)
    y = np.concatenate([z0, xi0, np.sum(z0 * xi0, axis=0, keepdims=True)]).astype(float)
    n = int(np.ceil(abs(t - s) / dt_ode - 1e-12))
    if n:
        h = (t - s) / n
        ham.coeffs(s)
        ham.coeffs(t)
        for i in range(n):
            tau = s + i * h
            k1 = ham.rhs(tau, y)
            k2 = ham.rhs(tau + 0.5 * h, y + 0.5 * h * k1)
            k3 = ham.rhs(tau + 0.5 * h, y + 0.5 * h * k2)
            k4 = ham.rhs(tau + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return BicharState(y[0:2], y[2:4], y[4], float(s), float(t), n)


def phase_psi(ham, z0, xi0, s, t, dt_ode=1e-2):
    return integrate_bichar(ham, z0, xi0, s, t, dt_ode).psi


def _flow_jacobian(ham, z0, xi, s, t, dt_ode, h=1e-6):
    """``d Z / d z0`` by forward differences, shape ``(2, 2, n)``."""
    base = integrate_bichar(ham, z0, xi, s, t, dt_ode).Z
    J = np.empty((2, 2) + base.shape[1:])
    for j in range(2):
        dz = np.zeros_like(z0)
        dz[j] = h
        J[:, j] = (integrate_bichar(ham, z0 + dz, xi, s, t, dt_ode).Z - base) / h
    return base, J


def jacobian_deviation(ham, z0, xi, s, t, dt_ode=1e-2):
    """``max ||dZ/dz0 - I||_2`` over the given rays."""
    z0 = np.atleast_2d(_as_pts(z0).T).T
    xi = np.broadcast_to(_as_pts(xi).reshape(2, -1), z0.shape)
    _, J = _flow_jacobian(ham, z0, np.array(xi), s, t, dt_ode)
    D = np.moveaxis(J, -1, 0) - np.eye(2)
    return float(np.linalg.norm(D, ord=2, axis=(1, 2)).max())


def invert_Z(ham, z, xi, s, t, dt_ode=1e-2, tol=1e-12, max_iter=40):
    """``Y_{t,s}(z, xi)``: Newton on ``z0 -> Z_{t,s}(z0, xi) - z``.

    Starts from the free-flow inverse ``(x - (t - s) v, v)``; the Jacobian
    comes from forward differences of the flow.

    Raises
    ------
    WindowTooLargeError
        If Newton fails to reach ``tol``; carries the measured
        ``||dZ/dz0 - I||``.
    """
    z = _as_pts(z)
    scalar = z.ndim == 1
    z = z.reshape(2, -1)
    xi = np.array(np.broadcast_to(_as_pts(xi).reshape(2, -1), z.shape))
    y0 = np.stack([z[0] - (t - s) * z[1], z[1]])
    res = np.inf
    for _ in range(max_iter):
        Zc, J = _flow_jacobian(ham, y0, xi, s, t, dt_ode)
        r = Zc - z
        res = np.abs(r).max(axis=0) / np.maximum(1.0, np.abs(z).max(axis=0))
        if res.max() <= tol:
            break
        step = np.linalg.solve(np.moveaxis(J, -1, 0), np.moveaxis(r, -1, 0)[..., None])[..., 0]
        y0 = y0 - step.T
        if not np.all(np.isfinite(y0)):
            break
    else:
        Zc = integrate_bichar(ham, y0, xi, s, t, dt_ode).Z
        res = np.abs(Zc - z).max(axis=0) / np.maximum(1.0, np.abs(z).max(axis=0))
    if not (np.all(np.isfinite(y0)) and res.max() <= tol):
        dev = jacobian_deviation(ham, z, xi, s, t, dt_ode) if np.all(np.isfinite(z)) else float("nan")
        raise WindowTooLargeError(
            f"Newton inversion of the ray map failed (residual {np.nanmax(res):.2e}); ||dZ/dz - I|| = {dev:.3f}",
            jacobian_deviation=dev,
        )
    return y0[:, 0] if scalar else y0


def phase(ham, z, xi, s, t, dt_ode=1e-2):
    """``phi_{t,s}(z, xi) = psi_{t,s}(Y_{t,s}(z, xi), xi)``."""
    z = _as_pts(z)
    y0 = invert_Z(ham, z, xi, s, t, dt_ode)
    return phase_psi(ham, y0, xi, s, t, dt_ode)


def free_phase(z, xi, s, t):
    """``(x - (t - s) v) xi_x + v xi_v``."""
    z, xi = _as_pts(z), _as_pts(xi)
    return (z[0] - (t - s) * z[1]) * xi[0] + z[1] * xi[1]


# --------------------------------------------------------------------------- lattice checks


def _unit(k, shape):
    e = np.zeros(shape)
    e[k] = 1.0
    return e


def hj_residual(ham, z, xi, s, t, h=1e-3, dt_ode=1e-2):
    """``|d_t phi + v d_x phi + a_rho(t, x, d_v phi)|`` by centered differences."""
    z = _as_pts(z).reshape(2, -1)
    xi = np.array(np.broadcast_to(_as_pts(xi).reshape(2, -1), z.shape))
    dt_phi = (phase(ham, z, xi, s, t + h, dt_ode) - phase(ham, z, xi, s, t - h, dt_ode)) / (2 * h)
    grad = _grad_z(ham, z, xi, s, t, h, dt_ode)
    return np.abs(dt_phi + z[1] * grad[0] + ham.a_rho(t, z[0], grad[1]))


def _grad_z(ham, z, xi, s, t, h, dt_ode):
    out = np.empty_like(z)
    for k in range(2):
        e = _unit(k, (2, 1))
        out[k] = (phase(ham, z + h * e, xi, s, t, dt_ode) - phase(ham, z - h * e, xi, s, t, dt_ode)) / (2 * h)
    return out


def _grad_xi(ham, z, xi, s, t, h, dt_ode):
    out = np.empty_like(xi)
    for k in range(2):
        e = _unit(k, (2, 1))
        out[k] = (phase(ham, z, xi + h * e, s, t, dt_ode) - phase(ham, z, xi - h * e, s, t, dt_ode)) / (2 * h)
    return out


def gradient_identity_error(ham, z0, xi, s, t, h=1e-4, dt_ode=1e-2):
    """``|grad_z phi(Z_{t,s}(z0, xi), xi) - Xi_{t,s}(z0, xi)|`` (max over components)."""
    z0 = _as_pts(z0).reshape(2, -1)
    xi = np.array(np.broadcast_to(_as_pts(xi).reshape(2, -1), z0.shape))
    st = integrate_bichar(ham, z0, xi, s, t, dt_ode)
    grad = _grad_z(ham, st.Z, xi, s, t, h, dt_ode)
    return np.abs(grad - st.Xi).max(axis=0)


def mixed_hessian(ham, z, xi, s, t, h=1e-3, dt_ode=1e-2):
    """``d_z d_xi phi`` by centered differences, shape ``(n, 2, 2)``."""
    z = _as_pts(z).reshape(2, -1)
    xi = np.array(np.broadcast_to(_as_pts(xi).reshape(2, -1), z.shape))
    H = np.empty((z.shape[1], 2, 2))
    for i in range(2):
        ei = _unit(i, (2, 1))
        for j in range(2):
            ej = _unit(j, (2, 1))
            pp = phase(ham, z + h * ei, xi + h * ej, s, t, dt_ode)
            pm = phase(ham, z + h * ei, xi - h * ej, s, t, dt_ode)
            mp = phase(ham, z - h * ei, xi + h * ej, s, t, dt_ode)
            mm = phase(ham, z - h * ei, xi - h * ej, s, t, dt_ode)
            H[:, i, j] = (pp - pm - mp + mm) / (4 * h * h)
    return H


def flow_determinant(ham, z0, xi0, s, t, dt_ode=1e-2, h=1e-5):
    """Determinant of the 4x4 Jacobian of ``(z, xi) -> (Z, Xi)`` per ray."""
    y0 = np.concatenate([_as_pts(z0).reshape(2, -1), _as_pts(xi0).reshape(2, -1)])
    n = y0.shape[1]
    J = np.empty((n, 4, 4))
    for j in range(4):
        e = np.zeros((4, 1))
        e[j] = h
        p = integrate_bichar(ham, (y0 + e)[:2], (y0 + e)[2:], s, t, dt_ode)
        m = integrate_bichar(ham, (y0 - e)[:2], (y0 - e)[2:], s, t, dt_ode)
        J[:, :, j] = (np.concatenate([p.Z, p.Xi]) - np.concatenate([m.Z, m.Xi])).T / (2 * h)
    return np.linalg.det(J)


@dataclass
class LatticeReport:
    """Per-point residuals and estimate slacks on a ``(z, xi)`` lattice."""

    rows: list
    s: float
    t: float

    def worst(self, key):
        return max(r[key] for r in self.rows)

    def write_csv(self, path):
        keys = list(self.rows[0])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(keys)
            for r in self.rows:
                w.writerow([repr(float(r[k])) for k in keys])


def lattice_check(ham, z, xi, s, t, dt_ode=1e-2, h=1e-3):
    """Evaluate the phase estimates on the lattice ``z x xi`` (both ``(2, n)``).

    Columns: point coordinates, Newton residual, HJ residual, gradient
    identity error, ``|phi - phi_free|``, z-gradient deviation with its
    envelope ``|xi_v| + |t - s| |xi_x| / 2``, and ``||d_z d_xi phi - I||_2``.
    """
    z, xi = _as_pts(z).reshape(2, -1), _as_pts(xi).reshape(2, -1)
    Zg = np.repeat(z, xi.shape[1], axis=1)
    Xg = np.tile(xi, z.shape[1])
    y0 = invert_Z(ham, Zg, Xg, s, t, dt_ode)
    newton = np.abs(integrate_bichar(ham, y0, Xg, s, t, dt_ode).Z - Zg).max(axis=0)
    phi = phase_psi(ham, y0, Xg, s, t, dt_ode)
    dev = np.abs(phi - free_phase(Zg, Xg, s, t))
    grad = _grad_z(ham, Zg, Xg, s, t, h, dt_ode)
    free_grad = np.stack([Xg[0], -(t - s) * Xg[0] + Xg[1]])
    dz_dev = np.abs(grad - free_grad).max(axis=0)
    env = np.abs(Xg[1]) + 0.5 * abs(t - s) * np.abs(Xg[0])
    hj = hj_residual(ham, Zg, Xg, s, t, h, dt_ode) if t - h >= ham.t_range[0] and t + h <= ham.t_range[1] else np.full(dev.shape, np.nan)
    gid = gradient_identity_error(ham, y0, Xg, s, t, 1e-4, dt_ode)
    hess = np.linalg.norm(mixed_hessian(ham, Zg, Xg, s, t, h, dt_ode) - np.eye(2), ord=2, axis=(1, 2))
    rows = []
    for i in range(Zg.shape[1]):
        rows.append(
            {
                "x": Zg[0, i],
                "v": Zg[1, i],
                "xi_x": Xg[0, i],
                "xi_v": Xg[1, i],
                "newton_residual": newton[i],
                "hj_residual": hj[i],
                "gradient_identity": gid[i],
                "phase_deviation": dev[i],
                "dz_deviation": dz_dev[i],
                "dz_envelope": env[i],
                "hessian_deviation": hess[i],
            }
        )
    return LatticeReport(rows, float(s), float(t))


def valid_window(ham, z, xi, s, t_max, n=16, bound=0.5, dt_ode=1e-2):
    """Largest sampled ``t`` in ``(s, t_max]`` with ``||dZ/dz - I|| <= bound`` on the lattice."""
    z, xi = _as_pts(z).reshape(2, -1), _as_pts(xi).reshape(2, -1)
    Zg = np.repeat(z, xi.shape[1], axis=1)
    Xg = np.tile(xi, z.shape[1])
    best = s
    devs = []
    for t in np.linspace(s, t_max, n + 1)[1:]:
        d = jacobian_deviation(ham, Zg, Xg, s, t, dt_ode)
        devs.append((float(t), d))
        if d > bound:
            break
        best = float(t)
    return best, devs
