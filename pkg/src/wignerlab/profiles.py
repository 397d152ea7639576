"""Velocity profiles and space-dependent initial-data families.

Fourier transforms use ``F f(zeta) = int f(v) exp(-i zeta v) dv``. Profiles
without a closed form get a trapezoid-sum transform on a fine, wide v-grid;
for smooth rapidly decaying integrands this is spectrally accurate up to
``|zeta| < pi / h``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import ParameterError, TruncationError
from .spectral import PhaseField, fourier_1d

_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class VelocityProfile:
    """A velocity distribution ``v -> f(v)`` with its v-Fourier transform.

    Parameters
    ----------
    eval : callable
        Vectorized ``v -> f(v)``.
    fourier : callable, optional
        Closed-form ``zeta -> F f(zeta)``. When absent, :meth:`transform`
        uses a trapezoid sum over ``quad_grid``.
    name : str
    even : bool
        ``f(-v) = f(v)``, so ``F f`` is real and even.
    quad_grid : tuple of float
        ``(center, half_width, spacing)`` for the numeric transform.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    fourier: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "custom"
    even: bool = False
    quad_grid: tuple = (0.0, 12.0, 0.01)
    decay: str = "gaussian"

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        return np.asarray(self.eval(v), dtype=float) * np.ones_like(v)

    @property
    def closed_form(self):
        return self.fourier is not None

    def _quad_nodes(self):
        c, w, h = self.quad_grid
        n = int(np.ceil(w / h))
        v = c + h * np.arange(-n, n + 1)
        return v, h

    def transform(self, zeta):
        """``F f(zeta)`` as complex array."""
        zeta = np.asarray(zeta, dtype=float)
        if self.fourier is not None:
            return np.asarray(self.fourier(zeta), dtype=complex) * np.ones_like(zeta)
        v, h = self._quad_nodes()
        fv = self(v) * h
        flat = zeta.ravel()
        out = np.empty(flat.shape, dtype=complex)
        step = max(1, _CHUNK // v.size)
        for i in range(0, flat.size, step):
            out[i : i + step] = np.exp(-1j * np.outer(flat[i : i + step], v)) @ fv
        if self.even:
            out = out.real.astype(complex)
        return out.reshape(zeta.shape)

    def mass(self):
        return float(self.transform(np.zeros(1))[0].real)

    def zeta_limit(self):
        """Largest ``|zeta|`` at which :meth:`transform` is trustworthy."""
        if self.fourier is not None:
            return np.inf
        return np.pi / self.quad_grid[2]

    def decay_cutoff(self, tol=1e-14):
        """Smallest ``Z`` with ``|F f(zeta)| < tol * max|F f|`` for ``|zeta| >= Z`` (sampled).

        Raises
        ------
        TruncationError
            If the transform has not decayed inside its trustworthy range.
        """
        zmax = min(self.zeta_limit(), 1e4)
        z = np.concatenate([np.linspace(0.0, 1.0, 65), np.geomspace(1.0, zmax, 400)[1:]])
        z = np.concatenate([-z[::-1], z])
        a = np.abs(self.transform(z))
        peak = a.max()
        if peak == 0.0:
            return 0.0
        above = np.nonzero(a >= tol * peak)[0]
        zc = np.abs(z[above]).max()
        if zc >= zmax * 0.999:
            raise TruncationError(
                f"profile {self.name!r}: Fourier transform does not decay below {tol:g} "
                f"of its peak within |zeta| <= {zmax:g}"
            )
        nxt = z[z > zc]
        return float(nxt.min()) if nxt.size else float(zc)

    def check_fourier(self, gv):
        """Max deviation between the declared transform and the DFT on ``gv``."""
        vals = self(gv.points)
        num = fourier_1d(vals, gv, "forward")
        ref = self.transform(gv.frequencies)
        return float(np.abs(num - ref).max())

    def combine(self, other, alpha=1.0, beta=1.0):
        """The profile ``alpha * self + beta * other``."""
        fourier = None
        if self.fourier is not None and other.fourier is not None:
            fourier = lambda z: alpha * self.transform(z) + beta * other.transform(z)  # noqa: E731
        c1, w1, h1 = self.quad_grid
        c2, w2, h2 = other.quad_grid
        lo, hi = min(c1 - w1, c2 - w2), max(c1 + w1, c2 + w2)
        return VelocityProfile(
            lambda v: alpha * self(v) + beta * other(v),
            fourier,
            f"{alpha:g}*{self.name}+{beta:g}*{other.name}",
            self.even and other.even,
            (0.5 * (lo + hi), 0.5 * (hi - lo), min(h1, h2)),
            self.decay,
        )

    def scaled(self, alpha):
        fourier = None if self.fourier is None else (lambda z: alpha * self.transform(z))
        return VelocityProfile(
            lambda v: alpha * self(v), fourier, f"{alpha:g}*{self.name}", self.even, self.quad_grid, self.decay
        )


def zero_profile():
    return VelocityProfile(lambda v: np.zeros_like(v), lambda z: np.zeros_like(z, dtype=complex), "zero", True)


def maxwellian(sigma=1.0, mass=1.0, mean=0.0):
    """``mass * N(mean, sigma^2)``; the default is the standard Maxwellian with ``F f = exp(-zeta^2/2)``."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    norm = mass / (np.sqrt(2.0 * np.pi) * sigma)
    return VelocityProfile(
        lambda v: norm * np.exp(-0.5 * ((v - mean) / sigma) ** 2),
        lambda z: mass * np.exp(-1j * mean * z - 0.5 * (sigma * z) ** 2),
        f"maxwellian(sigma={sigma:g})",
        mean == 0.0,
        (mean, 12.0 * sigma, sigma / 50.0),
    )


def two_stream(u, sigma=1.0):
    """``(M_sigma(v - u) + M_sigma(v + u)) / 2`` with unit mass."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    norm = 0.5 / (np.sqrt(2.0 * np.pi) * sigma)
    return VelocityProfile(
        lambda v: norm * (np.exp(-0.5 * ((v - u) / sigma) ** 2) + np.exp(-0.5 * ((v + u) / sigma) ** 2)),
        lambda z: np.exp(-0.5 * (sigma * z) ** 2) * np.cos(u * z),
        f"two_stream(u={u:g},sigma={sigma:g})",
        True,
        (0.0, abs(u) + 12.0 * sigma, sigma / 50.0),
    )


def _coef(c):
    if callable(c):
        return lambda x: np.asarray(c(np.asarray(x, dtype=float)), dtype=float) * np.ones_like(x, dtype=float)
    c = float(c)
    return lambda x: np.full(np.shape(x), c)


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Initial data ``f0(x, v)`` stored through its per-x velocity slices.

    ``slice_at(x)`` returns the :class:`VelocityProfile` at a single point.
    Separable data ``amplitude(x) * base(v)`` set both fields, which lets
    Penrose scans use linearity in the profile.
    """

    name: str
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    slice_at: Callable[[float], VelocityProfile]
    amplitude: Callable[[np.ndarray], np.ndarray] | None = None
    base: VelocityProfile | None = None
    params: dict = field(default_factory=dict)

    @property
    def separable(self):
        return self.base is not None

    def __call__(self, x, v):
        return self.func(np.asarray(x, dtype=float), np.asarray(v, dtype=float))

    def evaluate(self, grid, tail_tol=1e-8):
        """Sample on a PhaseGrid; warns if the v-boundary carries mass."""
        X, V = grid.mesh()
        f = PhaseField(grid, self(X, V), "physical", True)
        f.check_tails(tail_tol)
        return f

    def family(self, x):
        return [self.slice_at(float(xi)) for xi in np.atleast_1d(x)]


def _gas(kind, rho, u, mu, T, occupation, fourier_of):
    rho_c, u_c, mu_c, T_c = (_coef(c) for c in (rho, u, mu, T))
    probe = np.linspace(-50.0, 50.0, 1001)
    if np.any(rho_c(probe) <= 0):
        raise ParameterError(f"{kind}: rho must be positive")
    if np.any(T_c(probe) <= 0):
        raise ParameterError(f"{kind}: T must be positive")
    if kind == "bose" and np.max(mu_c(probe)) >= 0:
        raise ParameterError("bose: the chemical potential must satisfy sup mu < 0")

    def func(x, v):
        return rho_c(x) * occupation((v - u_c(x)) ** 2, mu_c(x), T_c(x))

    def slice_at(x):
        r, uu, m, t = (float(c(np.array([x]))[0]) for c in (rho_c, u_c, mu_c, T_c))
        width = np.sqrt(max(m, 0.0) + 40.0 * t)
        scale = min(np.sqrt(t), t / (2.0 * np.sqrt(max(m, t)))) if kind == "fermi" else np.sqrt(t)
        return VelocityProfile(
            lambda v: r * occupation((v - uu) ** 2, m, t),
            fourier_of(r, uu, m, t),
            f"{kind}(rho={r:g},u={uu:g},mu={m:g},T={t:g})",
            uu == 0.0,
            (uu, width, scale / 40.0),
        )

    params = {"rho": rho, "u": u, "mu": mu, "T": T}
    constant = not any(callable(c) for c in (rho, u, mu, T))
    if constant:
        base = slice_at(0.0)
        return PhaseProfile(kind, func, lambda x: base, lambda x: np.ones_like(np.asarray(x, dtype=float)), base, params)
    return PhaseProfile(kind, func, slice_at, params=params)


def boltzmann(rho=1.0, u=0.0, mu=0.0, T=1.0):
    """``rho exp(-(|v - u|^2 + mu) / T)``; coefficients are scalars or callables of x."""

    def fourier_of(r, uu, m, t):
        amp = r * np.exp(-m / t) * np.sqrt(np.pi * t)
        return lambda z: amp * np.exp(-1j * uu * z - 0.25 * t * z * z)

    return _gas("boltzmann", rho, u, mu, T, lambda w2, m, t: np.exp(-(w2 + m) / t), fourier_of)


def fermi(rho=1.0, u=0.0, mu=0.0, T=1.0):
    """``rho / (exp((|v - u|^2 - mu) / T) + 1)``; transform computed numerically."""
    return _gas("fermi", rho, u, mu, T, lambda w2, m, t: expit(-(w2 - m) / t), lambda *a: None)


def bose(rho=1.0, u=0.0, mu=-1.0, T=1.0):
    """``rho / (exp((|v - u|^2 - mu) / T) - 1)``; requires ``sup mu < 0``."""

    def occupation(w2, m, t):
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1((w2 - m) / t)

    return _gas("bose", rho, u, mu, T, occupation, lambda *a: None)


def modulated_maxwellian(alpha, k, sigma=1.0):
    """``(1 + alpha cos(k x)) M_sigma(v)`` with ``alpha`` in ``[0, 1)``."""
    if not 0.0 <= alpha < 1.0:
        raise ParameterError(f"alpha must lie in [0, 1), got {alpha}")
    base = maxwellian(sigma)
    amp = lambda x: 1.0 + alpha * np.cos(k * np.asarray(x, dtype=float))  # noqa: E731
    return PhaseProfile(
        f"modulated_maxwellian(alpha={alpha:g},k={k:g},sigma={sigma:g})",
        lambda x, v: amp(x) * base(v),
        lambda x: base.scaled(float(amp(x))),
        amp,
        base,
        {"alpha": alpha, "k": k, "sigma": sigma},
    )


def from_config(spec):
    """Build a VelocityProfile or PhaseProfile from a config table with a ``type`` key."""
    spec = dict(spec)
    kind = spec.pop("type", None)
    table = {
        "maxwellian": maxwellian,
        "two_stream": two_stream,
        "boltzmann": boltzmann,
        "fermi": fermi,
        "bose": bose,
        "modulated_maxwellian": modulated_maxwellian,
        "zero": zero_profile,
    }
    if kind not in table:
        raise ParameterError(f"unknown profile type {kind!r}; choose from {sorted(table)}")
    return table[kind](**spec)


def as_phase_profile(prof):
    """View a VelocityProfile as x-independent initial data."""
    if isinstance(prof, PhaseProfile):
        return prof
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    return PhaseProfile(prof.name, lambda x, v: one(x) * prof(v), lambda x: prof, one, prof)

