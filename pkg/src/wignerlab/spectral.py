"""Periodic grids, Fourier transforms and the phase-space field containers.

The continuous transform is normalized as ``u_hat(xi) = int u(y) exp(-i xi y) dy``
and approximated by ``spacing * DFT`` with the origin phase restored, so that a
centred Gaussian transforms to a real Gaussian. The inverse carries the
``1/(2 pi)`` factor. All frequency arrays are in numpy FFT order.

Odd-order spectral operators (derivatives, shifts, the B symbol) use
"odd frequencies", in which the Nyquist bin is set to zero: its sign is
ambiguous on the grid and keeping it would break reality of real fields.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, ParameterError, RepresentationError, TailMassWarning

REPRESENTATIONS = ("physical", "fourier-x", "fourier-v", "fourier-xv")
_REP_AXES = {
    "physical": frozenset(),
    "fourier-x": frozenset("x"),
    "fourier-v": frozenset("v"),
    "fourier-xv": frozenset("xv"),
}
_AXES_REP = {v: k for k, v in _REP_AXES.items()}
_AXIS_INDEX = {"x": 0, "v": 1}


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid1:
    """Uniform periodic grid of ``n`` points on ``[origin, origin + length)``."""

    n: int
    length: float
    origin: float = 0.0

    def __post_init__(self):
        n = int(self.n)
        if n != self.n or n < 4 or n & (n - 1):
            raise ParameterError(f"grid size must be a power of two >= 4, got {self.n}")
        length = float(self.length)
        if not np.isfinite(length) or length <= 0:
            raise ParameterError(f"domain length must be positive, got {self.length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "origin", float(self.origin))

    @classmethod
    def centered(cls, n, length):
        return cls(n, length, -0.5 * float(length))

    @property
    def spacing(self):
        return self.length / self.n

    @property
    def dfreq(self):
        return 2.0 * np.pi / self.length

    @property
    def nyquist(self):
        """Index of the Nyquist bin in FFT order."""
        return self.n // 2

    @cached_property
    def points(self):
        return _readonly(self.origin + self.spacing * np.arange(self.n))

    @cached_property
    def frequencies(self):
        return _readonly(2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing))

    @cached_property
    def odd_frequencies(self):
        k = np.array(self.frequencies)
        k[self.nyquist] = 0.0
        return _readonly(k)


@dataclass(frozen=True)
class PhaseGrid:
    """Product grid for ``(x, v)``; the velocity grid must be centred at zero."""

    gx: Grid1
    gv: Grid1

    def __post_init__(self):
        if not np.isclose(self.gv.origin, -0.5 * self.gv.length, rtol=0, atol=1e-12 * self.gv.length):
            raise ParameterError("velocity grid must be symmetric about v = 0")

    @classmethod
    def make(cls, nx, lx, nv, lv, x_origin=0.0):
        return cls(Grid1(nx, lx, x_origin), Grid1.centered(nv, lv))

    @property
    def shape(self):
        return (self.gx.n, self.gv.n)

    @property
    def cell(self):
        return self.gx.spacing * self.gv.spacing

    def mesh(self):
        return np.meshgrid(self.gx.points, self.gv.points, indexing="ij")


@dataclass(frozen=True, eq=False)
class PhaseField:
    """Samples ``f[i, j] ~ f(x_i, v_j)`` (or a partial Fourier transform of them).

    ``real`` records that the physical samples are meant to be real; the data
    are stored complex throughout so that unitary sub-steps stay exact.
    """

    grid: PhaseGrid
    data: np.ndarray
    rep: str = "physical"
    real: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.shape != self.grid.shape:
            raise GridMismatchError(f"data shape {data.shape} does not match grid {self.grid.shape}")
        if self.rep not in REPRESENTATIONS:
            raise RepresentationError(f"unknown representation {self.rep!r}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_function(cls, grid, func, real=True):
        X, V = grid.mesh()
        return cls(grid, func(X, V), "physical", real)

    def with_data(self, data, rep=None):
        return replace(self, data=data, rep=self.rep if rep is None else rep)

    def physical(self):
        f = self
        for ax in sorted(_REP_AXES[self.rep]):
            f = transform(f, ax, "inverse")
        return f

    @cached_property
    def vspectrum(self):
        """Raw (unnormalized) DFT along v of the physical samples."""
        if self.rep != "physical":
            raise RepresentationError("vspectrum is defined for physical fields")
        return _readonly(np.fft.fft(self.data, axis=1))

    def mass(self):
        f = self.physical()
        total = f.grid.cell * f.data.sum()
        return total.real if self.real else total

    def l2_norm(self):
        f = self.physical()
        return float(np.sqrt(f.grid.cell * np.sum(np.abs(f.data) ** 2)))

    def inner(self, other):
        """L2 inner product ``<self, other>`` (conjugate-linear in ``other``)."""
        if self.grid != other.grid:
            raise GridMismatchError("inner product of fields on different grids")
        a, b = self.physical(), other.physical()
        return complex(self.grid.cell * np.sum(a.data * np.conj(b.data)))

    def max_imag_ratio(self):
        d = self.physical().data
        scale = np.abs(d).max()
        return 0.0 if scale == 0 else float(np.abs(d.imag).max() / scale)

    def tail_ratio(self):
        """Largest ``|f|`` on the two outermost v rows on each side, over ``max |f|``."""
        d = np.abs(self.physical().data)
        scale = d.max()
        if scale == 0:
            return 0.0
        edge = np.concatenate([d[:, :2], d[:, -2:]], axis=1)
        return float(edge.max() / scale)

    def check_tails(self, tail_tol=1e-8):
        ratio = self.tail_ratio()
        if ratio > tail_tol:
            warnings.warn(
                f"tail mass ratio {ratio:.3e} exceeds tail_tol {tail_tol:.1e}; "
                "enlarge the velocity box",
                TailMassWarning,
                stacklevel=2,
            )
        return ratio


@dataclass(frozen=True, eq=False)
class DensityField:
    grid: Grid1
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.shape != (self.grid.n,):
            raise GridMismatchError(f"density of shape {data.shape} on grid of size {self.grid.n}")
        if not np.all(np.isfinite(data)):
            raise ParameterError("density contains non-finite entries")
        object.__setattr__(self, "data", data)

    def mass(self):
        return self.grid.spacing * self.data.sum()

    def l2_norm(self):
        return float(np.sqrt(self.grid.spacing * np.sum(np.abs(self.data) ** 2)))


def fourier_1d(u, grid, direction="forward"):
    """Continuous-convention transform of 1-D samples (see module docstring)."""
    k = grid.frequencies
    if direction == "forward":
        return grid.spacing * np.exp(-1j * k * grid.origin) * np.fft.fft(u)
    if direction == "inverse":
        return np.fft.ifft(np.asarray(u) * np.exp(1j * k * grid.origin)) / grid.spacing
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def transform(field, axis, direction):
    """Forward or inverse continuous-convention Fourier transform of a PhaseField.

    ``axis`` is ``"x"``, ``"v"`` or ``"both"``. Transforming an axis that is
    already in Fourier space (or inverting one that is not) raises
    :class:`RepresentationError`.
    """
    if axis == "both":
        axes = ("x", "v")
    elif axis in _AXIS_INDEX:
        axes = (axis,)
    else:
        raise ValueError(f"axis must be 'x', 'v' or 'both', got {axis!r}")
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")

    done = set(_REP_AXES[field.rep])
    data = field.data
    for ax in axes:
        i = _AXIS_INDEX[ax]
        g = field.grid.gx if ax == "x" else field.grid.gv
        shape = [1, 1]
        shape[i] = g.n
        phase = np.exp(-1j * g.frequencies * g.origin).reshape(shape)
        if direction == "forward":
            if ax in done:
                raise RepresentationError(f"axis {ax} is already in Fourier representation ({field.rep})")
            data = g.spacing * phase * np.fft.fft(data, axis=i)
            done.add(ax)
        else:
            if ax not in done:
                raise RepresentationError(f"axis {ax} is not in Fourier representation ({field.rep})")
            data = np.fft.ifft(data / phase, axis=i) / g.spacing
            done.discard(ax)
    return replace(field, data=data, rep=_AXES_REP[frozenset(done)])


def density(f):
    """``rho(x) = int f dv`` by the rectangle rule (exact for the trigonometric interpolant)."""
    if f.rep != "physical":
        raise RepresentationError("density requires a physical-representation field")
    rho = f.grid.gv.spacing * f.data.sum(axis=1)
    return DensityField(f.grid.gx, rho.real if f.real else rho)


def spectral_derivative(data, grid, axis=0, order=1):
    """Derivative of periodic samples along ``axis``; Nyquist dropped for odd orders."""
    k = grid.odd_frequencies if order % 2 else grid.frequencies
    shape = [1] * np.ndim(data)
    shape[axis] = grid.n
    mult = ((1j * k) ** order).reshape(shape)
    out = np.fft.ifft(mult * np.fft.fft(data, axis=axis), axis=axis)
    return out.real if np.isrealobj(data) else out


def fourier_shift(u, grid, shifts):
    """Evaluate the trigonometric interpolant of ``u`` at ``x_i + s_j``.

    Returns an array of shape ``(grid.n, len(shifts))``. The Nyquist mode is
    split evenly between ``+/- k_N``, which keeps real input real.
    """
    shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
    U = np.fft.fft(u)
    k = grid.frequencies
    mult = np.exp(1j * np.outer(k, shifts))
    mult[grid.nyquist] = np.cos(k[grid.nyquist] * shifts)
    out = np.fft.ifft(U[:, None] * mult, axis=0)
    return out.real if np.isrealobj(u) else out


def evaluate_interpolant(coeffs, grid, points):
    """Evaluate ``(1/n) sum_k coeffs_k exp(i k (x - origin))`` at arbitrary points.

    ``coeffs`` are raw DFT coefficients (``np.fft.fft`` of the samples); the
    Nyquist term uses the same even split as :func:`fourier_shift`.
    Returns ``(value, derivative)``.
    """
    pts = np.asarray(points, dtype=float)
    k = grid.frequencies
    arg = np.multiply.outer(pts - grid.origin, k)
    basis = np.exp(1j * arg)
    basis[..., grid.nyquist] = np.cos(arg[..., grid.nyquist])
    dbasis = 1j * k * basis
    dbasis[..., grid.nyquist] = -k[grid.nyquist] * np.sin(arg[..., grid.nyquist])
    val = basis @ coeffs / grid.n
    der = dbasis @ coeffs / grid.n
    return val, der
