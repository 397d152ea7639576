"""Semiclassical vector fields and the weighted Sobolev norms built on them.

``V+- = eps d_x +- 2 i v`` and ``X+- = eps d_v +- 2 i x``. Derivatives are
spectral; ``x`` and ``v`` are the grid coordinates, so the ``X`` fields are
only meaningful for data localized inside the x-box.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ResolutionWarning
from .spectral import DensityField, PhaseField, spectral_derivative

FAMILIES = ("Hmr_standard", "Hmr_eps", "H0r0_eps", "density_Hmr_eps")
FIELDS = ("V+", "V-", "X+", "X-")
RESOLUTION_TOL = 1e-6


@dataclass(frozen=True)
class NormSpec:
    m: int
    r: int
    family: str = "Hmr_eps"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"family must be one of {FAMILIES}, got {self.family!r}")
        for name in ("m", "r"):
            val = getattr(self, name)
            if not (isinstance(val, (int, np.integer)) and val >= 0):
                raise ParameterError(f"{name} must be a nonnegative integer, got {val!r}")


def _apply(data, grid, which, eps):
    X, V = grid.mesh()
    if which in ("V+", "V-"):
        s = 1.0 if which == "V+" else -1.0
        return eps * spectral_derivative(data, grid.gx, axis=0) + s * 2j * V * data
    s = 1.0 if which == "X+" else -1.0
    return eps * spectral_derivative(data, grid.gv, axis=1) + s * 2j * X * data


def vector_field_apply(f, which, eps):
    """Apply one of ``V+``, ``V-``, ``X+``, ``X-`` to a physical field."""
    if which not in FIELDS:
        raise ParameterError(f"vector field must be one of {FIELDS}, got {which!r}")
    f = f.physical()
    return PhaseField(f.grid, _apply(f.data, f.grid, which, eps), "physical", False)


def _chain(data, grid, word, eps):
    """Apply ``word`` (a sequence of field names) right to left."""
    for which in reversed(word):
        data = _apply(data, grid, which, eps)
    return data


def _l2(data, cell):
    return float(np.sqrt(cell * np.sum(np.abs(data) ** 2)))


def _high_mode_fraction(data, grids, order):
    """Share of ``|k|^order``-weighted energy in the top quarter of each axis' modes."""
    spec = np.fft.fftn(data, axes=tuple(range(len(grids))))
    weight = np.ones(spec.shape)
    high = np.zeros(spec.shape, dtype=bool)
    for ax, g in enumerate(grids):
        k = np.abs(g.frequencies)
        shape = [1] * spec.ndim
        shape[ax] = -1
        weight = weight * (1.0 + k.reshape(shape) ** 2) ** (0.5 * order)
        high |= (k > 0.75 * np.abs(g.frequencies).max()).reshape(shape)
    e = np.abs(spec * weight) ** 2
    tot = e.sum()
    return float(e[high].sum() / tot) if tot > 0 else 0.0


def _check_resolution(data, grids, order):
    frac = _high_mode_fraction(data, grids, order)
    if frac > RESOLUTION_TOL:
        warnings.warn(
            f"derivative order {order} is not resolved: high-mode energy fraction {frac:.2e}",
            ResolutionWarning,
            stacklevel=3,
        )
    return frac


def _multi_indices(total, dim=2):
    return [a for a in itertools.product(range(total + 1), repeat=dim) if sum(a) <= total]


def _d(data, grid, alpha):
    ax, av = alpha
    if ax:
        data = spectral_derivative(data, grid.gx, axis=0, order=ax)
    if av:
        data = spectral_derivative(data, grid.gv, axis=1, order=av)
    return data


def _H0r(data, grid, r, eps):
    total = 0.0
    idx = _multi_indices(r)
    for bx, bv in idx:
        for gx, gv in idx:
            word = ["X-"] * bx + ["V+"] * bv + ["X+"] * gx + ["V-"] * gv
            total += _l2(_chain(data, grid, word, eps), grid.cell)
    return total


def norm(obj, spec, eps):
    """Weighted norm of a PhaseField or DensityField.

    Families
    --------
    ``Hmr_standard``
        ``|| <v>^r (1 - Laplacian_{x,v})^{m/2} f ||`` (independent of ``eps``).
    ``Hmr_eps``
        ``sum_{|alpha| <= m} sum_{|beta|, |gamma| <= r} ||Z+^beta Z-^gamma d^alpha f||``
        with ``Z+^beta = X-^{beta_x} V+^{beta_v}`` and ``Z-^gamma = X+^{gamma_x} V-^{gamma_v}``,
        composed left to right as written.
    ``H0r0_eps``
        ``sum_{beta, gamma <= r} ||V+^beta V-^gamma f||`` (``m`` must be 0).
    ``density_Hmr_eps``
        ``sum_{alpha <= m} sum_{beta <= r} ||(eps d_x)^beta d^alpha rho||``.
    """
    fam = spec.family
    if fam == "density_Hmr_eps":
        if not isinstance(obj, DensityField):
            raise ParameterError("density_Hmr_eps applies to a DensityField")
        g = obj.grid
        rho = np.asarray(obj.data)
        _check_resolution(rho, [g], spec.m + spec.r)
        total = 0.0
        for a in range(spec.m + 1):
            da = spectral_derivative(rho, g, order=a) if a else rho
            for b in range(spec.r + 1):
                db = eps**b * spectral_derivative(da, g, order=b) if b else da
                total += _l2(db, g.spacing)
        return total

    if not isinstance(obj, PhaseField):
        raise ParameterError(f"{fam} applies to a PhaseField")
    f = obj.physical()
    grid = f.grid
    data = f.data
    _check_resolution(data, [grid.gx, grid.gv], spec.m + 2 * spec.r)

    if fam == "Hmr_standard":
        kx, kv = grid.gx.frequencies, grid.gv.frequencies
        symbol = (1.0 + kx[:, None] ** 2 + kv[None, :] ** 2) ** (0.5 * spec.m)
        g = np.fft.ifft2(symbol * np.fft.fft2(data))
        wv = (1.0 + grid.gv.points**2) ** (0.5 * spec.r)
        return _l2(wv[None, :] * g, grid.cell)
    if fam == "H0r0_eps":
        if spec.m:
            raise ParameterError("H0r0_eps has no derivative index; use m=0")
        total = 0.0
        for b in range(spec.r + 1):
            for c in range(spec.r + 1):
                total += _l2(_chain(data, grid, ["V+"] * b + ["V-"] * c, eps), grid.cell)
        return total
    total = 0.0
    for alpha in _multi_indices(spec.m):
        total += _H0r(_d(data, grid, alpha), grid, spec.r, eps)
    return total
