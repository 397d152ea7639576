"""The semiclassical bilinear operator ``B_eps[rho, f]`` and its classical limit.

In the mixed ``(x, xi_v)`` representation ``B`` is a pointwise multiplier,

    F_v B(x, xi_v) = (i/eps) a(x, xi_v) F_v f(x, xi_v),
    a(x, xi_v)     = Vrho(x - eps xi_v/2) - Vrho(x + eps xi_v/2),

with ``F_x Vrho(k) = vhat(eps k) rho_hat(k)``. The shifted evaluations of
``Vrho`` are one batched inverse FFT over ``k`` per call.
"""

import numpy as np

from .errors import GridMismatchError, ParameterError, RepresentationError
from .spectral import DensityField, PhaseField, fourier_shift, spectral_derivative


def check_eps(eps):
    if not (np.isfinite(eps) and 0.0 < eps <= 1.0):
        raise ParameterError(f"eps must lie in (0, 1], got {eps}")
    return float(eps)


def _check_pair(rho, f):
    if rho.grid != f.grid.gx:
        raise GridMismatchError("density grid does not match the x-grid of the phase field")


def _raw_vspectrum(f):
    if f.rep == "physical":
        return f.vspectrum
    if f.rep == "fourier-v":
        return f.physical().vspectrum
    raise RepresentationError(f"B acts on physical or fourier-v fields, got {f.rep}")


def potential_coefficients(rho, eps, V):
    """Raw DFT coefficients of ``V_eps * rho``; ``eps=None`` gives ``cV * rho``."""
    k = rho.grid.frequencies
    scale = V(np.zeros_like(k)) if eps is None else V(eps * k)
    return np.fft.fft(rho.data) * scale


def convolved_density(rho, eps, V):
    vr = np.fft.ifft(potential_coefficients(rho, eps, V))
    return DensityField(rho.grid, vr.real if np.isrealobj(rho.data) else vr)


def kick_symbol(rho, eps, V, gv):
    """``a(x_i, xi_j) = Vrho(x_i - eps xi_j/2) - Vrho(x_i + eps xi_j/2)`` on the grid.

    ``xi_j`` are the odd v-frequencies of ``gv`` so the Nyquist row is zero and
    the symbol is exactly odd in ``xi_v``.
    """
    C = potential_coefficients(rho, eps, V)
    k = rho.grid.odd_frequencies
    half_shift = 0.5 * eps * gv.odd_frequencies
    a = np.fft.ifft(C[:, None] * (-2j * np.sin(np.outer(k, half_shift))), axis=0)
    return a.real if np.isrealobj(rho.data) else a


def apply_B(rho, f, eps, V):
    """``B_eps[rho, f]`` as a physical PhaseField."""
    eps = check_eps(eps)
    _check_pair(rho, f)
    fv = _raw_vspectrum(f)
    a = kick_symbol(rho, eps, V, f.grid.gv)
    out = np.fft.ifft((1j / eps) * a * fv, axis=1)
    return PhaseField(f.grid, out, "physical", f.real and np.isrealobj(rho.data))


def apply_B_split(rho, f, eps, V, sign):
    """Single-exponential branch ``B_+`` or ``B_-``; ``B = B_+ - B_-``."""
    eps = check_eps(eps)
    _check_pair(rho, f)
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    fv = _raw_vspectrum(f)
    vrho = convolved_density(rho, eps, V).data
    s = (0.5 * eps if sign == "+" else -0.5 * eps) * f.grid.gv.odd_frequencies
    shifted = fourier_shift(vrho, rho.grid, s)
    out = np.fft.ifft(shifted * fv / (1j * eps), axis=1)
    return PhaseField(f.grid, out, "physical", False)


def classical_force(rho, f, V):
    """``-cV d_x rho d_v f``, the eps -> 0 limit of ``B_eps[rho, f]``."""
    _check_pair(rho, f)
    f = f.physical()
    drho = spectral_derivative(rho.data, rho.grid)
    dvf = spectral_derivative(f.data, f.grid.gv, axis=1)
    return PhaseField(f.grid, -V.cV * drho[:, None] * dvf, "physical", f.real and np.isrealobj(rho.data))


def symbol_b_f(f, xi_x):
    """``b_f(x, v, xi_x) = int_{-1/2}^{1/2} xi_x d_v f(x, v + lam xi_x) dlam``.

    The lambda-integral is done exactly on each v-mode, giving the multiplier
    ``2 i sin(xi_x xi_v / 2)``, i.e. ``f(v + xi_x/2) - f(v - xi_x/2)``.
    """
    f = f.physical()
    xi_v = f.grid.gv.odd_frequencies
    mult = 2j * np.sin(0.5 * float(xi_x) * xi_v)
    out = np.fft.ifft(f.vspectrum * mult[None, :], axis=1)
    return PhaseField(f.grid, out, "physical", f.real)


def apply_B_symbol_route(rho, f, eps, V):
    """``B`` rebuilt as ``(1/eps) Op(-i b_f(x, v, eps D_x)) Vrho``.

    The factor ``-i`` converts the lambda-integral normalization of
    :func:`symbol_b_f` to the sine-form one. Costs ``n_x`` symbol evaluations;
    meant as an independent check of :func:`apply_B` on small grids.
    """
    eps = check_eps(eps)
    _check_pair(rho, f)
    gx = rho.grid
    C = potential_coefficients(rho, eps, V)
    k = gx.odd_frequencies
    phase = np.exp(1j * np.outer(gx.points - gx.origin, k))
    out = np.zeros(f.grid.shape, dtype=complex)
    for m in range(gx.n):
        if k[m] == 0.0:
            continue
        b = symbol_b_f(f, eps * k[m]).data
        out += (C[m] / gx.n) * phase[:, m, None] * (-1j) * b
    return PhaseField(f.grid, out / eps, "physical", f.real and np.isrealobj(rho.data))
