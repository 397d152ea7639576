"""Semiclassical Wigner transforms of pure and finite-rank mixed states.

For a wave function ``u`` on the x-grid,

    W(x, v) = (2 pi)^-1 int exp(-i v y) u(x + eps y/2) conj(u(x - eps y/2)) dy,

with ``y`` sampled on the grid dual to the velocity grid (``dy = 2 pi / L_v``),
so the y-integral is a single DFT per x-row and the v-marginal reproduces
``|u|^2`` exactly. The staggered values ``u(x +/- eps y/2)`` come from the
trigonometric interpolant of ``u``.
"""

from dataclasses import dataclass, field

import numpy as np

from .boperator import check_eps
from .errors import GridMismatchError, ParameterError
from .spectral import Grid1, PhaseField, fourier_shift


@dataclass(frozen=True, eq=False)
class PureState:
    grid: Grid1
    psi: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.complex128)
        if psi.shape != (self.grid.n,):
            raise GridMismatchError(f"wave function of shape {psi.shape} on grid of size {self.grid.n}")
        if not np.all(np.isfinite(psi)):
            raise ParameterError("wave function has non-finite samples")
        if not self.weight >= 0:
            raise ParameterError(f"state weight must be nonnegative, got {self.weight}")
        object.__setattr__(self, "psi", psi)

    def norm2(self):
        return float(self.grid.spacing * np.sum(np.abs(self.psi) ** 2))


@dataclass(frozen=True, eq=False)
class MixedState:
    components: list = field(default_factory=list)

    def total_mass(self):
        return sum(c.weight * c.norm2() for c in self.components)


def wigner_of_pure(u, eps, target):
    eps = check_eps(eps)
    gx, gv = target.gx, target.gv
    if u.grid != gx:
        raise GridMismatchError("wave function grid differs from the target x-grid")
    nv = gv.n
    dy = 2.0 * np.pi / gv.length
    y = dy * np.fft.fftfreq(nv, d=1.0 / nv)
    plus = fourier_shift(u.psi, gx, 0.5 * eps * y)
    minus = fourier_shift(u.psi, gx, -0.5 * eps * y)
    kernel = plus * np.conj(minus)
    # lone -Y sample: average with its (absent) +Y mirror, i.e. take the real part
    kernel[:, nv // 2] = kernel[:, nv // 2].real
    kernel *= np.exp(-1j * gv.origin * y)[None, :]
    W = (dy / (2.0 * np.pi)) * np.fft.fft(kernel, axis=1)
    return PhaseField(target, u.weight * W, "physical", True)


def wigner_of_mixed(state, eps, target):
    eps = check_eps(eps)
    W = np.zeros(target.shape, dtype=np.complex128)
    for comp in state.components:
        if comp.weight:
            W += wigner_of_pure(comp, eps, target).data
    return PhaseField(target, W, "physical", True)
