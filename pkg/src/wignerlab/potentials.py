"""Pair potentials, given by their (real, even, bounded) Fourier transforms."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class PairPotential:
    """Pair interaction ``V`` through ``vhat(xi)``.

    ``cV = vhat(0) = <V, 1>`` is the coupling of the limiting singular Vlasov
    equation. ``sup_abs`` bounds ``|vhat|`` and is used by the Penrose
    envelopes.
    """

    vhat: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    sup_abs: float = field(default=np.nan)

    def __post_init__(self):
        probe = np.linspace(-50.0, 50.0, 401)
        vals = np.asarray(self.vhat(probe), dtype=float) * np.ones_like(probe)
        if not np.all(np.isfinite(vals)):
            raise ParameterError(f"potential {self.name!r}: vhat is not finite on the probe range")
        if not np.allclose(vals, vals[::-1], rtol=0, atol=1e-13 * max(1.0, np.abs(vals).max())):
            raise ParameterError(f"potential {self.name!r}: vhat must be even")
        if np.isnan(self.sup_abs):
            object.__setattr__(self, "sup_abs", float(np.abs(vals).max()))

    @property
    def cV(self):
        return float(self(np.zeros(1))[0])

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.asarray(self.vhat(xi), dtype=float) * np.ones_like(xi)


def defocusing_cubic():
    return PairPotential(lambda xi: np.ones_like(xi), "defocusing", 1.0)


def focusing_cubic():
    return PairPotential(lambda xi: -np.ones_like(xi), "focusing", 1.0)


def screened_coulomb(screening=1.0):
    """``vhat = 1 / (1 + (xi/screening)^2)``."""
    if screening <= 0:
        raise ParameterError("screening length must be positive")
    return PairPotential(lambda xi: 1.0 / (1.0 + (xi / screening) ** 2), "screened_coulomb", 1.0)


def lorentzian(width=1.0):
    """``vhat = exp(-width |xi|)``: Lipschitz but not differentiable at 0."""
    if width <= 0:
        raise ParameterError("width must be positive")
    return PairPotential(lambda xi: np.exp(-width * np.abs(xi)), "lorentzian", 1.0)


def zero_potential():
    return PairPotential(lambda xi: np.zeros_like(xi), "zero", 0.0)


def from_name(name, **params):
    table = {
        "defocusing": defocusing_cubic,
        "focusing": focusing_cubic,
        "screened_coulomb": screened_coulomb,
        "lorentzian": lorentzian,
        "zero": zero_potential,
    }
    try:
        return table[name](**params)
    except KeyError:
        raise ParameterError(f"unknown potential {name!r}; choose from {sorted(table)}") from None
