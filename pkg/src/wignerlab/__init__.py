"""Spectral phase-space laboratory for the semiclassical Wigner equation and its Vlasov-Benney limit."""

from .boperator import apply_B, apply_B_split, classical_force, symbol_b_f
from .errors import (
    ConfigError,
    GridMismatchError,
    HistoryRangeError,
    ParameterError,
    RepresentationError,
    ResolutionWarning,
    SimulationError,
    TailMassWarning,
    TruncationError,
    WignerLabError,
    WindowTooLargeError,
)
from .evolution import SimConfig, Trajectory, evolve, strang_step
from .norms import NormSpec, norm
from .penrose import PenroseBox, PenroseReport, margin_search, penrose_quant, penrose_vb, penrose_vp
from .potentials import PairPotential
from .spectral import DensityField, Grid1, PhaseField, PhaseGrid, density, transform
from .wigner import MixedState, PureState, wigner_of_mixed, wigner_of_pure

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DensityField",
    "Grid1",
    "GridMismatchError",
    "HistoryRangeError",
    "MixedState",
    "NormSpec",
    "PairPotential",
    "ParameterError",
    "PenroseBox",
    "PenroseReport",
    "PhaseField",
    "PhaseGrid",
    "PureState",
    "RepresentationError",
    "ResolutionWarning",
    "SimConfig",
    "SimulationError",
    "TailMassWarning",
    "Trajectory",
    "TruncationError",
    "WignerLabError",
    "WindowTooLargeError",
    "apply_B",
    "apply_B_split",
    "classical_force",
    "density",
    "evolve",
    "margin_search",
    "norm",
    "penrose_quant",
    "penrose_vb",
    "penrose_vp",
    "strang_step",
    "symbol_b_f",
    "transform",
    "wigner_of_mixed",
    "wigner_of_pure",
]
