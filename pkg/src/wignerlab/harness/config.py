"""TOML experiment configs.

A config is one file with a top-level ``kind`` and tables ``[grid]``,
``[profile]``, ``[potential]``, ``[time]``, ``[run]`` and, depending on the
kind, ``[penrose]``, ``[eikonal]`` or ``[[norms]]``. Every physical
parameter must be explicit; the only defaults are the numerical tolerances
listed in :data:`TOL_PROFILES`.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError

KINDS = ("evolve-wigner", "evolve-vlasov", "converge", "penrose", "eikonal")

TOL_PROFILES = {
    "fast": {"penrose_rtol": 1e-6, "refine_levels": 2, "tail_tol": 1e-8, "newton_tol": 1e-10},
    "strict": {"penrose_rtol": 1e-10, "refine_levels": 4, "tail_tol": 1e-10, "newton_tol": 1e-12},
}


@dataclass
class ExperimentSpec:
    kind: str
    grid: dict
    profile: dict
    potential: dict
    time: dict = field(default_factory=dict)
    eps: list = field(default_factory=list)
    seed: int = 0
    output: str | None = None
    tail_tol: float = 1e-8
    penrose: dict = field(default_factory=dict)
    eikonal: dict = field(default_factory=dict)
    norms: list = field(default_factory=list)
    tol_profile: str = "fast"

    def resolved(self):
        """Plain-data view of the experiment config for provenance records."""
        return {
            "kind": self.kind,
            "grid": copy.deepcopy(self.grid),
            "profile": copy.deepcopy(self.profile),
            "potential": copy.deepcopy(self.potential),
            "time": copy.deepcopy(self.time),
            "eps": list(self.eps),
            "seed": self.seed,
            "tail_tol": self.tail_tol,
            "penrose": copy.deepcopy(self.penrose),
            "eikonal": copy.deepcopy(self.eikonal),
            "norms": copy.deepcopy(self.norms),
            "tol_profile": self.tol_profile,
            "tolerances": dict(TOL_PROFILES[self.tol_profile]),
        }


def _require(table, key, where):
    if key not in table:
        raise ConfigError(f"missing required key {key!r} in [{where}]")
    return table[key]


def _check_grid(g):
    for key in ("nx", "lx", "nv", "lv"):
        _require(g, key, "grid")
    for key in ("nx", "nv"):
        n = g[key]
        if not (isinstance(n, int) and n >= 4 and n & (n - 1) == 0):
            raise ConfigError(f"[grid] {key} must be a power of two >= 4, got {n!r}")
    for key in ("lx", "lv"):
        if not (isinstance(g[key], (int, float)) and g[key] > 0):
            raise ConfigError(f"[grid] {key} must be positive")


def _check_eps(eps):
    if not isinstance(eps, list) or not eps:
        raise ConfigError("[run] eps must be a nonempty list")
    for e in eps:
        if not (isinstance(e, (int, float)) and 0 < e <= 1):
            raise ConfigError(f"[run] every eps must lie in (0, 1], got {e!r}")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("[run] eps list must be strictly decreasing")


def from_dict(raw, tol_profile="fast"):
    if tol_profile not in TOL_PROFILES:
        raise ConfigError(f"tol profile must be one of {sorted(TOL_PROFILES)}")
    kind = _require(raw, "kind", "top level")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    run = raw.get("run", {})
    profile = _require(raw, "profile", "top level")
    if "type" not in profile:
        raise ConfigError("[profile] needs a 'type'")
    spec = ExperimentSpec(
        kind=kind,
        grid=raw.get("grid", {}),
        profile=profile,
        potential=raw.get("potential", {"name": "defocusing"}),
        time=raw.get("time", {}),
        eps=list(run.get("eps", [])),
        seed=int(raw.get("seed", 0)),
        output=raw.get("output"),
        tail_tol=float(run.get("tail_tol", TOL_PROFILES[tol_profile]["tail_tol"])),
        penrose=raw.get("penrose", {}),
        eikonal=raw.get("eikonal", {}),
        norms=list(raw.get("norms", [])),
        tol_profile=tol_profile,
    )
    if "name" not in spec.potential:
        raise ConfigError("[potential] needs a 'name'")
    if kind in ("evolve-wigner", "evolve-vlasov", "converge"):
        _check_grid(spec.grid)
        for key in ("dt", "t_end"):
            val = _require(spec.time, key, "time")
            if not (isinstance(val, (int, float)) and math.isfinite(val)):
                raise ConfigError(f"[time] {key} must be a number")
        if spec.time["dt"] <= 0 or spec.time["t_end"] < 0:
            raise ConfigError("[time] needs dt > 0 and t_end >= 0")
    if kind in ("evolve-wigner", "converge"):
        _check_eps(spec.eps)
    if kind == "eikonal":
        for key in ("s", "t", "z", "xi"):
            _require(spec.eikonal, key, "eikonal")
        if spec.eikonal.get("source", "modes") == "evolve":
            _check_grid(spec.grid)
    for n in spec.norms:
        for key in ("m", "r", "family"):
            _require(n, key, "norms")
    return spec


def load(path, tol_profile="fast"):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return from_dict(raw, tol_profile)
