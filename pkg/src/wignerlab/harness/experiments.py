"""Experiment drivers: evolutions, epsilon sweeps, Penrose scans and eikonal lattices.

Every emitted number is a deterministic function of the config: no wall-clock
values, sorted JSON keys, ``repr`` floats in CSV, and sweep members collected
in config order regardless of completion order.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import checkpoint, eikonal, penrose
from ..errors import ConfigError, GridMismatchError
from ..evolution import SimConfig, evolve
from ..norms import NormSpec, norm
from ..potentials import from_name
from ..profiles import PhaseProfile, VelocityProfile, as_phase_profile, from_config
from ..spectral import Grid1, PhaseGrid
from .config import TOL_PROFILES, ExperimentSpec, from_dict


def build_grid(spec):
    g = spec.grid
    return PhaseGrid.make(g["nx"], float(g["lx"]), g["nv"], float(g["lv"]), float(g.get("x_origin", 0.0)))


def build_potential(spec):
    params = {k: v for k, v in spec.potential.items() if k != "name"}
    return from_name(spec.potential["name"], **params)


def build_profile(spec):
    return from_config(spec.profile)


def norm_specs(spec):
    out = []
    for n in spec.norms:
        label = n.get("label", f"{n['family']}_m{n['m']}_r{n['r']}")
        out.append((label, NormSpec(int(n["m"]), int(n["r"]), n["family"])))
    return tuple(out)


def simulate(spec, eps):
    """One trajectory; ``eps=None`` runs the Vlasov-Benney equation."""
    grid = build_grid(spec)
    prof = as_phase_profile(build_profile(spec))
    f0 = prof.evaluate(grid, spec.tail_tol)
    t = spec.time
    cfg = SimConfig(
        eps=eps,
        dt=float(t["dt"]),
        t_end=float(t["t_end"]),
        V=build_potential(spec),
        diag_every=int(t.get("diag_every", 1)),
        snapshot_every=int(t.get("snapshot_every", 1)),
        tail_tol=spec.tail_tol,
        norm_specs=norm_specs(spec),
    )
    return evolve(f0, cfg)


def _member(payload):
    raw, tol_profile, eps = payload
    return simulate(from_dict(raw, tol_profile), eps)


def _raw(spec):
    raw = spec.resolved()
    raw.pop("tolerances")
    raw.pop("tol_profile")
    raw["run"] = {"eps": raw.pop("eps"), "tail_tol": raw.pop("tail_tol")}
    return raw


def _sweep(spec, eps_list, workers):
    payloads = [(_raw(spec), spec.tol_profile, e) for e in eps_list]
    if workers <= 1 or len(payloads) == 1:
        return [_member(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_member, payloads))


# --------------------------------------------------------------------------- output


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_timeseries(path, traj):
    """Long-format CSV: one ``(time, quantity, value)`` record per diagnostic."""
    d = traj.diagnostics
    keys = [k for k in d if k != "t"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "quantity", "value"])
        for i, t in enumerate(d["t"]):
            for k in keys:
                w.writerow([repr(float(t)), k, repr(float(d[k][i]))])
        dx = traj.final.grid.gx.spacing
        for t, rho in zip(traj.density_times, traj.densities):
            w.writerow([repr(float(t)), "density_l2", repr(float(np.sqrt(dx * np.sum(rho**2))))])


def _trajectory_summary(traj):
    d = traj.diagnostics
    mass, l2 = d["mass"], d["l2"]
    return {
        "meta": traj.meta,
        "final": {k: float(v[-1]) for k, v in d.items()},
        "mass_drift": float(np.abs(mass - mass[0]).max() / abs(mass[0])) if mass[0] else 0.0,
        "l2_drift": float(np.abs(l2 - l2[0]).max() / abs(l2[0])) if l2[0] else 0.0,
        "max_imag": float(d["max_imag"].max()),
        "snapshot_times": list(traj.times),
    }


def _save_member(out, traj, eps):
    os.makedirs(out, exist_ok=True)
    write_timeseries(os.path.join(out, "timeseries.csv"), traj)
    checkpoint.write(os.path.join(out, "final.wvl"), traj.final, eps, traj.times[-1])
    return _trajectory_summary(traj)


def _eps_dir(eps):
    return "vlasov" if eps is None else f"eps_{eps:.6g}"


# --------------------------------------------------------------------------- comparison


@dataclass
class ConvergenceRecord:
    """Distances of Wigner runs to the Vlasov-Benney run, per epsilon."""

    eps: list
    field_sup_l2: list
    density_l2t: list
    weighted: dict = field(default_factory=dict)
    field_rates: list = field(default_factory=list)
    density_rates: list = field(default_factory=list)

    def __post_init__(self):
        self.field_rates = _rates(self.eps, self.field_sup_l2)
        self.density_rates = _rates(self.eps, self.density_l2t)


def _rates(eps, d):
    out = []
    for (e0, d0), (e1, d1) in zip(zip(eps, d), zip(eps[1:], d[1:])):
        out.append(float(np.log(d0 / d1) / np.log(e0 / e1)) if d0 > 0 and d1 > 0 else float("nan"))
    return out


def compare(run_a, run_b, norm_spec=None, eps=1.0):
    """Distances between two trajectories on the same grid and snapshot times.

    Returns ``sup_t ||f_a - f_b||`` over shared snapshots (L2 or ``norm_spec``)
    and ``(int ||rho_a - rho_b||^2 dt)^(1/2)`` by the trapezoid rule.
    """
    fa, fb = run_a.snapshots, run_b.snapshots
    if fa[0].grid != fb[0].grid:
        raise GridMismatchError("runs are on different grids")
    if len(run_a.times) != len(run_b.times) or not np.allclose(run_a.times, run_b.times, rtol=0, atol=1e-12):
        raise GridMismatchError("runs have different snapshot times")
    if run_a.densities.shape != run_b.densities.shape:
        raise GridMismatchError("runs have different density histories")
    sup = 0.0
    for a, b in zip(fa, fb):
        diff = a.with_data(a.data - b.data)
        val = diff.l2_norm() if norm_spec is None else norm(diff, norm_spec, eps)
        sup = max(sup, float(val))
    dx = fa[0].grid.gx.spacing
    sq = dx * np.sum((run_a.densities - run_b.densities) ** 2, axis=1)
    t = run_a.density_times
    dens = float(np.sqrt(np.sum(0.5 * (sq[1:] + sq[:-1]) * np.diff(t)))) if t.size > 1 else 0.0
    return {"field_sup": sup, "density_l2t": dens}


# --------------------------------------------------------------------------- drivers


def run_evolve(spec, out, workers=1):
    classical = spec.kind == "evolve-vlasov"
    eps_list = [None] if classical else list(spec.eps)
    trajs = _sweep(spec, eps_list, workers)
    members = {}
    for e, tr in zip(eps_list, trajs):
        members[_eps_dir(e)] = _save_member(os.path.join(out, _eps_dir(e)), tr, e)
    summary = {"config": spec.resolved(), "members": members}
    write_json(os.path.join(out, "summary.json"), summary)
    return summary


def run_converge(spec, out, workers=1):
    eps_list = list(spec.eps)
    trajs = _sweep(spec, [None] + eps_list, workers)
    ref, wig = trajs[0], trajs[1:]
    members = {"vlasov": _save_member(os.path.join(out, "vlasov"), ref, None)}
    field_d, dens_d, weighted = [], [], {}
    for e, tr in zip(eps_list, wig):
        members[_eps_dir(e)] = _save_member(os.path.join(out, _eps_dir(e)), tr, e)
        c = compare(tr, ref)
        field_d.append(c["field_sup"])
        dens_d.append(c["density_l2t"])
        for label, ns in norm_specs(spec):
            if ns.family == "density_Hmr_eps":
                continue
            weighted.setdefault(label, []).append(compare(tr, ref, ns, e)["field_sup"])
    rec = ConvergenceRecord(eps_list, field_d, dens_d, weighted)
    with open(os.path.join(out, "convergence.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "quantity", "value"])
        for i, e in enumerate(eps_list):
            w.writerow([repr(float(e)), "field_sup_l2", repr(rec.field_sup_l2[i])])
            w.writerow([repr(float(e)), "density_l2t", repr(rec.density_l2t[i])])
            for label, vals in weighted.items():
                w.writerow([repr(float(e)), f"field_sup_{label}", repr(float(vals[i]))])
    summary = {"config": spec.resolved(), "convergence": asdict(rec), "members": members}
    write_json(os.path.join(out, "summary.json"), summary)
    return summary


def _penrose_target(spec):
    prof = build_profile(spec)
    if isinstance(prof, PhaseProfile) and not prof.separable and "x" not in spec.penrose:
        raise ConfigError("[penrose] needs an 'x' sample list for space-dependent profiles")
    return prof


def run_penrose(spec, out, workers=1):
    os.makedirs(out, exist_ok=True)
    tol = TOL_PROFILES[spec.tol_profile]
    p = dict(spec.penrose)
    kind = p.pop("kind", "quant")
    box_keys = {k: p[k] for k in ("g_min", "g_max", "c_max", "eta_min", "eta_max", "n_g", "n_c", "n_eta") if k in p}
    box = penrose.PenroseBox(**box_keys)
    V = build_potential(spec)
    prof = _penrose_target(spec)
    rep = penrose.margin_search(
        prof,
        kind,
        V,
        box,
        refine_levels=int(p.get("refine_levels", tol["refine_levels"])),
        x=p.get("x"),
        rtol=tol["penrose_rtol"],
    )
    rep.to_json(os.path.join(out, "report.json"))
    rep.write_csv(os.path.join(out, "surface.csv"))
    base = prof if isinstance(prof, VelocityProfile) else (prof.base or prof.slice_at(0.0))
    small = penrose.small_data_check(base, V)
    summary = {"config": spec.resolved(), "report": rep.to_dict(), "small_data": asdict(small)}
    write_json(os.path.join(out, "summary.json"), summary)
    return summary


def _eikonal_hamiltonian(spec, workers):
    e = spec.eikonal
    source = e.get("source", "modes")
    if source == "modes":
        gx = Grid1(int(e.get("nx", 64)), float(e.get("lx", 2 * np.pi)), float(e.get("x_origin", 0.0)))
        modes = e.get("modes", [])

        def vrho(t, x):
            out = np.zeros_like(x)
            for m in modes:
                out += m["amp"] * (1.0 + m.get("rate", 0.0) * t) * np.cos(m["k"] * x + m.get("phase", 0.0))
            return out

        return eikonal.Hamiltonian.analytic(gx, vrho)
    if source == "evolve":
        eps = spec.eps[0] if spec.eps else None
        tr = _sweep(spec, [eps], 1)[0]
        gx = build_grid(spec).gx
        return eikonal.Hamiltonian.from_history(gx, tr.density_times, tr.densities, build_potential(spec), eps)
    raise ConfigError(f"[eikonal] source must be 'modes' or 'evolve', got {source!r}")


def run_eikonal(spec, out, workers=1):
    os.makedirs(out, exist_ok=True)
    e = spec.eikonal
    ham = _eikonal_hamiltonian(spec, workers)
    z = np.asarray(e["z"], dtype=float).T
    xi = np.asarray(e["xi"], dtype=float).T
    s, t = float(e["s"]), float(e["t"])
    dt_ode = float(e.get("dt_ode", 1e-2))
    rep = eikonal.lattice_check(ham, z, xi, s, t, dt_ode)
    rep.write_csv(os.path.join(out, "lattice.csv"))
    window, devs = eikonal.valid_window(ham, z, xi, s, float(e.get("t_max", t)), dt_ode=dt_ode)
    keys = ["newton_residual", "hj_residual", "gradient_identity", "phase_deviation", "hessian_deviation"]
    summary = {
        "config": spec.resolved(),
        "worst": {k: rep.worst(k) for k in keys},
        "dz_within_envelope": all(r["dz_deviation"] <= r["dz_envelope"] + 1e-9 for r in rep.rows),
        "valid_window": window,
        "jacobian_deviation": devs,
    }
    write_json(os.path.join(out, "summary.json"), summary)
    return summary


DRIVERS = {
    "evolve-wigner": run_evolve,
    "evolve-vlasov": run_evolve,
    "converge": run_converge,
    "penrose": run_penrose,
    "eikonal": run_eikonal,
}


def run(spec: ExperimentSpec, out, workers=1):
    """Execute an experiment config and write its artifacts under ``out``."""
    os.makedirs(out, exist_ok=True)
    return DRIVERS[spec.kind](spec, out, workers)
