"""Quantum and classical Penrose functions, margin scans and tail envelopes.

With ``zeta = s |eta|`` the three Penrose functions read

    P_quant = -2 vhat(eta)/|eta| int e^{-(g + i c) zeta} sin(zeta |eta|/2) F(+-zeta) dzeta,
    P_VB    = -int e^{-(g + i c) zeta} zeta F(+-zeta) dzeta,
    P_VP    = P_VB / (1 + eta^2),

where ``g = gamma/|eta|``, ``c = tau/|eta|``, ``F`` is the v-Fourier transform
of the profile and the sign is that of ``eta``. In these variables the
Laplace factor splits as ``e^{-g zeta} e^{-i c zeta}``, so a whole ``(g, c)``
surface is one matrix product over a shared Gauss-Legendre node set.
``P_VB`` is independent of ``|eta|``.

Margins are infima of ``|1 - P|`` over a sampled box in ``(g, c, eta)``;
the regions outside the box are covered by explicit upper bounds on
``|P|`` (the envelopes). A positive lower bound is reported as
"certified", which is a numerical statement, not an interval-arithmetic
proof.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ParameterError
from .potentials import PairPotential
from .profiles import PhaseProfile, VelocityProfile

KINDS = ("quant", "VB", "VP")
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_MAX_PANELS = 1 << 14
# quadrature slack below which an envelope equal to 1 counts as inconclusive
_ENVELOPE_SLACK = 1e-9


@dataclass(frozen=True)
class PenrosePoint:
    """A point ``(gamma, tau, eta)``; ``limit=True`` admits the boundary ``gamma = 0``."""

    gamma: float
    tau: float
    eta: float
    limit: bool = False

    def __post_init__(self):
        if not all(np.isfinite([self.gamma, self.tau, self.eta])):
            raise ParameterError("Penrose point has non-finite coordinates")
        if self.gamma < 0 or (self.gamma == 0 and not self.limit):
            raise ParameterError(f"gamma must be positive (use limit=True for gamma=0), got {self.gamma}")


def _point(p):
    return p if isinstance(p, PenrosePoint) else PenrosePoint(*p)


@dataclass(frozen=True)
class PenroseBox:
    """Sampled box in scaled variables ``g = gamma/|eta|``, ``c = tau/|eta|``.

    ``g`` is geometric on ``[g_min, g_max]``, ``c`` linear on
    ``[-c_max, c_max]``, ``eta`` geometric on ``[eta_min, eta_max]``
    (``VB`` ignores the ``eta`` range).
    """

    g_min: float = 1e-4
    g_max: float = 4.0
    c_max: float = 16.0
    eta_min: float = 0.25
    eta_max: float = 8.0
    n_g: int = 25
    n_c: int = 257
    n_eta: int = 24

    def __post_init__(self):
        if not 0 < self.g_min < self.g_max:
            raise ParameterError("need 0 < g_min < g_max")
        if not (self.c_max > 0 and 0 < self.eta_min < self.eta_max):
            raise ParameterError("need c_max > 0 and 0 < eta_min < eta_max")
        if min(self.n_g, self.n_c, self.n_eta) < 3:
            raise ParameterError("each box axis needs at least 3 samples")

    def axes(self):
        return (
            np.geomspace(self.g_min, self.g_max, self.n_g),
            np.linspace(-self.c_max, self.c_max, self.n_c),
            np.geomspace(self.eta_min, self.eta_max, self.n_eta),
        )


@lru_cache(maxsize=256)
def _cutoff(prof, tol):
    return prof.decay_cutoff(tol)


@lru_cache(maxsize=256)
def _velocity_reach(prof):
    c, w, h = prof.quad_grid
    v = np.linspace(c - w, c + w, 2001)
    fv = np.abs(prof(v))
    if fv.max() == 0.0:
        return 0.0
    return float(np.abs(v[fv > 1e-3 * fv.max()]).max())


def _gl_nodes(zmax, n_panels):
    edges = np.linspace(0.0, zmax, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    z = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return z, w


class _Integrator:
    """Shared node set plus cached profile values for one scan or point."""

    def __init__(self, prof, zmax, omega, panel_factor=1):
        self.prof = prof
        self.zmax = zmax
        self.n_panels = panel_factor * max(16, int(np.ceil(zmax * omega / np.pi)))
        self._build()

    def _build(self):
        self.zeta, self.w = _gl_nodes(self.zmax, self.n_panels)
        self.F = {+1: self.prof.transform(self.zeta)}
        self.F[-1] = np.conj(self.F[1]) if self.prof.even else self.prof.transform(-self.zeta)

    def refined(self):
        twin = object.__new__(_Integrator)
        twin.prof, twin.zmax, twin.n_panels = self.prof, self.zmax, 2 * self.n_panels
        twin._build()
        return twin

    def kernel(self, kind, eta, pref=None):
        """Weighted ``h(zeta)`` for one ``eta``; ``pref`` overrides ``-2 vhat(eta)``."""
        s = 1 if eta >= 0 else -1
        a = abs(eta)
        F = self.F[s]
        if kind == "quant":
            return (pref / a) * np.sin(0.5 * a * self.zeta) * F * self.w
        h = -self.zeta * F * self.w
        return h / (1.0 + eta * eta) if kind == "VP" else h

    def surface(self, hw, g, c):
        Eg = np.exp(-np.outer(self.zeta, g))
        Ec = np.exp(-1j * np.outer(self.zeta, c))
        return (Eg * hw[:, None]).T @ Ec


def _make_integrator(prof, g_min, g_max, c_max, eta_max, tol_tail, zmax_factor=1.0, panel_factor=1):
    zF = _cutoff(prof, tol_tail)
    zg = np.log(1.0 / tol_tail) / g_min if g_min > 0 else np.inf
    zmax = zmax_factor * max(min(zF, zg), 1e-12)
    omega = c_max + g_max + 0.5 * eta_max + _velocity_reach(prof) + 1.0
    return _Integrator(prof, zmax, omega, panel_factor)


def _converged(compute, integ, rtol):
    """Double the panel count until two successive results agree."""
    cur = compute(integ)
    while True:
        nxt_integ = integ.refined()
        nxt = compute(nxt_integ)
        err = float(np.max(np.abs(nxt - cur), initial=0.0))
        scale = max(1.0, float(np.max(np.abs(nxt), initial=0.0)))
        if err <= rtol * scale or nxt_integ.n_panels >= _MAX_PANELS:
            return nxt, nxt_integ, err
        cur, integ = nxt, nxt_integ


def _prefactor(kind, eta, V, psi_prime=None):
    if kind != "quant":
        return None
    if psi_prime is not None:
        return -2.0 * float(psi_prime)
    return -2.0 * float(V(np.array([eta]))[0])


def _evaluate_point(kind, p, prof, V=None, psi_prime=None, rtol=1e-8, tol_tail=1e-14):
    p = _point(p)
    if p.eta == 0.0:
        return 0j
    a = abs(p.eta)
    g, c = p.gamma / a, p.tau / a
    integ = _make_integrator(prof, g, g, abs(c), a, tol_tail)
    pref = _prefactor(kind, p.eta, V, psi_prime)
    compute = lambda it: it.surface(it.kernel(kind, p.eta, pref), np.array([g]), np.array([c]))  # noqa: E731
    val, _, _ = _converged(compute, integ, rtol)
    return complex(val[0, 0])


def penrose_quant(p, prof, V, rtol=1e-8, tol_tail=1e-14):
    """Quantum Penrose function at ``p = (gamma, tau, eta)``.

    Parameters
    ----------
    p : PenrosePoint or tuple
    prof : VelocityProfile
    V : PairPotential
    rtol : float
        Target for the panel-doubling error relative to ``max(1, |P|)``.
    tol_tail : float
        Truncation where ``|F| e^{-g zeta}`` falls below this fraction.

    Raises
    ------
    TruncationError
        If the profile transform does not decay.
    """
    return _evaluate_point("quant", p, prof, V, None, rtol, tol_tail)


def penrose_vb(p, prof, rtol=1e-8, tol_tail=1e-14):
    """Classical Penrose function of the Vlasov-Benney equation."""
    return _evaluate_point("VB", p, prof, None, None, rtol, tol_tail)


def penrose_vp(p, prof, rtol=1e-8, tol_tail=1e-14):
    """Screened Vlasov-Poisson variant ``P_VB / (1 + eta^2)``."""
    return _evaluate_point("VP", p, prof, None, None, rtol, tol_tail)


def penrose_quant_general(p, prof, psi_prime_at_rho, rtol=1e-8, tol_tail=1e-14):
    """Quantum Penrose function for a local nonlinearity ``Psi``; the prefactor is ``-2 Psi'(rho)``."""
    return _evaluate_point("quant", p, prof, None, psi_prime_at_rho, rtol, tol_tail)


def evaluate(kind, p, prof, V=None, **kw):
    if kind not in KINDS:
        raise ParameterError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "quant":
        if V is None:
            raise ParameterError("the quantum Penrose function needs a pair potential")
        return penrose_quant(p, prof, V, **kw)
    return (penrose_vb if kind == "VB" else penrose_vp)(p, prof, **kw)


# --------------------------------------------------------------------------- envelopes


@dataclass(frozen=True)
class _Moments:
    I0: float
    I1: float
    I3: float
    J1: float
    zeta: np.ndarray
    w: np.ndarray
    A: np.ndarray

    def E(self, eta):
        """``(1/eta) int min(1, zeta eta/2) A``; nonincreasing in ``eta``."""
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        lim = 0.5 * self.I1
        out = np.empty(eta.shape)
        for i, e in enumerate(eta):
            out[i] = lim if e == 0 else np.sum(self.w * np.minimum(1.0 / e, 0.5 * self.zeta) * self.A)
        return out

    def laplace_weight(self, g):
        """``int e^{-g zeta} zeta A``."""
        return float(np.sum(self.w * np.exp(-g * self.zeta) * self.zeta * self.A))


@lru_cache(maxsize=128)
def _moments(prof, tol_tail=1e-14):
    zmax = _cutoff(prof, tol_tail)
    if zmax == 0.0:
        z = np.zeros(1)
        return _Moments(0.0, 0.0, 0.0, 0.0, z, z, z)
    z, w = _gl_nodes(zmax, 512)
    h = 1e-5 * np.maximum(1.0, z)
    A = np.maximum(np.abs(prof.transform(z)), np.abs(prof.transform(-z)))
    dF = lambda s: np.abs((prof.transform(s * z + h) - prof.transform(s * z - h)) / (2 * h))  # noqa: E731
    dA = np.maximum(dF(1), dF(-1))
    return _Moments(
        float(np.sum(w * A)),
        float(np.sum(w * z * A)),
        float(np.sum(w * z**3 * A)),
        float(np.sum(w * z * dA)),
        z,
        w,
        A,
    )


def tail_envelopes(kind, prof, box, V=None, amplitude=1.0, tol_tail=1e-14):
    """Upper bounds on ``|P|`` outside the sampled box.

    Returns a dict with keys ``g_above`` (``g > g_max``), ``c_beyond``
    (``|c| > c_max``, from one integration by parts) and, for ``quant``
    and ``VP``, ``eta_above`` (``|eta| > eta_max``).
    """
    m = _moments(prof, tol_tail)
    amp = abs(amplitude)
    vn = 1.0 if V is None else V.sup_abs
    scale = amp * (vn if kind == "quant" else 1.0)
    env = {
        "g_above": scale * m.laplace_weight(box.g_max),
        "c_beyond": scale * (m.I0 + m.J1) / box.c_max,
    }
    if kind == "quant":
        env["eta_above"] = 2.0 * scale * float(m.E(box.eta_max)[0])
    elif kind == "VP":
        env["eta_above"] = amp * m.I1 / (1.0 + box.eta_max**2)
    return env


def corner_remainder(kind, prof, box, V=None, amplitude=1.0, tol_tail=1e-14):
    """Bound on ``|P - cV P_VB|`` (quant) or ``|P_VP - P_VB|`` (VP) for ``|eta| < eta_min``."""
    m = _moments(prof, tol_tail)
    amp = abs(amplitude)
    e = box.eta_min
    if kind == "VP":
        return amp * m.I1 * e * e / (1.0 + e * e)
    if kind == "quant":
        eta = np.linspace(0.0, e, 257)
        dv = float(np.abs(V(eta) - V.cV).max())
        return amp * (V.sup_abs * e * e * m.I3 / 24.0 + dv * m.I1)
    return 0.0


# --------------------------------------------------------------------------- scans


@dataclass
class PenroseReport:
    """Outcome of :func:`margin_search`.

    ``margin`` is the sampled infimum of ``|1 - P|`` inside the box.
    ``lower_bound`` also accounts for the envelopes and the small-``eta``
    corner; ``certified`` means ``lower_bound > 0``. This is a grid plus
    envelope statement and not a rigorous enclosure.
    """

    kind: str
    margin: float
    argmin: dict
    envelope: dict
    corner_margin: float | None
    lower_bound: float
    certified: bool
    grid: dict
    refinement: list = field(default_factory=list)
    quadrature: dict = field(default_factory=dict)
    profile: str = ""
    note: str = "grid scan with tail envelopes; not an interval-arithmetic certificate"
    surface: dict | None = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("surface")
        return d

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    def write_csv(self, path):
        s = self.surface
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gamma", "tau", "eta", "re_P", "im_P", "abs_one_minus_P"])
            for row in zip(s["gamma"], s["tau"], s["eta"], s["P"].real, s["P"].imag, s["abs"]):
                w.writerow([repr(float(v)) for v in row])


def _family(prof, x):
    """``(amplitudes, slices)``: scalar multipliers on shared slices for separable data."""
    if isinstance(prof, VelocityProfile):
        return np.ones(1), [prof], np.zeros(1)
    if not isinstance(prof, PhaseProfile):
        raise ParameterError("margin_search expects a VelocityProfile or PhaseProfile")
    x = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False) if x is None else np.atleast_1d(np.asarray(x, float))
    if prof.separable:
        return np.asarray(prof.amplitude(x), dtype=float), [prof.base], x
    return np.ones(x.size), prof.family(x), x


def _scan(kind, integ, g, c, etas, V, psi_prime):
    """Surface ``P[e, i, j]`` over ``etas x g x c``."""
    out = np.empty((len(etas), g.size, c.size), dtype=complex)
    for k, eta in enumerate(etas):
        pref = _prefactor(kind, eta, V, psi_prime)
        out[k] = integ.surface(integ.kernel(kind, eta, pref), g, c)
    return out


def _local_axes(axes, idx, scales, n=9):
    new = []
    for ax, i, sc in zip(axes, idx, scales):
        lo, hi = ax[max(i - 1, 0)], ax[min(i + 1, ax.size - 1)]
        new.append(np.geomspace(lo, hi, n) if sc == "geom" else np.linspace(lo, hi, n))
    return new


def margin_search(
    prof,
    kind="quant",
    V: PairPotential | None = None,
    box: PenroseBox | None = None,
    refine_levels=3,
    x=None,
    psi_prime=None,
    rtol=1e-8,
    tol_tail=1e-14,
    zmax_factor=1.0,
    panel_factor=1,
    keep_surface=True,
):
    """Infimum of ``|1 - P|`` over a sampled box, local refinement and tail envelopes.

    Parameters
    ----------
    prof : VelocityProfile or PhaseProfile
        Space-dependent data are scanned over ``x`` (default 64 points on
        ``[0, 2 pi)``); separable data reuse one surface through linearity.
    kind : {"quant", "VB", "VP"}
    V : PairPotential
        Required for ``quant`` unless ``psi_prime`` is given.
    box : PenroseBox
    refine_levels : int
        Number of successive 9-point-per-axis zooms around the minimum.
    zmax_factor, panel_factor : float, int
        Enlarge the truncation point and the panel count (for invariance
        checks).
    """
    if kind not in KINDS:
        raise ParameterError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "quant" and V is None and psi_prime is None:
        raise ParameterError("the quantum Penrose function needs a pair potential")
    box = box or PenroseBox()
    amps, slices, xs = _family(prof, x)
    g, c, etas = box.axes()
    if kind == "VB":
        etas = np.array([1.0])
    cV = (V.cV if V is not None else 1.0) if psi_prime is None else float(psi_prime)

    best = None
    per_slice = []
    for si, sl in enumerate(slices):
        signs = (1.0,) if sl.even else (1.0, -1.0)
        integ = _make_integrator(sl, box.g_min, box.g_max, box.c_max, box.eta_max, tol_tail, zmax_factor, panel_factor)
        eta_set = np.concatenate([s * etas for s in signs])
        surf, integ, qerr = _converged(lambda it: _scan(kind, it, g, c, eta_set, V, psi_prime), integ, rtol)
        vb = None
        if kind in ("quant", "VP"):
            vb_eta = np.array([s for s in signs])
            vb = _scan("VB", integ, g, c, vb_eta, None, None)
        a_idx = range(amps.size) if len(slices) == 1 else [si]
        for ai in a_idx:
            a = amps[ai]
            val = np.abs(1.0 - a * surf)
            k, i, j = np.unravel_index(np.argmin(val), val.shape)
            cand = (float(val[k, i, j]), si, ai, (k, i, j), surf, integ, eta_set, qerr, vb)
            per_slice.append(float(val.min()))
            if best is None or cand[0] < best[0]:
                best = cand

    margin, si, ai, (k, i, j), surf, integ, eta_set, qerr, vb = best
    a, sl = amps[ai], slices[si]
    eta0 = float(eta_set[k])
    arg = {"g": float(g[i]), "c": float(c[j]), "eta": eta0}
    history = [{"level": 0, "margin": margin, **arg}]

    # local refinement around the global minimum
    cur_axes = [g, c, np.array([abs(eta0)])]
    cur_idx = [i, j, 0]
    if kind != "VB":
        cur_axes[2] = etas
        cur_idx[2] = int(np.argmin(np.abs(etas - abs(eta0))))
    sign = 1.0 if eta0 >= 0 else -1.0
    for level in range(1, refine_levels + 1):
        lg, lc, le = _local_axes(cur_axes, cur_idx, ("geom", "lin", "geom"))
        if kind == "VB":
            le = np.array([1.0])
        loc = _scan(kind, integ, lg, lc, sign * le, V, psi_prime)
        lval = np.abs(1.0 - a * loc)
        kk, ii, jj = np.unravel_index(np.argmin(lval), lval.shape)
        if lval[kk, ii, jj] < margin:
            margin = float(lval[kk, ii, jj])
            arg = {"g": float(lg[ii]), "c": float(lc[jj]), "eta": float(sign * le[kk])}
        cur_axes, cur_idx = [lg, lc, le], [ii, jj, kk]
        history.append({"level": level, "margin": margin, **arg})

    amp_max = float(np.abs(amps).max())
    env = {}
    corner = None
    lower = margin
    for sl_ in slices:
        e = tail_envelopes(kind, sl_, box, V, amp_max, tol_tail)
        for key, val in e.items():
            env[key] = max(env.get(key, 0.0), val)
    if kind in ("quant", "VP"):
        # small |eta|: compare with the homogeneous limit on the same (g, c) grid
        vals = []
        for sl_i, sl_ in enumerate(slices):
            integ_c = _make_integrator(sl_, box.g_min, box.g_max, box.c_max, 1.0, tol_tail)
            signs = np.array([1.0] if sl_.even else [1.0, -1.0])
            pvb = _scan("VB", integ_c, g, c, signs, None, None)
            a_list = amps if len(slices) == 1 else amps[sl_i : sl_i + 1]
            scale = cV if kind == "quant" else 1.0
            inf_vb = min(float(np.abs(1.0 - aa * scale * pvb).min()) for aa in a_list)
            vals.append(inf_vb - corner_remainder(kind, sl_, box, V, amp_max, tol_tail))
        corner = float(min(vals))
        env_vb = tail_envelopes("VB", slices[0], box, None, amp_max * (abs(cV) if kind == "quant" else 1.0), tol_tail)
        env["corner_vb_tails"] = max(env_vb.values())
        lower = min(lower, corner)
    env_max = max(env.values()) if env else 0.0
    lower = float(min(lower, 1.0 - env_max))

    point = {
        "gamma": arg["g"] * abs(arg["eta"]),
        "tau": arg["c"] * abs(arg["eta"]),
        "eta": arg["eta"],
        "x": float(xs[ai]) if xs.size > ai else 0.0,
        "amplitude": float(a),
    }
    surface = None
    if keep_surface:
        S = a * surf if len(slices) == 1 else surf
        E, G, C = np.meshgrid(eta_set, g, c, indexing="ij")
        surface = {
            "gamma": (G * np.abs(E)).ravel(),
            "tau": (C * np.abs(E)).ravel(),
            "eta": E.ravel(),
            "P": S.ravel(),
            "abs": np.abs(1.0 - S).ravel(),
        }
    grid = asdict(box)
    grid["variables"] = "g = gamma/|eta|, c = tau/|eta|"
    grid["n_x"] = int(xs.size)
    return PenroseReport(
        kind=kind,
        margin=float(margin),
        argmin=point,
        envelope={k: float(v) for k, v in env.items()},
        corner_margin=corner,
        lower_bound=lower,
        certified=bool(lower > 0.0),
        grid=grid,
        refinement=history,
        quadrature={"zmax": float(integ.zmax), "panels": int(integ.n_panels), "doubling_error": float(qerr)},
        profile=getattr(prof, "name", ""),
        surface=surface,
    )


# --------------------------------------------------------------------------- checks


def perturbation_gap(prof_f, prof_g, kind, sample_set, V=None, **kw):
    """``sup |P(., f) - P(., g)|`` over the given points."""
    gap = 0.0
    for p in sample_set:
        d = evaluate(kind, p, prof_f, V, **kw) - evaluate(kind, p, prof_g, V, **kw)
        gap = max(gap, abs(d))
    return float(gap)


def homogeneity_limit_check(prof, direction, r_sequence, V, rtol=1e-10):
    """Rows ``(r, P(r gamma, r tau, r eta), cV P_VB(direction), |difference|, ratio)``.

    ``ratio`` is the previous difference divided by the current one.
    """
    gt, tt, et = (float(v) for v in direction)
    limit = V.cV * penrose_vb((gt, tt, et), prof, rtol=rtol)
    rows = []
    prev = None
    for r in r_sequence:
        val = penrose_quant((r * gt, r * tt, r * et), prof, V, rtol=rtol)
        diff = abs(val - limit)
        ratio = prev / diff if (prev is not None and diff > 0) else float("nan")
        rows.append({"r": float(r), "P": val, "limit": limit, "difference": diff, "ratio": ratio})
        prev = diff
    return rows


@dataclass
class SmallDataReport:
    envelope: float
    certified: bool
    margin_lower_bound: float
    sup_eta: float
    note: str = "bound 2 sup|vhat| sup_eta (1/eta) int min(1, zeta eta/2) |F| dzeta"


def small_data_check(prof, V, tol_tail=1e-14):
    """Explicit upper bound on ``sup |P_quant|``; certifies stability when below 1.

    The inner function of ``eta`` is nonincreasing, so its supremum is the
    ``eta -> 0`` limit ``(1/2) int zeta |F|``.
    """
    m = _moments(prof, tol_tail)
    sup = float(m.E(0.0)[0])
    env = 2.0 * V.sup_abs * sup
    ok = env < 1.0 - _ENVELOPE_SLACK
    return SmallDataReport(env, bool(ok), float(1.0 - env) if ok else 0.0, 0.0)
