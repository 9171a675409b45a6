"""Diagnostics measured on solver trajectories: mass, L^p decay, the Oleinik
one-sided bound, energy dissipation, tail control and the distance to the
N-wave.  Each check returns the measured quantity next to its bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy_ref import Bump, NWaveParams, entropy_residual, nwave_value
from .fractional_ops import Field, Grid, symbol
from .kernel import fit_slope, lp_norm
from .solver import Trajectory, initial_field

P_LIST = (1.0, 2.0, math.inf)


# ---------------------------------------------------------------------------
# pointwise quantities


def _spectral_derivative(values, grid: Grid, dealias=True):
    k = grid.xi
    mult = 1j * k
    if dealias:
        mult = np.where(np.abs(k) <= (2.0 / 3.0) * np.max(np.abs(k)), mult, 0.0)
    return np.fft.ifft(mult * np.fft.fft(values)).real


def _signed_power(u, a):
    return np.sign(u) * np.abs(u) ** a


def oleinik_sup(values, grid: Grid, q, method="spectral") -> float:
    """``sup_x d/dx (u^(q-1))``; forward differences with ``method="difference"``."""
    w = _signed_power(np.asarray(values, dtype=float), q - 1)
    if method == "spectral":
        return float(np.max(_spectral_derivative(w, grid)))
    if method == "difference":
        return float(np.max(np.diff(w)) / grid.dx)
    raise ValueError(f"unknown method {method!r}")


def energy_density(values, grid: Grid, s) -> float:
    """``int |D^s u|^2 dx = sum |xi|^(2s) |u_hat|^2`` (discrete Parseval)."""
    uh = np.fft.fft(values)
    return float(grid.dx / grid.n * np.sum(np.abs(grid.xi) ** (2 * s) * np.abs(uh) ** 2))


def dissipation_rate(values, spec, grid: Grid, scale=1.0) -> float:
    """``-int u s D[u] dx``, the exact loss rate of ``||u||^2 / 2``."""
    uh = np.fft.fft(values)
    re = symbol(spec, grid.xi).real
    return float(-scale * grid.dx / grid.n * np.sum(re * np.abs(uh) ** 2))


def tail_mass(values, grid: Grid, radius) -> float:
    """``int_{|y| > radius} u dy``."""
    return float(np.sum(np.asarray(values)[np.abs(grid.x) > radius]) * grid.dx)


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    lp_norms: dict
    oleinik_sup: float
    max_value: float
    dx_l1_local: float
    energy_density: float
    tail_mass: float

    COLUMNS = ("t", "mass", "l1", "l2", "linf", "oleinik_sup", "max_value",
               "dx_l1_local", "energy_density", "tail_mass")

    def row(self):
        return (self.t, self.mass, self.lp_norms[1.0], self.lp_norms[2.0],
                self.lp_norms[math.inf], self.oleinik_sup, self.max_value,
                self.dx_l1_local, self.energy_density, self.tail_mass)


def diagnose(traj: Trajectory, times=None, R=10.0) -> list[DiagnosticsRecord]:
    g = traj.grid
    if not 0 < R < g.half_width:
        raise ValueError(f"R must lie in (0, L={g.half_width})")
    cfg = traj.config
    s = cfg.order / 2
    times = traj.times if times is None else times
    local = np.abs(g.x) < R
    out = []
    for t in times:
        u = traj.values[traj.index(t)]
        du = _spectral_derivative(u, g)
        out.append(DiagnosticsRecord(
            t=float(t),
            mass=float(np.sum(u) * g.dx),
            lp_norms={p: lp_norm(u, g.dx, p) for p in P_LIST},
            oleinik_sup=oleinik_sup(u, g, cfg.q),
            max_value=float(np.max(u)),
            dx_l1_local=float(np.sum(np.abs(du[local])) * g.dx),
            energy_density=energy_density(u, g, s),
            tail_mass=tail_mass(u, g, 2 * R),
        ))
    return out


# ---------------------------------------------------------------------------
# Oleinik


@dataclass(frozen=True)
class OleinikResult:
    times: np.ndarray
    sups: np.ndarray
    ratio: float
    tol: float = 1e-2

    @property
    def passed(self) -> bool:
        return self.ratio <= 1 + self.tol


def oleinik_check(traj, t0=1.0, q=None, method="spectral", tol=1e-2) -> OleinikResult:
    """``max_{t >= t0} t sup_x d/dx(u^(q-1))``; bounded by 1 for entropy data.

    Solver trajectories must come from an epsilon-shifted run so that
    ``u^(q-1)`` is smooth.
    """
    cfg = getattr(traj, "config", None)
    if cfg is not None:
        if cfg.epsilon <= 0:
            raise ValueError("the Oleinik check needs an epsilon-shifted run (epsilon > 0)")
        q = cfg.q if q is None else q
    if q is None:
        raise ValueError("flux exponent q is required")
    sel = traj.times >= t0
    if not np.any(sel):
        raise ValueError(f"no snapshots at or after t0={t0}")
    times = np.asarray(traj.times)[sel]
    sups = np.array([oleinik_sup(u, traj.grid, q, method) for u in np.asarray(traj.values)[sel]])
    return OleinikResult(times, sups, float(np.max(times * sups)), tol)


# ---------------------------------------------------------------------------
# L^p decay


def max_bound(t, M, q):
    return (q / (q - 1) * M) ** (1 / q) * np.asarray(t, dtype=float) ** (-1 / q)


def lp_bound(t, p, M, q):
    """``(q/(q-1))^((p-1)/(pq)) M^((p-1)/(pq) + 1/p) t^(-(1/q)(1-1/p))``."""
    if np.isinf(p):
        return max_bound(t, M, q)
    e = (p - 1) / (p * q)
    return (q / (q - 1)) ** e * M ** (e + 1 / p) * np.asarray(t, dtype=float) ** (-(1 - 1 / p) / q)


def bound_slope(p, q) -> float:
    return -(1 - (0.0 if np.isinf(p) else 1 / p)) / q


@dataclass(frozen=True)
class DecayResult:
    p: float
    norms: np.ndarray
    bounds: np.ndarray
    slope: float
    bound_slope: float

    @property
    def hard_ok(self) -> bool:
        return bool(np.all(self.norms <= self.bounds * (1 + 1e-12)))

    @property
    def rate_ok(self) -> bool:
        return self.slope >= self.bound_slope - 0.05

    @property
    def passed(self) -> bool:
        return self.hard_ok and self.rate_ok


def decay_exponents(traj, p_list=P_LIST, M=None, q=None) -> dict:
    """Per ``p``: the printed bound at every snapshot and the fitted slope over
    the last decade of snapshot times."""
    times = np.asarray(traj.times, dtype=float)
    if times[-1] < 10 * times[0]:
        raise ValueError("decay fits need snapshots spanning at least a decade")
    cfg = getattr(traj, "config", None)
    q = q if q is not None else cfg.q
    g = traj.grid
    if M is None:
        M = float(np.sum(traj.values[0]) * g.dx)
    late = times >= times[-1] / 10
    out = {}
    for p in p_list:
        norms = np.array([lp_norm(u, g.dx, p) for u in traj.values])
        slope = fit_slope(times[late], norms[late])
        out[p] = DecayResult(p, norms, lp_bound(times, p, M, q), slope, bound_slope(p, q))
    return out


def derivative_scale(t, M, q):
    """``M^((2-q)/q) t^(-2/q)``, the shape of the pointwise derivative bound."""
    return M ** ((2 - q) / q) * np.asarray(t, dtype=float) ** (-2 / q)


def calibrate_derivative_constant(traj: Trajectory, M=None) -> float:
    """Smallest ``C(q)`` with ``sup_x u_x <= C M^((2-q)/q) t^(-2/q)`` on ``traj``."""
    M = traj.initial_mass if M is None else M
    sups = np.array([np.max(_spectral_derivative(u, traj.grid)) for u in traj.values])
    return float(np.max(sups / derivative_scale(traj.times, M, traj.config.q)))


@dataclass(frozen=True)
class DerivativeCheck:
    times: np.ndarray
    sup_dx: np.ndarray
    sup_bound: np.ndarray
    w11: np.ndarray
    w11_bound: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(np.all(self.sup_dx <= self.sup_bound) and np.all(self.w11 <= self.w11_bound))


def derivative_check(traj: Trajectory, C, R=10.0, M=None) -> DerivativeCheck:
    """Pointwise derivative bound and the local W^{1,1} bound
    ``2R C M^((2-q)/q) t^(-2/q) + 2 ((q/(q-1)) M)^(1/q) t^(-1/q)`` with a
    frozen constant ``C``."""
    g = traj.grid
    q = traj.config.q
    M = traj.initial_mass if M is None else M
    local = np.abs(g.x) < R
    du = [_spectral_derivative(u, g) for u in traj.values]
    sup_dx = np.array([np.max(d) for d in du])
    w11 = np.array([np.sum(np.abs(d[local])) * g.dx for d in du])
    scale = C * derivative_scale(traj.times, M, q)
    return DerivativeCheck(np.asarray(traj.times), sup_dx, scale, w11,
                           2 * R * scale + 2 * max_bound(traj.times, M, q))


# ---------------------------------------------------------------------------
# energy


@dataclass(frozen=True)
class EnergyBudget:
    lhs: float
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-2)


def _trapezoid(ts, ys):
    ts = np.asarray(ts)
    ys = np.asarray(ys)
    return float(np.sum(np.diff(ts) * (ys[1:] + ys[:-1]) / 2))


def energy_budget(traj: Trajectory, tau, T, form="printed", M=None) -> EnergyBudget:
    """``int_tau^T E(t) dt`` against ``(1/2)(q/(q-1))^(1/q) tau^(-1/q) M^((q+1)/q)``.

    ``form="printed"`` integrates ``int |D^(b/2) u|^2 dx`` (b the operator
    order); ``form="dissipation"`` integrates the exact loss rate
    ``-int u D[u] dx``.
    """
    if not 0 < tau < T:
        raise ValueError("need 0 < tau < T")
    cfg = traj.config
    g = traj.grid
    i0, i1 = traj.index(tau), traj.index(T)
    ts = traj.times[i0:i1 + 1]
    if form == "printed":
        e = [energy_density(u, g, cfg.order / 2) for u in traj.values[i0:i1 + 1]]
    elif form == "dissipation":
        e = [dissipation_rate(u, cfg.spec, g) for u in traj.values[i0:i1 + 1]]
    else:
        raise ValueError(f"unknown form {form!r}")
    if M is None:
        M = traj.initial_mass
    q = cfg.q
    rhs = 0.5 * (q / (q - 1)) ** (1 / q) * tau ** (-1 / q) * M ** ((q + 1) / q)
    return EnergyBudget(_trapezoid(ts, e), float(rhs))


def energy_identity_residual(traj: Trajectory, t, form="printed") -> float:
    """``|d/dt (||u||^2/2) + E(t)| / |d/dt (||u||^2/2)|`` by centred differences.

    ``traj`` needs snapshots just before and after ``t``.  ``E`` is as in
    :func:`energy_budget`, scaled by the run's diffusion scale.
    """
    cfg = traj.config
    g = traj.grid
    i = traj.index(t)
    if i == 0 or i == traj.times.size - 1:
        raise ValueError("t needs neighbouring snapshots on both sides")
    e = [0.5 * np.sum(traj.values[j] ** 2) * g.dx for j in (i - 1, i + 1)]
    rate = (e[1] - e[0]) / (traj.times[i + 1] - traj.times[i - 1])
    u = traj.values[i]
    if form == "printed":
        d = cfg.diffusion_scale * energy_density(u, g, cfg.order / 2)
    elif form == "dissipation":
        d = dissipation_rate(u, cfg.spec, g, cfg.diffusion_scale)
    else:
        raise ValueError(f"unknown form {form!r}")
    return float(abs(rate + d) / abs(rate))


# ---------------------------------------------------------------------------
# tail control


def tail_structure(s, lam, R, q, order):
    """``s lam^(q-order) / R^order + s^(1/q) / R``."""
    return s * lam ** (q - order) / R**order + s ** (1 / q) / R


@dataclass(frozen=True)
class TailControl:
    times: np.ndarray
    measured: np.ndarray
    bound: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(np.all(self.measured <= self.bound))


def _initial_tail(traj, R, u0):
    g = traj.grid
    if u0 is None:
        return tail_mass(traj.initial.values, g, R)
    return tail_mass(initial_field(u0, g).values, g, R)


def calibrate_tail_constant(traj: Trajectory, R_list, lam=1.0, u0=None) -> float:
    """Smallest ``C`` making the structural bound hold on ``traj`` (the
    calibration run) at every snapshot and every ``R``."""
    cfg = traj.config
    best = 0.0
    for R in R_list:
        _check_radius(traj.grid, R)
        base = _initial_tail(traj, R, u0)
        for s, u in zip(traj.times, traj.values):
            excess = tail_mass(u, traj.grid, 2 * R) - base
            best = max(best, excess / tail_structure(s, lam, R, cfg.q, cfg.order))
    return float(best)


def _check_radius(grid, R):
    if not 0 < 2 * R < grid.half_width:
        raise ValueError(f"need 0 < 2R < L, got R={R}, L={grid.half_width}")


def tail_control(traj: Trajectory, R, lam, C, u0=None) -> TailControl:
    """Measured ``int_{|y|>2R} u_lam`` against
    ``int_{|y|>R} u_0 + C (s lam^(q-1-a)/R^(1+a) + s^(1/q)/R)``.

    The initial tail is taken from ``u0`` when given, else from the
    trajectory's own initial data.
    """
    _check_radius(traj.grid, R)
    cfg = traj.config
    base = _initial_tail(traj, R, u0)
    meas = np.array([tail_mass(u, traj.grid, 2 * R) for u in traj.values])
    bnd = base + C * tail_structure(traj.times, lam, R, cfg.q, cfg.order)
    return TailControl(np.asarray(traj.times), meas, bnd)


def initial_tail_limit(traj: Trajectory, R, n_early=3) -> float:
    """Linear extrapolation to ``s = 0`` of ``int_{|y|>R} u(s)`` over the
    earliest ``n_early`` snapshots."""
    ts = traj.times[:n_early]
    tails = [tail_mass(u, traj.grid, R) for u in traj.values[:n_early]]
    return float(np.polyval(np.polyfit(ts, tails, 1), 0.0))


# ---------------------------------------------------------------------------
# asymptotics


def asymptotic_distance(u, t, p, params: NWaveParams, grid: Grid = None, mass_tol=1e-6) -> float:
    """``t^((1/q)(1-1/p)) ||u(t) - U_M(t)||_p`` by grid quadrature."""
    if isinstance(u, Field):
        grid, vals = u.grid, u.values
    else:
        vals = np.asarray(u, dtype=float)
    if grid is None:
        raise ValueError("a grid is needed for raw sample arrays")
    if not t > 0:
        raise ValueError("t must be positive")
    mass = float(np.sum(vals) * grid.dx)
    if abs(mass - params.M) > mass_tol * max(1.0, params.M):
        raise ValueError(f"field mass {mass:.10g} differs from M={params.M}")
    diff = vals - nwave_value(t, grid.x, params)
    inv_p = 0.0 if np.isinf(p) else 1 / p
    return float(t ** ((1 - inv_p) / params.q) * lp_norm(diff, grid.dx, p))


def distance_history(traj: Trajectory, p, params: NWaveParams) -> np.ndarray:
    return np.array([asymptotic_distance(u, t, p, params, traj.grid)
                     for t, u in zip(traj.times, traj.values)])


def rescale_snapshot(u: Field, lam, grid: Grid = None) -> Field:
    """``y -> lam u(lam y)`` sampled on ``grid`` (linear interpolation)."""
    grid = grid or u.grid
    vals = lam * np.interp(lam * grid.x, u.grid.x, u.values, left=0.0, right=0.0)
    return Field(grid, vals)


@dataclass(frozen=True)
class VanishingDiffusion:
    lambdas: np.ndarray
    terms: np.ndarray
    slope: float
    expected: float

    def passed(self, tol=0.1) -> bool:
        return abs(self.slope - self.expected) <= tol


def vanishing_diffusion(trajs: dict, k, bump: Bump) -> VanishingDiffusion:
    """Fit ``|s int int |u_lam - k| D*[phi]|`` against ``lam``.

    ``trajs`` maps ``lam`` to the rescaled trajectory; the term carries the
    run's diffusion scale ``lam^(q - order)``, which is the expected slope.
    """
    lams = np.array(sorted(trajs))
    terms = np.array([entropy_residual(trajs[l], k, bump, viscous=True).nonlocal_term
                      for l in lams])
    cfg = trajs[lams[0]].config
    return VanishingDiffusion(lams, terms, fit_slope(lams, np.abs(terms)), cfg.q - cfg.order)


# ---------------------------------------------------------------------------
# summary lines


@dataclass
class Summary:
    lines: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, name, passed, measured, bound):
        self.lines.append((name, bool(passed), measured, bound))

    @property
    def all_passed(self) -> bool:
        return all(p for _, p, _, _ in self.lines)

    def render(self) -> str:
        out = [f"NOTE  {n}" for n in self.notes]
        for name, p, m, b in self.lines:
            out.append(f"{'PASS' if p else 'FAIL'}  {name}  measured={_fmt(m)}  bound={_fmt(b)}")
        return "\n".join(out) + "\n"


def _fmt(v):
    if isinstance(v, (float, int, np.floating)):
        return f"{float(v):.6g}"
    return str(v)
