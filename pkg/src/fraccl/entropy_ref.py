"""The N-wave entropy solution of ``u_t + (|u|^(q-1) u / q)_x = 0`` with data
``M delta_0``, and quadrature evaluators for the Kruzhkov entropy inequality
and the initial trace.

For ``M > 0`` the profile is the fan ``U = (x/t)^(1/(q-1))`` on ``0 < x < r(t)``
closed by a shock at ``r(t) = (qM/(q-1))^((q-1)/q) t^(1/q)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fractional_ops import FractionalOperatorSpec, Grid, symbol
from .solver import flux


class SupportError(ValueError):
    """Test function support leaves the sampled space-time window."""


@dataclass(frozen=True)
class NWaveParams:
    M: float
    q: float

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError(f"mass M must be positive, got {self.M}")
        if not self.q > 1:
            raise ValueError(f"flux exponent q must exceed 1, got {self.q}")

    def radius(self, t):
        q = self.q
        return (q * self.M / (q - 1)) ** ((q - 1) / q) * np.asarray(t, dtype=float) ** (1 / q)

    def peak(self, t):
        q = self.q
        return (q * self.M / (q - 1)) ** (1 / q) * np.asarray(t, dtype=float) ** (-1 / q)

    def shock_speed(self, t):
        return self.radius(t) / (self.q * np.asarray(t, dtype=float))


def _check_time(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("the N-wave is defined for t > 0")


def nwave_value(t, x, params: NWaveParams):
    _check_time(t)
    x = np.asarray(x, dtype=float)
    r = params.radius(t)
    inside = (x > 0) & (x < r)
    xs = np.where(inside, x, 0.0)
    return np.where(inside, (xs / t) ** (1 / (params.q - 1)), 0.0)


def nwave_lp_norm(t, p, params: NWaveParams) -> float:
    """Closed form: ``||U(t)||_p^p = t^(-p/(q-1)) r^(a+1) / (a+1)``, ``a = p/(q-1)``."""
    _check_time(t)
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if np.isinf(p):
        return float(params.peak(t))
    a = p / (params.q - 1)
    r = float(params.radius(t))
    return float((t ** (-a) * r ** (a + 1) / (a + 1)) ** (1 / p))


# ---------------------------------------------------------------------------
# sampled space-time fields


@dataclass(frozen=True, eq=False)
class FieldSequence:
    """Samples ``values[i]`` of a field at ``times[i]`` on ``grid``."""

    times: np.ndarray
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        if self.values.shape != (len(self.times), self.grid.n):
            raise ValueError("values must have shape (len(times), grid.n)")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be increasing")


def nwave_sequence(params: NWaveParams, grid: Grid, times) -> FieldSequence:
    times = np.asarray(times, dtype=float)
    vals = np.stack([nwave_value(t, grid.x, params) for t in times])
    return FieldSequence(times, vals, grid)


def as_sequence(fields) -> FieldSequence:
    if isinstance(fields, FieldSequence):
        return fields
    return FieldSequence(np.asarray(fields.times, dtype=float), np.asarray(fields.values), fields.grid)


# ---------------------------------------------------------------------------
# test functions


def _bump1(s):
    """``exp(1 - 1/(1 - s^2))`` on ``|s| < 1`` and its first derivative."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1
    ss = np.where(inside, s, 0.0)
    den = 1 - ss * ss
    b = np.where(inside, np.exp(1 - 1 / den), 0.0)
    db = np.where(inside, b * (-2 * ss / den**2), 0.0)
    return b, db


@dataclass(frozen=True)
class Bump:
    """Tensor-product bump centred at ``(t0, x0)`` with half-widths ``(a, b)``."""

    t0: float
    x0: float
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("half-widths must be positive")

    @property
    def t_support(self):
        return self.t0 - self.a, self.t0 + self.a

    @property
    def x_support(self):
        return self.x0 - self.b, self.x0 + self.b

    def evaluate(self, t, x):
        """``(phi, phi_t, phi_x)`` at time ``t`` on the points ``x``."""
        bt, dbt = _bump1((t - self.t0) / self.a)
        bx, dbx = _bump1((np.asarray(x) - self.x0) / self.b)
        return bt * bx, dbt / self.a * bx, bt * dbx / self.b

    @classmethod
    def random(cls, rng, t_range, x_range, width_range=(0.2, 0.6)):
        """A bump whose support fits inside ``t_range`` x ``x_range``."""
        a = rng.uniform(*width_range) * (t_range[1] - t_range[0]) / 2
        b = rng.uniform(*width_range) * (x_range[1] - x_range[0]) / 2
        t0 = rng.uniform(t_range[0] + a, t_range[1] - a)
        x0 = rng.uniform(x_range[0] + b, x_range[1] - b)
        return cls(t0, x0, a, b)


# ---------------------------------------------------------------------------
# entropy production


@dataclass(frozen=True)
class EntropyResidual:
    """``value`` is the space-time integral; ``scale`` the integral of the
    absolute integrand, used to set relative tolerances."""

    value: float
    scale: float
    nonlocal_term: float = 0.0

    @property
    def relative(self) -> float:
        return self.value / self.scale if self.scale > 0 else 0.0

    def holds(self, tol=1e-4) -> bool:
        return self.value >= -tol * self.scale


def _trapezoid_weights(times):
    w = np.zeros(times.size)
    d = np.diff(times)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def entropy_residual(fields, k, test_fn: Bump, q=None, viscous=False, spec=None,
                     diffusion_scale=None, delta=0.0) -> EntropyResidual:
    """Quadrature of
    ``|u-k| phi_t + sgn(u-k)(f(u)-f(k)) phi_x  [+ s |u-k| D*[phi]]``.

    ``D*`` is the L2 adjoint of the operator (symbol ``conj(psi)``), so the
    viscous form is the weak statement of ``|u-k|_t + F_x <= s D[|u-k|]``.
    A :class:`Trajectory` supplies ``q``, the operator and the scale itself.
    """
    cfg = getattr(fields, "config", None)
    if cfg is not None:
        q = cfg.q if q is None else q
        spec = cfg.spec if spec is None else spec
        diffusion_scale = cfg.diffusion_scale if diffusion_scale is None else diffusion_scale
        delta = cfg.delta if not delta else delta
    if q is None:
        raise ValueError("flux exponent q is required")
    seq = as_sequence(fields)
    g = seq.grid
    t_lo, t_hi = test_fn.t_support
    x_lo, x_hi = test_fn.x_support
    if t_lo < seq.times[0] or t_hi > seq.times[-1]:
        raise SupportError(f"bump time support [{t_lo:.4g}, {t_hi:.4g}] not inside the samples")
    if x_lo < g.x[0] or x_hi > g.x[-1]:
        raise SupportError(f"bump space support [{x_lo:.4g}, {x_hi:.4g}] leaves the box")
    if viscous:
        if spec is None:
            raise ValueError("the viscous form needs an operator spec")
        adj = np.conj(symbol(spec, g.xi)) * (1.0 if diffusion_scale is None else diffusion_scale)

    fk = float(flux(k, q, delta))
    w = _trapezoid_weights(seq.times)
    sel = (seq.times >= t_lo) & (seq.times <= t_hi)
    value = scale = nonloc = 0.0
    for wt, t, u in zip(w[sel], seq.times[sel], seq.values[sel]):
        phi, phi_t, phi_x = test_fn.evaluate(t, g.x)
        a = np.abs(u - k)
        ent_flux = np.sign(u - k) * (flux(u, q, delta) - fk)
        local = a * phi_t + ent_flux * phi_x
        mag = np.abs(a * phi_t) + np.abs(ent_flux * phi_x)
        if viscous:
            dphi = np.fft.ifft(adj * np.fft.fft(phi)).real
            nl = a * dphi
            local = local + nl
            mag = mag + np.abs(nl)
            nonloc += wt * np.sum(nl) * g.dx
        value += wt * np.sum(local) * g.dx
        scale += wt * np.sum(mag) * g.dx
    return EntropyResidual(float(value), float(scale), float(nonloc))


def expansion_shock(q=2.0, left=0.0, right=1.0):
    """A non-entropic jump from ``left`` up to ``right`` moving at the
    Rankine-Hugoniot speed; returns ``(speed, profile(t, x))``."""
    if not right > left:
        raise ValueError("an expansion shock needs right > left")
    speed = (flux(right, q) - flux(left, q)) / (right - left)

    def profile(t, x):
        return np.where(np.asarray(x) < speed * t, left, right)

    return float(speed), profile


def sample_sequence(profile, grid: Grid, times) -> FieldSequence:
    times = np.asarray(times, dtype=float)
    return FieldSequence(times, np.stack([profile(t, grid.x) for t in times]), grid)


# ---------------------------------------------------------------------------
# initial trace


@dataclass(frozen=True)
class InitialTrace:
    times: np.ndarray
    values: np.ndarray
    limit: float
    target: float

    @property
    def gap(self) -> float:
        return abs(self.limit - self.target)


def initial_trace(fields, psi, rate=0.5, mass=None) -> InitialTrace:
    """``int u(t) psi dx`` along the sampled times and its extrapolation to ``t = 0``.

    The limit is a polynomial fit in ``t^rate`` (``rate = 1/q`` for the
    N-wave, whose support shrinks like ``t^(1/q)``); the target is
    ``mass * psi(0)`` with ``mass`` read off the earliest sample by default.
    """
    seq = as_sequence(fields)
    g = seq.grid
    if callable(psi):
        pv = np.asarray(psi(g.x), dtype=float) * np.ones(g.n)
        p0 = float(psi(0.0))
    else:
        pv = np.asarray(getattr(psi, "values", psi), dtype=float)
        p0 = float(pv[g.n // 2])
    vals = seq.values @ pv * g.dx
    if mass is None:
        mass = float(seq.values[0].sum() * g.dx)
    s = seq.times**rate
    deg = min(2, seq.times.size - 1)
    limit = float(np.polyval(np.polyfit(s, vals, deg), 0.0)) if deg > 0 else float(vals[0])
    return InitialTrace(seq.times, vals, limit, mass * p0)
