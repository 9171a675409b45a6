"""Fundamental solution of the linear nonlocal equation ``u_t = D[u]``.

``K(t, .)`` is the inverse transform of ``exp(t psi)``.  On the periodic grid
this is the inverse DFT scaled so that ``sum K dx == 1``, which makes
``K(t) * u`` (discrete periodic convolution) the exact semigroup update.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fractional_ops import Field, FractionalOperatorSpec, Grid, symbol


class UnresolvedKernelError(ValueError):
    """The kernel spectrum has not decayed by the Nyquist mode."""


def _phase(grid: Grid) -> np.ndarray:
    # samples start at x = -L, so exp(i xi_k x_j) picks up exp(-i xi_k L) = (-1)^k
    k = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    return np.where(k.astype(int) % 2 == 0, 1.0, -1.0)


def _real_space(grid: Grid, spectrum: np.ndarray) -> np.ndarray:
    return np.fft.ifft(spectrum * _phase(grid)).real / grid.dx


def kernel_multiplier(t, spec: FractionalOperatorSpec, grid: Grid) -> np.ndarray:
    if not t > 0:
        raise ValueError(f"kernel needs t > 0, got {t}")
    return np.exp(t * symbol(spec, grid.xi))


@dataclass(frozen=True)
class KernelField:
    t: float
    spec: FractionalOperatorSpec
    field: Field

    @property
    def mass(self) -> float:
        return self.field.integral()

    @property
    def positivity_defect(self) -> float:
        """``-min K / max K`` (zero or negative when the samples are non-negative)."""
        v = self.field.values
        return float(-v.min() / v.max())

    @property
    def edge_mass(self) -> float:
        """Mass in the outer half of the box, where periodic images overlap."""
        g = self.field.grid
        out = np.abs(g.x) > g.half_width / 2
        return float(np.sum(np.abs(self.field.values[out])) * g.dx)


def kernel_field(t, spec: FractionalOperatorSpec, grid: Grid) -> KernelField:
    """Samples of ``K(t, .)`` normalised to unit discrete mass."""
    vals = _real_space(grid, kernel_multiplier(t, spec, grid))
    vals = vals / (np.sum(vals) * grid.dx)
    return KernelField(float(t), spec, Field(grid, vals))


def convolve(k: KernelField | Field, u: Field) -> Field:
    """Discrete periodic convolution ``sum_m K(x_j - x_m) u_m dx`` via the DFT."""
    kf = k.field if isinstance(k, KernelField) else k
    g = u.grid
    # K is sampled from -L; shift its origin to index 0 before multiplying spectra
    kh = np.fft.fft(np.roll(kf.values, -g.n // 2)) * g.dx
    return Field(g, np.fft.ifft(kh * u.spectrum).real)


def convolve_direct(a: Field, b: Field) -> Field:
    """The same periodic convolution by direct O(n^2) summation."""
    g = a.grid
    n = g.n
    av = np.roll(a.values, -n // 2)  # a(x) with x = 0 at index 0
    out = np.empty(n)
    idx = np.arange(n)
    for j in range(n):
        out[j] = np.dot(av[(j - idx) % n], b.values)
    return Field(g, out * g.dx)


def semigroup_residual(t, s, spec, grid) -> float:
    """``||K(t+s) - K(t)*K(s)||_L1`` with the convolution summed directly."""
    kt = kernel_field(t, spec, grid).field
    ks = kernel_field(s, spec, grid).field
    conv = convolve_direct(kt, ks)
    # the convolution of two origin-centred samples is origin-centred at index n/2
    kts = kernel_field(t + s, spec, grid).field.values
    return float(np.sum(np.abs(kts - conv.values)) * grid.dx)


def self_similarity_residual(t, spec: FractionalOperatorSpec, grid: Grid) -> float:
    """Max-norm gap between ``K(t, x)`` and ``t^(-1/b) K(1, x t^(-1/b))`` over ``max K(t)``.

    ``b`` is the order of the operator.  ``K(1, .)`` is interpolated linearly;
    only points whose rescaled argument stays inside the box are compared.
    """
    b = spec.order
    c = float(t) ** (-1.0 / b)
    kt = kernel_field(t, spec, grid).field.values
    k1 = kernel_field(1.0, spec, grid).field.values
    x = grid.x
    arg = x * c
    inside = (arg >= x[0]) & (arg <= x[-1])
    if inside.sum() < grid.n // 2:
        raise ValueError(f"rescaling to t={t} leaves the box for most of the grid")
    resc = c * np.interp(arg[inside], x, k1)
    return float(np.max(np.abs(kt[inside] - resc)) / np.max(kt))


def expected_time_slope(p, theta, j, beta) -> float:
    """``-(1/b)(1 - 1/p) - (j + theta)/b``."""
    inv_p = 0.0 if np.isinf(p) else 1.0 / p
    return -(1.0 / beta) * (1.0 - inv_p) - (j + theta) / beta


def lp_norm(values, dx, p) -> float:
    v = np.abs(values)
    if np.isinf(p):
        return float(v.max())
    return float((np.sum(v**p) * dx) ** (1.0 / p))


def derived_kernel(t, spec, grid, theta=0.0, j=0) -> Field:
    """``|D|^theta d^j/dx^j K(t, .)`` sampled on the grid."""
    xi = grid.xi
    mult = kernel_multiplier(t, spec, grid) * np.abs(xi) ** theta * (1j * xi) ** j
    nyq = np.abs(mult[grid.n // 2])
    if nyq > 1e-12 * np.max(np.abs(mult)):
        raise UnresolvedKernelError(
            f"kernel at t={t} not resolved: |spectrum| at Nyquist is {nyq:.2e}"
        )
    return Field(grid, _real_space(grid, mult))


def time_norms(p, theta, with_dx, spec, grid, times=(1.0, 2.0, 4.0, 8.0)):
    j = 1 if with_dx else 0
    return np.array([lp_norm(derived_kernel(t, spec, grid, theta, j).values, grid.dx, p)
                     for t in times])


def fit_slope(xs, ys) -> float:
    """Least-squares slope of ``log ys`` against ``log xs``."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def time_decay_exponent(p, theta, with_dx, spec, grid=None, times=(1.0, 2.0, 4.0, 8.0)) -> float:
    """Fitted exponent of ``t -> || |D|^theta d^j K(t) ||_Lp`` over ``times``."""
    if not (p >= 1):
        raise ValueError("p must be >= 1")
    if not 0 <= theta < 1:
        raise ValueError("theta must lie in [0, 1)")
    grid = grid or Grid(2**13, 100.0)
    return fit_slope(times, time_norms(p, theta, with_dx, spec, grid, times))


def tail_decay_exponent(theta, spec, grid=None, window=(10.0, 50.0), side="right", pad=8) -> float:
    """Fitted log-log slope of ``| |D|^theta K(1, X) |`` over ``window`` on one side.

    ``K(1, .)`` is sampled on ``grid`` and ``|D|^theta`` is applied after
    zero-padding the samples to ``pad`` times the box, so the slowly decaying
    tails of the result do not wrap around onto the window.
    """
    if not 0 < theta < 1:
        raise ValueError("tail decay is only claimed for 0 < theta < 1")
    grid = grid or Grid(2**15, 200.0)
    lo, hi = window
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < X_min < X_max")
    if hi >= grid.half_width / 2:
        raise ValueError(f"window edge {hi} too close to the box edge {grid.half_width}")
    k = kernel_field(1.0, spec, grid).field.values
    big = Grid(grid.n * pad, grid.half_width * pad)
    start = (big.n - grid.n) // 2
    padded = np.zeros(big.n)
    padded[start:start + grid.n] = k
    mult = np.abs(big.xi) ** theta
    v = np.fft.ifft(mult * np.fft.fft(padded)).real[start:start + grid.n]
    x = grid.x if side == "right" else -grid.x
    sel = (x >= lo) & (x <= hi)
    return fit_slope(x[sel], np.abs(v[sel]))
