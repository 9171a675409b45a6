"""Nonlocal operators on a uniform periodic grid.

Every operator is a Fourier multiplier.  The one-sided Weyl-Marchaud
derivative and its relatives are also available as direct singular
integrals (:func:`apply_quadrature`), which serve as an independent check
on the spectral route.

Sign conventions for the multipliers (principal branch of ``(i xi)**s``):

==========================  ===============================
kind                        symbol
==========================  ===============================
weyl_marchaud               ``(i xi)**alpha``
weyl_marchaud_adjoint       ``-(-i xi)**alpha``
dx_weyl_marchaud            ``(i xi)**(1 + alpha)``
dx_weyl_marchaud_adjoint    ``(-i xi)**(1 + alpha)``
riesz_feller                ``-|xi|**beta exp(-i sgn(xi) gamma pi/2)``
fractional_laplacian        ``|xi|**beta``
==========================  ===============================
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gamma as _gamma

KINDS = (
    "weyl_marchaud",
    "weyl_marchaud_adjoint",
    "dx_weyl_marchaud",
    "dx_weyl_marchaud_adjoint",
    "riesz_feller",
    "fractional_laplacian",
)
_WM_KINDS = KINDS[:4]


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FractionalOperatorSpec:
    """Which nonlocal operator is in play.

    ``alpha`` is used by the four Weyl-Marchaud kinds, ``beta`` is the order
    of a Riesz-Feller operator (or the order theta of the fractional
    Laplacian) and ``gamma`` its skewness.
    """

    kind: str
    alpha: float | None = None
    beta: float | None = None
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind in _WM_KINDS:
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError(f"{self.kind} needs 0 < alpha < 1, got {self.alpha}")
        elif self.kind == "riesz_feller":
            check_riesz_feller_range(self.beta, self.gamma)
        elif self.beta is None or not 0.0 < self.beta < 2.0:
            raise ValueError(f"fractional_laplacian needs 0 < theta < 2, got {self.beta}")

    @classmethod
    def flagship(cls, alpha):
        """``d/dx`` of the Weyl-Marchaud derivative, the operator of the model problem."""
        return cls("dx_weyl_marchaud", alpha=alpha)

    @classmethod
    def riesz_feller_op(cls, beta, gamma):
        return cls("riesz_feller", beta=beta, gamma=gamma)

    @property
    def order(self) -> float:
        """Homogeneity degree of the symbol."""
        if self.kind in ("weyl_marchaud", "weyl_marchaud_adjoint"):
            return self.alpha
        if self.kind in ("dx_weyl_marchaud", "dx_weyl_marchaud_adjoint"):
            return 1.0 + self.alpha
        return self.beta

    @property
    def skewness(self) -> float:
        """Riesz-Feller skewness, for the kinds that belong to that class."""
        if self.kind == "dx_weyl_marchaud":
            return 1.0 - self.alpha
        if self.kind == "dx_weyl_marchaud_adjoint":
            return self.alpha - 1.0
        if self.kind == "riesz_feller":
            return self.gamma
        raise ValueError(f"{self.kind} is not of Riesz-Feller type")

    def as_riesz_feller(self) -> "FractionalOperatorSpec":
        return FractionalOperatorSpec("riesz_feller", beta=self.order, gamma=self.skewness)


def check_riesz_feller_range(beta, gamma):
    if beta is None or not 1.0 < beta < 2.0:
        raise ValueError(f"riesz_feller needs 1 < beta < 2, got {beta}")
    bound = min(beta, 2.0 - beta)
    if abs(gamma) > bound + 1e-15:
        raise ValueError(
            f"riesz_feller needs |gamma| <= min(beta, 2 - beta) = {bound:g}, got gamma={gamma}"
        )


def d_const(s):
    """``1/Gamma(1 - s)``; ``d_const(alpha + 1)`` and ``d_const(alpha + 2)`` are the
    normalisations of the first- and second-difference integral forms."""
    return 1.0 / _gamma(1.0 - s)


def frac_laplacian_const(theta):
    """Constant of the second-difference integral form of ``|D|**theta``, theta in (1, 2)."""
    return 2.0**theta * _gamma((theta + 1) / 2) / (np.sqrt(np.pi) * _gamma(-theta / 2))


# ---------------------------------------------------------------------------
# grids and fields


@dataclass(frozen=True)
class Grid:
    """``n`` equispaced points on the periodic box ``[-L, L)``."""

    n: int
    half_width: float

    def __post_init__(self):
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 4, got {self.n}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n)

    @cached_property
    def xi(self) -> np.ndarray:
        """Wavenumbers ``pi k / L`` in FFT order; the Nyquist mode is negative."""
        return np.fft.fftfreq(self.n, d=self.dx) * 2.0 * np.pi

    @property
    def dxi(self) -> float:
        return np.pi / self.half_width

    def field(self, values) -> "Field":
        return Field(self, np.asarray(values, dtype=float))

    def sample(self, func) -> "Field":
        return self.field(func(self.x))


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples on a grid; the DFT is computed once on demand."""

    grid: Grid
    values: np.ndarray
    _spectrum: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            object.__setattr__(self, "_spectrum", np.fft.fft(self.values))
        return self._spectrum

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)

    def shifted(self, m: int) -> "Field":
        """Translate by ``m`` grid cells (periodically)."""
        return Field(self.grid, np.roll(self.values, m))

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.values + other.values)

    def __mul__(self, c):
        return Field(self.grid, c * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralMultiplier:
    grid: Grid
    values: np.ndarray

    def conjugate_symmetry_defect(self) -> float:
        """Max ``|m(-xi) - conj(m(xi))|`` over the paired (non-Nyquist) modes."""
        m = self.values
        n = self.grid.n
        k = np.arange(1, n // 2)
        return float(np.max(np.abs(m[n - k] - np.conj(m[k])), initial=abs(m[0].imag)))

    def __mul__(self, other):
        if isinstance(other, SpectralMultiplier):
            _same_grid(self.grid, other.grid)
            return SpectralMultiplier(self.grid, self.values * other.values)
        return SpectralMultiplier(self.grid, other * self.values)

    __rmul__ = __mul__

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return SpectralMultiplier(self.grid, self.values + other.values)


def _same_grid(a: Grid, b: Grid):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


# ---------------------------------------------------------------------------
# symbols


def i_power(xi, s):
    """Principal branch of ``(i xi)**s``, with value 0 at ``xi = 0``."""
    xi = np.asarray(xi, dtype=float)
    mag = np.abs(xi) ** s
    return np.where(xi == 0, 0.0, mag * np.exp(1j * s * np.sign(xi) * np.pi / 2))


def symbol(spec: FractionalOperatorSpec, xi) -> np.ndarray:
    """Evaluate the multiplier of ``spec`` at wavenumbers ``xi``."""
    xi = np.asarray(xi, dtype=float)
    k = spec.kind
    if k == "weyl_marchaud":
        return i_power(xi, spec.alpha)
    if k == "weyl_marchaud_adjoint":
        return -i_power(-xi, spec.alpha)
    if k == "dx_weyl_marchaud":
        return i_power(xi, 1.0 + spec.alpha)
    if k == "dx_weyl_marchaud_adjoint":
        return i_power(-xi, 1.0 + spec.alpha)
    if k == "riesz_feller":
        return -(np.abs(xi) ** spec.beta) * np.exp(-1j * np.sign(xi) * spec.gamma * np.pi / 2)
    return (np.abs(xi) ** spec.beta).astype(complex)


def make_symbol(spec: FractionalOperatorSpec, grid: Grid) -> SpectralMultiplier:
    return SpectralMultiplier(grid, symbol(spec, grid.xi))


def derivative_symbol(grid: Grid, order: int = 1) -> SpectralMultiplier:
    return SpectralMultiplier(grid, (1j * grid.xi) ** order)


def frac_laplacian_symbol(grid: Grid, theta: float) -> SpectralMultiplier:
    return SpectralMultiplier(grid, (np.abs(grid.xi) ** theta).astype(complex))


def apply_spectral(mult: SpectralMultiplier, f: Field) -> Field:
    """Inverse DFT of ``mult * DFT(f)``; the (roundoff) imaginary part is dropped."""
    _same_grid(mult.grid, f.grid)
    out = np.fft.ifft(mult.values * f.spectrum)
    scale = np.max(np.abs(out.real), initial=0.0)
    resid = np.max(np.abs(out.imag), initial=0.0)
    if resid > 1e-10 * max(scale, 1e-300) and resid > 1e-14:
        warnings.warn(
            f"imaginary residue {resid:.3e} relative to {scale:.3e}; field not resolved at Nyquist",
            RuntimeWarning,
            stacklevel=2,
        )
    return Field(f.grid, out.real)


def apply(spec: FractionalOperatorSpec, f: Field) -> Field:
    return apply_spectral(make_symbol(spec, f.grid), f)


# ---------------------------------------------------------------------------
# singular-integral evaluation


def _fd_derivatives(v, h):
    """Fourth-order centred first and second differences on a periodic array."""
    p1, m1 = np.roll(v, -1), np.roll(v, 1)
    p2, m2 = np.roll(v, -2), np.roll(v, 2)
    d1 = (8 * (p1 - m1) - (p2 - m2)) / (12 * h)
    d2 = (16 * (p1 + m1) - (p2 + m2) - 30 * v) / (12 * h * h)
    return d1, d2


def apply_quadrature(spec: FractionalOperatorSpec, f: Field, zmax=None) -> Field:
    """Evaluate the operator by its singular-integral representation.

    Samples outside the box are taken from the periodic extension; the
    integral is truncated at ``zmax`` (default: the half box ``L``).  Beyond
    ``zmax`` the local terms ``-g(x)`` and ``-g'(x) z`` are integrated
    analytically and the periodic images of ``g`` are replaced by their mean.  This path is slow (O(n^2)) and meant for cross-checking.
    """
    grid = f.grid
    h = grid.dx
    zmax = grid.half_width if zmax is None else zmax
    J = int(round(zmax / h))
    if J < 2:
        raise ValueError(f"zmax={zmax} must span at least two cells")
    v = f.values
    k = spec.kind
    if k in ("weyl_marchaud", "weyl_marchaud_adjoint"):
        a = spec.alpha
        sign, direction = (1.0, -1) if k == "weyl_marchaud" else (-1.0, 1)
        out = sign * d_const(a + 1) * _first_diff(v, h, a + 1, direction, J)
    elif k in ("dx_weyl_marchaud", "dx_weyl_marchaud_adjoint"):
        a = spec.alpha
        direction = -1 if k == "dx_weyl_marchaud" else 1
        out = d_const(a + 2) * _second_diff(v, h, a + 2, direction, J)
    elif k == "riesz_feller":
        c1, c2 = riesz_feller_coeffs(spec.beta, spec.gamma)
        p = 1 + spec.beta
        out = c1 * _second_diff(v, h, p, -1, J) + c2 * _second_diff(v, h, p, 1, J)
    else:
        theta = spec.beta
        if not 1.0 < theta < 2.0:
            raise ValueError(
                "fractional_laplacian has an integral form only for theta in (1, 2); "
                "use apply_spectral"
            )
        p = 1 + theta
        out = frac_laplacian_const(theta) * (
            _second_diff(v, h, p, -1, J) + _second_diff(v, h, p, 1, J)
        )
    return Field(grid, out)


def _hat_weights(h, p, J):
    s = h * np.arange(J + 1)
    a, b = s[1:-1], s[2:]
    m0 = (b ** (1 - p) - a ** (1 - p)) / (1 - p)
    m1 = (b ** (2 - p) - a ** (2 - p)) / (2 - p)
    w = np.zeros(J + 1)
    w[1:-1] += (b * m0 - m1) / h
    w[2:] += (m1 - a * m0) / h
    return s, w


def _remainder_sum(v, d1, d2, h, p, direction, J):
    """``sum_j w_j R(s_j)`` with ``R(s) = g(x + dir*s) - g - dir*g' s - g'' s^2/2``."""
    s, w = _hat_weights(h, p, J)
    acc = np.zeros_like(v)
    for j in range(1, J + 1):
        if w[j] == 0.0:
            continue
        sj = s[j]
        acc += w[j] * (np.roll(v, -direction * j) - v - direction * d1 * sj - 0.5 * d2 * sj * sj)
    return acc, s[J]


def _first_diff(v, h, p, direction, J):
    """``int_0^inf (g(x + dir*s) - g(x)) s**-p ds`` for 1 < p < 2."""
    d1, d2 = _fd_derivatives(v, h)
    acc, Z = _remainder_sum(v, d1, d2, h, p, direction, J)
    taylor = direction * d1 * Z ** (2 - p) / (2 - p) + 0.5 * d2 * Z ** (3 - p) / (3 - p)
    tail = (np.mean(v) - v) * Z ** (1 - p) / (p - 1)
    return acc + taylor + tail


def _second_diff(v, h, p, direction, J):
    """``int_0^inf (g(x + dir*s) - g(x) - dir*g'(x) s) s**-p ds`` for 2 < p < 3."""
    d1, d2 = _fd_derivatives(v, h)
    acc, Z = _remainder_sum(v, d1, d2, h, p, direction, J)
    taylor = 0.5 * d2 * Z ** (3 - p) / (3 - p)
    tail = (np.mean(v) - v) * Z ** (1 - p) / (p - 1) - direction * d1 * Z ** (2 - p) / (p - 2)
    return acc + taylor + tail


# ---------------------------------------------------------------------------
# Riesz-Feller splitting and identities


def riesz_feller_coeffs(beta, gamma):
    """Weights of the two one-sided second-difference integrals of ``D^beta_gamma``."""
    check_riesz_feller_range(beta, gamma)
    g = _gamma(1 + beta) / np.pi
    c1 = g * np.sin((beta - gamma) * np.pi / 2)
    c2 = g * np.sin((beta + gamma) * np.pi / 2)
    return c1, c2


def splitting_multiplier(beta, gamma, grid: Grid) -> SpectralMultiplier:
    """``(c1 dx WM^{beta-1} + c2 dx WM-adjoint^{beta-1}) / d_{beta+1}`` as a multiplier."""
    c1, c2 = riesz_feller_coeffs(beta, gamma)
    a = beta - 1
    m = c1 * make_symbol(FractionalOperatorSpec("dx_weyl_marchaud", alpha=a), grid)
    m = m + c2 * make_symbol(FractionalOperatorSpec("dx_weyl_marchaud_adjoint", alpha=a), grid)
    return (1.0 / d_const(beta + 1)) * m


def _inner(a: Field, b: Field) -> float:
    return float(np.sum(a.values * b.values) * a.grid.dx)


def _wm(alpha):
    return FractionalOperatorSpec("weyl_marchaud", alpha=alpha)


def _wm_adj(alpha):
    return FractionalOperatorSpec("weyl_marchaud_adjoint", alpha=alpha)


def check_integration_by_parts(g: Field, h: Field, theta1, theta2, variant="fractional",
                               gamma=None, relative=False):
    """Residual of one of the integration-by-parts rules.

    variant
        ``"fractional"``: ``int dxWM^a[g] h + int WM^t1[g] WMadj^t2[h]`` with
        ``a = t1 + t2 - 1``.
        ``"adjoint"``: ``int h dxWM^a[g] - int dxWMadj^a[h] g`` (same ``a``).
        ``"riesz_feller"``: ``int D^b_gamma[g] h + (c1 + c2)/d_{b+1} int WM^t1[g] WMadj^t2[h]``
        with ``b = t1 + t2``, as printed in the literature.  For ``g != h`` this
        only holds when ``c2 = 0``.
        ``"riesz_feller_split"``: the two-term form
        ``int D[g] h + (c1 int WM^t1[g] WMadj^t2[h] + c2 int WMadj^t1[g] WM^t2[h]) / d_{b+1}``,
        which holds for every admissible ``(b, gamma)``.

    With ``relative=True`` the residual is divided by ``||A g|| ||h||`` where
    ``A`` is the operator on the left.
    """
    _same_grid(g.grid, h.grid)
    if not (0.5 < theta1 < 1 and 0.5 < theta2 < 1):
        raise ValueError("theta1, theta2 must lie in (1/2, 1)")
    if variant in ("fractional", "adjoint"):
        a = theta1 + theta2 - 1
        lhs_op = FractionalOperatorSpec("dx_weyl_marchaud", alpha=a)
        Ag = apply(lhs_op, g)
        if variant == "fractional":
            rhs = -_inner(apply(_wm(theta1), g), apply(_wm_adj(theta2), h))
        else:
            rhs = _inner(apply(FractionalOperatorSpec("dx_weyl_marchaud_adjoint", alpha=a), h), g)
    elif variant in ("riesz_feller", "riesz_feller_split"):
        if gamma is None:
            raise ValueError("riesz_feller variants need gamma")
        b = theta1 + theta2
        Ag = apply(FractionalOperatorSpec("riesz_feller", beta=b, gamma=gamma), g)
        c1, c2 = riesz_feller_coeffs(b, gamma)
        d = d_const(b + 1)
        if variant == "riesz_feller":
            rhs = -(c1 + c2) / d * _inner(apply(_wm(theta1), g), apply(_wm_adj(theta2), h))
        else:
            rhs = -(
                c1 * _inner(apply(_wm(theta1), g), apply(_wm_adj(theta2), h))
                + c2 * _inner(apply(_wm_adj(theta1), g), apply(_wm(theta2), h))
            ) / d
    else:
        raise ValueError(f"unknown variant {variant!r}")
    resid = abs(_inner(Ag, h) - rhs)
    if relative:
        scale = np.linalg.norm(Ag.values) * np.linalg.norm(h.values) * g.grid.dx
        return resid / scale if scale > 0 else 0.0
    return resid


@dataclass(frozen=True)
class Dissipation:
    value: float  # -int g D[g]
    split_form: float  # (c1 + c2)/d_{b+1} int WM^{b/2}[g] WMadj^{b/2}[g]
    plancherel: float  # sum |xi|^b cos(gamma pi/2) |g_hat|^2 dxi
    square_form: float  # int |WM^{b/2}[g]|^2


def dissipativity(g: Field, spec: FractionalOperatorSpec) -> Dissipation:
    """``-int g D[g] dx`` together with the equivalent expressions it is checked against."""
    b, gm = spec.order, spec.skewness
    value = -_inner(g, apply(spec, g))
    c1, c2 = riesz_feller_coeffs(b, gm)
    half = b / 2
    wg = apply(_wm(half), g)
    split = (c1 + c2) / d_const(b + 1) * _inner(wg, apply(_wm_adj(half), g))
    grid = g.grid
    # unitary-transform normalisation: g_hat = dx/sqrt(2 pi) * DFT
    ghat2 = np.abs(g.spectrum * grid.dx) ** 2 / (2 * np.pi)
    planch = float(np.sum(np.abs(grid.xi) ** b * np.cos(gm * np.pi / 2) * ghat2) * grid.dxi)
    return Dissipation(value, split, planch, _inner(wg, wg))


def homogeneous_norms(g: Field, theta) -> tuple[float, float, float]:
    """L2 norms of ``WM^theta[g]``, ``WMadj^theta[g]`` and ``|D|^theta[g]``."""
    dx = g.grid.dx
    return tuple(
        float(np.sqrt(np.sum(apply(s, g).values ** 2) * dx))
        for s in (_wm(theta), _wm_adj(theta), FractionalOperatorSpec("fractional_laplacian", beta=theta))
    )
