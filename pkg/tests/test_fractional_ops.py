import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma as G

from fraccl.fractional_ops import (
    Field, FractionalOperatorSpec, Grid, GridMismatchError, SpectralMultiplier, apply,
    apply_quadrature, apply_spectral, check_integration_by_parts, d_const, derivative_symbol,
    dissipativity, frac_laplacian_const, homogeneous_norms, make_symbol, riesz_feller_coeffs,
    splitting_multiplier, symbol,
)

GRID = Grid(2**11, 40.0)


def gaussian(grid, c=0.0, w=1.0):
    return grid.sample(lambda x: np.exp(-((x - c) / w) ** 2 / 2))


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    c, w, k = rng.uniform(-3, 3), rng.uniform(0.7, 2), rng.uniform(0, 2)
    return grid.sample(lambda x: np.exp(-((x - c) / w) ** 2) * (1 + 0.3 * np.cos(k * x)))


# --- spec --------------------------------------------------------------------

@pytest.mark.parametrize("kw", [
    dict(kind="weyl_marchaud", alpha=1.0),
    dict(kind="dx_weyl_marchaud", alpha=0.0),
    dict(kind="riesz_feller", beta=1.5, gamma=0.8),
    dict(kind="riesz_feller", beta=2.0, gamma=0.0),
    dict(kind="fractional_laplacian", beta=2.5),
    dict(kind="nope", alpha=0.5),
])
def test_spec_rejects_invalid(kw):
    with pytest.raises(ValueError):
        FractionalOperatorSpec(**kw)


def test_flagship_is_riesz_feller():
    s = FractionalOperatorSpec.flagship(0.3)
    assert s.order == pytest.approx(1.3)
    assert s.skewness == pytest.approx(0.7)
    assert s.as_riesz_feller() == FractionalOperatorSpec.riesz_feller_op(1.3, 0.7)


def test_constants():
    assert d_const(1.5) == pytest.approx(1 / G(-0.5))
    assert d_const(2.5) == pytest.approx(1 / G(-1.5))
    # negative on (1, 2), matching the sign of the second-difference integral
    assert frac_laplacian_const(1.5) < 0


# --- symbols -----------------------------------------------------------------

def test_symbol_examples():
    rf = FractionalOperatorSpec.riesz_feller_op(1.5, 0.5)
    assert symbol(rf, np.array([1.0]))[0] == pytest.approx(-np.exp(-1j * np.pi / 4), abs=1e-15)
    assert symbol(rf, np.array([0.0]))[0] == 0
    fl = FractionalOperatorSpec.flagship(0.5)
    assert abs(symbol(fl, np.array([1.0]))[0] - symbol(rf, np.array([1.0]))[0]) <= 1e-14


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_flagship_branch(alpha):
    xi = GRID.xi
    expect = -np.abs(xi) ** (1 + alpha) * np.exp(-1j * np.sign(xi) * (1 - alpha) * np.pi / 2)
    got = make_symbol(FractionalOperatorSpec.flagship(alpha), GRID).values
    assert np.max(np.abs(got - expect) / np.maximum(1, np.abs(expect))) <= 1e-14


@pytest.mark.parametrize("spec", [
    FractionalOperatorSpec("weyl_marchaud", alpha=0.4),
    FractionalOperatorSpec("weyl_marchaud_adjoint", alpha=0.4),
    FractionalOperatorSpec.flagship(0.6),
    FractionalOperatorSpec.riesz_feller_op(1.7, -0.2),
    FractionalOperatorSpec("fractional_laplacian", beta=0.8),
])
def test_conjugate_symmetry(spec):
    assert make_symbol(spec, GRID).conjugate_symmetry_defect() == 0.0


@settings(max_examples=40, deadline=None)
@given(beta=st.floats(1.01, 1.99), frac=st.floats(-1, 1))
def test_riesz_feller_dissipative_symbol(beta, frac):
    gamma = frac * min(beta, 2 - beta)
    m = make_symbol(FractionalOperatorSpec.riesz_feller_op(beta, gamma), GRID).values
    assert np.all(m.real <= 0)
    np.testing.assert_allclose(m.real, -np.abs(GRID.xi) ** beta * np.cos(gamma * np.pi / 2), rtol=1e-12, atol=1e-12)


# --- application -------------------------------------------------------------

def test_identity_and_derivative():
    f = gaussian(GRID)
    one = SpectralMultiplier(GRID, np.ones(GRID.n, dtype=complex))
    np.testing.assert_allclose(apply_spectral(one, f).values, f.values, atol=1e-14)
    L = GRID.half_width
    s = GRID.sample(lambda x: np.sin(np.pi * x / L))
    d = apply_spectral(derivative_symbol(GRID), s).values
    assert np.max(np.abs(d - np.pi / L * np.cos(np.pi * GRID.x / L))) <= 1e-10


def test_grid_mismatch():
    with pytest.raises(GridMismatchError):
        apply_spectral(make_symbol(FractionalOperatorSpec.flagship(0.5), Grid(64, 10.0)), gaussian(GRID))


def test_field_rejects_nonfinite():
    with pytest.raises(ValueError):
        Field(GRID, np.full(GRID.n, np.nan))


def test_spectral_cache_roundtrip():
    f = random_field(GRID, 1)
    back = np.fft.ifft(f.spectrum).real
    assert np.max(np.abs(back - f.values)) <= 1e-12 * np.max(np.abs(f.values))


def test_translation_and_linearity():
    spec = FractionalOperatorSpec.riesz_feller_op(1.6, 0.2)
    f, g = random_field(GRID, 2), random_field(GRID, 3)
    np.testing.assert_allclose(apply(spec, f.shifted(17)).values, apply(spec, f).shifted(17).values, atol=1e-13)
    np.testing.assert_allclose(apply(spec, f + g * 2.0).values,
                               (apply(spec, f) + apply(spec, g) * 2.0).values, atol=1e-12)


# --- quadrature --------------------------------------------------------------

@pytest.mark.parametrize("spec", [
    FractionalOperatorSpec.flagship(0.5),
    FractionalOperatorSpec.riesz_feller_op(1.6, 0.2),
    FractionalOperatorSpec("fractional_laplacian", beta=1.5),
])
def test_quadrature_matches_spectral(spec):
    errs = []
    for n in (2**10, 2**11, 2**12):
        g = Grid(n, 40.0)
        f = gaussian(g)
        s = apply(spec, f).values
        q = apply_quadrature(spec, f).values
        inner = np.abs(g.x) < 20
        errs.append(np.max(np.abs(q - s)[inner]) / np.max(np.abs(s)))
    assert errs[-1] <= 1e-3
    assert errs[0] > errs[1] > errs[2]


def test_quadrature_weyl_marchaud_first_difference():
    spec = FractionalOperatorSpec("weyl_marchaud", alpha=0.3)
    g = Grid(2**11, 40.0)
    f = gaussian(g)
    s = apply(spec, f).values
    q = apply_quadrature(spec, f, zmax=640.0).values
    inner = np.abs(g.x) < 20
    assert np.max(np.abs(q - s)[inner]) / np.max(np.abs(s)) <= 1e-3


def test_quadrature_constant_and_shift():
    spec = FractionalOperatorSpec("weyl_marchaud", alpha=0.5)
    c = Field(GRID, np.full(GRID.n, 3.0))
    assert np.max(np.abs(apply_quadrature(spec, c).values)) <= 1e-12
    f = random_field(GRID, 4)
    np.testing.assert_allclose(apply_quadrature(spec, f.shifted(5)).values,
                               apply_quadrature(spec, f).shifted(5).values, atol=1e-12)


def test_quadrature_rejects_low_order_laplacian():
    with pytest.raises(ValueError):
        apply_quadrature(FractionalOperatorSpec("fractional_laplacian", beta=0.8), gaussian(GRID))


# --- Riesz-Feller splitting ---------------------------------------------------

def test_riesz_feller_coeff_examples():
    c1, c2 = riesz_feller_coeffs(1.5, 0.5)
    assert abs(c2) <= 1e-15
    assert c1 == pytest.approx(G(2.5) / np.pi)
    assert c1 == pytest.approx(0.42314, abs=1e-5)
    a, b = riesz_feller_coeffs(1.7, 0.0)
    assert a == pytest.approx(b)
    assert riesz_feller_coeffs(1.5, -0.5) == pytest.approx(riesz_feller_coeffs(1.5, 0.5)[::-1])
    with pytest.raises(ValueError):
        riesz_feller_coeffs(1.5, 0.6)


@settings(max_examples=30, deadline=None)
@given(beta=st.floats(1.05, 1.95), frac=st.floats(-1, 1))
def test_splitting_identity(beta, frac):
    gamma = frac * min(beta, 2 - beta)
    c1, c2 = riesz_feller_coeffs(beta, gamma)
    assert c1 + c2 > 0
    direct = make_symbol(FractionalOperatorSpec.riesz_feller_op(beta, gamma), GRID).values
    split = splitting_multiplier(beta, gamma, GRID).values
    assert np.max(np.abs(direct - split) / np.maximum(1, np.abs(direct))) <= 1e-12


# --- integration by parts -----------------------------------------------------

def test_integration_by_parts_examples():
    g = gaussian(GRID)
    assert check_integration_by_parts(g, g, 0.75, 0.75, relative=True) <= 1e-10
    zero = Field(GRID, np.zeros(GRID.n))
    assert check_integration_by_parts(zero, g, 0.75, 0.75) == 0.0
    with pytest.raises(ValueError):
        check_integration_by_parts(g, g, 0.4, 0.75)


@pytest.mark.parametrize("seed", range(5))
def test_integration_by_parts_random_pairs(seed):
    g, h = random_field(GRID, seed), random_field(GRID, seed + 100)
    assert check_integration_by_parts(g, h, 0.6, 0.9, relative=True) <= 1e-10
    assert check_integration_by_parts(g, h, 0.6, 0.9, "adjoint", relative=True) <= 1e-10
    assert check_integration_by_parts(g, h, 0.8, 0.8, "riesz_feller_split", gamma=0.2,
                                      relative=True) <= 1e-10


def test_one_term_riesz_feller_form_holds_for_equal_fields_only():
    g, h = random_field(GRID, 7), random_field(GRID, 8)
    assert check_integration_by_parts(g, g, 0.8, 0.8, "riesz_feller", gamma=0.2, relative=True) <= 1e-10
    assert check_integration_by_parts(g, h, 0.8, 0.8, "riesz_feller", gamma=0.2, relative=True) > 1e-3
    # with c2 = 0 (the flagship case) the one-term form is exact
    assert check_integration_by_parts(g, h, 0.75, 0.75, "riesz_feller", gamma=0.5, relative=True) <= 1e-10


# --- dissipativity ------------------------------------------------------------

def test_dissipativity_gaussian_flagship():
    g = gaussian(GRID)
    d = dissipativity(g, FractionalOperatorSpec.flagship(0.5))
    assert d.value > 0
    assert abs(d.value - d.plancherel) <= 1e-10 * d.value
    assert abs(d.value - d.split_form) <= 1e-10 * d.value
    # the square form overstates the dissipation by 1/sin(alpha pi/2)
    assert d.square_form * np.sin(0.25 * np.pi) == pytest.approx(d.value, rel=1e-10)


def test_dissipativity_zero_and_single_mode():
    spec = FractionalOperatorSpec.riesz_feller_op(1.6, 0.3)
    assert dissipativity(Field(GRID, np.zeros(GRID.n)), spec).value == 0.0
    k0 = 5
    xi0 = np.pi * k0 / GRID.half_width
    s = GRID.sample(lambda x: np.sin(xi0 * x))
    norm2 = np.sum(s.values**2) * GRID.dx
    d = dissipativity(s, spec)
    assert d.value == pytest.approx(xi0**1.6 * np.cos(0.3 * np.pi / 2) * norm2, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(beta=st.floats(1.05, 1.95), frac=st.floats(-1, 1), seed=st.integers(0, 1000))
def test_dissipativity_nonnegative(beta, frac, seed):
    gamma = frac * min(beta, 2 - beta)
    g = random_field(GRID, seed)
    d = dissipativity(g, FractionalOperatorSpec.riesz_feller_op(beta, gamma))
    assert d.value >= -1e-12 * np.sum(g.values**2) * GRID.dx
    assert abs(d.value - d.split_form) <= 1e-10 * max(d.value, 1e-300)


@pytest.mark.parametrize("theta", [0.2, 0.5, 0.9])
def test_homogeneous_norms(theta):
    a, b, c = homogeneous_norms(random_field(GRID, 9), theta)
    assert abs(a - b) <= 1e-12 * a and abs(a - c) <= 1e-12 * a
