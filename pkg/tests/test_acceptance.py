"""Acceptance criteria, one test per criterion.  Each test prints a single
``criterion N: PASS/FAIL`` line (repeated in the terminal summary) and then
asserts every sub-check at the stated tolerance."""
from dataclasses import replace

import numpy as np
import pytest

from conftest import Q, REF_SNAPS, record
from fraccl import FractionalOperatorSpec, Gaussian, Grid, SolverConfig, make_symbol, solve
from fraccl.entropy_ref import (Bump, NWaveParams, entropy_residual, expansion_shock,
                                nwave_sequence, sample_sequence)
from fraccl.fractional_ops import apply_quadrature, apply_spectral, check_integration_by_parts
from fraccl.kernel import (expected_time_slope, kernel_field, self_similarity_residual,
                           semigroup_residual, tail_decay_exponent, time_decay_exponent)
from fraccl.solver import (every_step_times, mild_residual, self_convergence_order,
                           solve_rescaled)
from fraccl import verification as vf


def _smooth_pair(grid, rng):
    """Two random smooth, decaying fields."""
    out = []
    for _ in range(2):
        c, w = rng.uniform(-2, 2), rng.uniform(0.6, 1.6)
        a, k = rng.uniform(0.5, 1.5), rng.uniform(0, 2)
        out.append(grid.sample(lambda x: a * np.exp(-((x - c) / w) ** 2) * (1 + 0.5 * np.sin(k * x))))
    return out


def test_criterion_01_operator_identity():
    grid = Grid(2**12, 40.0)
    gaps = []
    for a in (0.25, 0.5, 0.75):
        m1 = make_symbol(FractionalOperatorSpec.flagship(a), grid).values
        m2 = make_symbol(FractionalOperatorSpec.riesz_feller_op(1 + a, 1 - a), grid).values
        gaps.append(np.max(np.abs(m1 - m2) / np.maximum(1.0, np.abs(m2))))
    ok = max(gaps) <= 1e-14
    record(1, ok, f"max multiplier gap {max(gaps):.2e} (tol 1e-14)")
    assert ok


def test_criterion_02_quadrature_vs_spectral():
    spec = FractionalOperatorSpec.flagship(0.5)
    errs = []
    for n in (2**10, 2**11, 2**12, 2**13):
        g = Grid(n, 40.0)
        f = g.sample(lambda x: np.exp(-x**2 / 2))
        s = apply_spectral(make_symbol(spec, g), f).values
        qd = apply_quadrature(spec, f).values
        inner = np.abs(g.x) < 20
        errs.append(np.max(np.abs(qd - s)[inner]) / np.max(np.abs(s)))
    ok = errs[2] <= 1e-3 and all(b < a for a, b in zip(errs, errs[1:]))
    record(2, ok, "relative gaps " + ", ".join(f"{e:.2e}" for e in errs) + " (n=2^10..2^13)")
    assert ok


def test_criterion_03_integration_by_parts():
    grid = Grid(2**11, 40.0)
    rng = np.random.default_rng(20)
    worst = {"fractional": 0.0, "adjoint": 0.0, "riesz_feller": 0.0}
    for _ in range(5):
        g, h = _smooth_pair(grid, rng)
        worst["fractional"] = max(worst["fractional"], check_integration_by_parts(g, h, 0.75, 0.75, relative=True))
        worst["adjoint"] = max(worst["adjoint"], check_integration_by_parts(g, h, 0.7, 0.8, "adjoint", relative=True))
        worst["riesz_feller"] = max(worst["riesz_feller"], check_integration_by_parts(
            g, h, 0.8, 0.8, "riesz_feller", gamma=0.2, relative=True))
    ok = all(v <= 1e-10 for v in worst.values())
    record(3, ok, "worst relative residuals " + ", ".join(f"{k}: {v:.2e}" for k, v in worst.items())
           + " (tol 1e-10)")
    assert ok


def test_criterion_04_kernel_laws(flagship, ref_grid):
    mass = kernel_field(1.0, flagship, ref_grid).mass
    sg = max(semigroup_residual(t, s, flagship, Grid(2**11, 50.0)) for t in (0.5, 1.0) for s in (0.5, 1.0))
    ss = max(self_similarity_residual(t, flagship, ref_grid) for t in (0.5, 2.0))
    ok = abs(mass - 1) <= 1e-12 and sg <= 1e-6 and ss <= 1e-4
    record(4, ok, f"mass-1 {mass - 1:.1e}, semigroup {sg:.1e}, self-similarity {ss:.1e}")
    assert ok


def test_criterion_05_time_decay_exponents():
    worst = 0.0
    for beta, gamma in ((1.5, 0.5), (1.5, 0.0), (1.6, 0.2)):
        spec = FractionalOperatorSpec.riesz_feller_op(beta, gamma)
        for p, theta, j in ((np.inf, 0.0, 0), (2.0, 0.5, 0), (2.0, 0.5, 1), (1.0, 0.0, 1)):
            slope = time_decay_exponent(p, theta, bool(j), spec)
            worst = max(worst, abs(slope - expected_time_slope(p, theta, j, beta)))
    ok = worst <= 0.02
    record(5, ok, f"worst slope deviation {worst:.4f} (tol 0.02)")
    assert ok


def test_criterion_06_tail_decay(flagship):
    slope = tail_decay_exponent(0.5, flagship, Grid(2**15, 200.0), window=(10.0, 50.0))
    ok = abs(slope + 1.5) <= 0.15
    record(6, ok, f"tail slope {slope:.4f} (target -1.5 +- 10%)")
    assert ok


def test_criterion_07_solver_invariants(ref_run, ref_config):
    u0 = ref_run.initial.values
    m0 = ref_run.initial_mass
    drift = ref_run.max_abs_mass_drift / abs(m0)
    tol = 1e-6 * np.max(np.abs(u0))
    viol = max(u0.min() - ref_run.values.min(), ref_run.values.max() - u0.max(), 0.0)
    l1 = np.abs(ref_run.values).sum(axis=1) * ref_run.grid.dx
    l1_ok = bool(np.all(l1 <= np.sum(np.abs(u0)) * ref_run.grid.dx + 1e-6))
    order = self_convergence_order(Gaussian(1.0, 1.0), ref_config, 0.5, [4e-3, 2e-3, 1e-3])
    ok = drift <= 1e-8 and viol <= tol and l1_ok and order >= 1.8
    record(7, ok, f"mass drift {drift:.1e}, max-principle violation {viol:.1e}, "
                  f"L1 non-expansive {l1_ok}, etd2 order {order:.3f}")
    assert ok


def test_criterion_08_mild_residual(ref_config):
    res = []
    for dt in (2e-3, 1e-3):
        cfg = replace(ref_config, dt=dt, t_end=1.0)
        res.append(mild_residual(solve(Gaussian(1.0, 1.0), cfg, every_step_times(cfg, 1.0)), 1.0))
    lin = replace(ref_config, nonlinear=False, dt=0.05, t_end=1.0)
    lin_res = mild_residual(solve(Gaussian(1.0, 1.0), lin, every_step_times(lin, 1.0)), 1.0)
    ok = res[1] < res[0] and lin_res <= 1e-8
    record(8, ok, f"residual dt=2e-3 {res[0]:.2e} -> dt=1e-3 {res[1]:.2e}; linear {lin_res:.1e}")
    assert ok


def test_criterion_09_oleinik(eps_run):
    ol = vf.oleinik_check(eps_run, t0=1.0)
    params = NWaveParams(1.0, 2.0)
    seq = nwave_sequence(params, Grid(2**14, 8.0), [1.0, 2.0, 4.0])
    sat = vf.oleinik_check(seq, t0=1.0, q=2.0, method="difference")
    ok = ol.ratio <= 1.01 and abs(sat.ratio - 1) <= 1e-8
    record(9, ok, f"max t sup d/dx u^(q-1) = {ol.ratio:.4f} (<= 1.01); N-wave ratio {sat.ratio:.12f}")
    assert ok


def test_criterion_10_bounds_and_energy(ref_run, ref_config):
    sub = ref_run.times[np.isin(ref_run.times, REF_SNAPS)]
    idx = [ref_run.index(t) for t in sub]
    hard = True
    for p in vf.P_LIST:
        norms = np.array([vf.lp_norm(ref_run.values[i], ref_run.grid.dx, p) for i in idx])
        hard &= bool(np.all(norms <= vf.lp_bound(sub, p, 1.0, Q) * (1 + 1e-12)))
    vmax = ref_run.values[idx].max(axis=1)
    hard &= bool(np.all(vmax <= vf.max_bound(sub, 1.0, Q)))
    eb = vf.energy_budget(ref_run, 1.0, 16.0)
    lin = solve(Gaussian(1.0, 1.0), replace(ref_config, nonlinear=False, t_end=1.001),
                [0.999, 1.0, 1.001])
    ident = vf.energy_identity_residual(lin, 1.0, form="printed")
    ok = hard and eb.passed and ident <= 1e-4
    record(10, ok, f"(iii)(iv) bounds {hard}; energy budget {eb.lhs:.4f} <= {eb.rhs:.4f}: {eb.passed}; "
                   f"energy identity residual {ident:.3e} (tol 1e-4)")
    assert ok


def test_criterion_11_entropy(early_run):
    params = NWaveParams(1.0, 2.0)
    seq = nwave_sequence(params, Grid(2**16, 4.0), np.linspace(0.5, 2.5, 201))
    rng = np.random.default_rng(11)
    bumps = [Bump.random(rng, (0.5, 2.5), (-0.5, 2.5)) for _ in range(5)]
    inviscid = min(entropy_residual(seq, k, b, q=2.0).relative
                   for k in (0.0, 0.25, 0.5, 1.0) for b in bumps)
    _, prof = expansion_shock(2.0)
    shock = sample_sequence(prof, Grid(2**14, 4.0), np.linspace(0.5, 2.5, 201))
    counter = entropy_residual(shock, 0.5, Bump(1.5, 0.75, 0.5, 0.5), q=2.0).value
    rng = np.random.default_rng(12)
    vbumps = [Bump.random(rng, (0.5, 1.5), (-4.0, 4.0)) for _ in range(5)]
    viscous = min(entropy_residual(early_run, k, b, viscous=True).relative
                  for k in (0.0, 0.05, 0.1, 0.2) for b in vbumps)
    ok = inviscid >= -1e-4 and counter < 0 and viscous >= -1e-4
    record(11, ok, f"min inviscid {inviscid:.2e}, expansion shock {counter:.3e}, min viscous {viscous:.2e}")
    assert ok


def test_criterion_12_asymptotics(ref_run, flagship):
    params = NWaveParams(1.0, Q)
    sub = np.array(REF_SNAPS)
    d = {p: np.array([vf.asymptotic_distance(ref_run.values[ref_run.index(t)], t, p, params, ref_run.grid)
                      for t in sub]) for p in (1.0, 2.0)}
    ratio = d[1.0][-1] / d[1.0][0]
    late = sub >= 2
    mono = {p: bool(np.all(np.diff(d[p][late]) <= 0)) for p in d}
    lam = 2.0
    s = np.array([0.5, 1.0])
    cfg = SolverConfig(Q, flagship, Grid(2**13, 100.0), dt=1e-3, t_end=16.0)
    ur = solve_rescaled(Gaussian(1.0, 1.0), cfg, lam, s)
    fine = solve(Gaussian(1.0, 1.0), replace(cfg, grid=Grid(2**14, 200.0)), lam**Q * s)
    gap = max(np.sum(np.abs(ur.values[i] - lam * fine.values[i][::2])) * cfg.grid.dx for i in range(2))
    ok = ratio <= 0.5 and all(mono.values()) and gap <= 5e-3
    record(12, ok, f"d1(16)/d1(1) = {ratio:.3f} (<= 0.5); d_p non-increasing from t=2: {mono}; "
                   f"rescaling L1 gap {gap:.1e} (<= 5e-3)")
    assert ok


def test_criterion_13_vanishing_diffusion(flagship):
    cfg = SolverConfig(Q, flagship, Grid(4096, 25.0), dt=1e-3, t_end=2.0)
    ts = np.round(np.arange(0.4, 1.6 + 1e-9, 0.01), 12)
    trajs = {lam: solve_rescaled(Gaussian(1.0, 1.0), cfg, lam, ts) for lam in (1, 2, 4, 8)}
    vd = vf.vanishing_diffusion(trajs, 0.0, Bump(1.0, 0.0, 0.5, 8.0))
    ok = vd.passed(0.1)
    record(13, ok, f"fitted slope {vd.slope:.3f} vs q-1-alpha = {vd.expected:.3f} (+- 0.1)")
    assert ok


def test_criterion_14_tail_control(ref_config):
    cfg = replace(ref_config, t_end=2.0)
    snaps = [1e-3, 2e-3, 3e-3, 0.25, 0.5, 1.0, 2.0]
    runs = {lam: solve_rescaled(Gaussian(1.0, 1.0), cfg, lam, snaps) for lam in (1, 2, 4, 8)}
    R_list = (2.0, 5.0, 10.0)
    C = vf.calibrate_tail_constant(runs[1], R_list, u0=Gaussian(1.0, 1.0))
    below = all(vf.tail_control(runs[lam], R, lam, C, u0=Gaussian(1.0, 1.0)).passed
                for lam in (2, 4, 8) for R in R_list)
    init_gap = max(abs(vf.initial_tail_limit(runs[1], R)
                       - vf.tail_mass(runs[1].initial.values, runs[1].grid, R)) for R in (0.5, 1.0))
    ok = below and init_gap <= 1e-3
    record(14, ok, f"calibrated C = {C:.4f}; all tails below bound: {below}; initial-limit gap {init_gap:.1e}")
    assert ok
