"""Config-driven runs: ``python -m fraccl {kernel,solve,rescale,verify,sweep}``.

Config files are flat ``key = value`` lines; ``#`` starts a comment.  Lists
are comma separated.  Every key may be overridden from the environment as
``FRACCL_<KEY>`` with dots turned into underscores (``FRACCL_INITIAL_MASS``).

=================  ==========================================  =============
key                meaning                                     default
=================  ==========================================  =============
q                  flux exponent, > 1                          required
alpha              Weyl-Marchaud order; selects d/dx D^alpha   (alpha or beta)
beta, gamma        Riesz-Feller order and skewness             gamma = 0
n                  grid points (power of two)                  4096
half_width         box half-width L                            100
dt, t_end          time step, final time                       1e-3, 16
scheme             etd1 or etd2                                etd2
dealias            2/3-rule dealiasing (true/false)            true
delta, epsilon     flux regularisation, data shift             0, 0
snapshot_times     output times                                1,2,4,8,16
lambda_list        scaling factors for rescale/sweep           1
radius             R for local and tail diagnostics            10
initial.kind       gaussian or box                             gaussian
initial.mass       total mass M                                1
initial.width      Gaussian std or box width                   1
=================  ==========================================  =============
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io
from .entropy_ref import Bump, NWaveParams, entropy_residual
from .fractional_ops import FractionalOperatorSpec, Grid, check_riesz_feller_range
from .kernel import expected_time_slope, kernel_field, tail_decay_exponent, time_decay_exponent
from .solver import Box, Gaussian, SolverConfig, Trajectory, solve, solve_rescaled
from . import verification as vf

COMMANDS = ("kernel", "solve", "rescale", "verify", "sweep")
ENV_PREFIX = "FRACCL_"

KEYS = {
    "q": None, "alpha": None, "beta": None, "gamma": "0", "n": "4096",
    "half_width": "100", "dt": "1e-3", "t_end": "16", "scheme": "etd2",
    "dealias": "true", "delta": "0", "epsilon": "0",
    "snapshot_times": "1,2,4,8,16", "lambda_list": "1", "radius": "10",
    "initial.kind": "gaussian", "initial.mass": "1", "initial.width": "1",
}

# constants frozen from the calibration run (q = 1.3, alpha = 0.5)
FROZEN = {"derivative_C": 0.40}


class ConfigError(ValueError):
    pass


@dataclass
class RunOptions:
    snapshot_times: list
    lambda_list: list
    radius: float
    initial: object
    warnings: list = field(default_factory=list)


def _parse_lines(text):
    out = {}
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {num}: expected 'key = value', got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in KEYS:
            raise ConfigError(f"line {num}: unknown key {k!r}")
        if k in out:
            raise ConfigError(f"line {num}: duplicate key {k!r}")
        out[k] = v
    return out


def _env_overrides(env):
    out = {}
    for k in KEYS:
        name = ENV_PREFIX + k.replace(".", "_").upper()
        if name in env:
            out[k] = env[name]
    return out


def _num(values, key, cast=float):
    try:
        return cast(values[key])
    except ValueError:
        raise ConfigError(f"{key}: cannot read {values[key]!r} as {cast.__name__}") from None


def _list(values, key):
    try:
        return [float(s) for s in values[key].split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"{key}: expected a comma separated list of numbers") from None


def _bool(values, key):
    v = values[key].lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {values[key]!r}")


def parse_config(text, env=None):
    """Validated ``(SolverConfig, RunOptions)`` from config text."""
    given = _parse_lines(text)
    given.update(_env_overrides(os.environ if env is None else env))
    v = {k: d for k, d in KEYS.items() if d is not None}
    v.update(given)
    if "q" not in v:
        raise ConfigError("q is required")
    has_a, has_b = "alpha" in v, "beta" in v
    if has_a == has_b:
        raise ConfigError("give exactly one of alpha (flagship operator) or beta (Riesz-Feller)")
    q = _num(v, "q")
    if has_a:
        alpha = _num(v, "alpha")
        if not 0 < alpha < 1:
            raise ConfigError(f"alpha must satisfy 0 < alpha < 1, got {alpha}")
        if "gamma" in given:
            raise ConfigError("gamma is only used with beta")
        spec = FractionalOperatorSpec.flagship(alpha)
    else:
        beta, gamma = _num(v, "beta"), _num(v, "gamma")
        try:
            check_riesz_feller_range(beta, gamma)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        spec = FractionalOperatorSpec.riesz_feller_op(beta, gamma)
    n = _num(v, "n", int)
    if n < 8 or n & (n - 1):
        raise ConfigError(f"n must be a power of two >= 8, got {n}")
    L = _num(v, "half_width")
    if not L > 0:
        raise ConfigError("half_width must be positive")
    try:
        cfg = SolverConfig(q=q, spec=spec, grid=Grid(n, L), dt=_num(v, "dt"),
                           t_end=_num(v, "t_end"), scheme=v["scheme"],
                           dealias=_bool(v, "dealias"), delta=_num(v, "delta"),
                           epsilon=_num(v, "epsilon"))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    snaps = sorted(_list(v, "snapshot_times"))
    if not snaps or snaps[0] <= 0 or snaps[-1] > cfg.t_end:
        raise ConfigError("snapshot_times must lie in (0, t_end]")
    lams = _list(v, "lambda_list")
    if not lams or min(lams) < 1:
        raise ConfigError("lambda_list entries must be >= 1")
    radius = _num(v, "radius")
    if not 0 < 2 * radius < L:
        raise ConfigError("radius must satisfy 0 < 2 radius < half_width")
    kind = v["initial.kind"]
    mass, width = _num(v, "initial.mass"), _num(v, "initial.width")
    if not (mass > 0 and width > 0):
        raise ConfigError("initial.mass and initial.width must be positive")
    if kind == "gaussian":
        init = Gaussian(mass, width)
    elif kind == "box":
        init = Box(mass, width)
    else:
        raise ConfigError(f"initial.kind must be gaussian or box, got {kind!r}")
    opts = RunOptions(snaps, lams, radius, init)
    if not cfg.subcritical:
        opts.warnings.append(
            f"supercritical: q = {q} >= {cfg.order:g} is outside the subcritical range 1 < q < order")
    return cfg, opts


# ---------------------------------------------------------------------------
# commands


def _plot(out, plots):
    io.write_plot_script(out / "plot.gp", plots)


def cmd_kernel(cfg, opts, out, seed, workers):
    spec, grid = cfg.spec, cfg.grid
    k = kernel_field(1.0, spec, grid)
    io.write_csv(out / "kernel.csv", ["x", "K"], zip(grid.x, k.field.values))
    rows, summary = [], vf.Summary()
    summary.add("kernel mass", abs(k.mass - 1) <= 1e-6, k.mass, 1.0)
    summary.add("kernel positivity", k.positivity_defect <= 1e-6, k.positivity_defect, 1e-6)
    for p, theta, j in ((math.inf, 0.0, 0), (2.0, 0.5, 0), (2.0, 0.5, 1), (1.0, 0.0, 1)):
        slope = time_decay_exponent(p, theta, bool(j), spec, grid)
        want = expected_time_slope(p, theta, j, spec.order)
        rows.append((p, theta, j, slope, want))
        summary.add(f"time decay p={p:g} theta={theta:g} j={j}", abs(slope - want) <= 0.02, slope, want)
    io.write_csv(out / "decay_fits.csv", ["p", "theta", "j", "slope", "expected"], rows)
    tail = tail_decay_exponent(0.5, spec)
    summary.add("tail decay theta=0.5", abs(tail + 1.5) <= 0.15, tail, -1.5)
    _plot(out, [("kernel.csv", 1, [2], "K(1,x)", False)])
    return summary


def _snapshot_csvs(traj, out, stem, radius):
    io.write_trajectory(out / f"{stem}.csv", traj)
    io.write_records(out / f"{stem}_diagnostics.csv", vf.diagnose(traj, R=radius))


def cmd_solve(cfg, opts, out, seed, workers):
    traj = solve(opts.initial, cfg, opts.snapshot_times)
    _snapshot_csvs(traj, out, "trajectory", opts.radius)
    s = vf.Summary()
    u0 = traj.initial.values
    s.add("mass drift", traj.max_abs_mass_drift <= 1e-8 * abs(traj.initial_mass),
          traj.max_abs_mass_drift, 1e-8 * abs(traj.initial_mass))
    tol = 1e-6 * np.max(np.abs(u0))
    s.add("max principle", traj.values.min() >= u0.min() - tol and traj.values.max() <= u0.max() + tol,
          traj.values.max(), u0.max())
    ncols = len(opts.snapshot_times)
    _plot(out, [("trajectory.csv", 1, list(range(2, ncols + 2)), "u(t,x)", False),
                ("trajectory_diagnostics.csv", 1, [5], "max u", True)])
    return s


def _rescaled_run(args):
    cfg, init, lam, times = args
    return solve_rescaled(init, cfg, lam, times)


def _map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_rescale(cfg, opts, out, seed, workers):
    jobs = [(cfg, opts.initial, lam, opts.snapshot_times) for lam in opts.lambda_list]
    s = vf.Summary()
    for lam, traj in zip(opts.lambda_list, _map(_rescaled_run, jobs, workers)):
        io.write_trajectory(out / f"rescaled_lambda_{lam:g}.csv", traj)
        drift = abs(traj.initial_mass - opts.initial.mass)
        s.add(f"rescaled mass lambda={lam:g}", drift <= 1e-8, traj.initial_mass, opts.initial.mass)
    _plot(out, [(f"rescaled_lambda_{lam:g}.csv", 1, [2], f"u_lambda, lambda={lam:g}", False)
                for lam in opts.lambda_list])
    return s


def cmd_sweep(cfg, opts, out, seed, workers):
    jobs = [(cfg, opts.initial, lam, opts.snapshot_times) for lam in opts.lambda_list]
    params = NWaveParams(opts.initial.mass, cfg.q)
    rows = []
    s = vf.Summary()
    for lam, traj in zip(opts.lambda_list, _map(_rescaled_run, jobs, workers)):
        io.write_records(out / f"diagnostics_lambda_{lam:g}.csv", vf.diagnose(traj, R=opts.radius))
        for t, u in zip(traj.times, traj.values):
            d = [vf.asymptotic_distance(u, t, p, params, traj.grid, mass_tol=1e-6) for p in (1.0, 2.0)]
            rows.append((lam, t, *d))
        s.add(f"mass lambda={lam:g}", traj.max_abs_mass_drift <= 1e-8, traj.max_abs_mass_drift, 1e-8)
    io.write_csv(out / "distances.csv", ["lambda", "s", "d1", "d2"], rows)
    _plot(out, [("distances.csv", 1, [3, 4], "d_p against lambda", True)])
    return s


def _dense_times(snaps, step=0.25):
    lo, hi = snaps[0], snaps[-1]
    dense = np.arange(lo, hi + 1e-9, step)
    return sorted(set(np.round(np.concatenate([dense, snaps]), 12).tolist()))


def cmd_verify(cfg, opts, out, seed, workers):
    """Every item of the a priori estimates on one run, plus the Oleinik
    bound on an epsilon-shifted copy and seeded viscous entropy checks."""
    s = vf.Summary()
    M, q = opts.initial.mass, cfg.q
    times = _dense_times(opts.snapshot_times)
    traj = solve(opts.initial, cfg, times)
    _snapshot_csvs(traj, out, "trajectory", opts.radius)
    recs = vf.diagnose(traj, opts.snapshot_times, R=opts.radius)
    io.write_records(out / "diagnostics.csv", recs)

    drift = max(abs(r.mass - traj.initial_mass) for r in recs)
    s.add("(i) mass conservation", drift <= 1e-8 * M, drift, 1e-8 * M)

    eps = 1e-2 * float(np.max(traj.initial.values))
    teps = solve(opts.initial, replace(cfg, epsilon=eps), opts.snapshot_times)
    ol = vf.oleinik_check(teps, t0=opts.snapshot_times[0])
    s.add("(ii) Oleinik t sup d/dx u^(q-1)", ol.passed, ol.ratio, 1.01)

    vmax = np.array([r.max_value for r in recs])
    bmax = vf.max_bound(opts.snapshot_times, M, q)
    vmin = min(float(np.min(traj.values)), 0.0)
    s.add("(iii) upper bound", bool(np.all(vmax <= bmax)) and vmin >= -1e-6 * np.max(traj.initial.values),
          float(np.max(vmax / bmax)), 1.0)

    sub = _subset(traj, opts.snapshot_times)
    if sub.times[-1] >= 10 * sub.times[0]:
        for p, d in vf.decay_exponents(sub, M=M).items():
            s.add(f"(iv) L^p decay p={p:g}", d.passed, float(np.max(d.norms / d.bounds)), 1.0)
    else:
        for p in vf.P_LIST:
            b = vf.lp_bound(sub.times, p, M, q)
            nrm = np.array([r.lp_norms[p] for r in recs])
            s.add(f"(iv) L^p bound p={p:g}", bool(np.all(nrm <= b)), float(np.max(nrm / b)), 1.0)

    C = FROZEN["derivative_C"] if _is_reference(cfg) else vf.calibrate_derivative_constant(sub, M)
    dc = vf.derivative_check(sub, C, R=opts.radius, M=M)
    s.add("(v) derivative bound", bool(np.all(dc.sup_dx <= dc.sup_bound)),
          float(np.max(dc.sup_dx / dc.sup_bound)), 1.0)
    s.add("(vi) local W11 bound", bool(np.all(dc.w11 <= dc.w11_bound)),
          float(np.max(dc.w11 / dc.w11_bound)), 1.0)

    eb = vf.energy_budget(traj, times[0], times[-1])
    s.add("(vii) energy budget", eb.passed, eb.lhs, eb.rhs)

    rng = np.random.default_rng(seed)
    ts = np.round(np.arange(0.5, 1.5 + 1e-9, 0.0025), 12)
    tloc = solve(opts.initial, replace(cfg, t_end=max(cfg.t_end, 1.5)), ts)
    worst = math.inf
    for k in (0.0, 0.05, 0.1):
        for _ in range(3):
            b = Bump.random(rng, (0.5, 1.5), (-4.0, 4.0))
            worst = min(worst, entropy_residual(tloc, k, b, viscous=True).relative)
    s.add("viscous entropy inequality", worst >= -1e-4, worst, -1e-4)

    _plot(out, [("trajectory.csv", 1, list(range(2, len(times) + 2, 8)), "u(t,x)", False),
                ("diagnostics.csv", 1, [5, 7], "decay", True)])
    return s


def _is_reference(cfg):
    return abs(cfg.q - 1.3) < 1e-12 and cfg.spec.kind == "dx_weyl_marchaud" and abs(cfg.spec.alpha - 0.5) < 1e-12


def _subset(traj, times):
    idx = [traj.index(t) for t in times]
    return Trajectory(traj.config, traj.times[idx], traj.values[idx], traj.initial,
                         traj.initial_mass, traj.max_abs_mass_drift)


HANDLERS = {"kernel": cmd_kernel, "solve": cmd_solve, "rescale": cmd_rescale,
            "verify": cmd_verify, "sweep": cmd_sweep}


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: Path
    out: Path
    seed: int = 0
    workers: int = 1
    check_only: bool = False


def reference_config_text() -> str:
    return (Path(__file__).parent / "data" / "reference.cfg").read_text()


def run(manifest: RunManifest) -> int:
    """Execute one command; returns 0 iff every enabled check passed."""
    if manifest.command not in COMMANDS:
        print(f"unknown command {manifest.command!r}", file=sys.stderr)
        return 2
    try:
        text = (reference_config_text() if str(manifest.config) == "reference"
                else Path(manifest.config).read_text())
        cfg, opts = parse_config(text)
    except (OSError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    for w in opts.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if manifest.check_only:
        print(f"config ok: q={cfg.q} order={cfg.order:g} n={cfg.grid.n} L={cfg.grid.half_width}")
        return 0
    out = Path(manifest.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as e:
        print(f"output directory not writable: {e}", file=sys.stderr)
        return 2
    try:
        summary = HANDLERS[manifest.command](cfg, opts, out, manifest.seed, manifest.workers)
    except Exception as e:  # noqa: BLE001 - reported with a nonzero status
        (out / "summary.txt").write_text(f"ERROR {type(e).__name__}: {e}\npartial results may be present\n")
        print(f"run failed: {e}", file=sys.stderr)
        return 1
    summary.notes.extend(opts.warnings)
    (out / "summary.txt").write_text(summary.render())
    sys.stdout.write(summary.render())
    return 0 if summary.all_passed else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="fraccl", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", default="reference",
                    help="config file, or 'reference' for the bundled reference run")
    ap.add_argument("--out", default="fraccl_out", help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized test functions")
    ap.add_argument("--workers", type=int, default=1, help="parallel runs in a sweep")
    ap.add_argument("--check-only", action="store_true", help="validate the config and exit")
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    return run(RunManifest(a.command, Path(a.config), Path(a.out), a.seed, a.workers, a.check_only))
