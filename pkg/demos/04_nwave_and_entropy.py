"""
The N-wave and entropy inequalities
===================================

The inviscid N-wave U_M(t,x) = (x/t)^(1/(q-1)) on 0 < x < r(t) is the
entropy solution with a single admissible shock.  We check the Kruzhkov
inequality against smooth bumps, and see an expansion shock fail it.
"""
import numpy as np

from fraccl import Bump, Grid, NWaveParams, nwave_lp_norm
from fraccl.entropy_ref import entropy_residual, expansion_shock, nwave_sequence, sample_sequence

par = NWaveParams(M=1.0, q=2.0)
print("radius r(1) = %.4f, peak = %.4f, shock speed = %.4f"
      % (par.radius(1.0), par.peak(1.0), par.shock_speed(1.0)))
for p in (1, 2, np.inf):
    print(f"||U(4)||_{p} = {nwave_lp_norm(4.0, p, par):.5f}")

# %% random bumps around the shock: the inequality holds up to quadrature error
seq = nwave_sequence(par, Grid(2**15, 4.0), np.linspace(0.5, 2.5, 161))
rng = np.random.default_rng(1)
for _ in range(3):
    b = Bump.random(rng, (0.5, 2.5), (-0.5, 2.5))
    vals = [entropy_residual(seq, k, b, q=2.0).relative for k in (0.0, 0.5, 1.0)]
    print("bump at (%.2f, %.2f): relative residuals" % (b.t0, b.x0), ["%+.2e" % v for v in vals])

# %% an upward jump travelling at the Rankine-Hugoniot speed is a weak
# solution, but it is not entropic
speed, prof = expansion_shock(2.0)
bad = sample_sequence(prof, Grid(2**13, 4.0), np.linspace(0.5, 2.5, 161))
print("expansion shock speed %.2f, residual %.3e (negative means violated)"
      % (speed, entropy_residual(bad, 0.5, Bump(1.5, 0.75, 0.5, 0.5), q=2.0).value))
