"""
Diagnostics along a run
=======================

Per-snapshot diagnostics, L^p decay against the N-wave bounds, the energy
budget, and the distance to the N-wave in similarity variables.
"""
import numpy as np

from fraccl import FractionalOperatorSpec, Gaussian, Grid, NWaveParams, SolverConfig, solve
from fraccl import verification as vf

flag = FractionalOperatorSpec.flagship(0.5)
cfg = SolverConfig(q=1.3, spec=flag, grid=Grid(2**12, 100.0), dt=2e-3, t_end=16.0)
tr = solve(Gaussian(), cfg, [1.0, 2.0, 4.0, 8.0, 16.0])

print("  ".join(f"{c:>10s}" for c in vf.DiagnosticsRecord.COLUMNS))
for rec in vf.diagnose(tr, R=10.0):
    print("  ".join(f"{v:10.4g}" for v in rec.row()))

# %% decay rates: the hard bound must hold, the slope should be no steeper
for p, d in vf.decay_exponents(tr).items():
    print(f"p={p}: slope {d.slope:+.4f}  hard bound ok {d.hard_ok}  rate ok {d.rate_ok}")

# %% energy budget over [1, 16]
eb = vf.energy_budget(tr, 1.0, 16.0)
print("energy budget lhs %.4f <= rhs %.4f : %s" % (eb.lhs, eb.rhs, eb.passed))

# %% distance to U_M: it barely moves by t = 16, because the effective
# diffusion only fades like t^((q-1-alpha)/q) = t^(-0.15)
par = NWaveParams(1.0, 1.3)
print("d_1(t) =", np.round(vf.distance_history(tr, 1, par), 4))
