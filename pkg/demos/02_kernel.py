"""
The heat kernel of the linear part
==================================

K(t) is the inverse Fourier transform of exp(t psi).  It has unit mass,
is non-negative, satisfies the semigroup law and is self-similar with
exponent 1/(1+alpha).  Half a derivative of it decays like |x|^-(3/2).
"""
import numpy as np

from fraccl import FractionalOperatorSpec, Grid, kernel_field
from fraccl.kernel import semigroup_residual, self_similarity_residual, tail_decay_exponent, time_decay_exponent

flag = FractionalOperatorSpec.flagship(0.5)
grid = Grid(2**13, 100.0)

for t in (0.1, 1.0, 4.0):
    k = kernel_field(t, flag, grid)
    print(f"t={t:4}: mass {k.mass:.15f}  positivity defect {k.positivity_defect:.1e}")

print("semigroup K(1)*K(1) vs K(2): %.1e" % semigroup_residual(1.0, 1.0, flag, grid))
print("self-similarity at t=2:      %.1e" % self_similarity_residual(2.0, flag, grid))

# %% decay of ||K(t)||_inf should be t^(-1/(1+alpha)) = t^(-2/3)
print("sup-norm time slope %.4f (expected %.4f)" % (time_decay_exponent(np.inf, 0.0, False, flag), -2 / 3))
print("tail exponent of D^(1/2) K(1): %.3f (expected -1.5)" % tail_decay_exponent(0.5, flag))

# %% the skewed kernel has its heavy tail on the right, so the mode sits left of 0
k = kernel_field(1.0, flag, grid).field
x, v = grid.x, k.values
print("mean position %.3f, mode at x = %.3f" % ((x * v).sum() * grid.dx, x[np.argmax(v)]))
print("mass in 20<x<40: %.1e   in -40<x<-20: %.1e"
      % (v[(x > 20) & (x < 40)].sum() * grid.dx, v[(x < -20) & (x > -40)].sum() * grid.dx))
