"""From truncated fits to the kernel interpolant.

For H^1 weights on the circle the limit kernel has the closed form
cosh((1 - 2|t|) / 2) / (2 sinh(1/2)) for |t| <= 1/2.  The truncated
interpolants f_p approach the kernel interpolant as p grows.  The gap is
driven by the tail of the kernel series times the size of the kernel
coefficients, which are large for noisy data on a random set.
"""

# %%
import numpy as np

from minnorm import BasisSpec, kernel_interpolant, min_norm_interpolant, tail_bound, torus

spec = BasisSpec.torus_sobolev(1, 1.0)
rng = np.random.default_rng(1)
x = rng.random((12, 1))
y = np.sin(2 * np.pi * x[:, 0]) + 0.3 * rng.standard_normal(12)

# %% closed-form kernel values
t = np.linspace(-0.5, 0.5, 5)
print("K(t):", np.round(torus.green_kernel_1d(t), 4))

# %% convergence in p
f_inf = kernel_interpolant(spec, x, y)
grid = np.arange(4096) / 4096
for p in (15, 63, 255, 1023):
    f_p = min_norm_interpolant(spec, x, p, y)
    gap = np.max(np.abs(f_p.on_grid(4096) - f_inf(grid[:, None])))
    print(f"p={p:5d}  sup |f_p - f_inf| = {gap:.2e}   tail bound {tail_bound(spec, p):.2e}")
print("sum |c_k| of the kernel interpolant:", f"{np.sum(np.abs(f_inf.kernel_coefficients)):.1e}")
