"""Antipodal pairs and the NTK Gram matrix.

The NTK series on the sphere skips odd degrees above one, so the Gram
matrix of a set made of antipodal pairs has a null vector that is odd
under x -> -x.  With only a few pairs the kernel still interpolates.
"""

# %%
import numpy as np

from minnorm import BasisSpec, kernel_interpolant, kernel_matrix
from minnorm.sampling import SamplingPlan, generate
from minnorm.sphere import count_symmetric_points

spec = BasisSpec.ntk(3)

# %% fully symmetric: 7 pairs
x = generate(SamplingPlan("sphere", 3, "symmetric-augment", 14, seed=0, pairs=7))
K = kernel_matrix(spec, None, x)
lam, vec = np.linalg.eigh(K)
u = vec[:, 0]
print(f"{count_symmetric_points(x)} pairs: lambda_min / trace = {lam[0] / np.trace(K):.1e}")
print("null vector parity error:", np.max(np.abs(u[:7] + u[7:])))

# %% three pairs among 20 points
x = generate(SamplingPlan("sphere", 3, "symmetric-augment", 20, seed=1, pairs=3))
y = x[:, 0] + np.exp(x[:, 2] ** 2)
g = kernel_interpolant(spec, x, y)
print(f"{count_symmetric_points(x)} pairs: interpolation residual {np.max(np.abs(g(x) - y)):.1e}")
