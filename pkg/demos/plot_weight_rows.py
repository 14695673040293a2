"""
Weight rows of the discrete Caputo operator
===========================================

The discrete derivative at level ``n`` is ``sum_j p_j u^{n-j} / Gamma(2 - alpha)``.
This script looks at the rows on a uniform and on a graded mesh.
"""

import numpy as np

from fracstep.analysis import census_text, sign_census
from fracstep.mesh import build_temporal_mesh
from fracstep.weights import assemble_row, uniform_coefficients

# On a uniform mesh the rows scale out: p_j = tau^(-alpha) g_j with g_j independent of tau.
alpha = 0.5
g = uniform_coefficients(alpha, 12)
print("g_j on a uniform mesh, alpha = 0.5, n = 12:")
print(np.array2string(g, precision=5))
print("g_0 closed form:", 1 / 3 + 1 / (2 - alpha) + 1 / ((2 - alpha) * (3 - alpha)))
print("sum of g_j:", g.sum())

# Only g_0 and g_2 are positive; everything else is negative.
print("signs:", "".join("+" if v > 0 else "-" for v in g))

# %%
# On a graded mesh the pattern is different and depends on the level.
mesh = build_temporal_mesh(1.0, 50, 4.0)
row = assemble_row(mesh, alpha, 50)
print("\ngraded mesh r = 4, level 50, largest |p_j| at j =", int(np.argmax(np.abs(row.p))))
print("row sum relative to max |p_j|:", abs(row.p.sum()) / np.abs(row.p).max())

# %%
# The sign census counts positive and negative coefficients per level.
# The default evaluates the closed-form weights in double precision,
# "stable" gives the signs of the exactly computed coefficients.
for method in ("closed", "stable"):
    print(f"\nmethod = {method}")
    print(census_text(sign_census(mesh, alpha, [10, 20, 30, 40, 50], method=method)), end="")
