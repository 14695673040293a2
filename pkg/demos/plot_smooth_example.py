"""
Temporal convergence for a smooth solution
==========================================

Exact solution ``u = t^5 sin x`` on ``[0, pi]``. With ``K_x = 10000`` the
spatial error is small enough to expose the temporal order ``4 - alpha`` on
coarse time grids; on the finest grids the spatial error starts to show.
"""

import time

from fracstep.analysis import report_text, spatial_study, temporal_study
from fracstep.problems import example_smooth

for rho in (1.0, 30.0):
    for alpha in (0.3, 0.6, 0.8):
        start = time.perf_counter()
        rep = temporal_study(example_smooth(alpha, rho).spec, [10, 20, 40, 80, 160], 10000)
        print(report_text(rep), f"({time.perf_counter() - start:.1f} s)\n")

# %%
# The spatial order is 2; fix K_t = 1000 so the temporal error is negligible.
rep = spatial_study(example_smooth(0.6).spec, [10, 20, 40, 80, 160], 1000)
print(report_text(rep))
