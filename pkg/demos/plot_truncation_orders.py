"""
Truncation order of the discrete operator
=========================================

Apply the discrete operator to ``t^beta`` and compare with the exact Caputo
derivative ``Gamma(beta+1)/Gamma(beta+1-alpha) t^(beta-alpha)``.
"""

from fracstep.caputo import truncation_order_study

# Smooth history: order 4 - alpha on a uniform mesh.
for alpha in (0.3, 0.5, 0.8):
    rows = truncation_order_study(4.0, alpha, 1.0, [16, 32, 64])
    print(f"t^4, alpha = {alpha}: orders", [round(r.max_order, 3) for r in rows[1:]], "target", 4 - alpha)

# %%
# t^(2+alpha) has unbounded third derivatives at t = 0. On a uniform mesh the
# largest error sits next to t = 0 and scales like tau^(beta - alpha) = tau^2,
# while the error at t = 1 still converges at 4 - alpha.
rows = truncation_order_study(2.5, 0.5, 1.0, [16, 32, 64, 128])
print("\nt^2.5, alpha = 0.5, uniform:")
for r in rows:
    print(f"  K_t = {r.K_t:4d}  max err {r.max_error:.3e}  final err {r.final_error:.3e}  "
          f"orders {r.max_order and round(r.max_order, 3)} / {r.final_order and round(r.final_order, 3)}")

# %%
# Grading with r = (4 - alpha)/alpha moves nodes towards t = 0; the order then
# approaches 4 - alpha from below as K_t grows.
rows = truncation_order_study(2.5, 0.5, 7.0, [64, 128, 256, 512])
print("\nt^2.5, alpha = 0.5, r = 7:", [round(r.max_order, 3) for r in rows[1:]])
