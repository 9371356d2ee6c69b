"""
Polyharmonic B-splines in a few lines
=====================================

Build the discrete iterated Laplacian stencil, turn it into a localized
B-spline and check the two properties that quasi-interpolation relies on:
integer translates sum to one, and the scaled spline obeys the dilation rule.
"""
import numpy as np

from polyapprox.bspline import calibrate, eval_B, eval_B_h, eval_B_h_stencil, partition_sum
from polyapprox.stencil import build_stencil, moment, multi_indices

# --- The stencil ---
# For d=2, k=2 the stencil is the 13-point biharmonic operator.
st = build_stencil(2, 2)
print("stencil size:", len(st), "  sum |c|:", st.abs_sum())
for z, c in sorted(st.coeffs.items()):
    print("  ", z, c)

# It annihilates every polynomial of degree at most 2k-1 = 3.
print("all moments up to order 3 vanish:",
      all(moment(st, a) == 0 for a in multi_indices(2, 3)))

# --- Normalization ---
# kappa rescales the stencil applied to phi into a function that sums to one.
cal = calibrate(2, 2)
print(f"kappa = {cal.kappa:.10f}  (8 pi = {8 * np.pi:.10f})")
print(f"M_hat = {cal.M_hat:.4f}  bound on sum_z |B(x - z)|")

# --- Decay ---
r = np.array([0.0, 1.0, 2.0, 4.0, 8.0, 16.0])
vals = eval_B(2, 2, np.c_[r, np.zeros_like(r)], cal)
for ri, v in zip(r, vals):
    print(f"  B({ri:4.1f}, 0) = {v: .3e}")

# --- Partition of unity ---
rng = np.random.default_rng(0)
x = rng.uniform(-3, 3, size=(20, 2))
print("max |sum_z B(x - z) - 1| at 20 random points:",
      f"{np.max(np.abs(partition_sum(2, 2, x, cal) - 1)):.1e}")

# --- Dilation ---
h = 0.37
y = rng.uniform(-1, 1, size=(5, 2))
gap = np.max(np.abs(eval_B_h(2, 2, h, y, cal) - eval_B_h_stencil(2, 2, h, y, cal)))
print(f"dilation identity at h={h}: max gap {gap:.1e}")
