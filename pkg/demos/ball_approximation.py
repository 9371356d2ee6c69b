"""
Approximating a function on the unit disk
=========================================

Combine a zonal least-squares fit on the boundary circle with a cut-off
quasi-interpolant inside. The result is a finite sum of thin-plate spline
translates whose centres all lie in the closed disk.
"""
import numpy as np

from polyapprox.ball_scheme import build_ball_approximant, measured_error
from polyapprox.kernels import KernelSpec

spec = KernelSpec(2, 2)
f = lambda X: X[:, 0] ** 2 + np.cos(np.pi * X[:, 1])

appr = build_ball_approximant(f, spec, eps=0.05)
diag = appr.diagnostics

# --- Error budget ---
print(f"sphere fit: {diag['n_sphere_centers']} centres, residual {diag['sphere_residual']:.2e}"
      f" (budget {diag['sphere_budget']:.2e})")
print(f"collar width delta = {diag['delta']}, max |sigma r| on collar {diag['collar_max']:.2e}")
print(f"grid spacing h = {diag['h']}")
for step in diag["refinements"]:
    print(f"  h = {step['h']:.4f}: {step['n_sites']} sites, sup error {step['sup_error']:.4f}")

# --- Result ---
print("centres:", len(appr.all_centers), " max |y| =", appr.max_center_norm())
print("sup error on a 201 x 201 grid:", f"{measured_error(appr, f, 201):.4f}")

x = np.array([[0.0, 0.0], [0.5, 0.5], [0.0, 1.0]])
for xi, si in zip(x, appr(x)):
    print(f"  s({xi}) = {si: .4f}   f = {f(xi[None])[0]: .4f}")
