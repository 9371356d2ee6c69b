"""
When does a zonal kernel stop being fundamental?
================================================

Restrict the thin-plate spline r^2 log r to a circle of radius rho and expand
it in Chebyshev (Gegenbauer, lambda = 0) polynomials. For two special radii a
coefficient vanishes and the translates no longer span a dense set.
"""
import numpy as np

from polyapprox.gegenbauer import (coeff_numeric, degenerate_radii, degenerate_taus,
                                   fundamentality_report)
from polyapprox.kernels import KernelSpec, eval_psi_scaled

print("tau values:", [str(t) for t in degenerate_taus(2, 2)])
radii = degenerate_radii(2, 2)
print("degenerate radii:", [f"{r:.15f}" for r in radii])

# --- Coefficients near a degenerate radius ---
for j, rho in enumerate(radii):
    for factor in (1.0, 1.01):
        spec = KernelSpec(2, 2, rho * factor)
        a = [coeff_numeric(lambda t: eval_psi_scaled(spec, t), i, 0.0) for i in range(5)]
        print(f"rho = {rho * factor:.6f}: a_{j} = {a[j]: .3e}   (a_0 .. a_4 = "
              + ", ".join(f"{v: .3f}" for v in a) + ")")

# --- Reports on the unit sphere ---
for d, k in [(2, 2), (3, 2), (2, 3)]:
    rep = fundamentality_report(KernelSpec(d, k), 10)
    print(f"(d, k) = ({d}, {k}): fundamental up to j=10: {rep.fundamental}; "
          f"smallest |a_j| / max = {np.min(np.abs(rep.values)) / np.max(np.abs(rep.values)):.2e}")
