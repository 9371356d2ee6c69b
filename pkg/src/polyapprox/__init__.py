"""Polyharmonic spline approximation: B-splines, quasi-interpolation,
zonal fits on spheres and a Gegenbauer fundamentality analyser."""
from .kernels import KernelSpec, eval_phi, eval_phi_scaled, eval_psi, eval_psi_scaled
from .stencil import Stencil, build_stencil, moment
from .bspline import (BsplineCalibration, CalibrationError, calibrate, eval_B, eval_B_h,
                      eval_B_h_stencil, eval_raw)
from .quasi_interp import GridFunction, convergence_study, s_h, s_h_domain
from .sphere_approx import SphereFit, eval_sphere_fit, fit_sphere, fit_sphere_adaptive
from .gegenbauer import (AccuracyWarning, CoeffReport, GegenbauerIndex, c_const, coeff_F,
                         coeff_G, coeff_numeric, degenerate_radii, fundamentality_report,
                         gegenbauer_poly, tau, tau_exact)
from .ball_scheme import (BallControls, DomainApproximant, RefitRequired, build_ball_approximant,
                          ResourceLimitError, cutoff, eval_approximant, extend, find_delta,
                          measured_error)

__version__ = "0.1.0"
