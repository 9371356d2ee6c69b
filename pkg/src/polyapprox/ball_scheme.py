"""Two-stage approximation on a closed ball by translates of ``phi_{d,k}``.

The construction, in unit-ball coordinates:

1. fit the boundary values with zonal translates centred on the sphere
   (the set ``W``) to within ``eps / (4 M)``;
2. form the residual ``r = f^e - W`` with ``f^e`` the radial extension;
3. pick a collar width ``delta`` where ``|sigma r| <= eps / (2 M)``;
4. quasi-interpolate ``r`` from the lattice sites ``h Z^d`` lying deeper
   than ``delta`` inside the ball, with ``h < delta / k`` so that every
   ``phi`` translate produced by expanding the B-splines stays in the ball.

``M`` is the calibrated bound on ``sum_z |B(x - z)|``.  A ball of radius
``rho`` is handled by rescaling to the unit ball, where the kernel becomes
``phi(rho r) / rho**(2k-d)``; the stencil annihilates the extra polynomial
term, so the B-splines are unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.signal import convolve

from .bspline import BsplineCalibration, calibrate, eval_raw
from .kernels import KernelSpec, eval_phi_scaled
from .quasi_interp import lattice_convolve, offset_count, FFT_MAX_GROUPS
from .sphere_approx import SphereFit, fit_sphere_adaptive, sphere_nodes
from .stencil import build_stencil

log = logging.getLogger(__name__)

CONTAINMENT_SLACK = 1e-12


class RefitRequired(RuntimeError):
    """The sphere stage did not make the boundary residual small enough."""


class ResourceLimitError(RuntimeError):
    """The requested accuracy needs more lattice sites than allowed."""


class ContainmentError(AssertionError):
    """An expanded centre fell outside the ball; indicates an internal bug."""


def ball_distance(x):
    """Distance from ``x`` to the closed unit ball, ``max(0, |x| - 1)``."""
    return np.maximum(0.0, np.linalg.norm(np.atleast_2d(x), axis=-1) - 1.0)


def boundary_distance(x):
    """Distance from ``x`` to the unit sphere."""
    return np.abs(np.linalg.norm(np.atleast_2d(x), axis=-1) - 1.0)


def extend(f):
    """Radial-projection extension ``f^e(x) = f(x / max(1, |x|))``."""
    def fe(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = np.linalg.norm(x, axis=1)
        return f(x / np.maximum(1.0, n)[:, None])
    return fe


def cutoff(x, delta: float, dist=ball_distance):
    """Piecewise-linear cut-off: 1 on the domain, 0 beyond distance ``delta``.

    ``dist`` returns the distance to the domain (0 inside); the default is
    the unit ball.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    r = dist(x)
    # |x| = 1 + delta can give a distance a rounding error short of delta
    return np.where(r >= delta * (1 - 1e-12), 0.0, np.clip(1.0 - r / delta, 0.0, 1.0))


def annulus_samples(d: int, delta: float, n_samples: int = 10_000) -> np.ndarray:
    """Points of ``{x : | |x| - 1 | <= delta}`` on a tensor of shells and directions."""
    n_rad = max(5, int(round(n_samples ** (1.0 / d))) // 2 * 2 + 1)
    n_dir = max(8, math.ceil(n_samples / n_rad))
    radii = np.linspace(1.0 - delta, 1.0 + delta, n_rad)
    dirs = sphere_nodes(d, n_dir)
    return (radii[:, None, None] * dirs[None]).reshape(-1, d)


def dyadic_deltas(levels: int = 12):
    return [2.0 ** -i for i in range(1, levels + 1)]


def find_delta(r, eps: float, M_hat: float, *, d: int = 2, candidates=None,
               n_samples: int = 10_000, full_output: bool = False):
    """Largest candidate ``delta`` with ``max_{A_delta} |sigma r| <= eps / (2 M_hat)``.

    ``A_delta`` is the two-sided collar around the unit sphere, sampled with
    about ``n_samples`` points.  Raises :class:`RefitRequired` if no candidate
    passes.  With ``full_output`` also returns the sampled maximum.
    """
    bound = eps / (2.0 * M_hat)
    worst = math.inf
    for delta in (candidates or dyadic_deltas()):
        X = annulus_samples(d, delta, n_samples)
        val = float(np.max(np.abs(cutoff(X, delta) * r(X))))
        worst = min(worst, val)
        if val <= bound:
            return (delta, val) if full_output else delta
    raise RefitRequired(
        f"boundary residual too large: best collar max |r| = {worst:.3g} > {bound:.3g}"
    )


@dataclass(frozen=True)
class BallControls:
    """Knobs for :func:`build_ball_approximant`."""

    sphere_start: int = 16
    sphere_max: int = 1024
    sphere_oversample: int = 2
    regularization: float | None = None
    delta_levels: int = 12
    annulus_samples: int = 10_000
    test_n: int | None = None
    h_multiple: int = 20
    max_refine: int = 3
    max_sites: int = 2_000_000

    def grid_size(self, d: int) -> int:
        if self.test_n is not None:
            return self.test_n
        return 201 if d == 2 else 41


def ball_grid(d: int, n: int) -> np.ndarray:
    """Tensor grid with ``n`` points per axis on ``[-1, 1]^d`` clipped to the unit ball."""
    g = np.linspace(-1.0, 1.0, n)
    X = np.stack(np.meshgrid(*([g] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return X[np.sum(X * X, axis=1) <= 1.0 + 1e-12]


@dataclass(frozen=True)
class DomainApproximant:
    """Result of the ball scheme, stored in unit-ball coordinates.

    The approximant on the ball of radius ``rho`` is
    ``s(X) = sum_y alpha_y phi~(|X / rho - y|)`` with ``phi~`` the rescaled
    kernel; :meth:`physical_centers` and :meth:`physical_coefficients` give
    the equivalent form ``sum a_Y phi(|X - Y|)``.
    """

    spec: KernelSpec
    sphere_fit: SphereFit
    interior_centers: np.ndarray
    interior_values: np.ndarray
    h: float
    delta: float
    expanded_centers: np.ndarray
    expanded_coeffs: np.ndarray
    kappa: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.interior_values.size and not self.h * self.spec.k < self.delta:
            raise ValueError("need h < delta / k")

    @property
    def rho(self) -> float:
        return self.spec.rho

    @property
    def all_centers(self) -> np.ndarray:
        return np.vstack([self.sphere_fit.centers.reshape(-1, self.spec.d),
                          self.expanded_centers.reshape(-1, self.spec.d)])

    @property
    def all_coeffs(self) -> np.ndarray:
        return np.concatenate([self.sphere_fit.weights, self.expanded_coeffs])

    def physical_centers(self) -> np.ndarray:
        return self.rho * self.all_centers

    def physical_coefficients(self) -> np.ndarray:
        return self.all_coeffs * self.rho ** (-self.spec.power)

    def max_center_norm(self) -> float:
        C = self.all_centers
        return float(np.max(np.linalg.norm(C, axis=1))) if len(C) else 0.0

    def __call__(self, x):
        return eval_approximant(self, x)

    def to_dict(self) -> dict:
        return {
            "d": self.spec.d, "k": self.spec.k, "rho": self.rho,
            "h": self.h, "delta": self.delta,
            "centers": self.physical_centers().tolist(),
            "coefficients": self.physical_coefficients().tolist(),
            "n_sphere_centers": int(len(self.sphere_fit.weights)),
            "n_interior_sites": int(len(self.interior_values)),
            "diagnostics": self.diagnostics,
        }


def _sphere_part(fit: SphereFit, spec: KernelSpec, x):
    if len(fit.weights) == 0:
        return np.zeros(len(x))
    out = np.zeros(len(x))
    for start in range(0, len(x), 4096):
        xs = x[start:start + 4096]
        R = np.linalg.norm(xs[:, None, :] - fit.centers[None], axis=-1)
        out[start:start + 4096] = eval_phi_scaled(spec, R) @ fit.weights
    return out


def _expanded_direct(centers, coeffs, spec, x, chunk=16):
    """Pointwise ``sum alpha_y phi~(|x - y|)`` accumulated in extended precision."""
    out = np.zeros(len(x))
    if len(coeffs) == 0:
        return out
    c = np.asarray(coeffs, dtype=np.longdouble)
    Y = np.asarray(centers, dtype=np.longdouble)
    lr = np.longdouble(math.log(spec.rho))
    for i in range(len(x)):
        r = np.sqrt(np.sum((Y - np.asarray(x[i], dtype=np.longdouble)) ** 2, axis=1))
        p = r ** spec.power
        if spec.even:
            safe = np.where(r > 0, r, np.longdouble(1))
            p = np.where(r > 0, p * (np.log(safe) + lr), 0)
        out[i] = float(np.sum(c * p))
    return out


def eval_approximant(appr: DomainApproximant, x, *, method: str = "auto"):
    """Evaluate ``s`` at physical points ``x`` from the expanded ``phi`` form.

    ``method="direct"`` sums every translate in extended precision;
    ``"fft"`` convolves on the lattice ``h Z^d`` (fast for grids aligned
    with ``h``); ``"auto"`` picks FFT for large aligned point sets.
    """
    spec = appr.spec
    u = np.atleast_2d(np.asarray(x, dtype=float)) / appr.rho
    if spec.d == 1 and u.shape[-1] != 1:
        u = u.reshape(-1, 1)
    out = _sphere_part(appr.sphere_fit, spec, u)
    if len(appr.expanded_coeffs) == 0:
        return out
    if method == "auto":
        method = "fft" if len(u) > 64 and offset_count(u, appr.h) <= FFT_MAX_GROUPS else "direct"
    if method == "direct":
        return out + _expanded_direct(appr.expanded_centers, appr.expanded_coeffs, spec, u)
    if method == "fft":
        return out + _expanded_fft(appr.expanded_centers, appr.expanded_coeffs, appr.h, spec, u)
    raise ValueError(f"unknown method {method!r}")


def eval_interior_bspline(appr: DomainApproximant, x, *, dtype=np.longdouble):
    """Interior sum in B-spline form, ``sum_xi r(xi) B((x - xi) / h)``, at physical ``x``.

    Independent of the expansion into ``phi`` translates; used to check it.
    """
    u = np.atleast_2d(np.asarray(x, dtype=float)) / appr.rho
    d, k = appr.spec.d, appr.spec.k
    out = np.zeros(len(u))
    for i, p in enumerate(u):
        b = eval_raw(d, k, p / appr.h - appr.interior_centers, dtype=dtype)
        out[i] = float(np.sum(b * np.asarray(appr.interior_values, dtype=dtype)) / appr.kappa)
    return out


def _expanded_fft(Y, alpha, h, spec, x):
    if len(alpha) == 0:
        return np.zeros(len(x))
    pts = np.rint(Y / h).astype(np.int64)
    kern = lambda U: eval_phi_scaled(spec, h * np.linalg.norm(U, axis=-1))
    return lattice_convolve(pts, alpha, h, x, kern)


def expand_interior(Z, vals, h: float, spec: KernelSpec, kappa: float):
    """Expand ``sum_xi v_xi B((x - xi)/h)`` into ``sum_y alpha_y phi(|x - y|)``.

    Uses ``B((x - xi)/h) = h**(d-2k) sum_z c_z phi(|x - xi - h z|) / kappa``;
    returns lattice centres ``h m`` and coefficients ``alpha``.
    """
    d, k = spec.d, spec.k
    if len(vals) == 0:
        return np.zeros((0, d)), np.zeros(0)
    st = build_stencil(d, k)
    lo = Z.min(axis=0) - k
    hi = Z.max(axis=0) + k
    V = np.zeros(tuple(hi - lo + 1))
    occ = np.zeros_like(V)
    V[tuple((Z - lo).T)] = vals
    occ[tuple((Z - lo).T)] = 1.0
    C = np.zeros((2 * k + 1,) * d)
    for z, c in st.coeffs.items():
        C[tuple(np.asarray(z) + k)] = float(c)
    A = convolve(V, C, mode="same", method="direct")
    support = convolve(occ, np.abs(C), mode="same", method="direct") > 0
    idx = np.argwhere(support)
    alpha = A[support] * h ** (d - 2 * k) / kappa
    return h * (idx + lo), alpha


def _pick_h(delta: float, k: int, multiple: int) -> float:
    n = multiple * (math.floor(k / (delta * multiple)) + 1)
    return 1.0 / n


def build_ball_approximant(f, spec: KernelSpec, eps: float,
                           controls: BallControls | None = None, *,
                           calibration: BsplineCalibration | None = None) -> DomainApproximant:
    """Approximate ``f`` on the closed ball of radius ``spec.rho`` to sup error ``eps``.

    Parameters
    ----------
    f : callable
        Maps an ``(n, d)`` array of points of the ball to ``n`` values.
    spec : KernelSpec
        Kernel family and ball radius ``rho``.
    eps : float
        Target sup-norm error.
    controls : BallControls, optional
        Sphere-fit sizes, collar candidates, test grid and refinement limits.

    The measured error is taken on a tensor grid clipped to the ball; the
    grid step ``h`` is refined (halved) until it meets ``eps`` or
    ``controls.max_refine`` halvings are used.  ``diagnostics["met_target"]``
    records the outcome.

    Raises
    ------
    RefitRequired
        The sphere stage or the collar search could not meet its budget.
    ResourceLimitError
        The grid step would need more than ``controls.max_sites`` sites.
    ContainmentError
        A translate centre left the ball (should not happen).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    ctl = controls or BallControls()
    d, k, rho = spec.d, spec.k, spec.rho
    cal = calibration or calibrate(d, k)
    M = cal.M_hat
    g = lambda u: np.asarray(f(rho * np.atleast_2d(u)), dtype=float).reshape(-1)

    sphere_budget = eps / (4.0 * M)
    fit = fit_sphere_adaptive(g, spec, sphere_budget, start=ctl.sphere_start,
                              max_centers=ctl.sphere_max, oversample=ctl.sphere_oversample,
                              regularization=ctl.regularization)
    if fit.residual_sup > sphere_budget:
        raise RefitRequired(
            f"sphere residual {fit.residual_sup:.3g} exceeds {sphere_budget:.3g} "
            f"with {len(fit.weights)} centers"
        )
    fe = extend(g)
    r = lambda u: fe(u) - _sphere_part(fit, spec, np.atleast_2d(u))
    delta, collar_max = find_delta(r, eps, M, d=d, candidates=dyadic_deltas(ctl.delta_levels),
                                   n_samples=ctl.annulus_samples, full_output=True)

    test = ball_grid(d, ctl.grid_size(d))
    exact = g(test)
    sphere_vals = _sphere_part(fit, spec, test)
    h = _pick_h(delta, k, ctl.h_multiple)
    history = []
    for attempt in range(ctl.max_refine + 1):
        n = int(math.ceil((1.0 - delta) / h)) + 1
        est = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * ((1.0 - delta) / h) ** d
        if est > ctl.max_sites:
            raise ResourceLimitError(
                f"h={h:.3g} (delta={delta:.3g}) needs about {est:.3g} sites, "
                f"above max_sites={ctl.max_sites}"
            )
        axes = np.arange(-n, n + 1)
        Z = np.stack(np.meshgrid(*([axes] * d), indexing="ij"), axis=-1).reshape(-1, d)
        Z = Z[np.linalg.norm(h * Z, axis=1) < 1.0 - delta]
        vals = r(h * Z)
        Y, alpha = expand_interior(Z, vals, h, spec, cal.kappa)
        interior = _expanded_fft(Y, alpha, h, spec, test)
        err = float(np.max(np.abs(exact - sphere_vals - interior))) if len(test) else 0.0
        history.append({"h": h, "n_sites": int(len(Z)), "sup_error": err})
        log.info("ball scheme: h=%.5g sites=%d sup error %.3g", h, len(Z), err)
        if err <= eps or attempt == ctl.max_refine:
            break
        h /= 2

    nY = np.linalg.norm(Y, axis=1) if len(Y) else np.zeros(0)
    if len(nY) and nY.max() > 1.0 + CONTAINMENT_SLACK:
        raise ContainmentError(f"expanded centre at radius {nY.max()!r} with h={h}, delta={delta}")

    diagnostics = {
        "eps": eps, "M_hat": M, "kappa": cal.kappa,
        "sphere_budget": sphere_budget, "sphere_residual": fit.residual_sup,
        "n_sphere_centers": int(len(fit.weights)),
        "collar_budget": eps / (2.0 * M), "collar_max": collar_max, "delta": delta, "h": h,
        "sup_error": history[-1]["sup_error"], "met_target": history[-1]["sup_error"] <= eps,
        "n_test_points": int(len(test)), "refinements": history,
        "max_center_norm": float(max(nY.max() if len(nY) else 0.0, 1.0 if len(fit.weights) else 0.0)),
    }
    return DomainApproximant(spec, fit, Z, vals, h, delta, Y, alpha, cal.kappa, diagnostics)


def measured_error(appr: DomainApproximant, f, n: int | None = None, *, method: str = "auto"):
    """Sup of ``|f - s|`` over a tensor grid clipped to the ball, via the expanded form."""
    d = appr.spec.d
    X = appr.rho * ball_grid(d, n or (201 if d == 2 else 41))
    return float(np.max(np.abs(np.asarray(f(X), dtype=float) - eval_approximant(appr, X, method=method))))
