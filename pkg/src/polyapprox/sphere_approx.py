"""Least-squares fits by zonal translates ``psi(x . y)`` with centers on the sphere.

Nodes are equispaced angles on the circle (d = 2) or a Fibonacci lattice on
S^2 (d = 3).  The collocation system is solved by dense QR with an optional
Tikhonov block ``regularization * I`` stacked under the matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.linalg

from .kernels import KernelSpec, eval_psi_scaled


class IllConditionedError(np.linalg.LinAlgError):
    """Collocation matrix is numerically rank deficient and no regularization was given."""


def sphere_nodes(d: int, n: int, offset: float = 0.0) -> np.ndarray:
    """``n`` quasi-uniform points on ``S^{d-1}``, shape ``(n, d)``.

    ``offset`` shifts the angular parameter by a fraction of the spacing so
    that validation nodes avoid the fitting nodes.
    """
    if n < 1:
        raise ValueError("need at least one node")
    i = np.arange(n) + offset
    if d == 2:
        th = 2 * np.pi * i / n
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    if d == 3:
        golden = (1 + math.sqrt(5)) / 2
        z = 1 - (2 * i + 1) / n
        r = np.sqrt(np.clip(1 - z * z, 0.0, None))
        th = 2 * np.pi * i / golden
        return np.stack([r * np.cos(th), r * np.sin(th), z], axis=-1)
    raise ValueError(f"node sets are provided for d = 2, 3 only, got d={d}")


def _dot(x, y):
    return np.clip(np.asarray(x) @ np.asarray(y).T, -1.0, 1.0)


def zonal_matrix(spec: KernelSpec, x, y) -> np.ndarray:
    """``psi~(x_i . y_j)`` for unit vectors ``x`` (rows) and ``y`` (columns)."""
    return eval_psi_scaled(spec, _dot(x, y))


@dataclass
class SphereFit:
    centers: np.ndarray
    weights: np.ndarray
    regularization: float = 0.0
    residual_sup: float = float("nan")
    spec: KernelSpec | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float).reshape(len(self.weights), -1) \
            if len(self.weights) else np.zeros((0, self.spec.d if self.spec else 0))
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.centers) and np.max(np.abs(np.linalg.norm(self.centers, axis=1) - 1)) > 1e-12:
            raise ValueError("sphere-fit centers must be unit vectors")

    def __call__(self, x):
        return eval_sphere_fit(self, self.spec, x)

    def to_dict(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "weights": self.weights.tolist(),
            "regularization": self.regularization,
            "residual_sup": self.residual_sup,
            "diagnostics": self.diagnostics,
        }


def lstsq_qr(A, b, regularization=0.0, rcond=None):
    """Minimize ``|A x - b|^2 + regularization^2 |x|^2`` via QR of the stacked system.

    Raises :class:`IllConditionedError` when ``regularization == 0`` and ``A``
    is numerically rank deficient.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if regularization > 0:
        A = np.vstack([A, regularization * np.eye(n)])
        b = np.concatenate([b, np.zeros(n)])
    elif m < n:
        raise IllConditionedError("underdetermined system needs regularization")
    Q, R = scipy.linalg.qr(A, mode="economic")
    diag = np.abs(np.diag(R))
    rcond = n * np.finfo(float).eps if rcond is None else rcond
    if regularization == 0 and (diag.size == 0 or diag.min() <= rcond * diag.max()):
        raise IllConditionedError(
            "collocation matrix is rank deficient; pass a positive regularization"
        )
    return scipy.linalg.solve_triangular(R, Q.T @ b)


def fit_sphere(f, spec: KernelSpec, n_centers: int, n_samples: int | None = None,
               regularization: float | None = None, *, centers=None,
               validation_factor: int = 4) -> SphereFit:
    """Fit ``f`` on ``S^{d-1}`` by ``sum_y alpha_y psi~(x . y)``.

    Parameters
    ----------
    f : callable
        Maps an ``(n, d)`` array of unit vectors to ``n`` values.
    n_centers, n_samples : int
        Number of centers and fitting nodes (``n_samples >= n_centers``;
        default ``2 * n_centers``).
    regularization : float, optional
        Tikhonov parameter.  ``None`` means ``1e-10 * max |A|``; ``0`` asks
        for plain least squares and fails on rank deficiency.
    centers : array, optional
        Explicit unit-vector centers overriding the default node set.

    The sup residual is measured on ``validation_factor * n_samples`` nodes
    interleaved with, and disjoint from, the fitting nodes.
    """
    d = spec.d
    n_samples = 2 * n_centers if n_samples is None else n_samples
    if n_samples < n_centers:
        raise ValueError("need n_samples >= n_centers")
    Y = sphere_nodes(d, n_centers) if centers is None else np.asarray(centers, dtype=float)
    X = sphere_nodes(d, n_samples, offset=0.5)
    A = zonal_matrix(spec, X, Y)
    if regularization is None:
        regularization = 1e-10 * float(np.max(np.abs(A))) if A.size else 0.0
    alpha = lstsq_qr(A, np.asarray(f(X), dtype=float), regularization)
    fit = SphereFit(Y, alpha, regularization, spec=spec)
    V = sphere_nodes(d, validation_factor * n_samples, offset=0.25)
    fit.residual_sup = float(np.max(np.abs(eval_sphere_fit(fit, spec, V) - f(V))))
    fit.diagnostics = {"n_samples": n_samples, "n_validation": len(V)}
    return fit


def eval_sphere_fit(fit: SphereFit, spec: KernelSpec, x):
    """``sum_y alpha_y psi~(x . y)`` at unit vectors ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(np.abs(np.linalg.norm(x, axis=1) - 1) > 1e-9):
        raise ValueError("evaluation points must be unit vectors")
    if len(fit.weights) == 0:
        return np.zeros(len(x))
    return zonal_matrix(spec, x, fit.centers) @ fit.weights


def fit_sphere_adaptive(f, spec: KernelSpec, target: float, *, start: int = 16,
                        max_centers: int = 1024, oversample: int = 2,
                        regularization: float | None = None) -> SphereFit:
    """Double the number of centers until the validation residual is below ``target``.

    Returns the last fit even if the target is missed; the caller decides.
    """
    n = start
    while True:
        fit = fit_sphere(f, spec, n, oversample * n, regularization)
        if fit.residual_sup <= target or 2 * n > max_centers:
            return fit
        n *= 2
