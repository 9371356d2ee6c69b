"""Polyharmonic spline kernels and their zonal restrictions to the unit sphere.

For dimension ``d`` and order ``k`` with ``2k > d`` the polyharmonic spline is

    phi(r) = r**(2k-d)            (d odd)
    phi(r) = r**(2k-d) * log(r)   (d even)

On the unit sphere ``|x - y|**2 = 2 - 2 x.y`` so ``phi(|x-y|) = psi(x.y)``.
The scale ``rho`` selects the rescaled kernel ``phi(rho r) / rho**(2k-d)``,
which differs from ``phi`` only by ``log(rho) r**(2k-d)`` in even dimension.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class KernelSpec:
    """One member of the polyharmonic family.

    Parameters
    ----------
    d : int
        Spatial dimension.
    k : int
        Polyharmonic order; must satisfy ``2k > d``.
    rho : float
        Scale radius (default 1).
    """

    d: int
    k: int
    rho: float = 1.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"order must be a positive integer, got {self.k!r}")
        if 2 * self.k <= self.d:
            raise ValueError(f"need 2k > d, got d={self.d}, k={self.k}")
        if not self.rho > 0 or not math.isfinite(self.rho):
            raise ValueError(f"rho must be positive and finite, got {self.rho!r}")

    @property
    def even(self) -> bool:
        return self.d % 2 == 0

    @property
    def power(self) -> int:
        """Exponent ``2k - d`` of the radial part."""
        return 2 * self.k - self.d

    @property
    def beta(self) -> float:
        """Exponent ``k - d/2`` of ``(2 - 2t)`` in the zonal form."""
        return self.k - self.d / 2

    @property
    def lam(self) -> float:
        """Gegenbauer weight parameter ``(d - 2) / 2``."""
        return (self.d - 2) / 2


def eval_phi(spec: KernelSpec, r):
    """Evaluate ``phi_{d,k}(r)``; the value at ``r = 0`` is the limit 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    p = spec.power
    if not spec.even:
        return r**p
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, safe**p * np.log(safe), 0.0)


def eval_phi_scaled(spec: KernelSpec, r):
    """Evaluate ``phi(rho r) / rho**(2k-d)``, the kernel seen on the unit ball."""
    out = eval_phi(spec, r)
    if spec.even and spec.rho != 1.0:
        out = out + math.log(spec.rho) * np.asarray(r, dtype=float) ** spec.power
    return out


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < -1.0) or np.any(t > 1.0):
        raise ValueError("zonal argument must lie in [-1, 1]")
    return t


def eval_psi(spec: KernelSpec, t):
    """Evaluate the zonal restriction ``psi_{d,k}(t)``, ``t = x.y`` on the sphere."""
    t = _check_t(t)
    u = 2.0 - 2.0 * t
    b = spec.beta
    if not spec.even:
        return u**b
    safe = np.where(u > 0, u, 1.0)
    return np.where(u > 0, 0.5 * safe**b * np.log(safe), 0.0)


def eval_psi_scaled(spec: KernelSpec, t):
    """Zonal restriction of the rescaled kernel, ``psi + log(rho) (2-2t)**(k-d/2)``.

    In odd dimension the kernel is homogeneous and this equals :func:`eval_psi`.
    """
    out = eval_psi(spec, t)
    if spec.even and spec.rho != 1.0:
        t = np.asarray(t, dtype=float)
        out = out + math.log(spec.rho) * (2.0 - 2.0 * t) ** spec.beta
    return out
