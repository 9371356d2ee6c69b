"""Exact coefficients of the k-fold discrete Laplacian at unit step.

The one-step operator used throughout has the sign convention

    Lbar f(x) = 2d f(x) - sum_j (f(x + e_j) + f(x - e_j)),

i.e. it is the *negative* of the usual five-point Laplacian.  ``Lbar**k`` is
stored as a map from lattice offsets to integer coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
import math

import numpy as np


@dataclass(frozen=True)
class Stencil:
    """Finitely supported integer coefficients ``c_z`` on ``Z^d``."""

    d: int
    k: int
    coeffs: dict = field(compare=False)

    def __post_init__(self):
        for z in self.coeffs:
            if len(z) != self.d:
                raise ValueError(f"offset {z} does not have length {self.d}")

    @property
    def offsets(self) -> np.ndarray:
        """Support as an ``(n, d)`` integer array, sorted lexicographically."""
        return np.array(sorted(self.coeffs), dtype=int).reshape(-1, self.d)

    @property
    def values(self) -> np.ndarray:
        return np.array([self.coeffs[z] for z in sorted(self.coeffs)], dtype=float)

    def __len__(self):
        return len(self.coeffs)

    def abs_sum(self) -> int:
        return sum(abs(v) for v in self.coeffs.values())

    def to_json_dict(self) -> dict:
        """Keys are comma-joined offsets (``"-1"`` in 1D, ``"0,1"`` in 2D)."""
        return {",".join(str(c) for c in z): int(v) for z, v in sorted(self.coeffs.items())}


def convolve(a: Stencil, b: Stencil) -> Stencil:
    """Discrete convolution of two stencils of the same dimension."""
    if a.d != b.d:
        raise ValueError("dimension mismatch")
    out: dict = {}
    for za, va in a.coeffs.items():
        for zb, vb in b.coeffs.items():
            z = tuple(p + q for p, q in zip(za, zb))
            out[z] = out.get(z, 0) + va * vb
    return Stencil(a.d, a.k + b.k, {z: v for z, v in out.items() if v != 0})


def laplacian_stencil(d: int) -> Stencil:
    coeffs = {(0,) * d: 2 * d}
    for j in range(d):
        for s in (1, -1):
            z = [0] * d
            z[j] = s
            coeffs[tuple(z)] = -1
    return Stencil(d, 1, coeffs)


@lru_cache(maxsize=None)
def build_stencil(d: int, k: int) -> Stencil:
    """Coefficients of ``Lbar**k`` by repeated convolution of the one-step stencil."""
    if d < 1 or k < 1:
        raise ValueError(f"need d >= 1 and k >= 1, got d={d}, k={k}")
    one = laplacian_stencil(d)
    st = one
    for _ in range(k - 1):
        st = convolve(st, one)
    return st


def moment(st: Stencil, alpha) -> Fraction:
    """Exact ``sum_z c_z z**alpha`` for a multi-index ``alpha``."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != st.d or any(a < 0 for a in alpha):
        raise ValueError(f"bad multi-index {alpha} for d={st.d}")
    total = 0
    for z, c in st.coeffs.items():
        total += c * math.prod(zi**ai for zi, ai in zip(z, alpha))
    return Fraction(total)


def multi_indices(d: int, max_order: int):
    """All multi-indices in ``N^d`` with ``|alpha| <= max_order``."""
    for alpha in product(range(max_order + 1), repeat=d):
        if sum(alpha) <= max_order:
            yield alpha
