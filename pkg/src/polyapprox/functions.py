"""Named test functions so that experiments can be selected by string.

Every factory takes the kernel spec and returns ``f(X)`` acting on an
``(n, d)`` array of points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import KernelSpec, eval_phi


@dataclass(frozen=True)
class NamedFunction:
    name: str
    factory: Callable[[KernelSpec], Callable]
    support_radius: float | None = None
    description: str = ""

    def __call__(self, spec: KernelSpec):
        return self.factory(spec)


def _constant(spec):
    return lambda X: np.ones(len(np.atleast_2d(X)))


def _gaussian_bump(spec):
    return lambda X: np.exp(-4.0 * np.sum(np.atleast_2d(X) ** 2, axis=1))


def _poly_cos(spec):
    def f(X):
        X = np.atleast_2d(X)
        return X[:, 0] ** 2 + np.cos(np.pi * X[:, -1])
    return f


def _zonal_single(spec):
    y0 = np.zeros(spec.d)
    y0[0] = spec.rho

    def f(X):
        X = np.atleast_2d(X)
        return eval_phi(spec, np.linalg.norm(X - y0, axis=1))
    return f


REGISTRY = {
    "constant": NamedFunction("constant", _constant, None, "f = 1"),
    "gaussian_bump": NamedFunction("gaussian_bump", _gaussian_bump, 3.0,
                                  "exp(-4 |x|^2), sampled within radius 3"),
    "poly_cos": NamedFunction("poly_cos", _poly_cos, None, "x_1^2 + cos(pi x_d)"),
    "zonal_single": NamedFunction("zonal_single", _zonal_single, None,
                                 "phi(|x - rho e_1|), one boundary translate"),
}


def get_function(name: str) -> NamedFunction:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown test function {name!r}; choose from {sorted(REGISTRY)}") from None
