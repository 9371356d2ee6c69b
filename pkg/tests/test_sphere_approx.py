import math

import numpy as np
import pytest
from hypothesis import given, strategies as st, settings
import scipy.linalg

from polyapprox.kernels import KernelSpec, eval_psi
from polyapprox.sphere_approx import (IllConditionedError, SphereFit, eval_sphere_fit, fit_sphere,
                                      fit_sphere_adaptive, lstsq_qr, sphere_nodes)
from conftest import random_unit

SPEC = KernelSpec(2, 2)


def cos3(X):
    return np.cos(3 * np.arctan2(X[:, 1], X[:, 0]))


def test_nodes_unit_and_distinct():
    for d, n in [(2, 16), (3, 100)]:
        X = sphere_nodes(d, n)
        np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1, atol=1e-14)
        assert len(np.unique(np.round(X, 12), axis=0)) == n
    with pytest.raises(ValueError):
        sphere_nodes(4, 10)


def test_single_center_exact():
    Y = sphere_nodes(2, 16)
    y0 = Y[5]
    f = lambda X: eval_psi(SPEC, np.clip(X @ y0, -1, 1))
    fit = fit_sphere(f, SPEC, 16, 32, regularization=0.0, centers=Y)
    assert fit.residual_sup <= 1e-8
    expected = np.zeros(16)
    expected[5] = 1
    np.testing.assert_allclose(fit.weights, expected, atol=1e-8)


def test_zero_data_gives_zero_weights():
    fit = fit_sphere(lambda X: np.zeros(len(X)), SPEC, 16)
    assert np.all(fit.weights == 0) and fit.residual_sup == 0


def test_cos3_residual_decreases():
    res = [fit_sphere(cos3, SPEC, n).residual_sup for n in (16, 32, 64)]
    assert res[0] > res[1] > res[2]


def test_validation_nodes_disjoint_from_fitting_nodes():
    X = sphere_nodes(2, 32, offset=0.5)
    V = sphere_nodes(2, 128, offset=0.25)
    dist = np.min(np.linalg.norm(X[:, None] - V[None], axis=-1))
    assert dist > 1e-3


def test_eval_examples(rng):
    x = random_unit(rng, 10, 2)
    empty = SphereFit(np.zeros((0, 2)), np.zeros(0), spec=SPEC)
    np.testing.assert_array_equal(eval_sphere_fit(empty, SPEC, x), 0)
    y = np.array([[0.6, 0.8]])
    single = SphereFit(y, np.array([1.0]), spec=SPEC)
    np.testing.assert_allclose(single(x), eval_psi(SPEC, np.clip(x @ y[0], -1, 1)), atol=1e-15)
    with pytest.raises(ValueError):
        eval_sphere_fit(single, SPEC, np.array([[1.0, 0.1]]))
    with pytest.raises(ValueError):
        SphereFit(np.array([[1.0, 0.1]]), np.array([1.0]), spec=SPEC)


def test_fit_reproduces_values_within_residual():
    fit = fit_sphere(cos3, SPEC, 32)
    V = sphere_nodes(2, 4 * 64, offset=0.25)
    assert np.max(np.abs(fit(V) - cos3(V))) <= fit.residual_sup + 1e-15


def test_rank_deficient_needs_regularization():
    Y = np.vstack([sphere_nodes(2, 8), sphere_nodes(2, 8)])  # every center twice
    with pytest.raises(IllConditionedError):
        fit_sphere(cos3, SPEC, 16, 32, regularization=0.0, centers=Y)
    fit = fit_sphere(cos3, SPEC, 16, 32, centers=Y)
    assert np.isfinite(fit.residual_sup)
    with pytest.raises(ValueError):
        fit_sphere(cos3, SPEC, 16, 8)


def test_rotation_equivariance():
    n = 32
    shift = 3
    ang = 2 * math.pi * shift / n
    R = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    f = lambda X: X[:, 0] ** 2 + np.cos(math.pi * X[:, 1])
    g = lambda X: f(X @ R)  # f rotated by ang
    Y = sphere_nodes(2, n)
    a = fit_sphere(f, SPEC, n, 2 * n, centers=Y)
    b = fit_sphere(g, SPEC, n, 2 * n, centers=Y @ R.T)
    np.testing.assert_allclose(b.weights, a.weights, atol=1e-10)
    assert b.residual_sup == pytest.approx(a.residual_sup, abs=1e-10)


@pytest.mark.parametrize("f", [cos3, lambda X: X[:, 0] ** 2 + np.cos(math.pi * X[:, 1]),
                               lambda X: np.exp(X[:, 0])])
def test_nested_centers_monotone(f):
    res = [fit_sphere(f, SPEC, n, 2 * n, regularization=1e-12).residual_sup for n in (8, 16, 32, 64)]
    for a, b in zip(res, res[1:]):
        assert b <= 1.05 * a + 1e-14


def test_three_dimensional_fit_improves():
    spec = KernelSpec(3, 2)
    f = lambda X: X[:, 0] ** 2 + np.cos(math.pi * X[:, 1])
    res = [fit_sphere(f, spec, n).residual_sup for n in (32, 128)]
    assert res[1] < res[0]


def test_adaptive_reaches_target():
    fit = fit_sphere_adaptive(cos3, SPEC, 1e-3)
    assert fit.residual_sup <= 1e-3
    assert len(fit.weights) >= 32


@settings(max_examples=25)
@given(m=st.integers(5, 30), n=st.integers(1, 5), lam=st.sampled_from([0.0, 1e-3, 0.5]),
       seed=st.integers(0, 2**31))
def test_lstsq_matches_normal_equations(m, n, lam, seed):
    r = np.random.default_rng(seed)
    A = r.standard_normal((m, n))
    b = r.standard_normal(m)
    x = lstsq_qr(A, b, lam)
    ref = scipy.linalg.solve(A.T @ A + lam**2 * np.eye(n), A.T @ b, assume_a="pos")
    np.testing.assert_allclose(x, ref, rtol=1e-8, atol=1e-10)
