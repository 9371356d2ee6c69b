import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyapprox.kernels import KernelSpec, eval_phi, eval_phi_scaled, eval_psi, eval_psi_scaled
from conftest import random_unit

SPECS = [(1, 1), (1, 2), (2, 2), (2, 3), (3, 2), (3, 3)]


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(2, 1)
    with pytest.raises(ValueError):
        KernelSpec(3, 1)
    with pytest.raises(ValueError):
        KernelSpec(2, 2, rho=0.0)
    s = KernelSpec(2, 2)
    assert s.even and s.power == 2 and s.beta == 1 and s.lam == 0


@pytest.mark.parametrize("d,k,r,expected", [
    (2, 2, 1.0, 0.0),
    (3, 2, 2.0, 2.0),
    (2, 2, math.e, math.e**2),
])
def test_phi_examples(d, k, r, expected):
    assert eval_phi(KernelSpec(d, k), r) == pytest.approx(expected, abs=1e-15)


def test_phi_at_zero_and_negative():
    for d, k in SPECS:
        assert eval_phi(KernelSpec(d, k), 0.0) == 0.0
    with pytest.raises(ValueError):
        eval_phi(KernelSpec(2, 2), -1.0)


@pytest.mark.parametrize("d,k,t,expected", [(2, 2, 0.5, 0.0), (3, 2, -1.0, 2.0)])
def test_psi_examples(d, k, t, expected):
    assert eval_psi(KernelSpec(d, k), t) == pytest.approx(expected, abs=1e-15)


def test_psi_domain():
    spec = KernelSpec(2, 2)
    assert eval_psi(spec, 1.0) == 0.0
    with pytest.raises(ValueError):
        eval_psi(spec, 1.0 + 1e-9)
    with pytest.raises(ValueError):
        eval_psi(spec, -1.5)


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_sphere_restriction_identity(d, k, rng):
    spec = KernelSpec(d, k)
    x = random_unit(rng, 10_000, d)
    y = random_unit(rng, 10_000, d)
    t = np.clip(np.sum(x * y, axis=1), -1, 1)
    lhs = eval_phi(spec, np.linalg.norm(x - y, axis=1))
    np.testing.assert_allclose(lhs, eval_psi(spec, t), atol=1e-12, rtol=0)


def test_psi_scaled_examples():
    t = np.linspace(-1, 1, 11)
    np.testing.assert_array_equal(eval_psi_scaled(KernelSpec(2, 2, 1.0), t), eval_psi(KernelSpec(2, 2), t))
    assert eval_psi_scaled(KernelSpec(2, 2, math.e), 0.0) == pytest.approx(math.log(2) + 2, abs=1e-14)
    # odd d: the extra term is absent
    np.testing.assert_array_equal(eval_psi_scaled(KernelSpec(3, 2, 5.0), t), eval_psi(KernelSpec(3, 2), t))


@given(r=st.floats(1e-3, 10), rho=st.floats(0.05, 20))
def test_odd_homogeneity(r, rho):
    for d, k in [(1, 1), (3, 2), (3, 3)]:
        spec = KernelSpec(d, k)
        assert eval_phi(spec, rho * r) == pytest.approx(rho ** (2 * k - d) * eval_phi(spec, r), rel=1e-12)


@given(r=st.floats(1e-3, 10), rho=st.floats(0.05, 20))
def test_even_scaling_law(r, rho):
    for d, k in [(2, 2), (2, 3)]:
        spec = KernelSpec(d, k)
        p = 2 * k - d
        lhs = eval_phi(spec, rho * r)
        rhs = rho**p * (eval_phi(spec, r) + math.log(rho) * r**p)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12 * max(1.0, (rho * r) ** p))


@given(r=st.floats(0, 5), rho=st.floats(0.1, 10))
def test_phi_scaled_is_rescaled_phi(r, rho):
    spec = KernelSpec(2, 2, rho)
    lhs = eval_phi_scaled(spec, r) * rho**spec.power
    assert lhs == pytest.approx(float(eval_phi(KernelSpec(2, 2), rho * r)), rel=1e-12, abs=1e-12)
