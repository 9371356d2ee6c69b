from fractions import Fraction
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from polyapprox.gegenbauer import (AccuracyWarning, GegenbauerIndex, c_const, coeff_F, coeff_G,
                                   coeff_numeric, degenerate_radii, degenerate_taus,
                                   fundamentality_report, gegenbauer_poly,
                                   orthonormal_gegenbauer, tau, tau_exact)
from polyapprox.kernels import KernelSpec, eval_psi_scaled

LAMS = [0.0, 0.5, 1.0]


def scipy_orthonormal(j, lam, t):
    """Independent normalization of scipy's Gegenbauer / Chebyshev polynomials."""
    if lam == 0:
        norm = math.pi if j == 0 else math.pi / 2
        return special.eval_chebyt(j, t) / math.sqrt(norm)
    h = (math.pi * 2 ** (1 - 2 * lam) * math.gamma(j + 2 * lam)
         / (math.factorial(j) * (j + lam) * math.gamma(lam) ** 2))
    return special.eval_gegenbauer(j, lam, t) / math.sqrt(h)


def scipy_coeff(g, j, lam, log_weight=False):
    """``int g P_j w dt`` by QUADPACK with the algebraic (and log) endpoint weight."""
    a = lam - 0.5
    f = lambda t: g(t) * scipy_orthonormal(j, lam, t)
    kind = "alg-logb" if log_weight else "alg"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, -1, 1, weight=kind, wvar=(a, a), epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def oracle_F(beta, j, lam):
    return scipy_coeff(lambda t: (2 - 2 * t) ** beta, j, lam)


def oracle_G(beta, j, lam):
    # 1/2 (2-2t)^b log(2-2t) = 1/2 (2-2t)^b (log 2 + log(1-t))
    a = 0.5 * math.log(2) * scipy_coeff(lambda t: (2 - 2 * t) ** beta, j, lam)
    return a + 0.5 * scipy_coeff(lambda t: (2 - 2 * t) ** beta, j, lam, log_weight=True)


def test_index_validation():
    with pytest.raises(ValueError):
        GegenbauerIndex(-0.5, 1)
    with pytest.raises(ValueError):
        GegenbauerIndex(0.0, -1)


def test_poly_examples():
    t = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(gegenbauer_poly(GegenbauerIndex(0.0, 0), t), 1 / math.sqrt(math.pi), rtol=1e-15)
    np.testing.assert_allclose(gegenbauer_poly(GegenbauerIndex(0.5, 1), t), math.sqrt(1.5) * t, rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("lam", LAMS + [1.5])
def test_matches_scipy_normalization(lam):
    t = np.linspace(-1, 1, 41)
    P = orthonormal_gegenbauer(12, lam, t)
    for j in range(13):
        np.testing.assert_allclose(P[j], scipy_orthonormal(j, lam, t), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("lam", LAMS)
def test_orthonormality(lam):
    a = lam - 0.5
    x, w = special.roots_jacobi(40, a, a)
    P = orthonormal_gegenbauer(10, lam, x)
    np.testing.assert_allclose((P * w) @ P.T, np.eye(11), atol=1e-10)


def test_c_const_examples():
    assert c_const(0, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)
    for j in range(1, 8):
        for lam in LAMS:
            assert math.copysign(1, c_const(j, lam)) == (-1) ** j


@pytest.mark.parametrize("lam", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_rodrigues_formula(j, lam):
    sympy = pytest.importorskip("sympy")
    t = sympy.symbols("t")
    L = sympy.Rational(int(2 * lam), 2)
    expr = (1 - t**2) ** (sympy.Rational(1, 2) - L) * sympy.diff((1 - t**2) ** (j + L - sympy.Rational(1, 2)), t, j)
    f = sympy.lambdify(t, sympy.simplify(expr), "numpy")
    ts = np.linspace(-0.9, 0.9, 9)
    np.testing.assert_allclose(c_const(j, lam) * f(ts), gegenbauer_poly(GegenbauerIndex(lam, j), ts),
                               rtol=1e-11, atol=1e-12)


def test_F_vanishes_past_integer_beta():
    for beta in (1, 2, 3):
        for j in range(beta + 1, beta + 5):
            for lam in LAMS:
                assert coeff_F(beta, j, lam) == 0.0


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("beta", [1, 2, 2.5])
def test_closed_forms_vs_scipy(beta, lam):
    for j in range(0, 7):
        f_ref = oracle_F(beta, j, lam)
        g_ref = oracle_G(beta, j, lam)
        scale = max(1.0, abs(oracle_F(beta, 0, lam)))
        assert abs(coeff_F(beta, j, lam) - f_ref) <= 1e-9 * scale
        assert abs(coeff_G(beta, j, lam) - g_ref) <= 1e-9 * scale


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("beta", [1, 2, 2.5])
def test_closed_forms_vs_own_quadrature(beta, lam):
    for j in range(0, min(int(beta), 6) + 1):
        F = coeff_numeric(lambda t: (2 - 2 * t) ** beta, j, lam)
        G = coeff_numeric(lambda t: 0.5 * (2 - 2 * t) ** beta * np.log(np.where(t < 1, 2 - 2 * t, 1.0)), j, lam)
        assert coeff_F(beta, j, lam) == pytest.approx(F, rel=1e-8, abs=1e-12)
        assert coeff_G(beta, j, lam) == pytest.approx(G, rel=1e-8, abs=1e-12)


def test_beta1_lam0_examples():
    # int (2 - 2t) P_0 w dt with P_0 = 1/sqrt(pi): 2 pi / sqrt(pi)
    assert coeff_F(1, 0, 0.0) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-12)
    assert coeff_G(1, 2, 0.0) != 0.0


@given(beta=st.floats(0.6, 4.5), j=st.integers(0, 4), lam=st.sampled_from(LAMS))
def test_beta_derivative_of_F_is_twice_G(beta, j, lam):
    if abs(beta - round(beta)) < 1e-3 and j > round(beta):
        return
    h = 1e-5
    fd = (coeff_F(beta + h, j, lam) - coeff_F(beta - h, j, lam)) / (2 * h)
    assert fd == pytest.approx(2 * coeff_G(beta, j, lam), rel=1e-6, abs=1e-8)


def test_tau_examples():
    assert tau_exact(1, 0, 0) == 1
    assert tau_exact(1, 1, 0) == Fraction(3, 2)
    assert tau(1, 0, 0) == pytest.approx(1.0, abs=1e-14)
    assert tau(1, 1, 0) == pytest.approx(1.5, abs=1e-14)


def test_tau_rational_matches_float():
    for beta in range(1, 7):
        for lam in (0, 1, 2):
            for j in range(beta + 1):
                assert float(tau_exact(beta, j, lam)) == pytest.approx(tau(beta, j, lam), abs=1e-12)


def test_tau_errors():
    with pytest.raises(ValueError):
        tau(1, 2, 0)
    with pytest.raises(ValueError):
        tau_exact(1, 0, 0.5)  # log 2 survives
    with pytest.raises(ValueError):
        tau_exact(1.3, 0, 0)


@pytest.mark.parametrize("lam", LAMS)
def test_numeric_orthonormality(lam):
    for l in range(0, 6):
        P = lambda t, l=l: orthonormal_gegenbauer(l, lam, t)[l]
        for j in range(0, 6):
            assert coeff_numeric(P, j, lam) == pytest.approx(float(j == l), abs=1e-10)


def test_numeric_warns_when_not_converging():
    with pytest.warns(AccuracyWarning):
        v, info = coeff_numeric(lambda t: np.sign(t - 0.3), 0, 0.0, 64, max_nodes=512, full_output=True)
    assert not info["converged"]


def test_report_examples():
    rep = fundamentality_report(KernelSpec(2, 2), 10)
    assert rep.fundamental and len(rep.entries) == 11
    rep = fundamentality_report(KernelSpec(2, 2, math.exp(-0.5)), 10)
    assert rep.zero_indices == [0]
    assert not rep.fundamental


def test_report_odd_dimension_rho_invariant():
    flags = [tuple(e.zero_flag for e in fundamentality_report(KernelSpec(3, 2, rho), 10).entries)
             for rho in (0.3, 1.0, 4.0)]
    assert len(set(flags)) == 1 and not any(flags[0])


def test_report_methods_agree():
    rep = fundamentality_report(KernelSpec(2, 2, 0.8), 8, method="both")
    for e in rep.entries:
        assert e.numeric == pytest.approx(e.value, rel=1e-8, abs=1e-12)
    q = fundamentality_report(KernelSpec(2, 2, 0.8), 8, method="quadrature")
    np.testing.assert_allclose(q.values, rep.values, rtol=1e-8, atol=1e-12)


def test_degenerate_radii_examples():
    r = degenerate_radii(2, 2)
    assert r[0] == pytest.approx(math.exp(-0.5), abs=1e-14)
    assert r[1] == pytest.approx(math.exp(-0.75), abs=1e-14)
    assert degenerate_taus(2, 3) == [Fraction(7, 6), Fraction(4, 3), Fraction(25, 12)]
    assert degenerate_radii(3, 2) == [] and degenerate_radii(1, 1) == []


@pytest.mark.parametrize("dk", [(2, 2), (2, 3), (4, 3)])
def test_degenerate_radii_by_quadrature(dk):
    d, k = dk
    lam = (d - 2) / 2
    for j, rho in enumerate(degenerate_radii(d, k)):
        def coeffs(r):
            spec = KernelSpec(d, k, r)
            psi = lambda t: eval_psi_scaled(spec, t)
            return np.array([coeff_numeric(psi, i, lam) for i in range(11)])
        a = coeffs(rho)
        assert abs(a[j]) <= 1e-8 * np.max(np.abs(a))
        for f in (0.99, 1.01):
            b = coeffs(rho * f)
            assert abs(b[j]) > 1e-4 * np.max(np.abs(b))
