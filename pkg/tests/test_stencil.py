from fractions import Fraction
import itertools

import pytest

from polyapprox.stencil import build_stencil, moment, multi_indices

PAIRS = [(d, k) for d in (1, 2, 3) for k in (1, 2, 3) if 2 * k > d]


def test_examples():
    assert build_stencil(1, 1).coeffs == {(-1,): -1, (0,): 2, (1,): -1}
    assert build_stencil(2, 1).coeffs == {(0, 0): 4, (1, 0): -1, (-1, 0): -1, (0, 1): -1, (0, -1): -1}
    assert build_stencil(1, 2).coeffs == {(-2,): 1, (-1,): -4, (0,): 6, (1,): -4, (2,): 1}


def test_json_keys():
    assert build_stencil(1, 2).to_json_dict() == {"-2": 1, "-1": -4, "0": 6, "1": -4, "2": 1}
    assert build_stencil(2, 1).to_json_dict()["0,1"] == -1


def test_moment_examples():
    st = build_stencil(1, 1)
    assert moment(st, (0,)) == 0
    assert moment(st, (1,)) == 0
    assert moment(st, (2,)) == -2


@pytest.mark.parametrize("d,k", PAIRS)
def test_moments_vanish(d, k):
    st = build_stencil(d, k)
    for alpha in multi_indices(d, 2 * k - 1):
        m = moment(st, alpha)
        assert isinstance(m, Fraction) and m == 0


@pytest.mark.parametrize("d,k", PAIRS)
def test_order_2k_moment_nonzero(d, k):
    # the annihilation is sharp: some moment of order 2k survives
    st = build_stencil(d, k)
    assert any(moment(st, a) != 0 for a in multi_indices(d, 2 * k) if sum(a) == 2 * k)


@pytest.mark.parametrize("d,k", PAIRS)
def test_support_and_symmetry(d, k):
    st = build_stencil(d, k)
    for z, c in st.coeffs.items():
        assert sum(abs(v) for v in z) <= k
        assert c != 0
        for perm in itertools.permutations(range(d)):
            assert st.coeffs[tuple(z[i] for i in perm)] == c
        for signs in itertools.product((1, -1), repeat=d):
            assert st.coeffs[tuple(s * v for s, v in zip(signs, z))] == c


@pytest.mark.parametrize("d,k", PAIRS)
def test_integer_coefficients(d, k):
    st = build_stencil(d, k)
    assert all(float(c).is_integer() for c in st.values)
    # centre coefficient of the k-fold negative Laplacian is positive
    assert st.coeffs[(0,) * d] > 0
