from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncqft.polynomial import Polynomial


def _poly(seed, nvars=3, degree=3):
    return Polynomial.random(nvars, degree, np.random.default_rng(seed), 5, (), True)


def test_constructors():
    x = Polynomial.variable(2, 0)
    assert x([3.0, 4.0]) == 3.0
    lin = Polynomial.linear([1.0, 2.0], const=0.5)
    assert lin([1.0, 1.0]) == pytest.approx(3.5)
    assert Polynomial.zero(3).is_zero()
    assert Polynomial.zero(3).degree == -1
    assert Polynomial.constant(2, 5.0).degree == 0


def test_bad_exponents():
    with pytest.raises(ValueError):
        Polynomial(2, {(1,): 1.0})
    with pytest.raises(ValueError):
        Polynomial(2, {(1, -1): 1.0})


def test_zero_terms_are_dropped():
    p = Polynomial(2, {(1, 0): 1.0}) - Polynomial(2, {(1, 0): 1.0})
    assert p.terms == {}
    assert p == Polynomial.zero(2)


def test_matrix_coefficients():
    a = np.array([[0, 1], [0, 0]], complex)
    b = np.array([[0, 0], [1, 0]], complex)
    A = Polynomial.variable(1, 0) * a
    B = Polynomial.constant(1, b)
    w = np.array([2.0])
    np.testing.assert_allclose(A.matmul(B)(w), 2 * a @ b)
    np.testing.assert_allclose(B.matmul(A)(w), 2 * b @ a)
    np.testing.assert_allclose((A * B)(w), 2 * a * b)


def test_batched_evaluation():
    p = Polynomial(2, {(2, 0): 1.0, (0, 1): 3.0})
    w = np.array([[1.0, 1.0], [2.0, 0.0]])
    np.testing.assert_allclose(p(w), [4.0, 4.0])


@given(st.integers(0, 2 ** 32), st.integers(0, 2 ** 32))
def test_ring_laws(s1, s2):
    p, q = _poly(s1), _poly(s2)
    w = np.random.default_rng(s1 ^ s2).standard_normal(3)
    assert complex((p * q)(w)) == pytest.approx(complex(p(w) * q(w)))
    assert complex((p + q)(w)) == pytest.approx(complex(p(w) + q(w)))
    assert ((p * q) - (q * p)).is_zero(1e-12)
    assert (p - p).is_zero()


@given(st.integers(0, 2 ** 32), st.integers(0, 2))
def test_derivative_leibniz(seed, i):
    p, q = _poly(seed), _poly(seed + 1)
    diff = (p * q).derivative(i) - (p.derivative(i) * q + p * q.derivative(i))
    assert diff.is_zero(1e-10)


@given(st.integers(0, 2 ** 32), st.integers(0, 2))
def test_derivative_leibniz_exact_on_integers(seed, i):
    # integer coefficients make every product exact in floating point
    p, q = (_poly(s).map_coefficients(lambda c: np.round(3 * c)) for s in (seed, seed + 1))
    assert (p * q).derivative(i) == p.derivative(i) * q + p * q.derivative(i)


@given(st.integers(0, 2 ** 32))
def test_derivative_matches_finite_difference(seed):
    p = _poly(seed)
    w = np.random.default_rng(seed).standard_normal(3)
    e = np.array([0, 1e-6, 0])
    fd = (complex(p(w + e)) - complex(p(w - e))) / 2e-6
    assert complex(p.derivative(1)(w)) == pytest.approx(fd, rel=1e-6, abs=1e-6)


@given(st.integers(0, 2 ** 32))
def test_text_roundtrip(seed):
    p = _poly(seed, 4)
    assert Polynomial.from_text(p.to_text(), 4) == p


def test_text_format_example():
    p = Polynomial.from_text("(1.5+0j) 0:2 3:1\n# comment\n2 1:1\n", 4)
    assert p([2.0, 1.0, 0.0, 1.0]) == pytest.approx(1.5 * 4 + 2)
    with pytest.raises(ValueError):
        (Polynomial.variable(1, 0) * np.ones(2)).to_text()
