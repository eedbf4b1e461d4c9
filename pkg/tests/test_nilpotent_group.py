from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncqft.nilpotent_group import (ConfigurationError, GroupElement, GroupParams, LatticeSpec,
                                   compose, enumerate_group, group_commutator, identity,
                                   inverse, random_elements, telescope, untelescope, wedge)


def test_wedge_examples():
    e1, e2 = np.eye(4)[0], np.eye(4)[1]
    np.testing.assert_array_equal(wedge(e1, e2), [1, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(wedge([1, 0], [0, 2]), [2])


def test_wedge_shape_error():
    with pytest.raises(ValueError):
        wedge([1, 0], [1, 0, 0])


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_wedge_antisymmetric(x):
    y = x[::-1]
    np.testing.assert_allclose(wedge(x, x), 0)
    np.testing.assert_allclose(wedge(x, y), -wedge(y, x))


def test_compose_example():
    p = GroupParams(2, 1.0, "continuum")
    g = compose(((1, 0), (0,)), ((0, 2), (0,)), p)
    np.testing.assert_allclose(g.X, [1, 2])
    np.testing.assert_allclose(g.A, [1])


def test_even_modulus_rejected():
    with pytest.raises(ConfigurationError):
        GroupParams(2, 1, "finite", 4)


def test_identity_and_inverse(rng):
    p = GroupParams(3, 0.7, "continuum")
    g = random_elements(p, rng, 50)
    e = identity(p, (50,))
    np.testing.assert_allclose(compose(g, e, p).flat(), g.flat())
    np.testing.assert_allclose(compose(g, inverse(g, p), p).flat(), 0, atol=1e-12)
    inv = inverse(((1, 2), (3,)), GroupParams(2, 1.0, "continuum"))
    np.testing.assert_allclose(inv.flat(), [-1, -2, -3])


def test_commutator_examples(rng):
    p = GroupParams(2, 1.0, "continuum")
    c = group_commutator(((1, 0), (0,)), ((0, 1), (0,)), p)
    np.testing.assert_allclose(c.flat(), [0, 0, 1])
    p0 = p.with_epsilon(0.0)
    a, b = random_elements(p0, rng, 20), random_elements(p0, rng, 20)
    np.testing.assert_allclose(group_commutator(a, b, p0).flat(), 0, atol=1e-12)
    central = GroupElement(np.zeros((20, 2)), rng.standard_normal((20, 1)))
    np.testing.assert_allclose(group_commutator(central, a, p).flat(), 0, atol=1e-12)


@pytest.mark.parametrize("n", [3, 5])
def test_finite_associativity_exhaustive(n):
    p = GroupParams(2, 1, "finite", n)
    g = enumerate_group(p)
    G = len(g.X)
    i, j, k = np.unravel_index(np.arange(G ** 3), (G,) * 3)
    a, b, c = g.take(i), g.take(j), g.take(k)
    lhs = compose(compose(a, b, p), c, p)
    rhs = compose(a, compose(b, c, p), p)
    assert np.array_equal(lhs.flat(), rhs.flat())


@given(st.integers(0, 2 ** 32), st.floats(0, 3))
def test_continuum_associativity(seed, eps):
    p = GroupParams(4, eps, "continuum")
    rng = np.random.default_rng(seed)
    a, b, c = (random_elements(p, rng, 10) for _ in range(3))
    lhs = compose(compose(a, b, p), c, p)
    rhs = compose(a, compose(b, c, p), p)
    np.testing.assert_allclose(lhs.flat(), rhs.flat(), atol=1e-12)


def test_telescope_trivial_cases(rng):
    p = GroupParams(2, 1.3, "continuum")
    chain = random_elements(p, rng, (1, 7))
    np.testing.assert_allclose(telescope(chain, p).flat(), chain.flat())
    p0 = p.with_epsilon(0.0)
    chain = random_elements(p0, rng, (4, 7))
    tel = telescope(chain, p0)
    np.testing.assert_allclose(tel.X, np.cumsum(chain.X, 0))
    np.testing.assert_allclose(tel.A, np.cumsum(chain.A, 0))
    np.testing.assert_allclose(untelescope(tel, p0).flat(), chain.flat(), atol=1e-12)


def test_telescope_is_partial_product(rng):
    p = GroupParams(2, 0.9, "continuum")
    chain = random_elements(p, rng, (3,))
    tel = telescope(chain, p)
    prod = compose(compose(chain.take(0), chain.take(1), p), chain.take(2), p)
    np.testing.assert_allclose(tel.take(2).flat(), prod.flat(), atol=1e-12)


def test_telescope_bijection_finite():
    p = GroupParams(2, 1, "finite", 3)
    N = 3
    flat = np.indices((3,) * (3 * N)).reshape(3 * N, -1).T
    ch = flat.reshape(-1, N, 3).transpose(1, 0, 2)
    el = GroupElement(ch[..., :2], ch[..., 2:])
    tel = telescope(el, p)
    image = np.concatenate([tel.X, tel.A], -1).transpose(1, 0, 2).reshape(len(flat), -1)
    assert len(np.unique(image, axis=0)) == len(flat)
    assert np.array_equal(untelescope(tel, p).flat(), el.flat())


def test_lattice_basics():
    p = GroupParams(2, 1.0, "continuum")
    lat = LatticeSpec(p, 8, 0.5)
    assert lat.shape == (8, 8, 8)
    d = lat.delta()
    assert lat.inner(d, np.ones(lat.shape)) == pytest.approx(1.0)
