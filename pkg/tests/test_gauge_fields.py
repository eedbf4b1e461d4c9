from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncqft.fatpoint_space import SupportSet
from ncqft.gauge_fields import (K1, K2, ConnectionField, GaugeGroupSpec, GaugeTransformation,
                                LorentzKernel, SourceAndPotential, VectorSection,
                                action_integrand, boost, commutator_identity_check,
                                commutator_identity_polynomial, curvature,
                                gauge_transform_connection, gauge_transform_section,
                                nabla_apply, partition_estimate, sample_fatpoint_measure)
from ncqft.nilpotent_group import GroupParams, LatticeSpec
from ncqft.polynomial import Polynomial
from ncqft.quantization import WeightFunction

P = 4


@pytest.fixture
def support():
    return SupportSet(np.array([[0.0, 0.0], [1.0, 0.3], [0.2, 1.5], [2.0, 2.0]]))


def _section(support, m, rng, degree=2):
    return VectorSection(support, Polynomial.random(support.p, degree, rng, 6, (m,), True))


def _generator(spec, p, rng):
    G = spec.random_algebra_polynomial(p, 2, rng, scale=0.5)
    for i in range(p):
        G = G + Polynomial.variable(p, i) * spec.random_algebra(rng, 0.5)
    return G


def _weights(rng, p=P):
    return rng.dirichlet(np.ones(p + 1))[:p]


def test_group_spec(rng):
    for group in ("U", "SU"):
        spec = GaugeGroupSpec(3, group)
        a = spec.random_algebra(rng)
        assert spec.algebra_defect(a) < 1e-12
        u = spec.random_unitary(rng)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(3), atol=1e-12)
    su = GaugeGroupSpec(2, "SU").random_algebra(rng)
    assert abs(np.trace(su)) < 1e-12
    a = GaugeGroupSpec(2).random_algebra(rng)
    assert GaugeGroupSpec.killing(a, a) >= 0


def test_nabla_examples(support, rng):
    w = _weights(rng)
    f = _section(support, 2, rng)
    zero = ConnectionField.zero(support, 2)
    np.testing.assert_allclose(nabla_apply(zero, 1, f, w), f.derivative(1, w))
    const = VectorSection(support, Polynomial.constant(P, np.array([1.0, 2.0j])))
    A = ConnectionField.random(support, GaugeGroupSpec(2), 1, rng)
    np.testing.assert_allclose(nabla_apply(A, 2, const, w), A.value(2, w) @ const.value(w))
    # m = 1, A_x = i c, linear f
    c = 0.7
    A1 = ConnectionField(support, [Polynomial.constant(P, np.array([[1j * c]]))] * P)
    lin = VectorSection(support, Polynomial.linear(np.arange(1.0, P + 1)) * np.ones(1))
    expected = 2.0 + 1j * c * lin.value(w)[0]
    assert nabla_apply(A1, 1, lin, w)[0] == pytest.approx(expected)
    assert nabla_apply(A1, support.points[1], lin, w)[0] == pytest.approx(expected)


def test_curvature_examples(support, rng):
    w = _weights(rng)
    A1 = ConnectionField(support, [Polynomial.constant(P, np.array([[0.3j]]))] * P)
    assert np.abs(curvature(A1, 0, 1, w)).max() == 0
    spec = GaugeGroupSpec(2)
    mats = [spec.random_algebra(rng) for _ in range(P)]
    A = ConnectionField(support, [Polynomial.constant(P, a) for a in mats])
    np.testing.assert_allclose(curvature(A, 0, 2, w), mats[0] @ mats[2] - mats[2] @ mats[0],
                               atol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_commutator_identity(m, support, rng):
    spec = GaugeGroupSpec(m)
    w = _weights(rng)
    assert commutator_identity_check(ConnectionField.zero(support, m), 0, 1,
                                     _section(support, m, rng), w) < 1e-12
    for _ in range(5):
        A = ConnectionField.random(support, spec, 2, rng)
        f = _section(support, m, rng)
        assert commutator_identity_check(A, 1, 3, f, w) < 1e-9
        assert commutator_identity_polynomial(A, 1, 3, f).is_zero(1e-9)


def test_gauge_transform_examples(support, rng):
    spec = GaugeGroupSpec(2)
    w = _weights(rng)
    g = GaugeTransformation.constant(support, spec.random_algebra(rng))
    At = gauge_transform_connection(ConnectionField.zero(support, 2), g)
    assert np.abs(At.value(0, w)).max() < 1e-12
    A = ConnectionField.random(support, spec, 2, rng)
    At = gauge_transform_connection(A, g)
    gv = g.value(w)
    np.testing.assert_allclose(At.value(1, w), gv @ A.value(1, w) @ np.linalg.inv(gv), atol=1e-12)


def test_jets_match_finite_differences(support, rng):
    spec = GaugeGroupSpec(2)
    g = GaugeTransformation(support, _generator(spec, P, rng))
    w = _weights(rng)
    e = np.zeros(P)
    e[2] = 1e-6
    _, gi = g.first(2, w)
    np.testing.assert_allclose(gi, (g.value(w + e) - g.value(w - e)) / 2e-6, atol=1e-7)
    _, _, _, gij = g.jets(1, 2, w)
    f = np.zeros(P)
    f[1] = 1e-4
    fd = (g.first(2, w + f)[1] - g.first(2, w - f)[1]) / 2e-4
    np.testing.assert_allclose(gij, fd, atol=1e-6)
    assert g.unitarity_defect(w) < 1e-12


@pytest.mark.parametrize("m", [1, 2, 3])
def test_covariance_and_invariance(m, support, rng):
    spec = GaugeGroupSpec(m)
    B = LorentzKernel(1.0)
    for _ in range(3):
        A = ConnectionField.random(support, spec, 2, rng)
        f, J = _section(support, m, rng), _section(support, m, rng, 1)
        g = GaugeTransformation(support, _generator(spec, P, rng))
        At, ft, Jt = (gauge_transform_connection(A, g), gauge_transform_section(f, g),
                      gauge_transform_section(J, g))
        w = _weights(rng)
        gv = g.value(w)
        for x in range(P):
            np.testing.assert_allclose(nabla_apply(At, x, ft, w), gv @ nabla_apply(A, x, f, w),
                                       atol=1e-9)
        np.testing.assert_allclose(curvature(At, 0, 3, w), gv @ curvature(A, 0, 3, w) @ gv.conj().T,
                                   atol=1e-9)
        assert commutator_identity_check(At, 0, 2, ft, w) < 1e-9
        assert K1(At, w, B) == pytest.approx(K1(A, w, B), rel=1e-8)
        assert K2(At, ft, w, B) == pytest.approx(K2(A, f, w, B), rel=1e-8)
        src, srct = SourceAndPotential(J, (0.1, 0.5, 0.2)), SourceAndPotential(Jt, (0.1, 0.5, 0.2))
        assert action_integrand(At, ft, srct, w, B) == pytest.approx(
            action_integrand(A, f, src, w, B), rel=1e-8)


def test_broken_law_is_detected(support, rng):
    spec = GaugeGroupSpec(2)
    A = ConnectionField.random(support, spec, 2, rng)
    f = _section(support, 2, rng)
    g = GaugeTransformation(support, _generator(spec, P, rng))
    At = gauge_transform_connection(A, g, broken=True)
    w = _weights(rng)
    defect = np.abs(nabla_apply(At, 0, gauge_transform_section(f, g), w)
                    - g.value(w) @ nabla_apply(A, 0, f, w)).max()
    assert defect > 1e-3


def test_functional_trivial_values(support, rng):
    B = LorentzKernel(1.0)
    w = _weights(rng)
    zero = ConnectionField.zero(support, 2)
    fz = VectorSection(support, Polynomial.zero(P, (2,)))
    assert K1(zero, w, B) == 0
    A1 = ConnectionField(support, [Polynomial.constant(P, np.array([[0.4j]]))] * P)
    assert K1(A1, w, B) == 0
    assert K2(ConnectionField.random(support, GaugeGroupSpec(2), 1, rng), fz, w, B) == 0
    const = VectorSection(support, Polynomial.constant(P, np.array([1.0, -1.0])))
    assert K2(zero, const, w, B) == 0
    assert action_integrand(zero, fz, SourceAndPotential(None, ()), w, B) == 0
    A = ConnectionField.random(support, GaugeGroupSpec(2), 2, rng)
    f = _section(support, 2, rng)
    assert action_integrand(A, f, SourceAndPotential(None, ()), w, B) == pytest.approx(
        K1(A, w, B) + K2(A, f, w, B))


def test_lorentz_kernel_is_boost_invariant(rng):
    B = LorentzKernel(1.3)
    x = rng.standard_normal((5, 2))
    L = boost(0.8, 2)
    np.testing.assert_allclose(B.matrix(x @ L.T), B.matrix(x), atol=1e-12)
    np.testing.assert_allclose(np.diag(B.matrix(x)), 1.0)


def _weight(eps):
    lat = LatticeSpec(GroupParams(2, eps, "continuum"), 16, 0.5)
    return WeightFunction.gaussian(lat)


def test_sampler_examples(support):
    s = sample_fatpoint_measure(_weight(0.0), 5, 11, support)
    assert s.phase == pytest.approx(1.0)
    assert s.log_weight == pytest.approx(0.0, abs=1e-12)
    one = sample_fatpoint_measure(_weight(1.0), 1, 11, support)
    assert len(one.measure.weights) == 1
    a = sample_fatpoint_measure(_weight(1.0), 6, 11, support, index=4)
    b = sample_fatpoint_measure(_weight(1.0), 6, 11, support, index=4)
    np.testing.assert_array_equal(a.weights, b.weights)
    assert (a.log_weight, a.phase) == (b.log_weight, b.phase)
    assert a.weights.sum() == pytest.approx(1.0)


def test_partition_zero_action_is_one(support):
    fam = [(ConnectionField.zero(support, 1), VectorSection(support, Polynomial.zero(P, (1,))))]
    res = partition_estimate(fam, SourceAndPotential(None, ()), LorentzKernel(1.0), _weight(1.0),
                             support, 3, 50, seed=2)
    assert res.value == 1.0
    assert res.meta["status"] == "exploratory"


def test_partition_source_linearity(support, rng):
    # A = 0, V = 0 and constant f: the action is -<J, f> only
    B = LorentzKernel(1.0)
    J = VectorSection(support, Polynomial.linear(np.arange(1.0, P + 1)) * np.ones(1))
    src = SourceAndPotential(J, ())
    svals = np.linspace(-1, 1, 5)
    q = np.full(5, 0.2)
    fam = [(ConnectionField.zero(support, 1),
            VectorSection(support, Polynomial.constant(P, np.array([s])))) for s in svals]
    W = _weight(1.0)
    res = partition_estimate(fam, src, B, W, support, 3, 200, seed=5, quad_weights=q)
    draws = [sample_fatpoint_measure(W, 3, 5, support, i) for i in range(200)]
    omega = np.array([np.exp(d.log_weight) * d.phase for d in draws])
    mean_J = np.mean([o * J.value(d.weights)[0] for o, d in zip(omega, draws)])
    direct = np.sum(q * np.exp(-1j * svals * mean_J))
    assert res.value == pytest.approx(direct, rel=1e-12)


def test_partition_reproducible_and_scaling(support, rng):
    spec = GaugeGroupSpec(1)
    fam = [
        (ConnectionField.random(support, spec, 1, rng, 0.3),
         VectorSection(support, Polynomial.random(P, 1, rng, 3, (1,), True) * 0.3))
        for _ in range(2)]
    src = SourceAndPotential(VectorSection(support, Polynomial.random(P, 1, rng, 2, (1,))), (0.0, 0.2))
    B, W = LorentzKernel(1.0), _weight(1.0)
    r1 = partition_estimate(fam, src, B, W, support, 3, 100, seed=9)
    r2 = partition_estimate(fam, src, B, W, support, 3, 100, seed=9)
    assert r1.value == r2.value and r1.stderr == r2.stderr
    r3 = partition_estimate(fam, src, B, W, support, 3, 1000, seed=9)
    assert 1 / 1.5 <= (r1.stderr / r3.stderr) / np.sqrt(10) <= 1.5
