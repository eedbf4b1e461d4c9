from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncqft.group_fourier import (DualPoint, OperatorField, RepSpec, RepresentationError,
                                 IrrepLabel, SkewForm, calibrate, character_eval,
                                 continuum_labels, dual_norm2, finite_labels, fourier0,
                                 fourier0_inv, fourierE, fourierE_inv, hs_inner,
                                 plancherel_weight, rep_matrix, twisted_convolve,
                                 twisted_convolve_bruteforce, twisted_power)
from ncqft.nilpotent_group import (GroupElement, GroupParams, LatticeSpec, compose,
                                   enumerate_group)


def _random(lat, rng):
    return rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape)


def test_character_examples(rng):
    p = GroupParams(2, 1.0, "continuum")
    pt = DualPoint(np.array([np.pi, 0.0]), np.array([0.0]))
    assert character_eval(pt, ((1, 0), (0,)), p) == pytest.approx(-1)
    zero = DualPoint(np.zeros(2), np.zeros(1))
    g = GroupElement(rng.standard_normal((5, 2)), rng.standard_normal((5, 1)))
    np.testing.assert_allclose(character_eval(zero, g, p), 1)
    pt = DualPoint(rng.standard_normal(2), rng.standard_normal(1))
    assert character_eval(pt, ((0, 0), (0,)), p) == pytest.approx(1)


def test_fourier0_delta_and_roundtrip(finite3, rng):
    lat = finite3
    np.testing.assert_allclose(fourier0(lat.delta(), lat), 1)
    f = _random(lat, rng)
    np.testing.assert_allclose(fourier0_inv(fourier0(f, lat), lat), f, atol=1e-12)
    assert dual_norm2(fourier0(f, lat), lat) == pytest.approx(lat.norm2(f), rel=1e-12)


def test_fourier0_of_conjugate_character_is_one_hot(finite3):
    lat = finite3
    g = lat.sites()
    phi, Phi = np.array([1, 2]), np.array([1])
    chi = np.exp(-2j * np.pi / 3 * ((g.X * phi).sum(-1) + (g.A * Phi).sum(-1))).reshape(lat.shape)
    u = fourier0(chi, lat)
    assert np.count_nonzero(np.abs(u) > 1e-9) == 1


def test_fourierE_delta_examples(finite3):
    lat = finite3
    labels = finite_labels(lat)
    F = fourierE(lat.delta(), labels)
    np.testing.assert_allclose(F.fibers, np.broadcast_to(np.eye(3), F.fibers.shape), atol=1e-12)
    A0 = GroupElement(np.array([0, 0]), np.array([1]))
    F = fourierE(lat.delta(A0), labels)
    for lab, fib in zip(labels.labels, F.fibers):
        phase = np.exp(2j * np.pi / 3 * lab.Phi[0])
        np.testing.assert_allclose(fib, phase * np.eye(3), atol=1e-12)


def test_fourierE_inverse_examples(finite3, rng):
    labels = finite_labels(finite3)
    np.testing.assert_allclose(fourierE_inv(OperatorField.identity(labels)), finite3.delta(),
                               atol=1e-12)
    np.testing.assert_allclose(fourierE_inv(OperatorField.zeros(labels)), 0)
    f = _random(finite3, rng)
    np.testing.assert_allclose(fourierE_inv(fourierE(f, labels)), f, atol=1e-10)


@pytest.mark.parametrize("eps", [0, 1, 2])
def test_finite_parseval(eps, rng):
    lat = LatticeSpec.finite(GroupParams(2, eps, "finite", 3))
    labels = finite_labels(lat)
    f = _random(lat, rng)
    F = fourierE(f, labels)
    assert hs_inner(F, F).real == pytest.approx(lat.norm2(f), rel=1e-12)


def test_rep_matrix_homomorphism_finite(rng):
    p = GroupParams(2, 1, "finite", 5)
    lat = LatticeSpec.finite(p)
    labels = finite_labels(lat)
    g = enumerate_group(p)
    i, j = rng.integers(0, len(g.X), (2, 30))
    for lab in labels.labels:
        for a, b in zip(i, j):
            ga, gb = g.take(a), g.take(b)
            lhs = rep_matrix(lab, compose(ga, gb, p), labels.spec, p)
            rhs = rep_matrix(lab, ga, labels.spec, p) @ rep_matrix(lab, gb, labels.spec, p)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_central_elements_are_scalar():
    p = GroupParams(2, 1.0, "continuum")
    lab = IrrepLabel("infinite", (1.5,))
    R = rep_matrix(lab, ((0, 0), (0.4,)), RepSpec(12), p)
    np.testing.assert_allclose(R, np.exp(1j * 1.5 * 0.4) * np.eye(12), atol=1e-12)
    np.testing.assert_allclose(rep_matrix(lab, ((0, 0), (0,)), RepSpec(12), p), np.eye(12),
                               atol=1e-12)


def test_degenerate_label_rejected():
    p = GroupParams(2, 1.0, "continuum")
    with pytest.raises(RepresentationError):
        rep_matrix(IrrepLabel("infinite", (0.0,)), ((1, 0), (0,)), RepSpec(4), p)


def test_skew_form_pfaffian():
    assert abs(SkewForm((2.0,), 2).pfaffian()) == pytest.approx(2.0)
    assert abs(SkewForm((1, 0, 0, 0, 0, 1), 4).pfaffian()) == pytest.approx(1.0)


def test_plancherel_weight_examples():
    p = GroupParams(2, 1.0, "continuum")
    lat = LatticeSpec(p, 8, 0.5)
    labels = continuum_labels(lat, 8, 3.0, 3)
    lab = labels.labels[0]
    assert plancherel_weight(lab, labels) == pytest.approx(
        labels.calibration * abs(lab.Phi[0]) * 2.0)
    assert plancherel_weight(IrrepLabel("character", (0.0,), (0.0, 0.0)), labels) == 0.0


@pytest.mark.parametrize("eps", [0, 1, 2])
def test_convolution_theorem(eps, rng):
    lat = LatticeSpec.finite(GroupParams(2, eps, "finite", 3))
    labels = finite_labels(lat)
    h1, h2 = _random(lat, rng), _random(lat, rng)
    conv = twisted_convolve(h1, h2, lat=lat)
    np.testing.assert_allclose(conv, twisted_convolve_bruteforce(h1, h2, lat), atol=1e-12)
    lhs = fourierE(conv, labels)
    rhs = fourierE(h1, labels) @ fourierE(h2, labels)
    assert np.abs(lhs.fibers - rhs.fibers).max() < 1e-12


def test_twisted_power_matches_repeated_product(finite3, rng):
    h = _random(finite3, rng)
    p3 = twisted_power(h, 3, finite3)
    np.testing.assert_allclose(p3, twisted_convolve(h, h, h, lat=finite3), atol=1e-12)


@given(st.integers(0, 2 ** 32))
def test_operator_field_algebra(seed):
    rng = np.random.default_rng(seed)
    lat = LatticeSpec.finite(GroupParams(2, 1, "finite", 3))
    labels = finite_labels(lat)
    f, g = _random(lat, rng), _random(lat, rng)
    F, G = fourierE(f, labels), fourierE(g, labels)
    np.testing.assert_allclose(fourierE(f + g, labels).fibers, (F + G).fibers, atol=1e-12)
    assert hs_inner(F, G) == pytest.approx(np.conj(hs_inner(G, F)))
    assert hs_inner(F, G) == pytest.approx(lat.inner(f, g), rel=1e-10)


def test_continuum_parseval_after_calibration():
    p = GroupParams(2, 1.0, "continuum")
    lat = LatticeSpec(p, 24, 0.4)
    g = lat.sites()

    def gauss(c, w):
        r = ((g.X - c[:2]) ** 2).sum(-1) + ((g.A - c[2:]) ** 2).sum(-1)
        return np.exp(-r / (2 * w ** 2)).reshape(lat.shape)

    labels = calibrate(continuum_labels(lat, 24, 4.0, 12), gauss(np.zeros(3), 1.0))
    c = labels.calibration
    assert c == pytest.approx(labels.meta["calibration_analytic"], rel=1e-3)
    f = gauss(np.array([0.3, -0.2, 0.1]), 1.05)
    F = fourierE(f, labels)
    assert hs_inner(F, F).real == pytest.approx(lat.norm2(f), rel=1e-4)
