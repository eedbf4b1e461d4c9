"""Gauge fields over fat points.

Fields are functions of a fat point ``mu`` supported on a fixed
:class:`~ncqft.fatpoint_space.SupportSet`, i.e. of its weight vector ``w``.
A connection assigns to every support point ``x`` a matrix ``A_x(w)`` in the
Lie algebra of U(m); ``nabla_x = d_x + A_x`` acts on C^m-valued sections.

Every field type exposes the same small interface, so that polynomial data
and gauge transformed data are interchangeable:

``value(w)`` / ``value(i, w)``
    the field at ``w``;
``derivative(...)``
    exact partial derivatives in the weight coordinates.

Gauge transformations are ``g(w) = expm(G(w))`` with ``G`` an anti-Hermitian
matrix polynomial; their first and mixed second derivatives are read off a
single block-triangular matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .fatpoint_space import (DiscreteMeasure, ParamPath, SignedMeasure, SupportSet,
                             path_to_measure)
from .nilpotent_group import wedge
from .polynomial import Polynomial
from .quantization import WeightFunction, weight_symbol_eval


def _dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


# ---------------------------------------------------------------------------
# the gauge group

@dataclass(frozen=True)
class GaugeGroupSpec:
    """U(m) or SU(m) with the invariant form ``killing(a, b) = -tr(ab)``."""

    m: int
    group: str = "U"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        if self.group not in ("U", "SU"):
            raise ValueError("group must be 'U' or 'SU'")

    @staticmethod
    def killing(a, b) -> float:
        return float(-np.trace(np.asarray(a) @ np.asarray(b)).real)

    def random_algebra(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        z = rng.standard_normal((self.m, self.m)) + 1j * rng.standard_normal((self.m, self.m))
        a = 0.5 * scale * (z - _dagger(z))
        if self.group == "SU":
            a = a - np.trace(a) / self.m * np.eye(self.m)
        return a

    def random_unitary(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return expm(self.random_algebra(rng, scale))

    def algebra_defect(self, a) -> float:
        a = np.asarray(a)
        d = float(np.abs(a + _dagger(a)).max())
        if self.group == "SU":
            d = max(d, float(abs(np.trace(a))))
        return d

    def random_algebra_polynomial(self, nvars: int, degree: int, rng: np.random.Generator,
                                  nterms: int = 4, scale: float = 1.0) -> Polynomial:
        """A polynomial whose coefficients lie in the algebra, hence its values on real w."""
        P = Polynomial.random(nvars, degree, rng, nterms, shape=(self.m, self.m))
        return P.map_coefficients(lambda c: self.random_algebra(rng, scale))


# ---------------------------------------------------------------------------
# sections

class VectorSection:
    """A C^m-valued polynomial functional of the weights."""

    def __init__(self, support: SupportSet, poly: Polynomial):
        if poly.nvars != support.p or len(poly.shape) != 1:
            raise ValueError("section needs a vector-valued polynomial in p variables")
        self.support = support
        self.poly = poly
        self._d1 = [poly.derivative(i) for i in range(support.p)]
        self._d2 = {}

    @property
    def m(self) -> int:
        return self.poly.shape[0]

    def value(self, w) -> np.ndarray:
        return self.poly(w)

    def derivative(self, i: int, w) -> np.ndarray:
        return self._d1[i](w)

    def second(self, i: int, j: int, w) -> np.ndarray:
        key = (min(i, j), max(i, j))
        if key not in self._d2:
            self._d2[key] = self._d1[key[0]].derivative(key[1])
        return self._d2[key](w)


class ConnectionField:
    """``A_x(w)`` for every support point ``x``: matrix polynomials in the algebra."""

    def __init__(self, support: SupportSet, components: Sequence[Polynomial]):
        if len(components) != support.p:
            raise ValueError("need one matrix polynomial per support point")
        self.support = support
        self.components = tuple(components)
        self._d = {}

    @classmethod
    def zero(cls, support: SupportSet, m: int) -> "ConnectionField":
        return cls(support, [Polynomial.zero(support.p, (m, m))] * support.p)

    @classmethod
    def random(cls, support: SupportSet, spec: GaugeGroupSpec, degree: int,
               rng: np.random.Generator, scale: float = 1.0) -> "ConnectionField":
        return cls(support, [spec.random_algebra_polynomial(support.p, degree, rng, scale=scale)
                             for _ in range(support.p)])

    @property
    def m(self) -> int:
        return self.components[0].shape[0]

    def value(self, i: int, w) -> np.ndarray:
        return self.components[i](w)

    def derivative(self, j: int, i: int, w) -> np.ndarray:
        """``d_j A_i(w)``."""
        if (j, i) not in self._d:
            self._d[(j, i)] = self.components[i].derivative(j)
        return self._d[(j, i)](w)


class GaugeTransformation:
    """``g(w) = expm(G(w))`` for an algebra-valued polynomial ``G``."""

    def __init__(self, support: SupportSet, generator: Polynomial):
        self.support = support
        self.generator = generator
        self._dG = [generator.derivative(i) for i in range(support.p)]
        self._ddG = {}

    @classmethod
    def constant(cls, support: SupportSet, g_log) -> "GaugeTransformation":
        return cls(support, Polynomial.constant(support.p, g_log))

    @property
    def m(self) -> int:
        return self.generator.shape[0]

    def value(self, w) -> np.ndarray:
        return expm(self.generator(w))

    def _ddgen(self, i, j, w):
        key = (min(i, j), max(i, j))
        if key not in self._ddG:
            self._ddG[key] = self._dG[key[0]].derivative(key[1])
        return self._ddG[key](w)

    def jets(self, i: int, j: int, w):
        """``(g, d_i g, d_j g, d_i d_j g)`` at ``w``.

        The exponential of the block matrix
        ``[[G, Gi, Gj, Gij], [0, G, 0, Gj], [0, 0, G, Gi], [0, 0, 0, G]]``
        carries these four matrices in its first block row.
        """
        m = self.m
        G = self.generator(w)
        Gi, Gj = self._dG[i](w), self._dG[j](w)
        Gij = self._ddgen(i, j, w)
        Z = np.zeros((m, m), complex)
        big = np.block([[G, Gi, Gj, Gij], [Z, G, Z, Gj], [Z, Z, G, Gi], [Z, Z, Z, G]])
        E = expm(big)
        return E[:m, :m], E[:m, m:2 * m], E[:m, 2 * m:3 * m], E[:m, 3 * m:]

    def first(self, i: int, w):
        """``(g, d_i g)``."""
        m = self.m
        G = self.generator(w)
        Z = np.zeros((m, m), complex)
        E = expm(np.block([[G, self._dG[i](w)], [Z, G]]))
        return E[:m, :m], E[:m, m:]

    def unitarity_defect(self, w) -> float:
        g = self.value(w)
        return float(np.abs(g @ _dagger(g) - np.eye(self.m)).max())


class TransformedConnection:
    """``A'_x = g A_x g^-1 + g d_x(g^-1) = g A_x g^+ - (d_x g) g^+``.

    With ``broken=True`` the inhomogeneous term has the wrong sign; this is
    a negative control for the covariance tests.
    """

    def __init__(self, A, g: GaugeTransformation, broken: bool = False):
        self.A, self.g, self.support = A, g, A.support
        self.sign = 1.0 if broken else -1.0

    @property
    def m(self) -> int:
        return self.A.m

    def value(self, i: int, w) -> np.ndarray:
        g, gi = self.g.first(i, w)
        return g @ self.A.value(i, w) @ _dagger(g) + self.sign * gi @ _dagger(g)

    def derivative(self, j: int, i: int, w) -> np.ndarray:
        g, gi, gj, gij = self.g.jets(i, j, w)
        gd, gjd = _dagger(g), _dagger(gj)
        Ai = self.A.value(i, w)
        dAi = self.A.derivative(j, i, w)
        hom = gj @ Ai @ gd + g @ dAi @ gd + g @ Ai @ gjd
        return hom + self.sign * (gij @ gd + gi @ gjd)


class TransformedSection:
    """``f'(w) = g(w) f(w)``."""

    def __init__(self, f, g: GaugeTransformation):
        self.f, self.g, self.support = f, g, f.support

    @property
    def m(self) -> int:
        return self.f.m

    def value(self, w):
        return self.g.value(w) @ self.f.value(w)

    def derivative(self, i: int, w):
        g, gi = self.g.first(i, w)
        return gi @ self.f.value(w) + g @ self.f.derivative(i, w)

    def second(self, i: int, j: int, w):
        g, gi, gj, gij = self.g.jets(i, j, w)
        f = self.f
        return (gij @ f.value(w) + gi @ f.derivative(j, w) + gj @ f.derivative(i, w)
                + g @ f.second(i, j, w))


def gauge_transform_connection(A, g: GaugeTransformation, broken: bool = False):
    return TransformedConnection(A, g, broken)


def gauge_transform_section(f, g: GaugeTransformation):
    return TransformedSection(f, g)


# ---------------------------------------------------------------------------
# covariant derivative and curvature

def _weights(obj, mu) -> np.ndarray:
    if isinstance(mu, SignedMeasure):
        return obj.support.weights_of(mu)
    return np.asarray(mu, float)


def _index(support: SupportSet, x) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    return support.index_of(x)


def nabla_apply(A, x, fvec, mu) -> np.ndarray:
    """``(nabla_x f)(mu) = d_x f(mu) + A_x(mu) f(mu)``; ``x`` is a point or an index."""
    if A.m != fvec.m:
        raise ValueError("connection and section dimensions differ")
    i = _index(A.support, x)
    w = _weights(A, mu)
    return fvec.derivative(i, w) + A.value(i, w) @ fvec.value(w)


def curvature(A, x, y, mu) -> np.ndarray:
    """``F_xy = d_x A_y - d_y A_x + [A_x, A_y]`` at ``mu``."""
    i, j = _index(A.support, x), _index(A.support, y)
    w = _weights(A, mu)
    Ai, Aj = A.value(i, w), A.value(j, w)
    return A.derivative(i, j, w) - A.derivative(j, i, w) + Ai @ Aj - Aj @ Ai


def curvature_tensor(A, mu) -> np.ndarray:
    """All ``F_xy`` at once, shape ``(p, p, m, m)``."""
    w = _weights(A, mu)
    p = A.support.p
    vals = [A.value(i, w) for i in range(p)]
    F = np.zeros((p, p, A.m, A.m), complex)
    for i in range(p):
        for j in range(i + 1, p):
            Fij = A.derivative(i, j, w) - A.derivative(j, i, w) + vals[i] @ vals[j] - vals[j] @ vals[i]
            F[i, j], F[j, i] = Fij, -Fij
    return F


def _nabla_nabla(A, i, j, f, w):
    """``nabla_i nabla_j f`` at ``w``."""
    Ai, Aj = A.value(i, w), A.value(j, w)
    fv = f.value(w)
    inner = f.second(i, j, w) + A.derivative(i, j, w) @ fv + Aj @ f.derivative(i, w)
    return inner + Ai @ (f.derivative(j, w) + Aj @ fv)


def commutator_identity_check(A, x, y, fvec, mu) -> float:
    """``|| [nabla_x, nabla_y] f - F_xy f ||`` at ``mu``; zero up to rounding."""
    i, j = _index(A.support, x), _index(A.support, y)
    w = _weights(A, mu)
    lhs = _nabla_nabla(A, i, j, fvec, w) - _nabla_nabla(A, j, i, fvec, w)
    return float(np.linalg.norm(lhs - curvature(A, i, j, w) @ fvec.value(w)))


def commutator_identity_polynomial(A: ConnectionField, i: int, j: int,
                                   f: VectorSection) -> Polynomial:
    """``[nabla_i, nabla_j] f - F_ij f`` as a polynomial; identically zero."""
    def nab(k, g: Polynomial) -> Polynomial:
        return g.derivative(k) + A.components[k].matmul(g)

    Ai, Aj = A.components[i], A.components[j]
    F = Aj.derivative(i) - Ai.derivative(j) + Ai.matmul(Aj) - Aj.matmul(Ai)
    return nab(i, nab(j, f.poly)) - nab(j, nab(i, f.poly)) - F.matmul(f.poly)


# ---------------------------------------------------------------------------
# invariant functionals

@dataclass(frozen=True)
class LorentzKernel:
    """``B(x, y) = exp(-eta(x - y, x - y)^2 / sigma^4)``, ``eta = diag(1, -1, ...)``."""

    sigma: float = 1.0

    @staticmethod
    def interval(x, y) -> np.ndarray:
        z = np.asarray(x, float) - np.asarray(y, float)
        return z[..., 0] ** 2 - (z[..., 1:] ** 2).sum(-1)

    def __call__(self, x, y) -> np.ndarray:
        return np.exp(-self.interval(x, y) ** 2 / self.sigma ** 4)

    def matrix(self, points) -> np.ndarray:
        pts = np.asarray(points, float)
        return self(pts[:, None, :], pts[None, :, :])


def boost(rapidity: float, d: int = 2) -> np.ndarray:
    """A Lorentz boost mixing coordinates 0 and 1."""
    L = np.eye(d)
    c, s = np.cosh(rapidity), np.sinh(rapidity)
    L[0, 0] = L[1, 1] = c
    L[0, 1] = L[1, 0] = s
    return L


def K1(A, mu, B: LorentzKernel, spec: GaugeGroupSpec | None = None, cell: float = 1.0) -> float:
    """``sum_{x,y,z,w} killing(F_xy, F_zw) B(x, z) B(y, w) cell^4``."""
    F = curvature_tensor(A, mu)
    Bm = B.matrix(A.support.points)
    val = -np.einsum("xyab,zwba,xz,yw->", F, F, Bm, Bm)
    return float(val.real) * cell ** 4


def K2(A, fvec, mu, B: LorentzKernel, spec: GaugeGroupSpec | None = None,
       cell: float = 1.0) -> complex:
    """``sum_{x,y} <nabla_x f, nabla_y f> B(x, y) cell^2``, conjugate-linear in the first slot."""
    p = A.support.p
    w = _weights(A, mu)
    nab = np.array([nabla_apply(A, i, fvec, w) for i in range(p)])
    Bm = B.matrix(A.support.points)
    return complex(np.einsum("xa,xy,ya->", np.conj(nab), Bm, nab)) * cell ** 2


@dataclass(frozen=True)
class SourceAndPotential:
    """Source ``J`` and invariant potential ``V(v) = sum_k c_k |v|^{2k}``."""

    J: object
    V: tuple = ()

    def potential(self, v) -> complex:
        r = float(np.vdot(v, v).real)
        return complex(sum(c * r ** k for k, c in enumerate(self.V)))


def action_integrand(A, fvec, src: SourceAndPotential, mu, B: LorentzKernel,
                     spec: GaugeGroupSpec | None = None, cell: float = 1.0) -> complex:
    """``K1 + K2 + V(f(mu)) - <J(mu), f(mu)>``."""
    w = _weights(A, mu)
    fv = fvec.value(w)
    coupling = 0j if src.J is None else complex(np.vdot(src.J.value(w), fv))
    return (K1(A, w, B, spec, cell) + K2(A, fvec, w, B, spec, cell)
            + src.potential(fv) - coupling)


# ---------------------------------------------------------------------------
# surrogate fat-point measure and the partition estimate

@dataclass(frozen=True)
class FatPointSample:
    measure: DiscreteMeasure
    weights: np.ndarray
    log_weight: float
    phase: complex


def sample_fatpoint_measure(W: WeightFunction, N: int, seed: int, support: SupportSet,
                            index: int = 0, y_scale: float = 1.0) -> FatPointSample:
    """One draw of the surrogate measure.

    The path visits ``N`` support points uniformly at random; an auxiliary
    Gaussian chain ``Y_1..Y_{N-1}`` (``Y_0 = 0``) carries the kernel
    ``w((eps/2) sum Y_{j-1} ^ Y_j)``, whose log-modulus is the importance
    log-weight and whose phase is kept separately.  Draw ``index`` of
    ``seed`` uses its own counter-based stream.
    """
    lat = W.lattice
    p = lat.params
    rng = np.random.default_rng([seed, index])
    picks = rng.integers(0, support.p, N)
    mu = path_to_measure(ParamPath(support.points[picks]))
    if N > 1:
        if p.is_finite:
            Y = rng.integers(0, lat.n, (N - 1, lat.d))
        else:
            Y = y_scale * rng.standard_normal((N - 1, lat.d))
        prev = np.concatenate([np.zeros((1, lat.d), Y.dtype), Y[:-1]])
        area = wedge(prev, Y).sum(0) * p.half_eps
        if p.is_finite:
            area = np.mod(area, lat.n)
        wv = complex(weight_symbol_eval(W, area))
    else:
        wv = 1.0 + 0j
    mod = abs(wv)
    return FatPointSample(mu, support.weights_of(mu), float(np.log(mod)) if mod > 0 else -np.inf,
                          wv / mod if mod > 0 else 1.0 + 0j)


@dataclass
class PartitionResult:
    value: complex
    stderr: float
    phase_weight_mass: complex
    samples: int
    actions: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=lambda: {"status": "exploratory"})


def partition_estimate(family: Sequence, src: SourceAndPotential, B: LorentzKernel,
                       W: WeightFunction, support: SupportSet, N: int, M: int, seed: int = 0,
                       spec: GaugeGroupSpec | None = None, quad_weights=None,
                       cell: float = 1.0) -> PartitionResult:
    """Exploratory Monte Carlo estimate of ``W[J]`` over a finite field family.

    For each configuration ``c = (A, f)`` the smeared action is
    ``S_c = mean_s omega_s L_c(mu_s)`` with surrogate weights
    ``omega_s = exp(log_weight) * phase``; the estimate is
    ``sum_c q_c exp(i S_c)``.  The standard error is the delta-method one,
    from per-sample influences, and scales as ``M^{-1/2}``.
    """
    if M < 1:
        raise ValueError("need at least one sample")
    if not family:
        raise ValueError("empty field family")
    q = np.full(len(family), 1.0 / len(family)) if quad_weights is None else np.asarray(quad_weights)
    draws = [sample_fatpoint_measure(W, N, seed, support, s) for s in range(M)]
    omega = np.array([np.exp(d.log_weight) * d.phase for d in draws])
    L = np.array([[action_integrand(A, f, src, d.weights, B, spec, cell) for d in draws]
                  for A, f in family])  # (C, M)
    contrib = omega[None, :] * L
    S = contrib.mean(1)
    value = complex(np.sum(q * np.exp(1j * S)))
    psi = (q[:, None] * 1j * np.exp(1j * S)[:, None] * (contrib - S[:, None])).sum(0)
    stderr = float(np.sqrt(np.mean(np.abs(psi) ** 2) / M)) if M > 1 else float("nan")
    return PartitionResult(value, stderr, complex(omega.mean()), M, S,
                           {"status": "exploratory", "seed": seed, "N": N, "M": M})
