"""Fat points: discrete measures on R*^d and their differential calculus.

A point of the noncommutative space-time is a nonnegative measure of total
mass at most one.  To make the calculus exact we fix a finite
:class:`SupportSet` ``S = (s_1, ..., s_p)``; a measure supported on ``S`` is
then a weight vector ``w`` in the p-simplex and functionals are polynomials
in ``w``.  Differentiation along a signed measure ``nu`` is the directional
derivative in weight coordinates, and ``d_x`` is the partial derivative
along ``delta_x``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from .polynomial import Polynomial

MASS_TOL = 1e-12


class SupportError(ValueError):
    """Raised when a measure or point is not carried by the support set."""


# ---------------------------------------------------------------------------
# measures

@dataclass(frozen=True)
class SignedMeasure:
    """Finitely many atoms with real weights."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loc = np.atleast_2d(np.asarray(self.locations, float))
        w = np.atleast_1d(np.asarray(self.weights, float))
        if loc.shape[0] != w.shape[0]:
            raise ValueError("locations and weights differ in length")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(loc)):
            raise ValueError("atoms must be finite")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return self.locations.shape[1]

    def total(self) -> float:
        return float(self.weights.sum())

    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    def merged(self):
        """Same measure with coincident atoms combined."""
        loc, inv = np.unique(self.locations, axis=0, return_inverse=True)
        w = np.zeros(len(loc))
        np.add.at(w, inv.reshape(-1), self.weights)
        return type(self)(loc, w)

    def scaled(self, a: float):
        return type(self)(self.locations, a * self.weights)

    def __add__(self, other: "SignedMeasure"):
        cls = type(self) if type(self) is type(other) else SignedMeasure
        return cls(np.concatenate([self.locations, other.locations]),
                   np.concatenate([self.weights, other.weights])).merged()

    def to_rows(self) -> list:
        return [list(x) + [w] for x, w in zip(self.locations, self.weights)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow([f"x{i}" for i in range(self.d)] + ["weight"])
        writer.writerows(self.to_rows())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str):
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], float)
        return cls(data[:, :-1], data[:, -1])


@dataclass(frozen=True)
class DiscreteMeasure(SignedMeasure):
    """A fat point: nonnegative atoms of total mass at most one."""

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.weights < 0):
            raise ValueError("fat point weights must be nonnegative")
        if self.weights.sum() > 1 + MASS_TOL:
            raise ValueError(f"total mass {self.weights.sum()} exceeds 1")

    def __add__(self, other):
        return SignedMeasure(np.concatenate([self.locations, other.locations]),
                             np.concatenate([self.weights, other.weights])).merged()


def delta_embed(psi) -> DiscreteMeasure:
    """The Dirac measure ``delta_psi``."""
    return DiscreteMeasure(np.atleast_2d(np.asarray(psi, float)), [1.0])


def pair(fld, mu: SignedMeasure) -> complex:
    """``<f, mu> = sum_i w_i f(x_i)``; ``fld`` is a callable or a :class:`CotangentField`."""
    vals = fld(mu.locations) if callable(fld) else fld.values_at(mu.locations)
    return complex(np.sum(mu.weights * np.asarray(vals)))


@dataclass(frozen=True)
class ParamPath:
    """Samples ``phi(j / N)``, ``j = 1..N``, of a path in R*^d."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.samples, float))
        if s.shape[0] < 1:
            raise ValueError("a path needs at least one sample")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_callable(cls, func: Callable, N: int) -> "ParamPath":
        return cls(np.array([func(j / N) for j in range(1, N + 1)]))

    @property
    def N(self) -> int:
        return self.samples.shape[0]


def path_to_measure(path: ParamPath) -> DiscreteMeasure:
    """Push forward of the uniform measure on ``{j/N}``; coincident samples merge."""
    m = SignedMeasure(path.samples, np.full(path.N, 1.0 / path.N)).merged()
    w = m.weights / m.weights.sum()  # exact unit mass
    return DiscreteMeasure(m.locations, w)


def bl_distance(mu: SignedMeasure, nu: SignedMeasure) -> float:
    """Bounded-Lipschitz distance ``sup {<f, mu - nu> : |f| <= 1, Lip f <= 1}``.

    On the union of the atoms this is a linear program; any feasible vector
    extends to a global test function, so the value is exact.
    """
    both = (SignedMeasure(mu.locations, mu.weights)
            + SignedMeasure(nu.locations, -nu.weights))
    c = both.weights
    k = len(c)
    if k == 0 or np.all(c == 0):
        return 0.0
    X = both.locations
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    rows, rhs = [], []
    for i in range(k):
        for j in range(k):
            if i != j:
                r = np.zeros(k)
                r[i], r[j] = 1.0, -1.0
                rows.append(r)
                rhs.append(D[i, j])
    res = linprog(-c, A_ub=np.array(rows) if rows else None,
                  b_ub=np.array(rhs) if rhs else None, bounds=[(-1, 1)] * k, method="highs")
    if not res.success:
        raise RuntimeError(f"bounded-Lipschitz LP failed: {res.message}")
    return float(-res.fun)


# ---------------------------------------------------------------------------
# support sets and functionals

@dataclass(frozen=True)
class SupportSet:
    """Ordered distinct base points ``s_1..s_p``; weight coordinates follow this order."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, float))
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("support points must be distinct")
        object.__setattr__(self, "points", pts)

    @property
    def p(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def index_of(self, x, atol: float = 0.0) -> int:
        hits = np.flatnonzero(np.all(np.abs(self.points - np.asarray(x, float)) <= atol, axis=1))
        if len(hits) == 0:
            raise SupportError(f"point {x} is not in the support set")
        return int(hits[0])

    def weights_of(self, mu: SignedMeasure) -> np.ndarray:
        """Weight vector of a measure supported on S."""
        w = np.zeros(self.p)
        for x, a in zip(mu.locations, mu.weights):
            w[self.index_of(x)] += a
        return w

    def measure(self, w) -> DiscreteMeasure:
        return DiscreteMeasure(self.points, np.asarray(w, float))

    def signed(self, w) -> SignedMeasure:
        return SignedMeasure(self.points, np.asarray(w, float))

    def basis(self, i: int) -> SignedMeasure:
        e = np.zeros(self.p)
        e[i] = 1.0
        return self.signed(e)


@dataclass(frozen=True)
class Functional:
    """A polynomial functional ``F(w)`` of measures carried by ``support``."""

    support: SupportSet
    poly: Polynomial

    def __post_init__(self):
        if self.poly.nvars != self.support.p:
            raise ValueError("polynomial variables must match the support size")

    def _w(self, mu) -> np.ndarray:
        if isinstance(mu, SignedMeasure):
            return self.support.weights_of(mu)
        return np.asarray(mu, float)

    def __call__(self, mu):
        return self.poly(self._w(mu))

    def _wrap(self, poly: Polynomial) -> "Functional":
        return Functional(self.support, poly)

    def __add__(self, other):
        return self._wrap(self.poly + (other.poly if isinstance(other, Functional) else other))

    def __sub__(self, other):
        return self._wrap(self.poly - (other.poly if isinstance(other, Functional) else other))

    def __mul__(self, other):
        return self._wrap(self.poly * (other.poly if isinstance(other, Functional) else other))

    __rmul__ = __mul__

    def partial(self, i: int) -> "Functional":
        return self._wrap(self.poly.derivative(i))

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.poly.is_zero(tol)

    @property
    def degree(self) -> int:
        return self.poly.degree


@dataclass(frozen=True)
class PiecewiseFunctional:
    """Functional equal to ``pieces[k]`` on the half-space ``normals[k] . w <= offsets[k]``.

    The first matching piece wins; ``default`` applies elsewhere.  Derivatives
    are taken piece by piece and are meaningful away from region boundaries.
    """

    support: SupportSet
    normals: tuple
    offsets: tuple
    pieces: tuple
    default: Polynomial

    def region(self, w) -> int:
        w = np.asarray(w, float)
        for k, (a, b) in enumerate(zip(self.normals, self.offsets)):
            if np.dot(a, w) <= b:
                return k
        return -1

    def _poly(self, w) -> Polynomial:
        k = self.region(w)
        return self.pieces[k] if k >= 0 else self.default

    def __call__(self, mu):
        w = self.support.weights_of(mu) if isinstance(mu, SignedMeasure) else np.asarray(mu, float)
        return self._poly(w)(w)

    def map_pieces(self, func: Callable) -> "PiecewiseFunctional":
        return PiecewiseFunctional(self.support, self.normals, self.offsets,
                                   tuple(func(q) for q in self.pieces), func(self.default))


@dataclass(frozen=True)
class CotangentField:
    """A function on R*^d known by its values on S, extended by nearest point."""

    support: SupportSet
    values: np.ndarray

    def values_at(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        dist = np.linalg.norm(x[:, None, :] - self.support.points[None], axis=-1)
        return self.values[np.argmin(dist, axis=1)]

    def __call__(self, x):
        return self.values_at(x)

    def pair(self, nu: SignedMeasure) -> complex:
        return pair(self, nu)


# ---------------------------------------------------------------------------
# derivatives

def directional_derivative(F: Functional, mu: SignedMeasure, nu: SignedMeasure) -> complex:
    """``d/dt F(mu + t nu)`` at ``t = 0``, exactly from the coefficients."""
    w = F.support.weights_of(mu)
    v = F.support.weights_of(nu)
    return complex(sum(v[i] * F.poly.derivative(i)(w) for i in range(F.support.p) if v[i]))


def weak_frechet_derivative(F: Functional, mu: SignedMeasure) -> CotangentField:
    """The cotangent vector ``dF_mu`` with ``<dF_mu, nu> = d_nu F(mu)``."""
    w = F.support.weights_of(mu)
    grad = np.array([complex(g(w)) for g in F.poly.gradient()])
    return CotangentField(F.support, grad)


def partial_x(F: Functional, mu: SignedMeasure, x) -> complex:
    """Derivative along ``delta_x`` for ``x`` in the support."""
    i = F.support.index_of(x)
    return complex(F.poly.derivative(i)(F.support.weights_of(mu)))


@dataclass(frozen=True)
class TangentField:
    """A vector field ``mu -> Delta(mu)``: one polynomial per support point."""

    support: SupportSet
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.support.p:
            raise ValueError("need one component per support point")

    @classmethod
    def constant(cls, support: SupportSet, nu: SignedMeasure) -> "TangentField":
        v = support.weights_of(nu)
        return cls(support, tuple(Polynomial.constant(support.p, c) for c in v))

    def at(self, mu: SignedMeasure) -> SignedMeasure:
        w = self.support.weights_of(mu)
        return self.support.signed(np.array([complex(c(w)).real for c in self.components]))


def tangent_apply(Delta: TangentField, F):
    """``(Delta F)(mu) = (d_{Delta(mu)} F)(mu) = sum_i Delta_i(w) dF/dw_i``.

    Accepts a :class:`Functional` or a :class:`PiecewiseFunctional`, which is
    differentiated piece by piece.
    """
    def apply(poly: Polynomial) -> Polynomial:
        out = Polynomial.zero(poly.nvars, poly.shape)
        for i, c in enumerate(Delta.components):
            if c.terms:
                out = out + c * poly.derivative(i)
        return out

    if isinstance(F, PiecewiseFunctional):
        return F.map_pieces(apply)
    return Functional(F.support, apply(F.poly))


def commutator_partials(F: Functional, i: int, j: int) -> Polynomial:
    """``[d_i, d_j] F`` as a polynomial; identically zero."""
    return F.poly.derivative(j).derivative(i) - F.poly.derivative(i).derivative(j)


def finite_difference_gradient(F: Functional, mu: SignedMeasure, step: float = 1e-5) -> np.ndarray:
    """Central differences of ``F`` in weight coordinates (cross-check only)."""
    w = F.support.weights_of(mu)
    out = np.zeros(F.support.p, complex)
    for i in range(F.support.p):
        e = np.zeros_like(w)
        e[i] = step
        out[i] = (complex(F.poly(w + e)) - complex(F.poly(w - e))) / (2 * step)
    return out
