"""The two-step nilpotent groups G_eps and their commutative degeneration G_0.

Both groups live on R^d (+) Lambda^2 R^d with

    (X, A) * (Y, B) = (X + Y, A + B + (eps/2) X ^ Y).

Two models are provided.  ``continuum`` uses real coordinates and a truncated
periodic lattice for functions; ``finite`` replaces R by Z_n (n odd) so that
every identity holds exactly, with eps/2 read as eps * 2^{-1} mod n.

Group elements are ``GroupElement(X, A)`` named tuples whose arrays may carry
arbitrary leading batch dimensions; all operations broadcast over them.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np


class ConfigurationError(ValueError):
    """Raised for inconsistent group or lattice parameters."""


class Model(str, Enum):
    CONTINUUM = "continuum"
    FINITE = "finite"


@dataclass(frozen=True)
class GroupParams:
    """Dimension, deformation and arithmetic model of G_eps.

    Parameters
    ----------
    d : int
        Base dimension; the wedge dimension is ``m = d(d-1)/2``.
    epsilon : float
        Deformation parameter, ``eps >= 0``.  Must be an integer for the
        finite model, where it is reduced mod ``n``.
    model : Model
        ``Model.CONTINUUM`` or ``Model.FINITE``.
    n : int, optional
        Odd modulus of the finite model.
    """

    d: int = 2
    epsilon: float = 1.0
    model: Model = Model.CONTINUUM
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if self.d < 1:
            raise ConfigurationError("d must be a positive integer")
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be nonnegative")
        if self.model is Model.FINITE:
            if self.n is None or self.n < 3 or self.n % 2 == 0:
                raise ConfigurationError(
                    f"finite model needs an odd modulus n >= 3, got {self.n}")
            if float(self.epsilon) != int(self.epsilon):
                raise ConfigurationError("finite model needs an integer epsilon")

    @property
    def m(self) -> int:
        return self.d * (self.d - 1) // 2

    @property
    def dim(self) -> int:
        return self.d + self.m

    @property
    def is_finite(self) -> bool:
        return self.model is Model.FINITE

    @property
    def inv2(self) -> int:
        """Inverse of 2 modulo n (finite model only)."""
        return (self.n + 1) // 2

    @property
    def half_eps(self):
        """The cocycle coefficient: eps/2, or eps * 2^{-1} mod n."""
        if self.is_finite:
            return (int(self.epsilon) * self.inv2) % self.n
        return 0.5 * self.epsilon

    def with_epsilon(self, epsilon) -> "GroupParams":
        return GroupParams(self.d, epsilon, self.model, self.n)


class GroupElement(NamedTuple):
    """A point (X, A) of G_eps; arrays of shape (..., d) and (..., m)."""

    X: np.ndarray
    A: np.ndarray

    def flat(self) -> np.ndarray:
        """Serialize as ``[X..., A...]`` along the last axis."""
        return np.concatenate([self.X, self.A], axis=-1)

    @classmethod
    def from_flat(cls, v, d: int) -> "GroupElement":
        v = np.asarray(v)
        return cls(v[..., :d], v[..., d:])

    def take(self, item) -> "GroupElement":
        """Index the batch dimensions."""
        return GroupElement(self.X[item], self.A[item])


def _wedge_pairs(d: int):
    return np.triu_indices(d, 1)


def wedge(X, Y) -> np.ndarray:
    """Components ``X_i Y_j - X_j Y_i`` for ``i < j`` in lexicographic order."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape[-1] != Y.shape[-1]:
        raise ValueError(f"dimension mismatch: {X.shape[-1]} vs {Y.shape[-1]}")
    i, j = _wedge_pairs(X.shape[-1])
    return X[..., i] * Y[..., j] - X[..., j] * Y[..., i]


def _reduce(g: GroupElement, p: GroupParams) -> GroupElement:
    if p.is_finite:
        return GroupElement(np.mod(g.X, p.n), np.mod(g.A, p.n))
    return g


def _as_element(g, p: GroupParams) -> GroupElement:
    X, A = g
    dtype = np.int64 if p.is_finite else float
    X = np.asarray(X, dtype=dtype)
    A = np.asarray(A, dtype=dtype)
    if X.shape[-1] != p.d or A.shape[-1] != p.m:
        raise ValueError(
            f"element shape ({X.shape[-1]}, {A.shape[-1]}) does not match "
            f"(d, m) = ({p.d}, {p.m})")
    return GroupElement(X, A)


def identity(p: GroupParams, shape=()) -> GroupElement:
    dtype = np.int64 if p.is_finite else float
    return GroupElement(np.zeros(shape + (p.d,), dtype), np.zeros(shape + (p.m,), dtype))


def compose(g1, g2, p: GroupParams) -> GroupElement:
    """The product ``g1 * g2`` of G_eps."""
    g1 = _as_element(g1, p)
    g2 = _as_element(g2, p)
    out = GroupElement(g1.X + g2.X, g1.A + g2.A + p.half_eps * wedge(g1.X, g2.X))
    return _reduce(out, p)


def inverse(g, p: GroupParams) -> GroupElement:
    g = _as_element(g, p)
    return _reduce(GroupElement(-g.X, -g.A), p)


def group_commutator(g1, g2, p: GroupParams) -> GroupElement:
    """``g1 g2 g1^-1 g2^-1``; always central."""
    return compose(compose(g1, g2, p), compose(inverse(g1, p), inverse(g2, p), p), p)


def telescope(chain, p: GroupParams) -> GroupElement:
    """Partial products ``(Y_k, B_k) = g_1 * ... * g_k`` along axis 0."""
    chain = _as_element(chain, p)
    out_X = np.empty_like(chain.X)
    out_A = np.empty_like(chain.A)
    acc = GroupElement(chain.X[0], chain.A[0])
    out_X[0], out_A[0] = acc
    for k in range(1, chain.X.shape[0]):
        acc = compose(acc, GroupElement(chain.X[k], chain.A[k]), p)
        out_X[k], out_A[k] = acc
    return GroupElement(out_X, out_A)


def untelescope(partials, p: GroupParams) -> GroupElement:
    """Inverse of :func:`telescope`: ``g_k = (Y_{k-1}, B_{k-1})^{-1} * (Y_k, B_k)``.

    The left quotient is the one that undoes ``(Y_{k-1}, B_{k-1}) * g_k``;
    it differs from the right quotient by a sign of the cocycle term.
    """
    partials = _as_element(partials, p)
    prev = GroupElement(np.concatenate([np.zeros_like(partials.X[:1]), partials.X[:-1]]),
                        np.concatenate([np.zeros_like(partials.A[:1]), partials.A[:-1]]))
    return compose(inverse(prev, p), partials, p)


def random_elements(p: GroupParams, rng: np.random.Generator, size=(), scale: float = 1.0) -> GroupElement:
    """Uniform elements of the finite group, or Gaussian ones of width ``scale``."""
    size = tuple(np.atleast_1d(size)) if size != () else ()
    if p.is_finite:
        return GroupElement(rng.integers(0, p.n, size + (p.d,)),
                            rng.integers(0, p.n, size + (p.m,)))
    return GroupElement(scale * rng.standard_normal(size + (p.d,)),
                        scale * rng.standard_normal(size + (p.m,)))


def enumerate_group(p: GroupParams) -> GroupElement:
    """All ``n**(d+m)`` elements of the finite group in C order of ``[X, A]``."""
    if not p.is_finite:
        raise ConfigurationError("only the finite group can be enumerated")
    grids = np.indices((p.n,) * p.dim).reshape(p.dim, -1).T
    return GroupElement.from_flat(grids.astype(np.int64), p.d)


@dataclass(frozen=True)
class LatticeSpec:
    """Discretization of G on ``n`` points per axis with spacing ``h``.

    The continuum lattice is centred, ``x_i = h (i - n // 2)``, and periodic
    with period ``L = n h``.  The finite lattice is Z_n itself (``h = 1``).
    Functions on the lattice are arrays of shape ``(n,) * (d + m)`` whose
    first ``d`` axes are X and last ``m`` axes are A.
    """

    params: GroupParams
    n: int
    h: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError("lattice needs n >= 2")
        if self.h <= 0:
            raise ConfigurationError("lattice spacing must be positive")
        if self.params.is_finite and (self.n != self.params.n or self.h != 1):
            raise ConfigurationError("finite lattice must have n = modulus and h = 1")

    @classmethod
    def finite(cls, params: GroupParams) -> "LatticeSpec":
        return cls(params, params.n, 1.0)

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def dim(self) -> int:
        return self.params.dim

    @property
    def extent(self) -> float:
        return self.n * self.h

    @property
    def haar_weight(self) -> float:
        return float(self.h ** self.dim)

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @property
    def center(self) -> int:
        return 0 if self.params.is_finite else self.n // 2

    def axis_coords(self) -> np.ndarray:
        """Coordinates along one axis."""
        if self.params.is_finite:
            return np.arange(self.n, dtype=np.int64)
        return self.h * (np.arange(self.n) - self.center)

    def dual_axis(self) -> np.ndarray:
        """Dual coordinates along one axis: integers mod n, or 2 pi k / L."""
        if self.params.is_finite:
            return np.arange(self.n, dtype=np.int64)
        return (2 * np.pi / self.extent) * (np.arange(self.n) - self.center)

    def sites(self) -> GroupElement:
        """All lattice sites as a batched element, in C order of the array."""
        ax = self.axis_coords()
        grids = np.stack(np.meshgrid(*([ax] * self.dim), indexing="ij"), axis=-1)
        return GroupElement.from_flat(grids.reshape(-1, self.dim), self.d)

    def dual_sites(self) -> tuple[np.ndarray, np.ndarray]:
        """All dual points ``(phi, Phi)`` in C order of a dual array."""
        ax = self.dual_axis()
        grids = np.stack(np.meshgrid(*([ax] * self.dim), indexing="ij"), axis=-1)
        flat = grids.reshape(-1, self.dim)
        return flat[:, :self.d], flat[:, self.d:]

    def wrap(self, g: GroupElement) -> GroupElement:
        """Reduce coordinates into the fundamental period of the lattice."""
        if self.params.is_finite:
            return _reduce(g, self.params)
        L = self.extent
        lo = -self.center * self.h
        return GroupElement(np.mod(np.asarray(g.X) - lo, L) + lo,
                            np.mod(np.asarray(g.A) - lo, L) + lo)

    def site_index(self, g: GroupElement) -> np.ndarray:
        """Flat array index of the lattice site nearest to (wrapped) ``g``."""
        flat = np.asarray(GroupElement(*g).flat())
        if self.params.is_finite:
            idx = np.mod(flat, self.n)
        else:
            idx = np.mod(np.rint(flat / self.h).astype(np.int64) + self.center, self.n)
        return np.ravel_multi_index(tuple(np.moveaxis(idx, -1, 0)), self.shape)

    def delta(self, g: GroupElement | None = None) -> np.ndarray:
        """Lattice delta function at ``g`` (identity by default), mass one."""
        out = np.zeros(self.shape, dtype=complex)
        if g is None:
            g = identity(self.params)
        out.flat[self.site_index(g)] = 1.0 / self.haar_weight
        return out

    def inner(self, f1, f2) -> complex:
        """``<f1, f2> = sum f1 conj(f2) dH``."""
        return complex(np.vdot(f2, f1) * self.haar_weight)

    def norm2(self, f) -> float:
        return float(np.vdot(f, f).real * self.haar_weight)
