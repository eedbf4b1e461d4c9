"""Sparse multivariate polynomials with scalar or array coefficients.

A polynomial in ``p`` variables is a dict ``{exponent tuple: coefficient}``.
Coefficients may be complex scalars or equally shaped numpy arrays (vectors,
matrices), which is what connection and section fields need.  Products of
array coefficients are elementwise by default; :meth:`Polynomial.matmul`
multiplies matrix coefficients.

Text format, one term per line, scalar coefficients only::

    <coef> [<var>:<exp> ...]

e.g. ``(1.5+0j) 0:2 3:1`` is ``1.5 w_0^2 w_3``.
"""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "terms", "shape")

    def __init__(self, nvars: int, terms: Mapping | None = None, shape: tuple = ()):
        self.nvars = int(nvars)
        raw = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise ValueError(f"exponent {exps} has wrong length for {self.nvars} variables")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            c = np.asarray(c, dtype=complex)
            raw[exps] = raw[exps] + c if exps in raw else c
        shape = np.broadcast_shapes(tuple(shape), *(c.shape for c in raw.values()))
        self.shape = tuple(shape)
        self.terms = {k: np.broadcast_to(v, shape).copy() for k, v in raw.items() if np.any(v != 0)}

    # construction -----------------------------------------------------------

    @classmethod
    def constant(cls, nvars: int, c) -> "Polynomial":
        c = np.asarray(c, dtype=complex)
        return cls(nvars, {(0,) * nvars: c}, c.shape)

    @classmethod
    def zero(cls, nvars: int, shape: tuple = ()) -> "Polynomial":
        return cls(nvars, {}, shape)

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1.0})

    @classmethod
    def linear(cls, coeffs, const=0.0) -> "Polynomial":
        coeffs = list(coeffs)
        p = len(coeffs)
        terms = {(0,) * p: const}
        for i, c in enumerate(coeffs):
            e = [0] * p
            e[i] = 1
            terms[tuple(e)] = c
        return cls(p, terms, np.shape(const))

    @classmethod
    def random(cls, nvars: int, degree: int, rng: np.random.Generator, nterms: int = 6,
               shape: tuple = (), complex_coeffs: bool = False) -> "Polynomial":
        """A random polynomial of total degree at most ``degree``."""
        terms = {}
        for _ in range(nterms):
            deg = rng.integers(0, degree + 1)
            e = np.zeros(nvars, int)
            for _ in range(deg):
                e[rng.integers(nvars)] += 1
            c = rng.standard_normal(shape)
            if complex_coeffs:
                c = c + 1j * rng.standard_normal(shape)
            terms[tuple(e)] = terms.get(tuple(e), 0) + c
        return cls(nvars, terms, shape)

    # algebra ------------------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if other.nvars != self.nvars:
            raise ValueError("polynomials have different numbers of variables")

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return Polynomial(self.nvars, terms, np.broadcast_shapes(self.shape, other.shape))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {k: -v for k, v in self.terms.items()}, self.shape)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def _product(self, other: "Polynomial", op: Callable, shape: tuple) -> "Polynomial":
        terms: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                v = op(v1, v2)
                terms[k] = terms[k] + v if k in terms else v
        return Polynomial(self.nvars, terms, shape)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = np.asarray(other, complex)
            return Polynomial(self.nvars, {k: v * c for k, v in self.terms.items()},
                              np.broadcast_shapes(self.shape, c.shape))
        self._check(other)
        return self._product(other, np.multiply, np.broadcast_shapes(self.shape, other.shape))

    __rmul__ = __mul__

    def matmul(self, other: "Polynomial") -> "Polynomial":
        """Product with matrix multiplication of the coefficients."""
        self._check(other)
        shape = np.matmul(np.zeros(self.shape), np.zeros(other.shape)).shape
        return self._product(other, np.matmul, shape)

    def map_coefficients(self, func: Callable) -> "Polynomial":
        terms = {k: func(v) for k, v in self.terms.items()}
        shape = next(iter(terms.values())).shape if terms else self.shape
        return Polynomial(self.nvars, terms, shape)

    # calculus -----------------------------------------------------------------

    def derivative(self, i: int) -> "Polynomial":
        terms = {}
        for k, v in self.terms.items():
            if k[i]:
                e = list(k)
                e[i] -= 1
                terms[tuple(e)] = v * k[i]
        return Polynomial(self.nvars, terms, self.shape)

    def gradient(self) -> list:
        return [self.derivative(i) for i in range(self.nvars)]

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        if w.shape[-1] != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates")
        batch = w.shape[:-1]
        out = np.zeros(batch + self.shape, complex)
        for k, v in self.terms.items():
            mono = np.prod(w ** np.array(k), axis=-1)
            out = out + mono.reshape(batch + (1,) * len(self.shape)) * v
        return out

    # inspection ---------------------------------------------------------------

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=-1)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(np.abs(v).max() <= tol for v in self.terms.values())

    def max_abs_coefficient(self) -> float:
        return max((float(np.abs(v).max()) for v in self.terms.values()), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"Polynomial(nvars={self.nvars}, terms={len(self.terms)}, degree={self.degree})"

    # text format --------------------------------------------------------------

    def to_text(self) -> str:
        if self.shape:
            raise ValueError("text format supports scalar coefficients only")
        lines = []
        for k in sorted(self.terms):
            c = complex(self.terms[k])
            parts = [repr(c)] + [f"{i}:{e}" for i, e in enumerate(k) if e]
            lines.append(" ".join(parts))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, nvars: int) -> "Polynomial":
        terms = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            head, *rest = line.split()
            e = [0] * nvars
            for tok in rest:
                i, p = tok.split(":")
                e[int(i)] += int(p)
            terms[tuple(e)] = terms.get(tuple(e), 0) + complex(head)
        return cls(nvars, terms)
