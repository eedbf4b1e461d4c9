"""The quantization map Q_eps = F_eps o F_0^{-1} and weight functions.

A dual function is an array on the ``(phi, Phi)`` grid of a lattice.  Its
quantization is an :class:`~ncqft.group_fourier.OperatorField` and the symbol
map undoes it.  Weight functions live on the Phi grid alone and quantize to
central, hence scalar, operator fields.

Integrals over the dual are Riemann sums with the cells of
:mod:`ncqft.constants`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import dual_cell
from .group_fourier import (LabelSet, OperatorField, fourier0, fourier0_inv,
                            fourierE, fourierE_inv)
from .nilpotent_group import LatticeSpec

SCALAR_TOL = 1e-8
NORM_TOL = 1e-10


class QuantizationError(ValueError):
    """Raised when a field that should be scalar, or normalized, is not."""


def quantize(u, labels: LabelSet) -> OperatorField:
    """``Q_eps u = F_eps(F_0^{-1} u)``."""
    return fourierE(fourier0_inv(u, labels.lattice), labels)


def dequantize(F: OperatorField) -> np.ndarray:
    """The symbol ``F_0(F_eps^{-1} F)`` of an operator field."""
    return fourier0(fourierE_inv(F), F.labels.lattice)


# ---------------------------------------------------------------------------
# scalar fields

@dataclass(frozen=True)
class ScalarField:
    """A classical field ``f(phi)`` sampled on the phi grid of a lattice."""

    lattice: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        shape = (self.lattice.n,) * self.lattice.d
        values = np.asarray(self.values, dtype=complex)
        if values.shape != shape:
            raise ValueError(f"scalar field needs shape {shape}, got {values.shape}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, lattice: LatticeSpec, func) -> "ScalarField":
        """Sample ``func(phi)`` with ``phi`` of shape ``(..., d)``."""
        ax = lattice.dual_axis()
        phi = np.stack(np.meshgrid(*([ax] * lattice.d), indexing="ij"), -1)
        return cls(lattice, func(phi))

    @property
    def cell(self) -> float:
        return dual_cell(self.lattice.n, self.lattice.h, self.lattice.d)

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= 1e-14 * (1 + np.abs(self.values.real))))

    def lift(self) -> np.ndarray:
        """The dual function ``(phi, Phi) -> f(phi)``, constant in Phi."""
        lat = self.lattice
        v = self.values.reshape(self.values.shape + (1,) * lat.m)
        return np.broadcast_to(v, lat.shape).copy()

    def integral(self) -> complex:
        """``sum_phi f(phi) d^d phi / (2 pi)^d``."""
        return complex(self.values.sum() * self.cell)


# ---------------------------------------------------------------------------
# weight functions

@dataclass(frozen=True)
class WeightFunction:
    """Nonnegative ``W(Phi)`` on the Phi grid, ``sum W * cell = 1``.

    The cell is the Phi bracket of dP0, so the transform ``w(A)`` equals one
    at the origin.
    """

    lattice: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        shape = (self.lattice.n,) * self.lattice.m
        values = np.asarray(self.values, dtype=float)
        if values.shape != shape:
            raise ValueError(f"weight needs shape {shape}, got {values.shape}")
        if np.any(values < 0):
            raise QuantizationError("weight function must be nonnegative")
        object.__setattr__(self, "values", values)

    @property
    def cell(self) -> float:
        return dual_cell(self.lattice.n, self.lattice.h, self.lattice.m)

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.cell)

    def check_normalized(self, tol: float = NORM_TOL):
        if abs(self.mass - 1.0) > tol:
            raise QuantizationError(f"weight mass is {self.mass}, expected 1")

    @classmethod
    def _normalized(cls, lattice, values) -> "WeightFunction":
        values = np.asarray(values, dtype=float)
        total = values.sum() * dual_cell(lattice.n, lattice.h, lattice.m)
        if total <= 0:
            raise QuantizationError("weight function has no mass on the grid")
        return cls(lattice, values / total)

    @classmethod
    def gaussian(cls, lattice: LatticeSpec, width: float | None = None,
                 center=None) -> "WeightFunction":
        """Product Gaussian in Phi, renormalized on the grid.

        The default width ``sqrt(2 pi / (n h^2))`` balances the truncation of
        W at the edge of the Phi grid against that of its transform at the
        edge of the A box.
        In the finite model Phi is read as a signed residue in
        ``(-n/2, n/2)``.  On an even continuum grid the unpaired edge cell
        ``-n/2`` is dropped so that a centred weight is exactly even and its
        quantization exactly self-adjoint.
        """
        Phi = cls.grid(lattice)
        if width is None:
            width = np.sqrt(2 * np.pi / (lattice.n * lattice.h ** 2))
        if center is None:
            center = np.zeros(lattice.m)
        r2 = ((Phi - np.asarray(center, float)) ** 2).sum(-1)
        values = np.exp(-0.5 * r2 / width ** 2)
        if not lattice.params.is_finite and lattice.n % 2 == 0:
            for ax in range(lattice.m):
                np.moveaxis(values, ax, 0)[0] = 0.0
        return cls._normalized(lattice, values)

    @classmethod
    def single_cell(cls, lattice: LatticeSpec, index) -> "WeightFunction":
        """All mass on one Phi cell, given by its grid index."""
        values = np.zeros((lattice.n,) * lattice.m)
        values[tuple(np.atleast_1d(index))] = 1.0
        return cls._normalized(lattice, values)

    @classmethod
    def table(cls, lattice: LatticeSpec, values, normalize: bool = True) -> "WeightFunction":
        if normalize:
            return cls._normalized(lattice, values)
        return cls(lattice, values)

    @staticmethod
    def grid(lattice: LatticeSpec) -> np.ndarray:
        """Phi coordinates, shape ``(n,)*m + (m,)``; signed residues if finite."""
        ax = lattice.dual_axis()
        if lattice.params.is_finite:
            n = lattice.n
            ax = np.where(ax > n // 2, ax - n, ax).astype(float)
        return np.stack(np.meshgrid(*([ax] * lattice.m), indexing="ij"), -1)

    def lift(self) -> np.ndarray:
        """The dual function ``(phi, Phi) -> W(Phi)``."""
        lat = self.lattice
        v = self.values.reshape((1,) * lat.d + self.values.shape)
        return np.broadcast_to(v, lat.shape).astype(complex)


def weight_symbol_eval(W: WeightFunction, A) -> np.ndarray:
    """``w(A) = sum_Phi W(Phi) exp(i Phi(A)) cell``; ``A`` has shape ``(..., m)``."""
    lat = W.lattice
    A = np.asarray(A, dtype=float)
    if A.shape[-1] != lat.m:
        raise ValueError(f"A must have last dimension m = {lat.m}")
    ax = lat.dual_axis().astype(float)
    Phi = np.stack(np.meshgrid(*([ax] * lat.m), indexing="ij"), -1).reshape(-1, lat.m)
    scale = 2 * np.pi / lat.n if lat.params.is_finite else 1.0
    phase = np.exp(1j * scale * (A[..., None, :] * Phi).sum(-1))
    return phase @ W.values.reshape(-1) * W.cell


def quantize_weight(W: WeightFunction, labels: LabelSet, tol: float = SCALAR_TOL) -> np.ndarray:
    """Scalar value of ``(Q_eps W)(rho)`` for every label.

    Raises
    ------
    QuantizationError
        If a fiber has off-diagonal mass or an anti-Hermitian part above
        ``tol``, which means the weight leaked phi dependence.
    """
    Q = quantize(W.lift(), labels)
    M = labels.spec.M
    eye = np.eye(M)
    scal = np.trace(Q.fibers, axis1=1, axis2=2) / M
    off = np.abs(Q.fibers - scal[:, None, None] * eye).max(initial=0.0)
    skew = np.abs(Q.fibers - np.conj(np.swapaxes(Q.fibers, 1, 2))).max(initial=0.0)
    if off > tol:
        raise QuantizationError(f"quantized weight is not scalar (defect {off:.3e})")
    if skew > tol:
        raise QuantizationError(f"quantized weight is not self-adjoint (defect {skew:.3e})")
    return scal.real


def weighted_integral(f: ScalarField, W: WeightFunction) -> tuple[complex, complex]:
    """Both sides of ``int f W dP0 = int f d^d phi / (2 pi)^d``.

    Returns the double sum over ``(phi, Phi)`` and the single sum over phi,
    computed independently.
    """
    W.check_normalized()
    lat = f.lattice
    cell = dual_cell(lat.n, lat.h, lat.dim)
    both = complex(np.sum(f.lift() * W.lift()) * cell)
    return both, f.integral()


def trace_pairing(F: OperatorField, QW) -> complex:
    """``sum_rho tr F(rho) (Q_eps W)(rho) w_rho``."""
    QW = np.asarray(QW)
    if QW.shape != (len(F.labels),):
        raise ValueError("scalar label function does not match the labels")
    return complex(np.sum(F.trace() * QW * F.labels.weights))


def dual_integral(u, lat: LatticeSpec) -> complex:
    """``int u dP0`` as a Riemann sum."""
    return complex(np.sum(u) * dual_cell(lat.n, lat.h, lat.dim))
