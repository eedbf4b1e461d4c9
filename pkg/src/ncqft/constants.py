"""Normalization constants shared by every transform in the package.

All factors of 2*pi live here.  The convention is that the Plancherel
measure of the commutative dual factorizes as

    dP0(phi, Phi) = [d^d phi / (2 pi)^d] * [d^m Phi / (2 pi)^m]

and that each bracket is what "cell" means for the corresponding grid.  Weight
functions are normalized against the Phi bracket, so their transform at the
origin is exactly one.  Path variables Y carry the plain Lebesgue cell h^d.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def dual_spacing(n: int, h: float) -> float:
    """Spacing of the dual grid conjugate to ``n`` points of spacing ``h``."""
    return TWO_PI / (n * h)


def dual_cell(n: int, h: float, k: int) -> float:
    """Plancherel-normalized dual cell ``(dual_spacing / 2 pi)**k``.

    Equals ``(n h)**-k``; for the finite model (h = 1) it is ``n**-k``, the
    counting measure of the dual group divided by its order.
    """
    return float((n * h) ** (-k))


def haar_cell(h: float, k: int) -> float:
    """Lebesgue cell ``h**k`` of ``k`` lattice directions."""
    return float(h ** k)


def continuum_plancherel_constant(epsilon: float, d: int) -> float:
    """Analytic prefactor of sqrt(det Phi) d^m Phi for the Schrodinger model.

    With fibers realized by Weyl operators of symplectic scale epsilon*Phi the
    Plancherel density is ``epsilon**(d/2) |Pf Phi| / (2 pi)**(m + d/2)``.
    Used only to cross-check the fitted calibration constant.
    """
    m = d * (d - 1) // 2
    return float(epsilon ** (d / 2) / TWO_PI ** (m + d / 2))
