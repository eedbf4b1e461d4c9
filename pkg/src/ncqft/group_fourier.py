"""Fourier analysis on G_0 and G_eps.

The commutative transform is the plain lattice DFT with Plancherel
normalization.  The noncommutative transform is operator valued: for each
sampled irreducible label it returns the matrix ``F(rho) = sum_g rho(g) f(g) dH``.

Representations
---------------
``continuum``
    Schrodinger-type Weyl operators.  A skew form Phi is brought to Darboux
    form by a real Schur decomposition; every 2x2 block ``b`` contributes a
    displacement operator of symplectic scale ``eps * b`` truncated to the
    first ``M1`` Hermite modes (``M = M1 ** (d/2)``).  Matrix elements are the
    exact ones of the infinite operator, so the truncation is a compression.
``finite``
    Clock-and-shift matrices of size n (d = 2).  Labels with ``eps * Phi``
    invertible mod n are the n-dimensional irreducibles.  The degenerate
    sector, where the group acts through characters, is stored as blocks of
    n characters sharing ``(phi_1, Phi)`` arranged on a diagonal, so every
    fiber has the same size n.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from math import gcd
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import schur
from scipy.special import eval_genlaguerre, gammaln

from .constants import TWO_PI, continuum_plancherel_constant
from .nilpotent_group import GroupElement, GroupParams, LatticeSpec, _as_element, wedge


class RepresentationError(ValueError):
    """Raised for degenerate or otherwise unsupported representation labels."""


class DualPoint(NamedTuple):
    """A point ``(phi, Phi)`` of the commutative dual.

    In the finite model the coordinates are integer frequencies and
    ``phi(X)`` means ``2 pi phi.X / n``.
    """

    phi: np.ndarray
    Phi: np.ndarray


def _phase_scale(p: GroupParams) -> float:
    return TWO_PI / p.n if p.is_finite else 1.0


def character_eval(point, g, p: GroupParams) -> np.ndarray:
    """``exp i(phi(X) + Phi(A))``."""
    phi, Phi = (np.asarray(v) for v in point)
    X, A = _as_element(g, p)
    arg = (X * phi).sum(-1) + (A * Phi).sum(-1)
    if p.is_finite:
        arg = np.mod(arg, p.n)
    return np.exp(1j * _phase_scale(p) * arg)


# ---------------------------------------------------------------------------
# commutative transform

def _shift(a, axes, lat: LatticeSpec, inverse=False):
    if lat.params.is_finite:
        return a
    return np.fft.fftshift(a, axes) if inverse else np.fft.ifftshift(a, axes)


def _forward(f, lat: LatticeSpec, axes) -> np.ndarray:
    """``sum_x f(x) exp(+i k.x) h^k`` along ``axes``."""
    k = len(axes)
    f = _shift(np.asarray(f, dtype=complex), axes, lat)
    out = np.fft.ifftn(f, axes=axes) * (lat.n * lat.h) ** k
    return _shift(out, axes, lat, inverse=True)


def _backward(u, lat: LatticeSpec, axes) -> np.ndarray:
    """``sum_k u(k) exp(-i k.x) (n h)^-k`` along ``axes``; inverse of _forward."""
    k = len(axes)
    u = _shift(np.asarray(u, dtype=complex), axes, lat)
    out = np.fft.fftn(u, axes=axes) / (lat.n * lat.h) ** k
    return _shift(out, axes, lat, inverse=True)


def _check_shape(f, lat: LatticeSpec):
    if np.shape(f) != lat.shape:
        raise ValueError(f"expected lattice array of shape {lat.shape}, got {np.shape(f)}")


def fourier0(f, lat: LatticeSpec) -> np.ndarray:
    """Fourier transform on G_0, ``u(phi, Phi) = sum f(X, A) e^{i(phi X + Phi A)} dH``."""
    _check_shape(f, lat)
    return _forward(f, lat, tuple(range(lat.dim)))


def fourier0_inv(u, lat: LatticeSpec) -> np.ndarray:
    """Inverse of :func:`fourier0` with respect to the cell of dP0."""
    _check_shape(u, lat)
    return _backward(u, lat, tuple(range(lat.dim)))


def dual_norm2(u, lat: LatticeSpec) -> float:
    """``||u||^2`` in ``L2(dP0)``."""
    return float(np.vdot(u, u).real / lat.extent ** lat.dim)


def dual_inner(u, v, lat: LatticeSpec) -> complex:
    return complex(np.vdot(v, u) / lat.extent ** lat.dim)


# ---------------------------------------------------------------------------
# skew forms and labels

@dataclass(frozen=True)
class SkewForm:
    """Skew-symmetric bilinear form on R^d given by its wedge coordinates."""

    Phi: tuple
    d: int
    modulus: int | None = None

    def matrix(self) -> np.ndarray:
        i, j = np.triu_indices(self.d, 1)
        dtype = np.int64 if self.modulus else float
        S = np.zeros((self.d, self.d), dtype)
        S[i, j] = self.Phi
        S[j, i] = -np.asarray(self.Phi, dtype)
        return S

    def pfaffian(self):
        P = self.Phi
        if self.d == 2:
            pf = P[0]
        elif self.d == 4:
            # wedge order 12, 13, 14, 23, 24, 34
            pf = P[0] * P[5] - P[1] * P[4] + P[2] * P[3]
        elif self.d % 2:
            pf = 0
        else:
            pf = np.sqrt(abs(np.linalg.det(self.matrix().astype(float))))
        return pf % self.modulus if self.modulus else pf

    def det(self):
        pf = self.pfaffian()
        return (pf * pf) % self.modulus if self.modulus else float(pf) ** 2

    @property
    def is_symplectic(self) -> bool:
        if self.modulus:
            return gcd(int(self.pfaffian()), self.modulus) == 1
        return abs(float(self.pfaffian())) > 0.0


@dataclass(frozen=True)
class IrrepLabel:
    """Label of a fiber of the dual bundle.

    ``kind`` is ``"infinite"`` for the representations attached to a symplectic
    form ``Phi``, or ``"character"`` for one-dimensional ones.  In the finite
    model a character label is a block of n characters with fixed ``phi_1``
    and ``Phi`` whose ``phi_2`` runs along the diagonal.
    """

    kind: str
    Phi: tuple
    phi: tuple = ()

    def __post_init__(self):
        if self.kind not in ("infinite", "character"):
            raise ValueError(f"unknown label kind {self.kind!r}")


@dataclass(frozen=True)
class RepSpec:
    M: int
    convention: str = "hermite-weyl"

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("fiber dimension must be at least 2")


# ---------------------------------------------------------------------------
# representation matrices

def _displacement(alpha: np.ndarray, M: int) -> np.ndarray:
    """Exact ``<j| D(alpha) |k>`` for ``j, k < M``; batched over ``alpha``."""
    alpha = np.asarray(alpha, dtype=complex)[..., None, None]
    j = np.arange(M)[:, None]
    k = np.arange(M)[None, :]
    lo = np.minimum(j, k)
    diff = np.abs(j - k)
    x = np.abs(alpha) ** 2
    lag = eval_genlaguerre(lo, diff, x)
    ratio = np.exp(0.5 * (gammaln(lo + 1) - gammaln(np.maximum(j, k) + 1)))
    power = np.where(j >= k, alpha ** diff, (-np.conj(alpha)) ** diff)
    return ratio * power * np.exp(-0.5 * x) * lag


def _weyl2(kappa: float, y1, y2, M: int) -> np.ndarray:
    """2D Weyl operator with ``W(x) W(y) = exp(i kappa/2 x^y) W(x + y)``."""
    s = np.sqrt(abs(kappa))
    alpha = s * (np.sign(kappa) * np.asarray(y2) + 1j * np.asarray(y1)) / np.sqrt(2.0)
    return _displacement(alpha, M)


def darboux(S: np.ndarray):
    """Orthogonal Q and block values b with ``Q^T S Q = diag([[0, b_k], [-b_k, 0]])``."""
    d = S.shape[0]
    if d == 2:
        return np.eye(2), np.array([S[0, 1]])
    T, Q = schur(S, output="real")
    return Q, np.array([T[2 * k, 2 * k + 1] for k in range(d // 2)])


def _continuum_x_matrices(label: IrrepLabel, X: np.ndarray, spec: RepSpec,
                          p: GroupParams) -> np.ndarray:
    d = p.d
    if d % 2:
        raise RepresentationError("odd d has no symplectic forms")
    form = SkewForm(tuple(label.Phi), d)
    Q, b = darboux(form.matrix())
    kappas = p.epsilon * b
    if np.any(np.abs(kappas) < 1e-300):
        raise RepresentationError("effective form eps * Phi is degenerate")
    M1 = round(spec.M ** (2.0 / d))
    if M1 ** (d // 2) != spec.M:
        raise RepresentationError(f"M = {spec.M} is not a perfect power M1^{d // 2}")
    Y = np.asarray(X, float) @ Q
    out = None
    for k, kappa in enumerate(kappas):
        Wk = _weyl2(kappa, Y[..., 2 * k], Y[..., 2 * k + 1], M1)
        if out is None:
            out = Wk
        else:
            out = np.einsum("...ij,...kl->...ikjl", out, Wk).reshape(
                Wk.shape[:-2] + (out.shape[-1] * M1,) * 2)
    return out


def _finite_x_matrices(label: IrrepLabel, X: np.ndarray, p: GroupParams) -> np.ndarray:
    n = p.n
    if p.d != 2:
        raise RepresentationError("finite fibers are implemented for d = 2")
    X = np.mod(np.asarray(X, np.int64), n)
    if X.ndim == 1:
        return _finite_x_matrices(label, X[None], p)[0]
    x1, x2 = X[..., 0], X[..., 1]
    omega = lambda e: np.exp(2j * np.pi * np.mod(e, n) / n)
    rows = np.arange(n)
    if label.kind == "character":
        (phi1,) = label.phi
        out = np.zeros(X.shape[:-1] + (n, n), dtype=complex)
        out[..., rows, rows] = omega(phi1 * x1[..., None] + rows * x2[..., None])
        return out
    kappa = (-int(label.Phi[0]) * int(p.epsilon)) % n
    if gcd(kappa, n) != 1:
        raise RepresentationError(f"eps * Phi = {(-kappa) % n} is not invertible mod {n}")
    # V(x) = omega^{kappa x1 x2 / 2} S^{x1} C^{kappa x2};  S|j> = |j+1>,  C|j> = omega^j |j>
    cols = rows
    target = np.mod(cols[None, :] + x1[..., None], n)  # S^{x1} C|j> lands on j + x1
    out = np.zeros(X.shape[:-1] + (n, n), dtype=complex)
    val = omega(kappa * p.inv2 * (x1 * x2)[..., None] + kappa * x2[..., None] * cols[None, :])
    idx = np.indices(target.shape)
    out[tuple(idx[:-1]) + (target, np.broadcast_to(cols, target.shape))] = val
    return out


def x_matrices(label: IrrepLabel, X, spec: RepSpec, p: GroupParams) -> np.ndarray:
    """``rho(X, 0)`` for a batch of base vectors ``X``."""
    if label.kind == "infinite" and not SkewForm(tuple(label.Phi), p.d,
                                                 p.n if p.is_finite else None).is_symplectic:
        raise RepresentationError(f"label Phi = {label.Phi} is not symplectic")
    if p.is_finite:
        return _finite_x_matrices(label, X, p)
    if label.kind == "character":
        raise RepresentationError("continuum character labels carry no fiber")
    return _continuum_x_matrices(label, X, spec, p)


def central_phase(label: IrrepLabel, A, p: GroupParams) -> np.ndarray:
    """``exp(i Phi(A))``, the central character of the label."""
    arg = (np.asarray(A) * np.asarray(label.Phi)).sum(-1)
    if p.is_finite:
        arg = np.mod(arg, p.n)
    return np.exp(1j * _phase_scale(p) * arg)


def rep_matrix(label: IrrepLabel, g, spec: RepSpec, p: GroupParams) -> np.ndarray:
    """The matrix ``rho(X, A) = exp(i Phi(A)) rho(X, 0)``; batched over ``g``."""
    X, A = _as_element(g, p)
    return central_phase(label, A, p)[..., None, None] * x_matrices(label, X, spec, p)


# ---------------------------------------------------------------------------
# label sets and operator fields

@dataclass(frozen=True)
class LabelSet:
    """Sampled labels with quadrature weights ``calibration * raw``."""

    lattice: LatticeSpec
    spec: RepSpec
    labels: tuple
    raw: np.ndarray
    calibration: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def params(self) -> GroupParams:
        return self.lattice.params

    @property
    def weights(self) -> np.ndarray:
        return self.calibration * self.raw

    def __len__(self):
        return len(self.labels)

    @cached_property
    def Phi(self) -> np.ndarray:
        return np.array([lab.Phi for lab in self.labels])

    @cached_property
    def site_matrices(self) -> np.ndarray:
        """``rho(X, 0)`` for every label and every X-site: shape (L, n^d, M, M)."""
        lat = self.lattice
        ax = lat.axis_coords()
        X = np.stack(np.meshgrid(*([ax] * lat.d), indexing="ij"), -1).reshape(-1, lat.d)
        return np.stack([x_matrices(lab, X, self.spec, self.params) for lab in self.labels])

    @cached_property
    def central_table(self) -> np.ndarray:
        """``exp(i Phi(A))`` for every label and A-site: shape (L, n^m)."""
        lat = self.lattice
        ax = lat.axis_coords()
        A = np.stack(np.meshgrid(*([ax] * lat.m), indexing="ij"), -1).reshape(-1, lat.m)
        return np.stack([central_phase(lab, A, self.params) for lab in self.labels])

    def with_calibration(self, c: float, **meta) -> "LabelSet":
        return replace(self, calibration=float(c), meta={**self.meta, **meta})


def finite_labels(lat: LatticeSpec) -> LabelSet:
    """Complete label set of the finite group (d = 2, n prime).

    The calibration is the exact Plancherel constant ``1 / |G|``; raw weights
    are the representation dimensions.
    """
    p = lat.params
    if not p.is_finite or p.d != 2:
        raise RepresentationError("finite label sets need the finite model with d = 2")
    n = p.n
    labels, raw = [], []
    for Phi in range(n):
        if gcd((Phi * int(p.epsilon)) % n, n) == 1:
            labels.append(IrrepLabel("infinite", (Phi,)))
            raw.append(float(n))
        elif (Phi * int(p.epsilon)) % n == 0:
            for phi1 in range(n):
                labels.append(IrrepLabel("character", (Phi,), (phi1,)))
                raw.append(1.0)
        else:
            raise RepresentationError("composite moduli with eps*Phi not invertible are unsupported")
    return LabelSet(lat, RepSpec(n, "clock-shift"), tuple(labels), np.array(raw),
                    calibration=1.0 / lat.size, meta={"calibration_analytic": 1.0 / lat.size})


def continuum_labels(lat: LatticeSpec, M: int, Phi_max: float, count: int,
                     exclude: float = 0.0) -> LabelSet:
    """Midpoint grid of ``count**m`` symplectic labels in ``[-Phi_max, Phi_max]^m``.

    The Plancherel integrand ``|Pf Phi| * ||F(Phi)||^2`` is smooth in Phi (the
    Pfaffian cancels the fiber normalization), so equal cells converge fast.
    Cells with ``|Pf Phi| <= exclude`` are dropped.  Raw weights are
    ``|Pf Phi| * cell``; the calibration starts at the analytic constant and is
    normally refitted with :func:`calibrate`.
    """
    p = lat.params
    if p.is_finite:
        raise RepresentationError("use finite_labels for the finite model")
    step = 2.0 * Phi_max / count
    axis = -Phi_max + step * (np.arange(count) + 0.5)
    grid = np.stack(np.meshgrid(*([axis] * p.m), indexing="ij"), -1).reshape(-1, p.m)
    labels, raw = [], []
    for Phi in grid:
        pf = abs(float(SkewForm(tuple(Phi), p.d).pfaffian()))
        if pf > exclude:
            labels.append(IrrepLabel("infinite", tuple(float(v) for v in Phi)))
            raw.append(pf * step ** p.m)
    if not labels:
        raise RepresentationError("no symplectic labels survive the exclusion")
    c = continuum_plancherel_constant(p.epsilon, p.d)
    return LabelSet(lat, RepSpec(M), tuple(labels), np.array(raw), calibration=c,
                    meta={"calibration_analytic": c})


def plancherel_weight(label: IrrepLabel, labels: LabelSet) -> float:
    """Weight of ``label`` in the Plancherel quadrature of ``labels``.

    Continuum character labels have no Plancherel mass.
    """
    if label.kind == "character" and not labels.params.is_finite:
        return 0.0
    return float(labels.weights[labels.labels.index(label)])


@dataclass(frozen=True)
class OperatorField:
    """A section of the dual bundle: one ``M x M`` matrix per label."""

    labels: LabelSet
    fibers: np.ndarray

    def __post_init__(self):
        L, M = len(self.labels), self.labels.spec.M
        if self.fibers.shape != (L, M, M):
            raise ValueError(f"fibers must have shape {(L, M, M)}, got {self.fibers.shape}")

    @classmethod
    def identity(cls, labels: LabelSet) -> "OperatorField":
        M = labels.spec.M
        return cls(labels, np.broadcast_to(np.eye(M, dtype=complex), (len(labels), M, M)).copy())

    @classmethod
    def zeros(cls, labels: LabelSet) -> "OperatorField":
        M = labels.spec.M
        return cls(labels, np.zeros((len(labels), M, M), complex))

    def _check(self, other: "OperatorField"):
        if other.labels is not self.labels and other.labels.labels != self.labels.labels:
            raise ValueError("operator fields live on different label sets")

    def __add__(self, other):
        self._check(other)
        return OperatorField(self.labels, self.fibers + other.fibers)

    def __sub__(self, other):
        self._check(other)
        return OperatorField(self.labels, self.fibers - other.fibers)

    def __mul__(self, scalar):
        return OperatorField(self.labels, self.fibers * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return OperatorField(self.labels, self.fibers @ other.fibers)

    def adjoint(self) -> "OperatorField":
        return OperatorField(self.labels, np.conj(np.swapaxes(self.fibers, -1, -2)))

    def trace(self) -> np.ndarray:
        return np.trace(self.fibers, axis1=-2, axis2=-1)

    def hs_norm(self) -> float:
        return float(np.sqrt(max(hs_inner(self, self).real, 0.0)))


# ---------------------------------------------------------------------------
# noncommutative transform

def _a_transform(f, labels: LabelSet) -> np.ndarray:
    """``sum_A f(X, A) exp(i Phi(A)) h^m`` for every label: shape (L, n^d)."""
    lat = labels.lattice
    f = np.asarray(f).reshape(lat.n ** lat.d, lat.n ** lat.m)
    return (labels.central_table @ f.T) * lat.h ** lat.m


def fourierE(f, labels: LabelSet) -> OperatorField:
    """``F(rho) = sum_g rho(g) f(g) dH`` for every sampled label."""
    if len(labels) == 0:
        raise ValueError("empty label set")
    _check_shape(f, labels.lattice)
    fhat = _a_transform(f, labels) * labels.lattice.h ** labels.lattice.d
    fibers = np.einsum("lx,lxij->lij", fhat, labels.site_matrices)
    return OperatorField(labels, fibers)


def fourierE_inv(F: OperatorField) -> np.ndarray:
    """``f(g) = sum_rho tr(F(rho) rho(g)^*) w_rho``."""
    labels = F.labels
    lat = labels.lattice
    if labels.weights.shape != (len(labels),):
        raise ValueError("weights do not match labels")
    t = np.einsum("lij,lxij->lx", F.fibers, np.conj(labels.site_matrices))
    f = np.einsum("l,lx,la->xa", labels.weights, t, np.conj(labels.central_table))
    return f.reshape(lat.shape)


def hs_inner(F1: OperatorField, F2: OperatorField) -> complex:
    """``sum_rho tr(F1 F2^*) w_rho``."""
    F1._check(F2)
    tr = np.einsum("lij,lij->l", F1.fibers, np.conj(F2.fibers))
    return complex(np.dot(tr, F1.labels.weights))


def calibrate(labels: LabelSet, reference) -> LabelSet:
    """Fit the Plancherel constant so that Parseval holds on ``reference``."""
    F = fourierE(reference, labels)
    raw = np.einsum("lij,lij->l", F.fibers, np.conj(F.fibers)).real @ labels.raw
    c = labels.lattice.norm2(reference) / raw
    return labels.with_calibration(c, calibration_fitted=c)


# ---------------------------------------------------------------------------
# twisted convolution

def _x_tables(lat: LatticeSpec):
    """Index of ``x - y`` and the wedge ``y ^ x`` for all pairs of X-sites."""
    n, d = lat.n, lat.d
    idx = np.indices((n,) * d).reshape(d, -1).T
    diff = np.mod(idx[:, None, :] - idx[None, :, :], n)
    diff_flat = np.ravel_multi_index(tuple(np.moveaxis(diff, -1, 0)), (n,) * d)
    ax = lat.axis_coords()
    coords = ax[idx]
    wyx = wedge(coords[None, :, :], coords[:, None, :])  # [x, y] -> y ^ x
    return diff_flat, wyx


def _twisted_pair(h1, h2, lat: LatticeSpec, diff, wyx) -> np.ndarray:
    p = lat.params
    nd, nm = lat.n ** lat.d, lat.n ** lat.m
    Aaxes = tuple(range(lat.d, lat.dim))
    H1 = _forward(h1, lat, Aaxes).reshape(nd, nm)
    H2 = _forward(h2, lat, Aaxes).reshape(nd, nm)
    kap = np.stack(np.meshgrid(*([lat.dual_axis()] * lat.m), indexing="ij"), -1).reshape(-1, lat.m)
    arg = np.einsum("xym,km->kxy", wyx, kap) * p.half_eps
    if p.is_finite:
        arg = np.mod(arg, p.n)
    phase = np.exp(1j * _phase_scale(p) * arg)
    # out[x, k] = sum_y H1[y, k] H2[x - y, k] phase[k, x, y]
    out = np.einsum("yk,xyk,kxy->xk", H1, H2[diff], phase) * lat.h ** lat.d
    return _backward(out.reshape(lat.shape), lat, Aaxes)


def twisted_convolve(*hs, lat: LatticeSpec) -> np.ndarray:
    """G_eps convolution ``h1 *_eps h2 *_eps ... *_eps hN``.

    Evaluated through a partial Fourier transform in the central variables,
    where the cocycle becomes a phase; exact for the finite model.
    """
    if not hs:
        raise ValueError("nothing to convolve")
    for h in hs:
        _check_shape(h, lat)
    diff, wyx = _x_tables(lat)
    acc = np.asarray(hs[0], dtype=complex)
    for h in hs[1:]:
        acc = _twisted_pair(acc, h, lat, diff, wyx)
    return acc


def twisted_power(h, N: int, lat: LatticeSpec) -> np.ndarray:
    """``h^{*N}`` by binary exponentiation."""
    if N < 1:
        raise ValueError("N must be >= 1")
    diff, wyx = _x_tables(lat)
    result = None
    base = np.asarray(h, dtype=complex)
    while N:
        if N & 1:
            result = base if result is None else _twisted_pair(result, base, lat, diff, wyx)
        N >>= 1
        if N:
            base = _twisted_pair(base, base, lat, diff, wyx)
    return result


def twisted_convolve_bruteforce(h1, h2, lat: LatticeSpec) -> np.ndarray:
    """Reference convolution by direct summation over the finite group."""
    from .nilpotent_group import compose, inverse
    p = lat.params
    if not p.is_finite:
        raise ValueError("brute force convolution needs the finite model")
    g = lat.sites()
    h1 = np.asarray(h1).reshape(-1)
    h2 = np.asarray(h2).reshape(-1)
    out = np.zeros(lat.size, complex)
    for i in range(lat.size):
        gi = g.take(i)
        q = compose(inverse(gi, p), g, p)
        out += h1[i] * h2[lat.site_index(q)]
    return out.reshape(lat.shape) * lat.haar_weight
