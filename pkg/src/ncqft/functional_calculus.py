"""Functions of operator fields, convolution powers and the simplest action.

The central object is ``Q_eps^{-1} exp(i t F)`` for ``F = Q_eps f``.  It is
computed two ways: fiberwise spectral calculus, and as the limit of the
twisted convolution power ``(delta + i t f_check / N)^{*N}``.  The second
route expands into a sum over chains of group elements whose kernel
``Psi_N`` collapses after the telescoping substitution; both the defining sum
and the collapsed form are evaluated here, exactly in the finite model.

Integrating the symbol against a weight ``W(Phi)`` gives the action
``S_W``, which reduces to a path sum over ``(phi_j)`` and ``(Y_j)`` chains
with the transform ``w`` of ``W`` inserted at the accumulated area.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .budget import guard
from .constants import dual_cell
from .group_fourier import (LabelSet, OperatorField, _backward, fourier0,
                            fourier0_inv, twisted_power)
from .nilpotent_group import ConfigurationError, GroupParams, LatticeSpec, wedge
from .quantization import (ScalarField, WeightFunction, dequantize, quantize,
                           weight_symbol_eval)

HERMITIAN_TOL = 1e-8


class FunctionalCalculusError(ValueError):
    """Raised when a function cannot be applied to the given fibers."""


# ---------------------------------------------------------------------------
# scalar functions

@dataclass(frozen=True)
class ScalarFunctionSpec:
    """A function ``k: R -> C`` in one of four representations.

    ``exp_it``
        ``k(s) = exp(i t s)``.
    ``polynomial``
        ``k(s) = sum_j coeffs[j] s^j``.
    ``sampled``
        ``k(s) = sum_j khat[j] exp(i tgrid[j] s) dt``, a finite exponential
        sum standing in for ``int exp(its) khat(t) dt``.
    ``callable``
        Any vectorized callable; only usable on Hermitian fibers.
    """

    kind: str
    t: float = 0.0
    coeffs: tuple = ()
    tgrid: np.ndarray | None = field(default=None, compare=False)
    khat: np.ndarray | None = field(default=None, compare=False)
    dt: float = 1.0
    func: Callable | None = field(default=None, compare=False)

    @classmethod
    def exp_it(cls, t: float) -> "ScalarFunctionSpec":
        return cls("exp_it", t=float(t))

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> "ScalarFunctionSpec":
        return cls("polynomial", coeffs=tuple(complex(c) for c in coeffs))

    @classmethod
    def sampled(cls, tgrid, khat, dt: float) -> "ScalarFunctionSpec":
        return cls("sampled", tgrid=np.asarray(tgrid, float),
                   khat=np.asarray(khat, complex), dt=float(dt))

    @classmethod
    def from_callable(cls, func: Callable) -> "ScalarFunctionSpec":
        return cls("callable", func=func)

    @property
    def is_entire(self) -> bool:
        return self.kind != "callable"

    def __call__(self, s):
        s = np.asarray(s)
        if self.kind == "exp_it":
            return np.exp(1j * self.t * s)
        if self.kind == "polynomial":
            out = np.zeros(s.shape, complex)
            for c in reversed(self.coeffs):
                out = out * s + c
            return out
        if self.kind == "sampled":
            return np.exp(1j * s[..., None] * self.tgrid) @ self.khat * self.dt
        if self.kind == "callable":
            return np.asarray(self.func(s), complex)
        raise ConfigurationError(f"unknown function kind {self.kind!r}")

    def reconstruction_error(self, target: Callable, s_max: float, num: int = 401) -> float:
        """Max deviation from ``target`` on ``[-s_max, s_max]``."""
        s = np.linspace(-s_max, s_max, num)
        return float(np.abs(self(s) - target(s)).max())


def _hermitian_defect(fibers: np.ndarray) -> float:
    return float(np.abs(fibers - np.conj(np.swapaxes(fibers, -1, -2))).max(initial=0.0))


def _spectral(k, fibers: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (fibers + np.conj(np.swapaxes(fibers, -1, -2))))
    kv = k(vals)
    return np.einsum("lij,lj,lkj->lik", vecs, kv, np.conj(vecs))


def _entire(k: ScalarFunctionSpec, fibers: np.ndarray) -> np.ndarray:
    eye = np.eye(fibers.shape[-1])
    if k.kind == "polynomial":
        out = np.zeros_like(fibers, dtype=complex)
        for c in reversed(k.coeffs):
            out = out @ fibers + c * eye
        return out
    if k.kind == "exp_it":
        return expm(1j * k.t * fibers)
    if k.kind == "sampled":
        out = np.zeros_like(fibers, dtype=complex)
        for tj, kj in zip(k.tgrid, k.khat):
            out += kj * expm(1j * tj * fibers)
        return out * k.dt
    raise FunctionalCalculusError("only entire functions apply to non-Hermitian fibers")


def apply_function_fiberwise(k: ScalarFunctionSpec, F: OperatorField,
                             tol: float = HERMITIAN_TOL) -> OperatorField:
    """``k(F)(rho) = k(F(rho))``.

    Hermitian fibers use the spectral theorem; otherwise ``k`` must be
    entire and is applied as a matrix power series or exponential.
    """
    if _hermitian_defect(F.fibers) <= tol:
        return OperatorField(F.labels, _spectral(k, F.fibers))
    if not k.is_entire:
        raise FunctionalCalculusError(
            "non-Hermitian fibers need an entire function (polynomial, exp_it, sampled)")
    return OperatorField(F.labels, _entire(k, F.fibers))


# ---------------------------------------------------------------------------
# the symbol of exp(i t Q f)

def symbol_exp_direct(f: ScalarField, t: float, labels: LabelSet) -> np.ndarray:
    """``Q^{-1}(exp(i t Q f))`` by fiberwise spectral calculus."""
    F = quantize(f.lift(), labels)
    return dequantize(apply_function_fiberwise(ScalarFunctionSpec.exp_it(t), F))


def symbol_exp_convpower(f: ScalarField, t: float, N: int) -> np.ndarray:
    """``F_0((delta + i t F_0^{-1}(f) / N)^{*N})``, the finite-N symbol."""
    if N < 1:
        raise ConfigurationError("N must be >= 1")
    lat = f.lattice
    h = lat.delta() + (1j * t / N) * fourier0_inv(f.lift(), lat)
    return fourier0(twisted_power(h, N, lat), lat)


# ---------------------------------------------------------------------------
# the chain kernel Psi_N (finite model)

def _require_finite(p: GroupParams):
    if not p.is_finite:
        raise ConfigurationError("chain kernels are evaluated in the finite model only")


def _all_vectors(n: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), np.int64)
    return np.indices((n,) * k).reshape(k, -1).T.astype(np.int64)


def _counts(exponents: np.ndarray, n: int) -> np.ndarray:
    """Histogram of exponents mod n along the last axis: coefficients in Z[w]."""
    e = np.mod(exponents, n)
    return np.stack([(e == r).sum(-1) for r in range(n)], -1).astype(np.int64)


def _omega_value(coeffs: np.ndarray, n: int) -> np.ndarray:
    return coeffs @ np.exp(2j * np.pi * np.arange(n) / n)


def canonical_cyclotomic(coeffs: np.ndarray) -> np.ndarray:
    """Canonical form in ``Z[w]`` for prime ``n``: subtract the last coefficient.

    For prime n the only relation is ``1 + w + ... + w^{n-1} = 0``, so two
    coefficient vectors represent the same number iff their canonical forms
    agree.
    """
    coeffs = np.asarray(coeffs)
    return coeffs - coeffs[..., -1:]


def _chain_product(X: np.ndarray, A: np.ndarray, p: GroupParams):
    """Product of chains ``(K, N, d)``, ``(K, N, m)``."""
    PX, PA = X[:, 0], A[:, 0]
    for j in range(1, X.shape[1]):
        PA = PA + p.half_eps * wedge(PX, X[:, j]) + A[:, j]
        PX = PX + X[:, j]
    return np.mod(PX, p.n), np.mod(PA, p.n)


def kernel_psiN_direct(phi, Phi, phis, Phis, p: GroupParams, exact: bool = False,
                       budget: int | None = None):
    """``Psi_N`` from its defining sum over chains of group elements.

    ``n^{-(d+m)N} sum_{g_1..g_N} exp(-i sum (phi_j X_j + Phi_j A_j))
    exp(i (phi, Phi)(g_1 * ... * g_N))``.  With ``exact=True`` the unnormalized
    sum is returned as integer coefficients of powers of ``w = e^{2 pi i/n}``.
    """
    _require_finite(p)
    n, d, m = p.n, p.d, p.m
    phis = np.atleast_2d(np.asarray(phis, np.int64))
    Phis = np.atleast_2d(np.asarray(Phis, np.int64))
    N = phis.shape[0]
    guard(n ** (p.dim * N), "direct chain sum", budget)
    chains = _all_vectors(n, p.dim * N).reshape(-1, N, p.dim)
    X, A = chains[..., :d], chains[..., d:]
    PX, PA = _chain_product(X, A, p)
    expo = (-(X * phis).sum((-1, -2)) - (A * Phis).sum((-1, -2))
            + PX @ np.asarray(phi, np.int64) + PA @ np.asarray(Phi, np.int64))
    coeffs = _counts(expo, n)
    if exact:
        return coeffs
    return complex(_omega_value(coeffs, n) / float(n) ** (p.dim * N))


def _y_chain_tables(p: GroupParams, N: int):
    """All Y chains with ``Y_0 = 0`` and their areas ``sum Y_{j-1} ^ Y_j``."""
    Y = _all_vectors(p.n, p.d * N).reshape(-1, N, p.d)
    prev = np.concatenate([np.zeros_like(Y[:, :1]), Y[:, :-1]], axis=1)
    area = wedge(prev, Y).sum(1)
    return Y, area


def kernel_psiN_simplified(phi, Phi, phis, Phis, p: GroupParams, exact: bool = False,
                           budget: int | None = None):
    """``Psi_N`` after the telescoping substitution.

    ``prod_j delta(Phi_j = Phi) n^{-dN} sum_Y exp i(sum_j (phi_{j+1} - phi_j) Y_j
    + (eps/2) Phi sum_j Y_{j-1} ^ Y_j)`` with ``phi_{N+1} = phi`` and
    ``Y_0 = 0``.  The exact form is scaled to match :func:`kernel_psiN_direct`.
    """
    _require_finite(p)
    n, d, m = p.n, p.d, p.m
    phis = np.atleast_2d(np.asarray(phis, np.int64))
    Phis = np.atleast_2d(np.asarray(Phis, np.int64))
    Phi = np.mod(np.asarray(Phi, np.int64), n)
    N = phis.shape[0]
    if np.any(np.mod(Phis - Phi, n) != 0):
        return np.zeros(n, np.int64) if exact else 0j
    guard(n ** (d * N), "simplified chain sum", budget)
    Y, area = _y_chain_tables(p, N)
    nxt = np.concatenate([phis[1:], np.atleast_2d(np.asarray(phi, np.int64))])
    expo = (Y * (nxt - phis)).sum((-1, -2)) + p.half_eps * (area @ Phi)
    coeffs = _counts(expo, n) * n ** (m * N)
    if exact:
        return coeffs
    return complex(_omega_value(coeffs, n) / float(n) ** (p.dim * N))


def _exact_dft_axis(T: np.ndarray, axis: int, sign: int, n: int) -> np.ndarray:
    """DFT along ``axis`` of a Z[w]-valued array stored with coefficients last."""
    T = np.moveaxis(T, axis, 0)
    out = np.zeros_like(T)
    for k in range(n):
        for x in range(n):
            out[k] += np.roll(T[x], sign * k * x, axis=-1)
    return np.moveaxis(out, 0, axis)


def psiN_direct_table(p: GroupParams, N: int, budget: int | None = None) -> np.ndarray:
    """Exact Psi_N for every argument, as the DFT of the chain indicator.

    Axes are ``(phi, Phi, phi_1, Phi_1, ..., phi_N, Phi_N)`` followed by one
    axis of Z[w] coefficients; entries are unnormalized counts.
    """
    _require_finite(p)
    n, D = p.n, p.dim
    guard(n ** (D * (N + 1) + 1) * n * n, "exhaustive kernel table", budget)
    chains = _all_vectors(n, D * N).reshape(-1, N, D)
    PX, PA = _chain_product(chains[..., :p.d], chains[..., p.d:], p)
    P = np.concatenate([PX, PA], -1)
    ind = np.zeros((n,) * (D * (N + 1)) + (n,), np.int64)
    idx = np.concatenate([P, chains.reshape(-1, D * N)], -1)
    ind[tuple(idx.T) + (0,)] = 1
    for ax in range(D * (N + 1)):
        ind = _exact_dft_axis(ind, ax, 1 if ax < D else -1, n)
    return ind


def psiN_simplified_table(p: GroupParams, N: int, budget: int | None = None) -> np.ndarray:
    """Exact simplified Psi_N for every argument, same layout as the direct table."""
    _require_finite(p)
    n, d, m, D = p.n, p.d, p.m, p.dim
    guard(n ** (2 * d * N + m), "exhaustive simplified table", budget)
    Y, area = _y_chain_tables(p, N)
    deltas = _all_vectors(n, d * N).reshape(-1, N, d)
    lin = np.einsum("ajk,yjk->ay", deltas, Y)
    Phis = _all_vectors(n, m)
    by_phi = np.stack([_counts(lin + p.half_eps * (area @ F), n) for F in Phis], 1)
    by_phi = by_phi * n ** (m * N)
    # gather: arguments -> (delta index, Phi index)
    args = _all_vectors(n, D * (N + 1)).reshape(-1, N + 1, D)
    phi_all = np.concatenate([args[:, 1:, :d], args[:, :1, :d]], 1)  # phi_1..phi_N, phi
    dl = np.mod(phi_all[:, 1:] - phi_all[:, :-1], n)
    di = np.ravel_multi_index(tuple(dl.reshape(len(args), -1).T), (n,) * (d * N))
    Phi0 = args[:, 0, d:]
    pi = np.ravel_multi_index(tuple(Phi0.T), (n,) * m) if m else np.zeros(len(args), int)
    ok = np.all(args[:, 1:, d:] == Phi0[:, None, :], axis=(1, 2))
    out = by_phi[di, pi] * ok[:, None]
    return out.reshape((n,) * (D * (N + 1)) + (n,))


def psiN_float_direct(p: GroupParams, N: int, budget: int | None = None) -> np.ndarray:
    """Floating-point direct table by FFT of the chain indicator, normalized."""
    _require_finite(p)
    n, D = p.n, p.dim
    guard(n ** (D * (N + 1)), "exhaustive kernel table", budget)
    chains = _all_vectors(n, D * N).reshape(-1, N, D)
    PX, PA = _chain_product(chains[..., :p.d], chains[..., p.d:], p)
    ind = np.zeros((n,) * (D * (N + 1)))
    idx = np.concatenate([PX, PA, chains.reshape(-1, D * N)], -1)
    ind[tuple(idx.T)] = 1.0
    out = np.fft.ifftn(ind, axes=tuple(range(D))) * n ** D
    out = np.fft.fftn(out, axes=tuple(range(D, D * (N + 1))))
    return out / float(n) ** (D * N)


# ---------------------------------------------------------------------------
# the action functional

def action_SW(kF: OperatorField, QW) -> complex:
    """Trace route ``sum_rho tr(k(F)(rho)) (Q W)(rho) w_rho``."""
    QW = np.asarray(QW)
    if QW.shape != (len(kF.labels),):
        raise ValueError("scalar label function does not match the labels")
    return complex(np.sum(kF.trace() * QW * kF.labels.weights))


def action_SW_symbol(kF: OperatorField, W: WeightFunction) -> complex:
    """Symbol route ``sum_{phi, Phi} Q^{-1}(k(F)) W dP0``."""
    lat = kF.labels.lattice
    return complex(np.sum(dequantize(kF) * W.lift()) * dual_cell(lat.n, lat.h, lat.dim))


def classical_limit_reference(f: ScalarField, t: float) -> complex:
    """``sum_phi exp(i t f(phi)) d^d phi / (2 pi)^d``."""
    return complex(np.exp(1j * t * f.values).sum() * f.cell)


def _phase_unit(lat: LatticeSpec) -> float:
    return 2 * np.pi / lat.n if lat.params.is_finite else 1.0


def _x_sites(lat: LatticeSpec) -> np.ndarray:
    ax = lat.axis_coords()
    return np.stack(np.meshgrid(*([ax] * lat.d), indexing="ij"), -1).reshape(-1, lat.d)


def _transfer(lat: LatticeSpec, a: np.ndarray):
    """Step amplitude ``ahat(Y' - Y) h^d`` and the area ``Y ^ Y'`` per site pair."""
    n, d = lat.n, lat.d
    ahat = _backward(a, lat, tuple(range(d))).reshape(-1)
    idx = np.indices((n,) * d).reshape(d, -1).T
    diff = np.mod(idx[:, None, :] - idx[None, :, :], n)
    diff = np.ravel_multi_index(tuple(np.moveaxis(diff, -1, 0)), (n,) * d)
    # ahat is indexed from the lattice centre in the continuum model
    c = lat.center
    if c:
        diff = np.ravel_multi_index(tuple(np.moveaxis(
            np.mod(np.stack(np.unravel_index(diff, (n,) * d), -1) + c, n), -1, 0)), (n,) * d)
    step = ahat[diff] * lat.h ** d
    Y = _x_sites(lat)
    area = wedge(Y[None, :, :], Y[:, None, :])  # [Y', Y] -> Y ^ Y'
    return step, area


def action_SW_discretized(f: ScalarField, t: float, N: int, W: WeightFunction,
                          method: str = "transfer", budget: int | None = None,
                          samples: int = 10 ** 5, seed: int = 0):
    """Finite-N action ``S_W`` as a path sum.

    ``sum_{phi chains} prod_j (1 + i t f(phi_j)/N) sum_{Y chains}
    exp(i sum_j (phi_{j+1} - phi_j) Y_j) w((eps/2) sum_j Y_{j-1} ^ Y_j)`` with
    ``Y_0 = Y_N = 0``.

    ``method="transfer"`` sums the phi chains analytically, expands ``w`` in
    Phi and evaluates each Phi term as a matrix element of the Nth power of a
    transfer matrix; its cost is polynomial in N.  ``"brute"`` enumerates
    both chains (guarded by the budget) and ``"mc"`` samples them uniformly,
    returning ``(value, stderr)``.
    """
    if N < 1:
        raise ConfigurationError("N must be >= 1")
    lat = f.lattice
    p = lat.params
    a = 1 + 1j * t * f.values / N
    if method == "transfer":
        step, area = _transfer(lat, a)
        unit = _phase_unit(lat)
        Phi_axis = lat.dual_axis()
        Phis = np.stack(np.meshgrid(*([Phi_axis] * lat.m), indexing="ij"), -1).reshape(-1, lat.m)
        wv = W.values.reshape(-1) * W.cell
        origin = int(np.ravel_multi_index((lat.center,) * lat.d, (lat.n,) * lat.d))
        total = 0j
        for Phi, weight in zip(Phis, wv):
            if weight == 0:
                continue
            T = step * np.exp(1j * unit * p.half_eps * (area @ Phi))
            v = np.zeros(T.shape[0], complex)
            v[origin] = 1.0
            for _ in range(N):
                v = T @ v
            total += weight * v[origin]
        return complex(total / lat.h ** lat.d)
    if method in ("brute", "mc"):
        return _action_chains(f, t, N, W, method, budget, samples, seed)
    raise ConfigurationError(f"unknown method {method!r}")


def _chain_integrand(f: ScalarField, t: float, W: WeightFunction,
                     phi_idx: np.ndarray, y_idx: np.ndarray) -> np.ndarray:
    """Integrand for index chains ``phi_idx (K, N, d)`` and ``y_idx (K, N-1, d)``."""
    lat = f.lattice
    p = lat.params
    N = phi_idx.shape[1]
    phi_ax, x_ax = lat.dual_axis(), lat.axis_coords()
    fv = f.values[tuple(np.moveaxis(phi_idx, -1, 0))]
    amp = np.prod(1 + 1j * t * fv / N, axis=-1)
    phi = phi_ax[phi_idx]
    Y = x_ax[y_idx]
    unit = _phase_unit(lat)
    lin = ((phi[:, 1:] - phi[:, :-1]) * Y).sum((-1, -2))
    prev = np.concatenate([np.zeros_like(Y[:, :1]), Y[:, :-1]], axis=1)
    area = wedge(prev, Y).sum(1) if N > 1 else np.zeros((len(Y), lat.m))
    if p.is_finite:
        lin = np.mod(lin, lat.n)
        area = np.mod(p.half_eps * area, lat.n)
    else:
        area = p.half_eps * area
    w = weight_symbol_eval(W, area)
    return amp * np.exp(1j * unit * lin) * w


def _action_chains(f, t, N, W, method, budget, samples, seed):
    lat = f.lattice
    n, d = lat.n, lat.d
    measure = dual_cell(n, lat.h, d) ** N * lat.h ** (d * (N - 1))
    count = n ** (d * (2 * N - 1))
    if method == "brute":
        guard(count, "brute force action sum", budget)
        phi_idx = _all_vectors(n, d * N).reshape(-1, N, d)
        y_idx = _all_vectors(n, d * (N - 1)).reshape(-1, N - 1, d) if N > 1 else np.zeros((1, 0, d), np.int64)
        total = 0j
        for chunk in np.array_split(np.arange(len(phi_idx)), max(1, len(phi_idx) * len(y_idx) // 10 ** 6)):
            P = np.repeat(phi_idx[chunk], len(y_idx), 0)
            Yc = np.tile(y_idx, (len(chunk), 1, 1))
            total += _chain_integrand(f, t, W, P, Yc).sum()
        return complex(total * measure)
    rng = np.random.default_rng([seed, N])
    phi_idx = rng.integers(0, n, (samples, N, d))
    y_idx = rng.integers(0, n, (samples, N - 1, d))
    vals = _chain_integrand(f, t, W, phi_idx, y_idx) * measure * count
    dev2 = np.abs(vals - vals.mean()) ** 2
    return complex(vals.mean()), float(np.sqrt(dev2.sum() / (samples - 1) / samples))


# ---------------------------------------------------------------------------
# several variables

@dataclass(frozen=True)
class MultiFunctionSpec:
    """A function of several real variables.

    ``sampled``: ``k(s) = sum_j khat[j] exp(i tpoints[j] . s) dt``.
    ``polynomial``: ``{exponent tuple: coefficient}``, applied in the
    symmetric (Weyl) ordering.
    """

    kind: str
    tpoints: np.ndarray | None = field(default=None, compare=False)
    khat: np.ndarray | None = field(default=None, compare=False)
    dt: float = 1.0
    terms: dict = field(default_factory=dict, compare=False)

    @classmethod
    def sampled(cls, tpoints, khat, dt: float) -> "MultiFunctionSpec":
        return cls("sampled", tpoints=np.atleast_2d(np.asarray(tpoints, float)),
                   khat=np.asarray(khat, complex), dt=float(dt))

    @classmethod
    def polynomial(cls, terms: dict) -> "MultiFunctionSpec":
        return cls("polynomial", terms={tuple(k): complex(v) for k, v in terms.items()})

    @classmethod
    def projection(cls, i: int, m: int) -> "MultiFunctionSpec":
        e = [0] * m
        e[i] = 1
        return cls.polynomial({tuple(e): 1.0})


def _weyl_monomial(exps: tuple, fibers: list) -> np.ndarray:
    """Symmetrized product: average over all distinct orderings of the factors."""
    word = [i for i, e in enumerate(exps) for _ in range(e)]
    M = fibers[0].shape[-1]
    if not word:
        return np.broadcast_to(np.eye(M, dtype=complex), fibers[0].shape).copy()
    perms = set(itertools.permutations(word))
    out = np.zeros_like(fibers[0], dtype=complex)
    for w in perms:
        prod = fibers[w[0]]
        for i in w[1:]:
            prod = prod @ fibers[i]
        out = out + prod
    return out / len(perms)


def vector_weyl_apply(k: MultiFunctionSpec, fields: Sequence[OperatorField],
                      tol: float = HERMITIAN_TOL) -> OperatorField:
    """``k(F_1, ..., F_m)`` in the symmetric ordering.

    The sampled form integrates ``exp(i sum_i t_i F_i)`` against ``khat``; the
    polynomial form symmetrizes each monomial, which is what the exponential
    route gives for polynomials.
    """
    if not fields:
        raise ValueError("need at least one field")
    labels = fields[0].labels
    for F in fields:
        if F.labels is not labels and F.labels != labels:
            raise ValueError("fields must share labels")
        if _hermitian_defect(F.fibers) > tol:
            raise FunctionalCalculusError("vector calculus needs Hermitian fibers")
    fibers = [F.fibers for F in fields]
    if k.kind == "sampled":
        if k.tpoints.shape[1] != len(fields):
            raise ValueError("tpoints dimension does not match the number of fields")
        out = np.zeros_like(fibers[0], dtype=complex)
        for tp, kj in zip(k.tpoints, k.khat):
            H = sum(ti * Fi for ti, Fi in zip(tp, fibers))
            out += kj * _spectral(lambda s: np.exp(1j * s), H)
        return OperatorField(labels, out * k.dt)
    if k.kind == "polynomial":
        out = np.zeros_like(fibers[0], dtype=complex)
        for exps, c in k.terms.items():
            if len(exps) != len(fields):
                raise ValueError("exponent length does not match the number of fields")
            out = out + c * _weyl_monomial(exps, fibers)
        return OperatorField(labels, out)
    raise ConfigurationError(f"unknown function kind {k.kind!r}")
