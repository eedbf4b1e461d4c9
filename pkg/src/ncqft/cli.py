"""Command-line front end.

Usage::

    ncqft <command> [--config PATH] [--out DIR] [--seed U64] [--threads N]

Commands: ``check-group``, ``plancherel``, ``symbol-exp``, ``classical-limit``,
``gauge-check``, ``partition``.  The configuration is a JSON object whose
sections are listed in :data:`DEFAULTS`; unknown keys are rejected.  Each run
writes ``<command>.csv`` and ``<command>.meta.json`` into the output
directory.

Exit codes: 0 all checks pass, 1 an invariant failed, 2 the configuration is
invalid (nothing is written in that case).
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .budget import BudgetExceeded, chain_budget
from .fatpoint_space import SupportSet
from .functional_calculus import (ScalarFunctionSpec, action_SW, action_SW_discretized,
                                  apply_function_fiberwise, classical_limit_reference,
                                  symbol_exp_convpower, symbol_exp_direct)
from .gauge_fields import (ConnectionField, GaugeGroupSpec, GaugeTransformation,
                           LorentzKernel, SourceAndPotential, VectorSection, K1, K2,
                           action_integrand, commutator_identity_check, curvature,
                           gauge_transform_connection, gauge_transform_section,
                           nabla_apply, partition_estimate)
from .group_fourier import (OperatorField, calibrate, continuum_labels, dual_norm2,
                            finite_labels, fourier0, fourierE, fourierE_inv, hs_inner)
from .nilpotent_group import (ConfigurationError, GroupParams, LatticeSpec, compose,
                              enumerate_group, group_commutator, identity, inverse,
                              random_elements, telescope, untelescope)
from .polynomial import Polynomial
from .quantization import ScalarField, WeightFunction, quantize, quantize_weight

COLUMNS = ["experiment", "model", "d", "n", "eps", "N", "t", "quantity", "mode",
           "value_re", "value_im", "reference_re", "reference_im", "abs_error",
           "rel_error", "stderr", "runtime_ms"]

DEFAULTS = {
    "seed": 0,
    "group": {"d": 2, "eps": [1], "model": "finite", "n": 3, "h": 1.0},
    "rep": {"M": 40, "Phi_max": 4.0, "count": 16},
    "weight": {"family": "gaussian", "width": None, "index": None, "values": None},
    "calculus": {"t": 1.0, "N": [16, 32, 64, 128], "budget": None, "fields": 3,
                 "action_N": 2, "mc_samples": 20000},
    "plancherel": {"functions": 10, "width": 1.0, "corrupt_weights": False},
    "classical": {"N": 128, "width": 1.0},
    "support": {"points": None, "p": 4},
    "gauge": {"m": [1, 2], "group": "U", "degree": 2, "sigma": 1.0, "draws": 10,
              "broken": False, "zero": False},
    "sampler": {"N": 4, "M": [100, 1000]},
    "partition": {"zero_action": False, "family_size": 3},
}


class ConfigError(ValueError):
    """Invalid configuration, reported with the offending field path."""


# ---------------------------------------------------------------------------
# configuration

def _merge(base: dict, user: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in user.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"{where}: unknown field")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where}: expected an object")
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = val
    return out


def _require(cond: bool, where: str, msg: str):
    if not cond:
        raise ConfigError(f"{where}: {msg}")


def load_config(path: str | None, seed: int | None) -> dict:
    user = {}
    if path:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        _require(isinstance(user, dict), "config", "top level must be an object")
    cfg = _merge(DEFAULTS, user)
    if seed is not None:
        cfg["seed"] = seed
    validate(cfg)
    return cfg


def validate(cfg: dict) -> None:
    g = cfg["group"]
    _require(isinstance(g["d"], int) and g["d"] >= 2, "group.d", "must be an integer >= 2")
    _require(g["model"] in ("finite", "continuum"), "group.model", "must be 'finite' or 'continuum'")
    eps = g["eps"] if isinstance(g["eps"], list) else [g["eps"]]
    _require(len(eps) >= 1, "group.eps", "needs at least one value")
    g["eps"] = eps
    for e in eps:
        _require(isinstance(e, (int, float)) and e >= 0, "group.eps", "values must be >= 0")
    _require(isinstance(g["n"], int) and g["n"] >= 2, "group.n", "must be an integer >= 2")
    if g["model"] == "finite":
        _require(g["n"] % 2 == 1 and g["n"] >= 3, "group.n", "finite model needs an odd modulus >= 3")
        for e in eps:
            _require(float(e).is_integer(), "group.eps", "finite model needs integer eps")
    else:
        _require(float(g["h"]) > 0, "group.h", "must be positive")
    w = cfg["weight"]
    if w is not None:
        _require(w["family"] in ("gaussian", "single-cell", "table"), "weight.family",
                 "must be gaussian, single-cell or table")
        if w["family"] == "table":
            _require(w["values"] is not None, "weight.values", "required for the table family")
        if w["family"] == "single-cell":
            _require(w["index"] is not None, "weight.index", "required for the single-cell family")
    c = cfg["calculus"]
    Ns = c["N"] if isinstance(c["N"], list) else [c["N"]]
    _require(all(isinstance(N, int) and N >= 1 for N in Ns), "calculus.N", "must be integers >= 1")
    c["N"] = Ns
    gm = cfg["gauge"]
    ms = gm["m"] if isinstance(gm["m"], list) else [gm["m"]]
    _require(all(isinstance(m, int) and m >= 1 for m in ms), "gauge.m", "must be integers >= 1")
    gm["m"] = ms
    _require(gm["group"] in ("U", "SU"), "gauge.group", "must be 'U' or 'SU'")
    _require(float(gm["sigma"]) > 0, "gauge.sigma", "must be positive")
    s = cfg["sampler"]
    Ms = s["M"] if isinstance(s["M"], list) else [s["M"]]
    _require(all(isinstance(M, int) and M >= 1 for M in Ms), "sampler.M", "must be integers >= 1")
    s["M"] = Ms
    _require(isinstance(s["N"], int) and s["N"] >= 1, "sampler.N", "must be an integer >= 1")
    sup = cfg["support"]
    if sup["points"] is not None:
        pts = np.asarray(sup["points"], float)
        _require(pts.ndim == 2 and len(np.unique(pts, axis=0)) == len(pts), "support.points",
                 "must be a list of distinct points")
    else:
        _require(isinstance(sup["p"], int) and sup["p"] >= 2, "support.p", "must be an integer >= 2")


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _params(cfg: dict, eps) -> GroupParams:
    g = cfg["group"]
    if g["model"] == "finite":
        return GroupParams(g["d"], int(eps), "finite", g["n"])
    return GroupParams(g["d"], float(eps), "continuum")


def _lattice(cfg: dict, p: GroupParams) -> LatticeSpec:
    if p.is_finite:
        return LatticeSpec.finite(p)
    return LatticeSpec(p, cfg["group"]["n"], float(cfg["group"]["h"]))


def _weight(cfg: dict, lat: LatticeSpec) -> WeightFunction:
    w = cfg["weight"]
    if w is None:
        raise ConfigError("weight: required for this command")
    if w["family"] == "gaussian":
        return WeightFunction.gaussian(lat, w["width"])
    if w["family"] == "single-cell":
        return WeightFunction.single_cell(lat, w["index"])
    return WeightFunction.table(lat, np.asarray(w["values"], float).reshape((lat.n,) * lat.m))


def _support(cfg: dict, d: int, rng) -> SupportSet:
    sup = cfg["support"]
    if sup["points"] is not None:
        return SupportSet(np.asarray(sup["points"], float))
    return SupportSet(rng.standard_normal((sup["p"], d)))


# ---------------------------------------------------------------------------
# result rows

@dataclass
class Report:
    experiment: str
    rows: list = field(default_factory=list)
    ok: bool = True
    meta: dict = field(default_factory=dict)

    def add(self, p: GroupParams | None, quantity: str, value, reference=0.0, *, n=None,
            N="", t="", mode="exact", tol=None, rel=False, stderr="", runtime_ms=0.0,
            passed=None):
        value, reference = complex(value), complex(reference)
        err = abs(value - reference)
        rel_err = err / abs(reference) if abs(reference) > 0 else (0.0 if err == 0 else float("inf"))
        if passed is None and tol is not None:
            passed = (rel_err if rel else err) <= tol
        if passed is False:
            self.ok = False
        self.rows.append({
            "experiment": self.experiment,
            "model": p.model.value if p else "", "d": p.d if p else "",
            "n": n if n is not None else (p.n if p and p.n else ""),
            "eps": p.epsilon if p else "", "N": N, "t": t, "quantity": quantity, "mode": mode,
            "value_re": f"{value.real:.17g}", "value_im": f"{value.imag:.17g}",
            "reference_re": f"{reference.real:.17g}", "reference_im": f"{reference.imag:.17g}",
            "abs_error": f"{err:.6e}", "rel_error": f"{rel_err:.6e}",
            "stderr": stderr if stderr == "" else f"{stderr:.6e}",
            "runtime_ms": f"{runtime_ms:.3f}",
        })


def _timer():
    t0 = time.perf_counter()
    return lambda: 1e3 * (time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# commands

def cmd_check_group(cfg: dict) -> Report:
    rep = Report("check-group")
    rng = np.random.default_rng(cfg["seed"])
    for eps in cfg["group"]["eps"]:
        p = _params(cfg, eps)
        clock = _timer()
        if p.is_finite:
            guard_size = p.n ** (3 * p.dim)
            if guard_size > chain_budget(cfg["calculus"]["budget"]):
                raise ConfigError("group.n: exhaustive triple check exceeds the budget")
            g = enumerate_group(p)
            G = len(g.X)
            i, j, k = np.unravel_index(np.arange(G ** 3), (G,) * 3)
            a, b, c = g.take(i), g.take(j), g.take(k)
            lhs = compose(compose(a, b, p), c, p)
            rhs = compose(a, compose(b, c, p), p)
            assoc = int(np.sum(lhs.flat() != rhs.flat()))
            rep.add(p, "associativity_mismatches", assoc, tol=0, runtime_ms=clock())
            ii, jj = np.unravel_index(np.arange(G ** 2), (G,) * 2)
            comm = group_commutator(g.take(ii), g.take(jj), p)
            noncentral = int(np.sum(comm.X != 0))
            rep.add(p, "commutator_noncentral", noncentral, tol=0, runtime_ms=clock())
            inv = compose(g, inverse(g, p), p)
            rep.add(p, "inverse_mismatches", int(np.sum(inv.flat() != 0)), tol=0)
            # telescope bijection on chains of length 2
            N = 2
            chains = np.indices((p.n,) * (p.dim * N)).reshape(p.dim * N, -1).T
            ch = chains.reshape(-1, N, p.dim).transpose(1, 0, 2)
            from .nilpotent_group import GroupElement
            el = GroupElement(ch[..., :p.d], ch[..., p.d:])
            tel = telescope(el, p)
            flat = np.concatenate([tel.X, tel.A], -1).transpose(1, 0, 2).reshape(len(chains), -1)
            distinct = len(np.unique(flat, axis=0))
            rep.add(p, "telescope_image_size", distinct, len(chains), N=N, tol=0)
            back = untelescope(tel, p)
            rep.add(p, "untelescope_mismatches", int(np.sum(back.flat() != el.flat())), N=N, tol=0)
            if p.epsilon % p.n == 0:
                ab = compose(g.take(ii), g.take(jj), p)
                ba = compose(g.take(jj), g.take(ii), p)
                rep.add(p, "commutativity_mismatches", int(np.sum(ab.flat() != ba.flat())), tol=0)
        else:
            a, b, c = (random_elements(p, rng, 1000) for _ in range(3))
            lhs = compose(compose(a, b, p), c, p)
            rhs = compose(a, compose(b, c, p), p)
            rep.add(p, "associativity_defect", np.abs(lhs.flat() - rhs.flat()).max(), tol=1e-12,
                    mode="random", runtime_ms=clock())
            comm = group_commutator(a, b, p)
            rep.add(p, "commutator_X_defect", np.abs(comm.X).max(), tol=1e-12, mode="random")
            chain = random_elements(p, rng, (5, 200))
            back = untelescope(telescope(chain, p), p)
            rep.add(p, "untelescope_defect", np.abs(back.flat() - chain.flat()).max(), N=5,
                    tol=1e-12, mode="random")
            if p.epsilon == 0:
                ab = compose(a, b, p)
                ba = compose(b, a, p)
                rep.add(p, "commutativity_defect", np.abs(ab.flat() - ba.flat()).max(), tol=1e-12,
                        mode="random")
    return rep


def _finite_or_continuum_labels(cfg, p, lat):
    if p.is_finite:
        return finite_labels(lat)
    r = cfg["rep"]
    return continuum_labels(lat, r["M"], float(r["Phi_max"]), r["count"])


def _gaussian(lat: LatticeSpec, center, width):
    g = lat.sites()
    r = ((g.X - center[:lat.d]) ** 2).sum(-1) + ((g.A - center[lat.d:]) ** 2).sum(-1)
    return np.exp(-r / (2 * width ** 2)).reshape(lat.shape)


def cmd_plancherel(cfg: dict) -> Report:
    rep = Report("plancherel")
    rng = np.random.default_rng(cfg["seed"])
    pc = cfg["plancherel"]
    for eps in cfg["group"]["eps"]:
        p = _params(cfg, eps)
        lat = _lattice(cfg, p)
        clock = _timer()
        if not p.is_finite and p.epsilon == 0:
            # no noncommutative labels; only the commutative identity applies
            for _ in range(pc["functions"]):
                f = _gaussian(lat, rng.uniform(-0.7, 0.7, p.dim), float(pc["width"]))
                rep.add(p, "parseval_commutative", dual_norm2(fourier0(f, lat), lat),
                        lat.norm2(f), tol=1e-10, rel=True)
            continue
        labels = _finite_or_continuum_labels(cfg, p, lat)
        if p.is_finite:
            tol = 1e-10
            funcs = [rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape)
                     for _ in range(pc["functions"])]
        else:
            tol = 1e-6
            w0 = float(pc["width"])
            labels = calibrate(labels, _gaussian(lat, np.zeros(p.dim), w0))
            funcs = [_gaussian(lat, rng.uniform(-0.7, 0.7, p.dim), rng.uniform(0.9 * w0, 1.1 * w0))
                     for _ in range(pc["functions"])]
        if pc["corrupt_weights"]:
            raw = labels.raw.copy()
            raw[::2] *= 2.0
            labels = type(labels)(labels.lattice, labels.spec, labels.labels, raw,
                                  labels.calibration, labels.meta)
        rep.meta.setdefault("calibration", {})[str(eps)] = {
            "fitted": labels.calibration, "analytic": labels.meta.get("calibration_analytic")}
        for idx, f in enumerate(funcs):
            nf = lat.norm2(f)
            rep.add(p, "parseval_commutative", dual_norm2(fourier0(f, lat), lat), nf, tol=1e-10,
                    rel=True)
            F = fourierE(f, labels)
            rep.add(p, "parseval_noncommutative", hs_inner(F, F).real, nf, tol=tol, rel=True,
                    mode="calibrated" if not p.is_finite else "exact")
            if p.is_finite:
                rep.add(p, "roundtrip_max_defect", np.abs(fourierE_inv(F) - f).max(), tol=1e-10)
        zero = np.zeros(lat.shape)
        Z = fourierE(zero, labels)
        rep.add(p, "zero_function_hs", hs_inner(Z, Z).real, 0.0, tol=0)
        rep.rows[-1]["runtime_ms"] = f"{clock():.3f}"
    return rep


def cmd_symbol_exp(cfg: dict) -> Report:
    rep = Report("symbol-exp")
    rng = np.random.default_rng(cfg["seed"])
    c = cfg["calculus"]
    t = float(c["t"])
    for eps in cfg["group"]["eps"]:
        p = _params(cfg, eps)
        if not p.is_finite:
            raise ConfigError("group.model: symbol-exp runs on the finite model")
        lat = _lattice(cfg, p)
        labels = finite_labels(lat)
        for fi in range(c["fields"]):
            f = ScalarField(lat, rng.standard_normal((lat.n,) * lat.d))
            ref = symbol_exp_direct(f, t, labels)
            errs = []
            for N in c["N"]:
                clock = _timer()
                e = np.sqrt(dual_norm2(symbol_exp_convpower(f, t, N) - ref, lat))
                errs.append(e)
                rep.add(p, f"e_N_field{fi}", e, 0.0, N=N, t=t, mode="convpower",
                        runtime_ms=clock(), passed=True)
            for (N1, e1), (N2, e2) in zip(zip(c["N"], errs), zip(c["N"][1:], errs[1:])):
                if N2 == 2 * N1 and e1 > 0:
                    ratio = e2 / e1
                    rep.add(p, f"halving_ratio_field{fi}", ratio, 0.5, N=N2, t=t,
                            passed=0.4 <= ratio <= 0.65)
            # t = 0 is exact for every N
            z = np.sqrt(dual_norm2(symbol_exp_convpower(f, 0.0, c["N"][0]) - 1.0, lat))
            rep.add(p, f"t0_error_field{fi}", z, 0.0, N=c["N"][0], t=0.0, tol=1e-12)
        # action: trace route against the chain sum, exact or sampled
        N = c["action_N"]
        f = ScalarField(lat, rng.standard_normal((lat.n,) * lat.d))
        W = _weight(cfg, lat)
        F = quantize(f.lift(), labels)
        kF = apply_function_fiberwise(ScalarFunctionSpec.polynomial([1, 1j * t / N]), F)
        kN = OperatorField(labels, np.linalg.matrix_power(kF.fibers, N))
        trace_route = action_SW(kN, quantize_weight(W, labels))
        clock = _timer()
        try:
            val = action_SW_discretized(f, t, N, W, method="brute", budget=c["budget"])
            rep.add(p, "action_chain_sum", val, trace_route, N=N, t=t, mode="exact", tol=1e-9,
                    rel=True, runtime_ms=clock())
        except BudgetExceeded:
            val, se = action_SW_discretized(f, t, N, W, method="mc", samples=c["mc_samples"],
                                            seed=cfg["seed"])
            err = abs(val - trace_route)
            rep.add(p, "action_chain_sum", val, trace_route, N=N, t=t, mode="mc", stderr=se,
                    passed=err <= 5 * se + 1e-12, runtime_ms=clock())
        tm = action_SW_discretized(f, t, N, W, method="transfer")
        rep.add(p, "action_transfer", tm, trace_route, N=N, t=t, mode="transfer", tol=1e-9, rel=True)
    return rep


def cmd_classical_limit(cfg: dict) -> Report:
    rep = Report("classical-limit")
    if cfg["weight"] is None:
        raise ConfigError("weight: required for classical-limit")
    cc = cfg["classical"]
    t = float(cfg["calculus"]["t"])
    N = int(cc["N"])
    errors, ref_mag = [], None
    for eps in cfg["group"]["eps"]:
        p = _params(cfg, eps)
        lat = _lattice(cfg, p)
        W = _weight(cfg, lat)
        width = float(cc["width"])
        f = ScalarField.from_callable(lat, lambda ph: np.exp(-(ph ** 2).sum(-1) / (2 * width ** 2)))
        clock = _timer()
        S = action_SW_discretized(f, t, N, W, method="transfer", budget=cfg["calculus"]["budget"])
        ref = classical_limit_reference(f, t)
        ref_mag = abs(ref)
        errors.append(abs(S - ref))
        rep.add(p, "E_eps", S, ref, N=N, t=t, mode="transfer", runtime_ms=clock(), passed=True)
    if len(errors) > 1:
        mono = all(b <= a for a, b in zip(errors, errors[1:]))
        rep.add(None, "monotone_nonincreasing", float(mono), 1.0, passed=mono)
        rep.add(None, "final_relative_error", errors[-1] / ref_mag, 0.0, passed=errors[-1] < 0.05 * ref_mag)
    else:
        rep.meta["informational"] = "single eps value; no monotonicity check"
    return rep


def _rich_generator(spec: GaugeGroupSpec, p: int, rng) -> Polynomial:
    """Algebra-valued generator with a linear term in every weight."""
    G = spec.random_algebra_polynomial(p, 2, rng, scale=0.5)
    for i in range(p):
        G = G + Polynomial.variable(p, i) * spec.random_algebra(rng, 0.5)
    return G


def cmd_gauge_check(cfg: dict) -> Report:
    rep = Report("gauge-check")
    gc = cfg["gauge"]
    rng = np.random.default_rng(cfg["seed"])
    d = cfg["group"]["d"]
    S = _support(cfg, d, rng)
    B = LorentzKernel(float(gc["sigma"]))
    for m in gc["m"]:
        spec = GaugeGroupSpec(m, gc["group"])
        worst = {"commutator": 0.0, "covariance": 0.0, "curvature_covariance": 0.0,
                 "K1": 0.0, "K2": 0.0, "action": 0.0}
        clock = _timer()
        for _ in range(gc["draws"]):
            if gc["zero"]:
                A = ConnectionField.zero(S, m)
            else:
                A = ConnectionField.random(S, spec, gc["degree"], rng)
            f = VectorSection(S, Polynomial.random(S.p, gc["degree"], rng, 6, (m,), True))
            J = VectorSection(S, Polynomial.random(S.p, 1, rng, 3, (m,), True))
            g = GaugeTransformation(S, _rich_generator(spec, S.p, rng))
            w = rng.dirichlet(np.ones(S.p + 1))[:S.p]
            At = gauge_transform_connection(A, g, broken=gc["broken"])
            ft, Jt = gauge_transform_section(f, g), gauge_transform_section(J, g)
            gv = g.value(w)
            for x in range(S.p):
                for y in range(S.p):
                    if x != y:
                        worst["commutator"] = max(worst["commutator"],
                                                  commutator_identity_check(A, x, y, f, w))
                worst["covariance"] = max(worst["covariance"], float(np.abs(
                    nabla_apply(At, x, ft, w) - gv @ nabla_apply(A, x, f, w)).max()))
            Fc = curvature(A, 0, 1, w)
            worst["curvature_covariance"] = max(worst["curvature_covariance"], float(np.abs(
                curvature(At, 0, 1, w) - gv @ Fc @ gv.conj().T).max()))
            src = SourceAndPotential(J, (0.0, 0.5, 0.1))
            srct = SourceAndPotential(Jt, (0.0, 0.5, 0.1))
            k1, k1t = K1(A, w, B, spec), K1(At, w, B, spec)
            k2, k2t = K2(A, f, w, B, spec), K2(At, ft, w, B, spec)
            a, at = action_integrand(A, f, src, w, B, spec), action_integrand(At, ft, srct, w, B, spec)
            for key, u, v in (("K1", k1, k1t), ("K2", k2, k2t), ("action", a, at)):
                worst[key] = max(worst[key], abs(u - v) / max(abs(u), 1e-300))
        n_label = S.p
        rep.add(None, f"commutator_identity_m{m}", worst["commutator"], n=n_label, tol=1e-9,
                runtime_ms=clock())
        rep.add(None, f"covariance_m{m}", worst["covariance"], n=n_label, tol=1e-9)
        rep.add(None, f"curvature_covariance_m{m}", worst["curvature_covariance"], n=n_label, tol=1e-9)
        for key in ("K1", "K2", "action"):
            rep.add(None, f"{key}_invariance_m{m}", worst[key], n=n_label, tol=1e-8)
    return rep


def cmd_partition(cfg: dict) -> Report:
    rep = Report("partition")
    rep.meta["status"] = "exploratory"
    pc, sc, gc = cfg["partition"], cfg["sampler"], cfg["gauge"]
    rng = np.random.default_rng(cfg["seed"])
    eps = cfg["group"]["eps"][0]
    p = _params(cfg, eps)
    lat = _lattice(cfg, p)
    W = _weight(cfg, lat)
    S = _support(cfg, p.d, rng)
    m = gc["m"][0]
    spec = GaugeGroupSpec(m, gc["group"])
    B = LorentzKernel(float(gc["sigma"]))
    if pc["zero_action"]:
        family = [(ConnectionField.zero(S, m), VectorSection(S, Polynomial.zero(S.p, (m,))))]
        src = SourceAndPotential(None, ())
    else:
        family = [(ConnectionField.random(S, spec, 1, rng, 0.3),
                   VectorSection(S, Polynomial.random(S.p, 1, rng, 3, (m,), True) * 0.3))
                  for _ in range(pc["family_size"])]
        src = SourceAndPotential(VectorSection(S, Polynomial.random(S.p, 1, rng, 2, (m,))), (0.0, 0.2))
    prev = None
    for M in sc["M"]:
        clock = _timer()
        res = partition_estimate(family, src, B, W, S, sc["N"], M, seed=cfg["seed"], spec=spec)
        ref = 1.0 if pc["zero_action"] else res.value
        rep.add(p, "W_J", res.value, ref, N=sc["N"], mode="exploratory",
                stderr=res.stderr if np.isfinite(res.stderr) else "", runtime_ms=clock(),
                passed=(res.value == 1.0) if pc["zero_action"] else True)
        rep.add(p, "phase_weight_mass", res.phase_weight_mass, 1.0, N=sc["N"], mode="exploratory",
                passed=True)
        if prev is not None and prev[1] > 0 and res.stderr > 0:
            ratio = res.stderr / prev[1]
            expect = np.sqrt(prev[0] / M)
            rep.add(p, f"stderr_ratio_M{prev[0]}_to_{M}", ratio, expect, N=sc["N"],
                    mode="exploratory", passed=expect / 1.5 <= ratio <= expect * 1.5)
        prev = (M, res.stderr)
    rep.meta["seeds"] = {"sampler": cfg["seed"]}
    return rep


COMMANDS = {
    "check-group": cmd_check_group,
    "plancherel": cmd_plancherel,
    "symbol-exp": cmd_symbol_exp,
    "classical-limit": cmd_classical_limit,
    "gauge-check": cmd_gauge_check,
    "partition": cmd_partition,
}


# ---------------------------------------------------------------------------
# output

def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def render_csv(rows: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_outputs(rep: Report, cfg: dict, out: Path, threads: int):
    _atomic_write(out / f"{rep.experiment}.csv", render_csv(rep.rows))
    meta = {
        "version": __version__, "experiment": rep.experiment, "config_hash": config_hash(cfg),
        "seed": cfg["seed"], "budget": chain_budget(cfg["calculus"]["budget"]),
        "threads": threads, "passed": rep.ok, **rep.meta,
    }
    _atomic_write(out / f"{rep.experiment}.meta.json", json.dumps(meta, indent=2, sort_keys=True,
                                                                  default=str) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default="ncqft_out", help="output directory")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--threads", type=int, default=0, help="worker count, 0 = auto")
    parser = argparse.ArgumentParser(prog="ncqft", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not (0 <= args.seed < 2 ** 64):
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, args.seed)
        rep = COMMANDS[args.command](cfg)
    except (ConfigError, ConfigurationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    threads = args.threads or (os.cpu_count() or 1)
    write_outputs(rep, cfg, Path(args.out), threads)
    status = "PASS" if rep.ok else "FAIL"
    print(f"{rep.experiment}: {status} ({len(rep.rows)} rows) -> {args.out}")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
