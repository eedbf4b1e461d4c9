"""Serialization of operator fields.

An operator field bundle is a ``.npz`` archive with

``header``
    JSON text: d, m, eps, model, n, h, M, convention, calibration and any
    label-set metadata;
``fibers``
    complex array ``(L, M, M)``, row-major per label;
``raw``
    raw quadrature weights ``(L,)`` (the Plancherel weight is
    ``calibration * raw``);
``label_kind``, ``label_Phi``, ``label_phi``
    the label grid.
"""

from __future__ import annotations

import json

import numpy as np

from . import __version__
from .group_fourier import IrrepLabel, LabelSet, OperatorField, RepSpec
from .nilpotent_group import GroupParams, LatticeSpec


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def save_bundle(F: OperatorField, path) -> None:
    labels = F.labels
    lat = labels.lattice
    p = lat.params
    header = {
        "format": "ncqft-operator-field", "version": __version__,
        "d": p.d, "m": p.m, "eps": p.epsilon, "model": p.model.value, "modulus": p.n,
        "n": lat.n, "h": lat.h, "M": labels.spec.M, "convention": labels.spec.convention,
        "calibration": labels.calibration,
        "meta": {k: _jsonable(v) for k, v in labels.meta.items()},
    }
    kinds = np.array([lab.kind for lab in labels.labels])
    Phi = np.array([lab.Phi for lab in labels.labels], float).reshape(len(labels), p.m)
    phi_len = max((len(lab.phi) for lab in labels.labels), default=0)
    phi = np.full((len(labels), phi_len), np.nan)
    for i, lab in enumerate(labels.labels):
        phi[i, :len(lab.phi)] = lab.phi
    np.savez(path, header=json.dumps(header), fibers=F.fibers, raw=labels.raw,
             label_kind=kinds, label_Phi=Phi, label_phi=phi)


def load_bundle(path) -> OperatorField:
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        fibers = z["fibers"]
        raw = z["raw"]
        kinds, Phi, phi = z["label_kind"], z["label_Phi"], z["label_phi"]
    p = GroupParams(header["d"], header["eps"], header["model"], header["modulus"])
    lat = LatticeSpec(p, header["n"], header["h"])
    cast = int if p.is_finite else float
    labels = []
    for k, F_, f_ in zip(kinds, Phi, phi):
        f_ = tuple(cast(v) for v in f_ if not np.isnan(v))
        labels.append(IrrepLabel(str(k), tuple(cast(v) for v in F_), f_))
    ls = LabelSet(lat, RepSpec(header["M"], header["convention"]), tuple(labels), raw,
                  header["calibration"], header.get("meta", {}))
    return OperatorField(ls, fibers)
