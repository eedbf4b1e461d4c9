"""A tour of the finite model: group law, irreducible fibers, Plancherel.

Run with ``python demos/01_finite_group_and_fourier.py``.
"""

# %% the group law on Z_3^2 x Z_3
import numpy as np

from ncqft.group_fourier import finite_labels, fourierE, hs_inner, twisted_convolve
from ncqft.nilpotent_group import (GroupParams, LatticeSpec, compose, enumerate_group,
                                   group_commutator)

p = GroupParams(d=2, epsilon=1, model="finite", n=3)
a, b = ((1, 0), (0,)), ((0, 1), (0,))
print("a * b     =", compose(a, b, p))
print("b * a     =", compose(b, a, p))
print("[a, b]    =", group_commutator(a, b, p))  # lands in the center

g = enumerate_group(p)
print("group order", len(g.X))

# %% labels: one 3-dim fiber per invertible Phi, plus characters at Phi = 0
lat = LatticeSpec.finite(p)
labels = finite_labels(lat)
for lab, w in zip(labels.labels, labels.weights):
    print(lab.kind, lab.Phi, lab.phi, "weight", round(w, 5))

# %% Plancherel and the convolution theorem
rng = np.random.default_rng(0)
f = rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape)
F = fourierE(f, labels)
print("||f||^2 =", lat.norm2(f), " <F, F> =", hs_inner(F, F).real)

h = rng.standard_normal(lat.shape)
lhs = fourierE(twisted_convolve(f, h, lat=lat), labels)
rhs = F @ fourierE(h, labels)
print("convolution theorem defect", np.abs(lhs.fibers - rhs.fibers).max())
