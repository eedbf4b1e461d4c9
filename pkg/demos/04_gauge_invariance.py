"""Connections over fat points, curvature, and gauge invariant functionals."""

# %%
import numpy as np

from ncqft.fatpoint_space import SupportSet
from ncqft.gauge_fields import (K1, K2, ConnectionField, GaugeGroupSpec, GaugeTransformation,
                                LorentzKernel, VectorSection, commutator_identity_check,
                                curvature, gauge_transform_connection, gauge_transform_section,
                                nabla_apply)
from ncqft.polynomial import Polynomial

rng = np.random.default_rng(4)
S = SupportSet(rng.standard_normal((4, 2)))  # four base points in the plane
spec = GaugeGroupSpec(2)
A = ConnectionField.random(S, spec, degree=2, rng=rng)
f = VectorSection(S, Polynomial.random(4, 2, rng, 6, (2,), True))
w = rng.dirichlet(np.ones(5))[:4]  # a fat point of mass < 1

# %% [nabla_x, nabla_y] = F_xy
print("commutator identity defect", commutator_identity_check(A, 0, 1, f, w))
print("F_01 =\n", np.round(curvature(A, 0, 1, w), 3))

# %% a weight-dependent gauge transformation
G = spec.random_algebra_polynomial(4, 2, rng, scale=0.5)
G = G + sum((Polynomial.variable(4, i) * spec.random_algebra(rng, 0.5) for i in range(4)),
            Polynomial.zero(4, (2, 2)))
g = GaugeTransformation(S, G)
At, ft = gauge_transform_connection(A, g), gauge_transform_section(f, g)
gv = g.value(w)
print("covariance", np.abs(nabla_apply(At, 2, ft, w) - gv @ nabla_apply(A, 2, f, w)).max())

B = LorentzKernel(1.0)
print("K1", K1(A, w, B), K1(At, w, B))
print("K2", K2(A, f, w, B), K2(At, ft, w, B))

# %% the wrong sign in the transformation law breaks covariance
bad = gauge_transform_connection(A, g, broken=True)
print("broken law", np.abs(nabla_apply(bad, 2, ft, w) - gv @ nabla_apply(A, 2, f, w)).max())
