"""As eps shrinks the action approaches the classical integral of exp(i t f)."""

# %%
import numpy as np

from ncqft.functional_calculus import action_SW_discretized, classical_limit_reference
from ncqft.nilpotent_group import GroupParams, LatticeSpec
from ncqft.quantization import ScalarField, WeightFunction

gauss = lambda ph: np.exp(-(ph ** 2).sum(-1) / 2)

for eps in (2.0, 1.0, 0.5, 0.25, 0.125, 0.0):
    lat = LatticeSpec(GroupParams(2, eps, "continuum"), 16, 0.5)
    f = ScalarField.from_callable(lat, gauss)
    S = action_SW_discretized(f, 1.0, 128, WeightFunction.gaussian(lat))
    ref = classical_limit_reference(f, 1.0)
    print(f"eps={eps:<6} S={S:.6f}  |S - ref| = {abs(S - ref):.2e}")

# %% at eps = 0 what is left is the finite-N error of (1 + i t f / N)^N
