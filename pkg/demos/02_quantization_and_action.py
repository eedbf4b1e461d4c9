"""Quantized fields, the weight function and the two routes to the action."""

# %%
import numpy as np

from ncqft.functional_calculus import (ScalarFunctionSpec, action_SW, action_SW_discretized,
                                       action_SW_symbol, apply_function_fiberwise)
from ncqft.group_fourier import OperatorField, finite_labels
from ncqft.nilpotent_group import GroupParams, LatticeSpec
from ncqft.quantization import ScalarField, WeightFunction, quantize, quantize_weight

lat = LatticeSpec.finite(GroupParams(2, 1, "finite", 5))
labels = finite_labels(lat)
rng = np.random.default_rng(2)

# %% the unit quantizes to the identity field
one = quantize(np.ones(lat.shape), labels)
print("Q(1) - 1:", np.abs(one.fibers - OperatorField.identity(labels).fibers).max())

# %% a weight is a real scalar on every fiber, equal to W at the label's Phi
W = WeightFunction.gaussian(lat)
print("w(0) =", W.mass)
print("Q W  =", np.round(quantize_weight(W, labels), 4))

# %% action of exp(i t Q f): trace route against the symbol route
f = ScalarField(lat, rng.standard_normal((5, 5)))
kF = apply_function_fiberwise(ScalarFunctionSpec.exp_it(1.0), quantize(f.lift(), labels))
print("trace route ", action_SW(kF, quantize_weight(W, labels)))
print("symbol route", action_SW_symbol(kF, W))

# %% finite N as a path sum, evaluated with a transfer matrix
for N in (4, 16, 64, 256):
    print(N, action_SW_discretized(f, 1.0, N, W))
