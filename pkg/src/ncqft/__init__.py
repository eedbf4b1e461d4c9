"""Harmonic analysis, quantization and gauge fields on the nilpotent groups G_eps.

Modules
-------
nilpotent_group
    The groups, their finite cyclic analogues and lattices.
group_fourier
    Commutative and operator-valued Fourier transforms, Plancherel weights,
    twisted convolution.
quantization
    ``Q_eps``, its symbol map, weight functions and trace identities.
functional_calculus
    Functions of operator fields, convolution powers, chain kernels and the
    action ``S_W``.
fatpoint_space
    Discrete measures and their differential calculus.
gauge_fields
    Connections, curvature, invariant functionals and the exploratory
    partition estimate.
"""

__version__ = "0.1.0"
