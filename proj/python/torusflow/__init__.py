"""Moment-map gradient flow on flat 2- and 4-tori.

Scalar fields are float64 arrays of shape (n,) * dim in C order; maps are
their displacements, shape (dim,) + (n,) * dim.  All operations infer the
dimension (2 or 4) from the array rank.
"""

from ._core import (
    check,
    compose,
    density,
    energy,
    flow,
    grad,
    hamiltonian_map,
    inverse,
    moment,
    random_map,
    shear_map,
    symbol,
)

__version__ = "0.1.0"

__all__ = [
    "check",
    "compose",
    "density",
    "energy",
    "flow",
    "grad",
    "hamiltonian_map",
    "inverse",
    "moment",
    "random_map",
    "shear_map",
    "symbol",
]
