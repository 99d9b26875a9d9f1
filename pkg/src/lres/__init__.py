"""Spectral data, L-resolvent matrices and L-resolvents of canonical systems."""

from .boundary_triple import (
    canonical_resolvent_apply,
    gamma_adjoint_apply,
    generalized_resolvent_apply,
    weyl,
    weyl_function,
)
from .canonical_system import (
    CanonicalSystemSpec,
    free_system,
    fundamental_solution,
    load_spec,
    monodromy,
    random_system,
)
from .errors import LresError
from .nevanlinna import (
    ParameterPair,
    check_nevanlinna,
    l_resolvent_direct,
    l_resolvent_from_AB,
    l_resolvent_left,
    negative_squares,
)
from .resolvent_matrix import left_resolvent_matrix, preresolvent, right_resolvent_matrix

__all__ = [
    "CanonicalSystemSpec",
    "LresError",
    "ParameterPair",
    "canonical_resolvent_apply",
    "check_nevanlinna",
    "free_system",
    "fundamental_solution",
    "gamma_adjoint_apply",
    "generalized_resolvent_apply",
    "l_resolvent_direct",
    "l_resolvent_from_AB",
    "l_resolvent_left",
    "left_resolvent_matrix",
    "load_spec",
    "monodromy",
    "negative_squares",
    "preresolvent",
    "random_system",
    "right_resolvent_matrix",
    "weyl",
    "weyl_function",
]
