"""Exact lattice models for the affine Grassmannian of the ramified triality group.

Coefficients live in F_p (p = 1 mod 3) or Q(omega); series are Laurent jets
in u with t = u^3, and the Galois generator acts by u -> xi u.
"""

from .errors import IndeterminateValuation, MalformedInput, MathFailure, PrecisionError, TrikitError
from .field import Field, make_field
from .series import DEFAULT_PREC, LaurentJet, jet
from .linalg import JetMatrix, det, inverse
from .algebra import AlgebraElement, derive_gram, twisted_mul, validate_axioms
from .lattice import Lattice, check_all, lattice_equal
from .group import (check_triple, exp_nilpotent, is_member, random_group_element, torus_element,
                    triality_lift, derivation_basis)
from .normalize import normalize_lattice, twisted_conjugacy_solve

__version__ = "0.1.0"

__all__ = [
    "TrikitError", "MalformedInput", "MathFailure", "PrecisionError", "IndeterminateValuation",
    "Field", "make_field", "LaurentJet", "jet", "DEFAULT_PREC", "JetMatrix", "det", "inverse",
    "AlgebraElement", "derive_gram", "twisted_mul", "validate_axioms", "Lattice", "check_all",
    "lattice_equal", "check_triple", "exp_nilpotent", "is_member", "random_group_element",
    "torus_element", "triality_lift", "derivation_basis", "normalize_lattice",
    "twisted_conjugacy_solve",
]
