"""Topological structure of spaces of (weighted) composition operators on Fock spaces.

The main entry points are :func:`classify_composition`, :func:`same_component_composition`,
:func:`same_component_weighted`, :func:`build_component_path`,
:func:`separation_certificate` and :func:`closedness_witness`.
"""

from .certify import (closedness_witness, default_dictionary, monomial_tests,
                      op_distance_lower_bound, separation_certificate)
from .errors import (BudgetError, DomainError, FockLabError, InputError,
                     NotBoundedCompatibleError, UnboundedError, UnsupportedMethodError)
from .fock import (FockParams, NormEstimate, NormMethod, SymbolFn, compose_affine, evaluate,
                   fock_norm, kernel, normalized_kernel)
from .homotopy import (Homotopy, Recipe, build_component_path, path_between_constants,
                       path_block_interpolation, path_drop_translation, path_scale_to_constant,
                       path_weight_interpolation, verify_path)
from .operators import (AffineMap, Verdict, VerdictKind, WeightedSymbol, apply,
                        classify_composition, composition, extract_psi_star, normalize,
                        weighted_norm_upper_bound)
from .topology import (b_equivalent, canonical_form, component_key, is_isolated,
                       matrices_equivalent, same_component_composition, same_component_weighted)

__all__ = [name for name in dir() if not name.startswith("_")]
