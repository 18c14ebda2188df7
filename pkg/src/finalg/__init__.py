"""Finite universal algebra toolkit: operation tables, congruences and
reflexive admissible relations, free algebras, Maltsev-condition term
searches, and alternating-composition identity checking."""

from .core import (
    Algebra,
    Operation,
    apply,
    direct_product,
    eval_term,
    make_algebra,
    make_operation,
    subuniverse_closure,
    term_to_str,
)
from .errors import InputError, ResourceError
from .relations import (
    BinRel,
    admissible_closure,
    all_congruences,
    compose,
    compose_alt,
    congruence_closure,
    congruence_lattice,
    converse,
    is_admissible,
    is_congruence,
    is_tolerance,
    meet,
    min_alternation,
    tolerance_closure,
    transitive_closure,
)
from .dsl import check_inclusion, eval_expr, parse_roles, parse_statement
from .lattice import baker_instance, c2_generator, chain, reduct
from .variety import (
    absorption_check,
    arithmeticity_probe,
    classify_boolean_reduct,
    find_term,
    free_algebra,
    modularity_level,
    spectrum,
    variety_congruence_check,
    variety_relation_check,
)

__version__ = "0.1.0"
