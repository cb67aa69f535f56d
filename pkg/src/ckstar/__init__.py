"""Decision procedures for constructive master-modality logics, their
transitive extensions, and their classical targets."""

from .relmodel import (
    BiModel,
    ModelViolation,
    PdlModel,
    Relation,
    dump_model,
    load_model,
    rel_compose,
    rel_star,
    restrict_to_infallible,
    validate,
)
from .semantics import (
    falsifying_world,
    pdl_satisfies,
    satisfies,
    satisfies_alt,
    valid_in_model,
)
from .solver import Verdict, decide, fl_closure, pdl_satisfiable, pdl_valid
from .syntax import (
    Formula,
    FragmentTag,
    PdlFormula,
    Program,
    check_fragment,
    expand_diamonds,
    formula_size,
    parse_formula,
    parse_pdl,
    render,
    subformulas,
    variables,
)
from .translate import TranslationEnv, iota, kappa, omega, tau

__version__ = "0.1.0"

__all__ = [
    "BiModel",
    "Formula",
    "FragmentTag",
    "ModelViolation",
    "PdlFormula",
    "PdlModel",
    "Program",
    "Relation",
    "TranslationEnv",
    "Verdict",
    "check_fragment",
    "decide",
    "dump_model",
    "expand_diamonds",
    "falsifying_world",
    "fl_closure",
    "formula_size",
    "iota",
    "kappa",
    "load_model",
    "omega",
    "parse_formula",
    "parse_pdl",
    "pdl_satisfiable",
    "pdl_satisfies",
    "pdl_valid",
    "rel_compose",
    "rel_star",
    "render",
    "restrict_to_infallible",
    "satisfies",
    "satisfies_alt",
    "subformulas",
    "tau",
    "valid_in_model",
    "validate",
    "variables",
]
