from .structure import (
    CONES, EQ, MODES, NEW, TREE_ONLY, UNIVERSAL, SIGNATURES,
    BaseStructure, ConeQuotient, DecoratedStructure, Signature,
    ValidationReport, Violation,
    assemble, closure_set, cone_partition, fresh_name, get_signature,
    meet_closure, register_signature, validate,
)
from .formula import (
    And, Const, Equal, Iff, Implies, Leq, Lt, Meet, Not, Or, Rel, Star, Var,
    FALSE, TRUE, eval_base, eval_qf, free_variables, parse_formula, star,
)
from .codec import canonical, parse_structure, read_structure, serialize_structure, write_structure
from .diagram import one_point_diagram, qf_diagram
