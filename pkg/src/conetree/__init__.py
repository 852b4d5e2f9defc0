"""Finite meet-trees whose open cones carry models of a pluggable base theory."""
from .amalgam import amalgamate, amalgamate_one_generator, jep
from .baseclass import (
    BASES, BaseClass, EqualityBase, Eq2Base, ExtensionDescriptor, GraphBase,
    base_amalgamate, base_check, base_extensions, base_joint_embed, get_base, register_base,
)
from .core import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .generic import (
    CoverageReport, GenericBuilder, TypeDescriptor, back_and_forth, build_generic,
    check_extension_property, count_1types, descriptor_of, enumerate_1types, realize_type,
)
from .witness import (
    BranchTypeRecord, InpWitnessReport, IctWitness, ShatterWitness, Skeleton,
    branch_type, check_indiscernible, ict_pattern, inp_witness, r_prime, reconstruct,
    shatter_witness, type_growth_profile,
)

__version__ = "0.1.0"
