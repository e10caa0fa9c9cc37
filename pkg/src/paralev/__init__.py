"""paralev: exact character-level verifier for parahoric Levi quotients of GSp(4,q).

Everything is computed from first principles over small finite fields:
matrix groups are fully enumerated, character tables come out of the
Dixon-Schneider class-algebra method in Z/l, and parabolic induction /
Harish-Chandra restriction of class functions is exact integer arithmetic.
"""

__version__ = "0.1.0"

from .algebra import (
    AlgebraError,
    AdditiveChar,
    FieldSpec,
    MultChar,
    build_field,
    quadratic_char,
    trivial_char,
)
from .groups import (
    ConjClasses,
    GroupError,
    GroupHandle,
    GroupTooLargeError,
    Hom,
    conjugacy_classes,
    fiber_product_det,
    generate_group,
    subgroup,
)
from .characters import (
    CharacterTable,
    ClassFunction,
    DecompositionError,
    ModulusSpec,
    decompose,
    dixon_table,
    inner_product,
    pick_modulus,
)

__all__ = [
    "AlgebraError",
    "AdditiveChar",
    "FieldSpec",
    "MultChar",
    "build_field",
    "quadratic_char",
    "trivial_char",
    "ConjClasses",
    "GroupError",
    "GroupHandle",
    "GroupTooLargeError",
    "Hom",
    "conjugacy_classes",
    "fiber_product_det",
    "generate_group",
    "subgroup",
    "CharacterTable",
    "ClassFunction",
    "DecompositionError",
    "ModulusSpec",
    "decompose",
    "dixon_table",
    "inner_product",
    "pick_modulus",
    "__version__",
]
