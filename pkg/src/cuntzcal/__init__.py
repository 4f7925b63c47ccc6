"""Exact symbolic calculus for the Cuntz algebras O_n.

Subpackages cover normal-ordered arithmetic in O_n (algebra), the
endomorphism calculus lambda_u with its cocycle machinery (endo), decision
procedures for permutative endomorphisms and automorphisms (permdecide),
and exhaustive/orbit censuses of permutation-induced automorphisms (census).
"""

from .words import Word, enumerate_words, word_from_index, word_index
from .algebra import (
    AlgebraElement,
    Classification,
    Coefficient,
    NormalTerm,
    classify,
    element_from_json,
    element_to_json,
    format_element,
    parse_element,
)
from .endo import (
    CycleEvidence,
    DiagonalVerdict,
    DualMapTable,
    Endo,
    constancy_iteration,
    diagonal_aut_sn,
    fusion_compose,
    inner_witness,
    phi_apply,
)
from .permdecide import (
    AutVerdict,
    PermUnitary,
    ReducedMapFamily,
    TreeDiagnostic,
    decide_automorphism,
    decide_diagonal,
    dual_maps,
    flip_flop,
    fusion_table,
    out_equivalent,
    power_order,
    stabilization_bound,
    tree_check,
)
from .census import (
    CensusReport,
    OrbitRep,
    ShapeRecord,
    anchor_tree,
    brute_census,
    class_representatives,
    orbit_census,
    orbit_representatives,
    rooted_shapes,
    shape_admits_endo,
    shape_census,
    shape_leaves,
    tree_automorphisms,
)

__all__ = [
    "Word",
    "enumerate_words",
    "word_from_index",
    "word_index",
    "AlgebraElement",
    "Classification",
    "Coefficient",
    "NormalTerm",
    "classify",
    "element_from_json",
    "element_to_json",
    "format_element",
    "parse_element",
    "CycleEvidence",
    "DiagonalVerdict",
    "DualMapTable",
    "Endo",
    "constancy_iteration",
    "diagonal_aut_sn",
    "fusion_compose",
    "inner_witness",
    "phi_apply",
    "AutVerdict",
    "PermUnitary",
    "ReducedMapFamily",
    "TreeDiagnostic",
    "decide_automorphism",
    "decide_diagonal",
    "dual_maps",
    "flip_flop",
    "fusion_table",
    "out_equivalent",
    "power_order",
    "stabilization_bound",
    "tree_check",
    "CensusReport",
    "OrbitRep",
    "ShapeRecord",
    "anchor_tree",
    "brute_census",
    "class_representatives",
    "orbit_census",
    "orbit_representatives",
    "rooted_shapes",
    "shape_admits_endo",
    "shape_census",
    "shape_leaves",
    "tree_automorphisms",
]
