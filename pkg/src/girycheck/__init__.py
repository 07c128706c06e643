"""Exact checks for barycenter operators on convex metric spaces.

Everything runs on `fractions.Fraction` (plus a single absorbing infinity),
so every verdict in this package is an exact computation, not a float
comparison.  The central objects:

- finitely supported measures over declared spaces (`measures`),
- convex-space carriers and affine test maps (`spaces`),
- exact optimal transport and metric compatibility checks (`metric_ot`),
- construction and verification of barycenter operators (`algebra`),
- finite set fields and evaluation fields for measure agreement (`fields`).
"""

__version__ = "0.1.0"

from .algebra import (
    AlgebraMap,
    AlgebraReport,
    Rejection,
    build_algebra,
    coseparator_maps,
    counterexample_C,
    full_report,
    induced_structure_check,
    support_condition_check,
    user_algebra,
    verify_coseparator_property,
    verify_mult_law,
    verify_unit_law,
)
from .extvalue import INF, ExtValue, ext_abs_diff, ext_sum, parse_ext
from .fields import (
    SetField,
    agreement_check,
    atoms,
    dyadic_field,
    ev_block,
    ev_field,
    field_join,
    field_leq,
    generate_field,
    same_members,
)
from .measures import (
    FinMeasure,
    MetaMeasure,
    convex_combine_measures,
    dirac,
    dirac_meta,
    expectation_functional,
    map_inner,
    measure_eval,
    mix_meta,
    mu,
    parse_measure,
    pushforward,
    to_text,
)
from .metric_ot import (
    Coupling,
    ExtMetric,
    TransportResult,
    brute_force_wasserstein,
    compat_check_2pt,
    compat_check_4pt,
    default_metric,
    discrete_metric,
    equiv_check,
    extended_abs_metric,
    glued_path_metric,
    l1_metric,
    linf_metric,
    lipschitz_check,
    order_metric,
    product_sum_metric,
    table_metric,
    wasserstein,
)
from .registry import Registry, builtin_registry
from .spaces import (
    AffineMap,
    ConvexSpaceSpec,
    Element,
    Gluing,
    Ideal,
    SpaceKind,
    WeightVector,
    box_space,
    builtin_spaces,
    char_map,
    classify_kind,
    combine,
    combine2,
    compose,
    coseparates,
    discrete_poset,
    enumerate_ideals,
    extended_line_space,
    interval_space,
    is_affine,
    is_ideal,
    labels_space,
    naturals_space,
    pair_element,
    product_space,
    projection,
    semidirect_space,
    simplex_space,
)
from .verdicts import FAIL, PASS, REJECTED, SAMPLED_PASS, Verdict, failed, passed

__all__ = [
    "AffineMap",
    "AlgebraMap",
    "AlgebraReport",
    "ConvexSpaceSpec",
    "Coupling",
    "Element",
    "ExtMetric",
    "ExtValue",
    "FAIL",
    "FinMeasure",
    "Gluing",
    "INF",
    "Ideal",
    "MetaMeasure",
    "PASS",
    "REJECTED",
    "Registry",
    "Rejection",
    "SAMPLED_PASS",
    "SetField",
    "SpaceKind",
    "TransportResult",
    "Verdict",
    "WeightVector",
    "agreement_check",
    "atoms",
    "box_space",
    "brute_force_wasserstein",
    "build_algebra",
    "builtin_registry",
    "builtin_spaces",
    "char_map",
    "classify_kind",
    "combine",
    "combine2",
    "compat_check_2pt",
    "compat_check_4pt",
    "compose",
    "convex_combine_measures",
    "coseparates",
    "coseparator_maps",
    "counterexample_C",
    "default_metric",
    "dirac",
    "dirac_meta",
    "discrete_metric",
    "discrete_poset",
    "dyadic_field",
    "enumerate_ideals",
    "equiv_check",
    "ev_block",
    "ev_field",
    "expectation_functional",
    "ext_abs_diff",
    "ext_sum",
    "extended_abs_metric",
    "extended_line_space",
    "failed",
    "field_join",
    "field_leq",
    "full_report",
    "generate_field",
    "glued_path_metric",
    "induced_structure_check",
    "interval_space",
    "is_affine",
    "is_ideal",
    "l1_metric",
    "labels_space",
    "linf_metric",
    "lipschitz_check",
    "map_inner",
    "measure_eval",
    "mix_meta",
    "mu",
    "naturals_space",
    "order_metric",
    "pair_element",
    "parse_ext",
    "parse_measure",
    "passed",
    "product_space",
    "product_sum_metric",
    "projection",
    "pushforward",
    "same_members",
    "semidirect_space",
    "simplex_space",
    "support_condition_check",
    "table_metric",
    "to_text",
    "user_algebra",
    "verify_coseparator_property",
    "verify_mult_law",
    "verify_unit_law",
    "wasserstein",
]
