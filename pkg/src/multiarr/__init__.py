"""Exact computations with free and inductively free multiarrangements."""

from .arrangement import (
    Arrangement,
    Flat,
    Hyperplane,
    ParseError,
    addition,
    canonical_key,
    deletion,
    essentialize,
    format_arrangement,
    intersection_lattice,
    localization,
    parse_arrangement,
    product,
    restriction,
    ziegler_multiplicity,
)
from .derivations import (
    Derivation,
    decide_freeness,
    delta_basis,
    euler_multiplicity,
    euler_restriction,
    graded_piece,
    saito_check,
)
from .induction import (
    InductionCertificate,
    format_certificate,
    free_filtration_search,
    parse_certificate,
    search_certificate,
    verify_certificate,
)
from .scalars import CycloScalar

__all__ = [
    "Arrangement", "CycloScalar", "Derivation", "Flat", "Hyperplane", "InductionCertificate",
    "ParseError", "addition", "canonical_key", "decide_freeness", "deletion", "delta_basis",
    "essentialize", "euler_multiplicity", "euler_restriction", "format_arrangement",
    "format_certificate", "free_filtration_search", "graded_piece", "intersection_lattice",
    "localization", "parse_arrangement", "parse_certificate", "product", "restriction",
    "saito_check", "search_certificate", "verify_certificate", "ziegler_multiplicity",
]
