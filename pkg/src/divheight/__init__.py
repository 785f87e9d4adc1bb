"""Certified canonical heights of divisors and points under endomorphisms of P^N over Q."""

from .heights import (
    canonical_height_divisor,
    canonical_height_point,
    critical_height,
    error_budget,
    philippon_height,
    theorem1_check,
    weil_height_map,
)
from .local import INFINITY, Place, green_pairing, green_pairing_sum, mahler_bracket, point_escape_rate
from .poly import HomogeneousForm, PolyMap, parse_form, parse_map, parse_point
from .resultant import macaulay_resultant, push_forward

__version__ = "0.1.0"

__all__ = [
    "HomogeneousForm",
    "INFINITY",
    "Place",
    "PolyMap",
    "canonical_height_divisor",
    "canonical_height_point",
    "critical_height",
    "error_budget",
    "green_pairing",
    "green_pairing_sum",
    "macaulay_resultant",
    "mahler_bracket",
    "parse_form",
    "parse_map",
    "parse_point",
    "philippon_height",
    "point_escape_rate",
    "push_forward",
    "theorem1_check",
    "weil_height_map",
]
