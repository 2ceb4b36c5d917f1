"""Exact billiards in Koch snowflake prefractals on the triangular lattice."""

from .boundary import Prefractal, build_prefractal, first_hit, triangle_count, vertex_census
from .dynamics import (
    BilliardState,
    Orbit,
    Status,
    compatible_basepoint,
    compatible_sequence,
    compute_orbit,
    pair_collapse_check,
    unfold,
)
from .errors import BudgetError, CornerCompatible, DomainError, InvariantViolation
from .formulas import genus, length_formula, length_limit, period_formula
from .lattice import LatticePoint, LatticeVector, Segment
from .ternary import classify, expand, midpoint_set, mc_representation

__all__ = [
    "BilliardState",
    "BudgetError",
    "CornerCompatible",
    "DomainError",
    "InvariantViolation",
    "LatticePoint",
    "LatticeVector",
    "Orbit",
    "Prefractal",
    "Segment",
    "Status",
    "build_prefractal",
    "classify",
    "compatible_basepoint",
    "compatible_sequence",
    "compute_orbit",
    "expand",
    "first_hit",
    "genus",
    "length_formula",
    "length_limit",
    "mc_representation",
    "midpoint_set",
    "pair_collapse_check",
    "period_formula",
    "triangle_count",
    "unfold",
    "vertex_census",
]
