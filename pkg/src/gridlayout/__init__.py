"""Grid layout engine: MILP-based packing, alignment and diversification."""

from .model import (
    Canvas,
    Element,
    Group,
    HPref,
    Kind,
    LayoutProblem,
    LayoutSolution,
    ObjectiveWeights,
    PlacedElement,
    Rect,
    SolutionStats,
    TraversalPair,
    Violation,
    VPref,
    validate_problem,
    validate_solution,
)
from .diversifier import (
    Bounds,
    DiversifyConfig,
    InfeasibleProblem,
    TimeBudgetExhausted,
    complete_partial,
    compute_bounds,
    diversify,
    nearby,
    optimality_refs,
    solve_single,
)
from .scoring import DistanceSignature, OptimalityRef, ScoreReport, distance, grid_line_count, optimality, score, signature

__all__ = [
    "Canvas", "Element", "Group", "HPref", "Kind", "LayoutProblem",
    "LayoutSolution", "ObjectiveWeights", "PlacedElement", "Rect",
    "SolutionStats", "TraversalPair", "Violation", "VPref",
    "validate_problem", "validate_solution",
    "Bounds", "DiversifyConfig", "InfeasibleProblem", "TimeBudgetExhausted",
    "complete_partial", "compute_bounds", "diversify", "nearby",
    "optimality_refs", "solve_single",
    "DistanceSignature", "OptimalityRef", "ScoreReport", "distance",
    "grid_line_count", "optimality", "score", "signature",
]
