"""Post-hoc geometric metrics on concrete layouts.

All quantities here are recomputed from placement geometry alone, so they
stay valid for hand-edited layouts that never went through the solver.
Coordinates within `tol` of each other count as coinciding; the default
tolerance is relative to the canvas extent to stay unit-agnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import LayoutProblem, LayoutSolution, PlacedElement


class ElementSetMismatch(KeyError):
    """Two solutions cover different element sets."""


@dataclass(frozen=True)
class DistanceSignature:
    gamma: int
    pi: int


@dataclass(frozen=True)
class OptimalityRef:
    """Reference objective values: the best (lowest) and worst composite."""

    best: float
    worst: float


@dataclass(frozen=True)
class ScoreReport:
    grid_lines: int
    rect_cases: int
    gamma: int
    pi: int
    epsilon: int
    objective: float
    optimality_pct: Optional[float]


def _cluster_count(coords: Sequence[float], tol: float) -> int:
    if not coords:
        return 0
    vals = sorted(coords)
    count = 1
    anchor = vals[0]
    for v in vals[1:]:
        if v - anchor > tol:
            count += 1
            anchor = v
    return count


def _default_tol(placements: Sequence[PlacedElement]) -> float:
    extent = max(max(pl.r for pl in placements), max(pl.b for pl in placements), 1.0)
    return 1e-6 * extent


def grid_line_count_of(placements: Sequence[PlacedElement], tol: float) -> int:
    xs = [pl.l for pl in placements] + [pl.r for pl in placements]
    ys = [pl.t for pl in placements] + [pl.b for pl in placements]
    return _cluster_count(xs, tol) + _cluster_count(ys, tol)


def grid_line_count(s: LayoutSolution, tol: Optional[float] = None) -> int:
    """Distinct x-coordinates hosting any L/R edge plus distinct y-coordinates
    hosting any T/B edge; vertical lines serve both L and R edges."""
    pls = s.placements
    return grid_line_count_of(pls, tol if tol is not None else _default_tol(pls))


def family_group_counts_of(placements: Sequence[PlacedElement], tol: float) -> dict[str, int]:
    return {
        "LG": _cluster_count([pl.l for pl in placements], tol),
        "RG": _cluster_count([pl.r for pl in placements], tol),
        "TG": _cluster_count([pl.t for pl in placements], tol),
        "BG": _cluster_count([pl.b for pl in placements], tol),
    }


def epsilon_of(placements: Sequence[PlacedElement], tol: float) -> int:
    """Used alignment groups over the four edge families (a geometric lower
    bound on any model assignment producing this layout)."""
    return sum(family_group_counts_of(placements, tol).values())


def adherence_cases_of(placements: Sequence[PlacedElement], tol: float) -> int:
    sro_l = min(pl.l for pl in placements)
    sro_r = max(pl.r for pl in placements)
    sro_t = min(pl.t for pl in placements)
    sro_b = max(pl.b for pl in placements)
    cases = 0
    for pl in placements:
        cases += pl.l - sro_l <= tol
        cases += sro_r - pl.r <= tol
        cases += pl.t - sro_t <= tol
        cases += sro_b - pl.b <= tol
    return int(cases)


def signature_of(placements: Sequence[PlacedElement], tol: float) -> DistanceSignature:
    gamma = 0
    pi = 0
    for a in placements:
        for b in placements:
            if a.id == b.id:
                continue
            if a.b <= b.t + tol:
                gamma += 1
            if a.r <= b.l + tol:
                pi += 1
    return DistanceSignature(gamma=gamma, pi=pi)


def signature(s: LayoutSolution, tol: Optional[float] = None) -> DistanceSignature:
    pls = s.placements
    return signature_of(pls, tol if tol is not None else _default_tol(pls))


def distance(a: LayoutSolution, b: LayoutSolution,
             tol: Optional[float] = None) -> int:
    """|dGamma| + |dPi| between two layouts of the same element set."""
    if sorted(pl.id for pl in a.placements) != sorted(pl.id for pl in b.placements):
        raise ElementSetMismatch("solutions cover different element sets")
    sa = signature(a, tol)
    sb = signature(b, tol)
    return abs(sa.gamma - sb.gamma) + abs(sa.pi - sb.pi)


def traversal_cost_of(p: LayoutProblem, placements: Sequence[PlacedElement]) -> float:
    by_id = {pl.id: pl for pl in placements}
    total = 0.0
    for tp in p.traversal:
        a, b = by_id[tp.a], by_id[tp.b]
        total += tp.weight * (abs(a.cx - b.cx) + abs(a.cy - b.cy))
    return total


def composite_objective_of(p: LayoutProblem, placements: Sequence[PlacedElement]) -> float:
    """The weighted composite objective, evaluated from geometry."""
    tol = p.tolerance()
    w = p.weights
    total = w.alignment * epsilon_of(placements, tol)
    total -= w.rectangularity * adherence_cases_of(placements, tol)
    total += w.traversal * traversal_cost_of(p, placements)
    return float(total)


def optimality(p: LayoutProblem, s: LayoutSolution, ref: OptimalityRef) -> float:
    """Min-max normalised composite objective as a percentage.

    100 maps to the best-known objective, 0 to the worst; the result is
    clamped to [0, 100].  A degenerate reference range (worst == best, the
    problem has a unique layout quality) scores 100.
    """
    f = composite_objective_of(p, s.placements)
    span = ref.worst - ref.best
    if span <= 1e-12 * max(1.0, abs(ref.worst), abs(ref.best)):
        return 100.0
    pct = 100.0 * (ref.worst - f) / span
    return float(min(100.0, max(0.0, pct)))


def score(p: LayoutProblem, s: LayoutSolution,
          ref: Optional[OptimalityRef] = None) -> ScoreReport:
    tol = p.tolerance()
    sig = signature_of(s.placements, tol)
    return ScoreReport(
        grid_lines=grid_line_count_of(s.placements, tol),
        rect_cases=adherence_cases_of(s.placements, tol),
        gamma=sig.gamma,
        pi=sig.pi,
        epsilon=epsilon_of(s.placements, tol),
        objective=composite_objective_of(p, s.placements),
        optimality_pct=optimality(p, s, ref) if ref is not None else None,
    )
