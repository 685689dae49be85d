"""Domain types for layout problems and solutions, plus well-formedness checks.

Coordinates are real-valued with the origin at the top-left corner of the
canvas: x grows rightwards, y grows downwards.  An element placement is the
quadruple (l, t, r, b) of its edge coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence


class Kind(Enum):
    HEADING = "heading"
    PARAGRAPH = "paragraph"
    IMAGE = "image"
    BUTTON = "button"
    OTHER = "other"


class HPref(Enum):
    NONE = "none"
    LEFT = "left"
    RIGHT = "right"


class VPref(Enum):
    NONE = "none"
    TOP = "top"
    BOTTOM = "bottom"


@dataclass(frozen=True)
class Canvas:
    width: float
    height: float


@dataclass(frozen=True)
class Rect:
    """Fixed rectangle given as left/top corner plus width and height."""

    l: float
    t: float
    w: float
    h: float

    @property
    def r(self) -> float:
        return self.l + self.w

    @property
    def b(self) -> float:
        return self.t + self.h


@dataclass(frozen=True)
class Element:
    id: str
    min_width: float
    max_width: float
    min_height: float
    max_height: float
    kind: Kind = Kind.OTHER
    color: Optional[tuple[int, int, int]] = None
    locked: Optional[Rect] = None
    h_pref: HPref = HPref.NONE
    v_pref: VPref = VPref.NONE


@dataclass(frozen=True)
class Group:
    id: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class TraversalPair:
    a: str
    b: str
    weight: float = 1.0


@dataclass(frozen=True)
class ObjectiveWeights:
    alignment: float = 1.0
    rectangularity: float = 1.0
    traversal: float = 1.0


@dataclass(frozen=True)
class LayoutProblem:
    canvas: Canvas
    elements: tuple[Element, ...]
    groups: tuple[Group, ...] = ()
    traversal: tuple[TraversalPair, ...] = ()
    gutter: float = 0.0
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)

    def element(self, eid: str) -> Element:
        for e in self.elements:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def element_ids(self) -> list[str]:
        return [e.id for e in self.elements]

    def tolerance(self) -> float:
        """Geometric comparison tolerance, relative to the canvas extent."""
        return 1e-6 * max(self.canvas.width, self.canvas.height)

    def with_locks(self, locks: dict[str, Rect]) -> "LayoutProblem":
        """Copy of the problem with the given elements locked in place."""
        elements = tuple(
            replace(e, locked=locks[e.id]) if e.id in locks else e
            for e in self.elements
        )
        return replace(self, elements=elements)


@dataclass(frozen=True)
class PlacedElement:
    id: str
    l: float
    t: float
    r: float
    b: float

    @property
    def width(self) -> float:
        return self.r - self.l

    @property
    def height(self) -> float:
        return self.b - self.t

    @property
    def cx(self) -> float:
        return 0.5 * (self.l + self.r)

    @property
    def cy(self) -> float:
        return 0.5 * (self.t + self.b)


@dataclass(frozen=True)
class SolutionStats:
    grid_lines: int
    rect_cases: int
    gamma: int
    pi: int
    objective: float
    optimality_pct: Optional[float] = None


@dataclass(frozen=True)
class LayoutSolution:
    placements: tuple[PlacedElement, ...]
    stats: SolutionStats

    def placement(self, eid: str) -> PlacedElement:
        for pl in self.placements:
            if pl.id == eid:
                return pl
        raise KeyError(eid)


@dataclass(frozen=True)
class Violation:
    """A named well-formedness breach; violations are data, not exceptions."""

    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}[{self.subject}]: {self.message}"


class UnknownElementId(KeyError):
    """Solution and problem disagree on the element id set."""


def validate_problem(p: LayoutProblem) -> list[Violation]:
    out: list[Violation] = []
    cw, ch = p.canvas.width, p.canvas.height
    if cw <= 0 or ch <= 0:
        out.append(Violation("InvalidCanvas", "canvas", f"canvas {cw}x{ch} must be positive"))
        return out
    if not p.elements:
        out.append(Violation("NoElements", "elements", "problem has no elements"))
    if p.gutter < 0:
        out.append(Violation("NegativeGutter", "gutter", f"gutter {p.gutter} < 0"))
    for name in ("alignment", "rectangularity", "traversal"):
        if getattr(p.weights, name) < 0:
            out.append(Violation("NegativeWeight", f"weights.{name}", "objective weights must be nonnegative"))

    seen: set[str] = set()
    for e in p.elements:
        if not e.id:
            out.append(Violation("EmptyId", "element", "element id must be non-empty"))
        if e.id in seen:
            out.append(Violation("DuplicateId", e.id, "element id is not unique"))
        seen.add(e.id)
        if not (0 < e.min_width <= e.max_width):
            out.append(Violation("SizeBoundsInvalid", e.id, f"width bounds ({e.min_width}, {e.max_width}) invalid"))
        if not (0 < e.min_height <= e.max_height):
            out.append(Violation("SizeBoundsInvalid", e.id, f"height bounds ({e.min_height}, {e.max_height}) invalid"))
        if e.min_width > cw or e.max_width > cw:
            out.append(Violation("SizeExceedsCanvas", e.id, f"width bounds exceed canvas width {cw}"))
        if e.min_height > ch or e.max_height > ch:
            out.append(Violation("SizeExceedsCanvas", e.id, f"height bounds exceed canvas height {ch}"))
        if e.locked is not None:
            lk = e.locked
            if lk.l < 0 or lk.t < 0 or lk.r > cw or lk.b > ch:
                out.append(Violation("LockOutsideCanvas", e.id, f"locked rect {lk} outside canvas"))
            if not (e.min_width <= lk.w <= e.max_width and e.min_height <= lk.h <= e.max_height):
                out.append(Violation("LockSizeMismatch", e.id, f"locked size {lk.w}x{lk.h} violates size bounds"))

    ids = set(p.element_ids())
    member_sets: list[tuple[str, frozenset[str]]] = []
    for g in p.groups:
        members = frozenset(g.members)
        if len(members) < 2:
            out.append(Violation("GroupTooSmall", g.id, "a group needs at least two members"))
        unknown = members - ids
        if unknown:
            out.append(Violation("UnknownGroupMember", g.id, f"unknown members {sorted(unknown)}"))
        member_sets.append((g.id, members))
    for i, (gi, mi) in enumerate(member_sets):
        for gj, mj in member_sets[i + 1:]:
            if mi <= mj or mj <= mi:
                out.append(Violation("NestedGroups", f"{gi},{gj}", "nested groups are rejected"))

    for tp in p.traversal:
        if tp.a == tp.b:
            out.append(Violation("SelfTraversal", tp.a, "traversal pair endpoints must differ"))
        for end in (tp.a, tp.b):
            if end not in ids:
                out.append(Violation("UnknownTraversalElement", end, "traversal endpoint not in problem"))
        if tp.weight < 0:
            out.append(Violation("NegativeWeight", f"{tp.a}-{tp.b}", f"traversal weight {tp.weight} < 0"))

    min_area = sum(e.min_width * e.min_height for e in p.elements)
    if min_area > cw * ch:
        out.append(Violation("AreaInfeasible", "elements", f"total min area {min_area} exceeds canvas area {cw * ch}"))
    return out


def _axis_gaps(a: PlacedElement, b: PlacedElement) -> tuple[float, float]:
    """Signed horizontal/vertical gaps; negative means the axis intervals overlap."""
    hgap = max(b.l - a.r, a.l - b.r)
    vgap = max(b.t - a.b, a.t - b.b)
    return hgap, vgap


def validate_solution(p: LayoutProblem, s: LayoutSolution, tol: Optional[float] = None) -> list[Violation]:
    """Full geometric re-check of a solution against its problem.

    Overlap means shared interior area: touching edges (or separation of
    exactly the gutter) is legal.  Preference checks mirror the relative-order
    semantics used when building the optimisation model: an element breaches
    another's "top" preference only when it lies strictly above it.
    """
    if tol is None:
        tol = p.tolerance()
    sol_ids = [pl.id for pl in s.placements]
    prob_ids = p.element_ids()
    if sorted(sol_ids) != sorted(prob_ids):
        raise UnknownElementId(
            f"solution ids {sorted(sol_ids)} do not match problem ids {sorted(prob_ids)}"
        )

    out: list[Violation] = []
    cw, ch = p.canvas.width, p.canvas.height
    by_id = {pl.id: pl for pl in s.placements}

    for pl in s.placements:
        e = p.element(pl.id)
        if pl.r - pl.l <= 0 or pl.b - pl.t <= 0:
            out.append(Violation("DegenerateRect", pl.id, f"rectangle {pl} has nonpositive extent"))
        if pl.l < -tol or pl.t < -tol or pl.r > cw + tol or pl.b > ch + tol:
            out.append(Violation("Overflow", pl.id, f"rectangle {pl} leaves the canvas"))
        if not (e.min_width - tol <= pl.width <= e.max_width + tol):
            out.append(Violation("SizeBoundViolation", pl.id, f"width {pl.width} outside [{e.min_width}, {e.max_width}]"))
        if not (e.min_height - tol <= pl.height <= e.max_height + tol):
            out.append(Violation("SizeBoundViolation", pl.id, f"height {pl.height} outside [{e.min_height}, {e.max_height}]"))
        if e.locked is not None:
            lk = e.locked
            if (abs(pl.l - lk.l) > tol or abs(pl.t - lk.t) > tol
                    or abs(pl.r - lk.r) > tol or abs(pl.b - lk.b) > tol):
                out.append(Violation("LockViolation", pl.id, f"placement {pl} moved from locked rect {lk}"))

    n = len(s.placements)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = s.placements[i], s.placements[j]
            hgap, vgap = _axis_gaps(a, b)
            if hgap < -tol and vgap < -tol:
                out.append(Violation("Overlap", f"{a.id},{b.id}", f"rectangles share interior (gaps {hgap:.3g}, {vgap:.3g})"))
            elif max(hgap, vgap) < p.gutter - tol:
                out.append(Violation("InsufficientSpacing", f"{a.id},{b.id}", f"separation {max(hgap, vgap):.3g} below gutter {p.gutter}"))

    for e in p.elements:
        pl = by_id[e.id]
        for other in p.elements:
            if other.id == e.id:
                continue
            po = by_id[other.id]
            if e.v_pref is VPref.TOP and po.b < pl.t - tol:
                out.append(Violation("PrefViolation", e.id, f"{other.id} lies strictly above top-preferring {e.id}"))
            if e.v_pref is VPref.BOTTOM and po.t > pl.b + tol:
                out.append(Violation("PrefViolation", e.id, f"{other.id} lies strictly below bottom-preferring {e.id}"))
            if e.h_pref is HPref.LEFT and po.r < pl.l - tol:
                out.append(Violation("PrefViolation", e.id, f"{other.id} lies strictly left of left-preferring {e.id}"))
            if e.h_pref is HPref.RIGHT and po.l > pl.r + tol:
                out.append(Violation("PrefViolation", e.id, f"{other.id} lies strictly right of right-preferring {e.id}"))

    return out


def group_bbox(s: LayoutSolution, members: Sequence[str]) -> Rect:
    pls = [s.placement(m) for m in members]
    l = min(pl.l for pl in pls)
    t = min(pl.t for pl in pls)
    r = max(pl.r for pl in pls)
    b = max(pl.b for pl in pls)
    return Rect(l, t, r - l, b - t)
