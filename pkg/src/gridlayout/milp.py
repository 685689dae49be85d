"""Translate a LayoutProblem into an abstract MILP instance.

The core model uses continuous edge variables L, R, T, B (plus W = R - L and
H = B - T) per element, and two families of relative-order binaries per
ordered element pair: above(e, o) and before(e, o).  Non-overlap is enforced
by requiring at least one (and at most two) of the four relations per pair,
with big-M rows linking the binaries to the edge geometry.

On top of the core skeleton the builder can add alignment groups (four edge
families, each with candidate shared-value groups and assignment binaries),
a smallest-rectangular-outline model with adherence rewards, group
contiguity boxes, placement preferences, and L1 traversal distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from . import scoring
from .model import (
    HPref,
    LayoutProblem,
    LayoutSolution,
    PlacedElement,
    SolutionStats,
    VPref,
)
from .simplex import EQ, GE, LE, LpProblem


class VarKind(Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(Enum):
    LE = "<="
    EQ = "="
    GE = ">="


_SENSE_TO_INT = {Sense.LE: LE, Sense.EQ: EQ, Sense.GE: GE}

FAMILIES = ("LG", "RG", "TG", "BG")
_FAMILY_EDGE = {"LG": "L", "RG": "R", "TG": "T", "BG": "B"}
_FAMILY_AXIS = {"LG": "w", "RG": "w", "TG": "h", "BG": "h"}
SIDES = ("l", "r", "t", "b")
_SIDE_EDGE = {"l": "L", "r": "R", "t": "T", "b": "B"}


class InfeasibleLock(ValueError):
    """A locked rectangle contradicts canvas or size bounds."""


class UnknownHandle(KeyError):
    """set_objective was asked for a term whose handles were never built."""


@dataclass
class VarRef:
    index: int
    name: str
    kind: VarKind
    lower: float
    upper: float
    category: str = ""


@dataclass(frozen=True)
class LinearConstraint:
    cid: int
    name: str
    terms: tuple[tuple[float, VarRef], ...]
    sense: Sense
    rhs: float


@dataclass
class ConstraintHandle:
    """Removable bundle of constraints; dropping it restores the instance."""

    cids: tuple[int, ...]
    _inst: "MilpInstance"

    def remove(self) -> None:
        self._inst.remove_constraints(self.cids)


@dataclass
class AlignmentHandles:
    x: dict[tuple[str, str, int], VarRef]
    u: dict[str, list[VarRef]]
    values: dict[str, list[VarRef]]

    @property
    def epsilon_vars(self) -> list[VarRef]:
        return [v for fam in FAMILIES for v in self.u[fam]]


@dataclass
class RectHandles:
    sro: dict[str, VarRef]
    pick: dict[tuple[str, str], VarRef]
    adherence: dict[tuple[str, str], VarRef]

    @property
    def adherence_vars(self) -> list[VarRef]:
        return list(self.adherence.values())


@dataclass
class TraversalHandle:
    terms: list[tuple[float, VarRef]]


@dataclass
class BuildHandles:
    alignment: Optional[AlignmentHandles] = None
    rect: Optional[RectHandles] = None
    traversal: Optional[TraversalHandle] = None


class ObjectiveMode(Enum):
    COMPOSITE = "composite"
    MIN_EPSILON = "min_epsilon"
    MAX_RECT = "max_rect"
    MAX_GAMMA = "max_gamma"
    MIN_GAMMA = "min_gamma"
    MAX_PI = "max_pi"
    MIN_PI = "min_pi"


class MilpInstance:
    def __init__(self, problem: LayoutProblem):
        self.problem = problem
        self.vars: list[VarRef] = []
        self.var_map: dict[tuple, VarRef] = {}
        self._constraints: dict[int, LinearConstraint] = {}
        self._next_cid = 0
        self.objective_sense: str = "min"
        self.objective: dict[int, float] = {}
        self.has_alignment = False
        self.has_rect = False

    # -- construction --------------------------------------------------------

    def add_var(self, key: tuple, name: str, kind: VarKind,
                lower: float, upper: float, category: str) -> VarRef:
        if kind is VarKind.BINARY and not (0.0 <= lower and upper <= 1.0):
            raise ValueError(f"binary variable {name} with bounds ({lower}, {upper})")
        ref = VarRef(len(self.vars), name, kind, float(lower), float(upper), category)
        self.vars.append(ref)
        if key in self.var_map:
            raise ValueError(f"duplicate variable key {key}")
        self.var_map[key] = ref
        return ref

    def var(self, *key) -> VarRef:
        return self.var_map[tuple(key)]

    def add_constraint(self, terms: Iterable[tuple[float, VarRef]], sense: Sense,
                       rhs: float, name: str = "") -> int:
        terms = tuple((float(c), v) for c, v in terms if c != 0.0)
        if not terms:
            raise ValueError(f"constraint {name!r} has no terms")
        if not all(math.isfinite(c) for c, _ in terms) or not math.isfinite(rhs):
            raise ValueError(f"constraint {name!r} has non-finite data")
        cid = self._next_cid
        self._next_cid += 1
        self._constraints[cid] = LinearConstraint(cid, name, terms, sense, float(rhs))
        return cid

    def remove_constraints(self, cids: Iterable[int]) -> None:
        for cid in cids:
            self._constraints.pop(cid, None)

    def set_rhs(self, cid: int, rhs: float) -> None:
        """Change one constraint's right-hand side in place.

        The row structure stays identical, which lets a solver session keep
        its factorised basis warm across re-solves.
        """
        con = self._constraints[cid]
        self._constraints[cid] = LinearConstraint(con.cid, con.name, con.terms,
                                                  con.sense, float(rhs))

    @property
    def constraints(self) -> list[LinearConstraint]:
        return list(self._constraints.values())

    def set_objective_terms(self, sense: str, terms: dict[int, float]) -> None:
        assert sense in ("min", "max")
        self.objective_sense = sense
        self.objective = dict(terms)

    # -- queries --------------------------------------------------------------

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for v in self.vars:
            out[v.category] = out.get(v.category, 0) + 1
        return out

    def binary_indices(self) -> np.ndarray:
        return np.array([v.index for v in self.vars if v.kind is VarKind.BINARY], dtype=int)

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([v.lower for v in self.vars])
        ub = np.array([v.upper for v in self.vars])
        return lb, ub

    def objective_vector(self) -> "np.ndarray":
        c = np.zeros(len(self.vars))
        for idx, coef in self.objective.items():
            c[idx] = coef if self.objective_sense == "min" else -coef
        return c

    def rhs_vector(self) -> "np.ndarray":
        return np.array([c.rhs for c in self.constraints])

    def to_lp(self, relax_integrality: bool = True) -> LpProblem:
        n = len(self.vars)
        cons = self.constraints
        m = len(cons)
        data, rows, cols = [], [], []
        senses = np.empty(m, dtype=int)
        b = np.empty(m)
        for i, con in enumerate(cons):
            senses[i] = _SENSE_TO_INT[con.sense]
            b[i] = con.rhs
            for coef, var in con.terms:
                data.append(coef)
                rows.append(i)
                cols.append(var.index)
        a = sp.csc_matrix((data, (rows, cols)), shape=(m, n))
        lb, ub = self.bounds_arrays()
        c = np.zeros(n)
        for idx, coef in self.objective.items():
            c[idx] = coef if self.objective_sense == "min" else -coef
        return LpProblem(c=c, a=a, senses=senses, b=b, lb=lb, ub=ub)

    def declared_objective(self, values: np.ndarray) -> float:
        total = sum(coef * values[idx] for idx, coef in self.objective.items())
        return float(total)


# -- core model ---------------------------------------------------------------


def build_core(p: LayoutProblem) -> MilpInstance:
    inst = MilpInstance(p)
    cw, ch, g = p.canvas.width, p.canvas.height, p.gutter
    mv = ch + g  # vertical big-M; the gutter widens what a relaxed row must allow
    mh = cw + g

    for e in p.elements:
        if e.locked is not None:
            lk = e.locked
            if lk.l < 0 or lk.t < 0 or lk.r > cw or lk.b > ch:
                raise InfeasibleLock(f"{e.id}: locked rect outside canvas")
            if not (e.min_width <= lk.w <= e.max_width and e.min_height <= lk.h <= e.max_height):
                raise InfeasibleLock(f"{e.id}: locked size violates bounds")

    for e in p.elements:
        eid = e.id
        inst.add_var(("L", eid), f"L({eid})", VarKind.CONTINUOUS, 0.0, cw - e.min_width, "geometric")
        inst.add_var(("R", eid), f"R({eid})", VarKind.CONTINUOUS, e.min_width, cw, "geometric")
        inst.add_var(("T", eid), f"T({eid})", VarKind.CONTINUOUS, 0.0, ch - e.min_height, "geometric")
        inst.add_var(("B", eid), f"B({eid})", VarKind.CONTINUOUS, e.min_height, ch, "geometric")
        inst.add_var(("W", eid), f"W({eid})", VarKind.CONTINUOUS, e.min_width, e.max_width, "geometric")
        inst.add_var(("H", eid), f"H({eid})", VarKind.CONTINUOUS, e.min_height, e.max_height, "geometric")

    ids = p.element_ids()
    for a in ids:
        for b in ids:
            if a == b:
                continue
            inst.add_var(("above", a, b), f"above({a},{b})", VarKind.BINARY, 0.0, 1.0, "pair_binary")
    for a in ids:
        for b in ids:
            if a == b:
                continue
            inst.add_var(("before", a, b), f"before({a},{b})", VarKind.BINARY, 0.0, 1.0, "pair_binary")

    for e in p.elements:
        eid = e.id
        inst.add_constraint(
            [(1.0, inst.var("R", eid)), (-1.0, inst.var("L", eid)), (-1.0, inst.var("W", eid))],
            Sense.EQ, 0.0, f"wdef({eid})")
        inst.add_constraint(
            [(1.0, inst.var("B", eid)), (-1.0, inst.var("T", eid)), (-1.0, inst.var("H", eid))],
            Sense.EQ, 0.0, f"hdef({eid})")
        if e.locked is not None:
            lk = e.locked
            for role, val in (("L", lk.l), ("T", lk.t), ("R", lk.r), ("B", lk.b)):
                v = inst.var(role, eid)
                inst.add_constraint([(1.0, v)], Sense.EQ, val, f"lock{role}({eid})")
                v.lower = max(v.lower, val)
                v.upper = min(v.upper, val)

    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            if a == b:
                continue
            s_ab = inst.var("above", a, b)
            s_ba = inst.var("above", b, a)
            l_ab = inst.var("before", a, b)
            l_ba = inst.var("before", b, a)
            four = [(1.0, s_ab), (1.0, s_ba), (1.0, l_ab), (1.0, l_ba)]
            # One side of the 1 <= sum <= 2 range per ordered pair.
            if i < j:
                inst.add_constraint(four, Sense.GE, 1.0, f"pair_lo({a},{b})")
            else:
                inst.add_constraint(four, Sense.LE, 2.0, f"pair_hi({a},{b})")
            inst.add_constraint(
                [(1.0, inst.var("T", b)), (-1.0, inst.var("B", a)), (-mv, s_ab)],
                Sense.GE, g - mv, f"sep_v({a},{b})")
            inst.add_constraint(
                [(1.0, inst.var("L", b)), (-1.0, inst.var("R", a)), (-mh, l_ab)],
                Sense.GE, g - mh, f"sep_h({a},{b})")
            inst.add_constraint(
                [(cw, l_ab), (-1.0, inst.var("L", b)), (1.0, inst.var("R", a))],
                Sense.GE, 0.0, f"force_h({a},{b})")
            inst.add_constraint(
                [(ch, s_ab), (-1.0, inst.var("T", b)), (1.0, inst.var("B", a))],
                Sense.GE, 0.0, f"force_v({a},{b})")

    _add_order_cuts(inst, ids)
    inst.set_objective_terms("min", {})
    return inst


def _add_order_cuts(inst: MilpInstance, ids: list[str]) -> None:
    """Valid inequalities on the relation binaries.

    A pair cannot be mutually above/before (the geometry contradicts itself),
    and both relations are transitive because the forcing rows propagate any
    strict edge ordering.  Neither cut removes an integer-feasible layout;
    they exist to tighten the relaxation.  Transitivity rows grow cubically
    and are skipped for large inputs.
    """
    n = len(ids)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = ids[i], ids[j]
            for role in ("above", "before"):
                inst.add_constraint(
                    [(1.0, inst.var(role, a, b)), (1.0, inst.var(role, b, a))],
                    Sense.LE, 1.0, f"asym_{role}({a},{b})")
    if n > 8:
        return
    for a in ids:
        for b in ids:
            if b == a:
                continue
            for c in ids:
                if c in (a, b):
                    continue
                for role in ("above", "before"):
                    inst.add_constraint(
                        [(1.0, inst.var(role, a, b)), (1.0, inst.var(role, b, c)),
                         (-1.0, inst.var(role, a, c))],
                        Sense.LE, 1.0, f"trans_{role}({a},{b},{c})")


# -- alignment groups ---------------------------------------------------------


def add_alignment(inst: MilpInstance, p: LayoutProblem,
                  strengthen: Optional[bool] = None,
                  chain_cuts: str = "auto") -> AlignmentHandles:
    """Candidate alignment groups per edge family with assignment binaries.

    Group usage is symmetry-broken (used groups first, values ascending).
    `strengthen` adds valid rows forbidding order-separated element pairs
    from sharing a group; defaults to on for small problems where the
    branch-and-bound benefits outweigh the extra rows.  `chain_cuts` controls
    the bound-lifting inequalities tying group counts to order chains:
    "none", "pairs", "full" (pairs plus triples), or "auto".
    """
    n = len(p.elements)
    ids = p.element_ids()
    cw, ch = p.canvas.width, p.canvas.height
    if strengthen is None:
        strengthen = n <= 6

    x: dict[tuple[str, str, int], VarRef] = {}
    u: dict[str, list[VarRef]] = {}
    values: dict[str, list[VarRef]] = {}

    for fam in FAMILIES:
        extent = cw if _FAMILY_AXIS[fam] == "w" else ch
        values[fam] = [
            inst.add_var(("V", fam, i), f"V{fam}({i})", VarKind.CONTINUOUS, 0.0, extent, "alignment_value")
            for i in range(n)
        ]
        u[fam] = [
            inst.add_var(("u", fam, i), f"u{fam}({i})", VarKind.BINARY, 0.0, 1.0, "alignment_binary")
            for i in range(n)
        ]
        for eid in ids:
            for i in range(n):
                x[(fam, eid, i)] = inst.add_var(
                    ("x", fam, eid, i), f"x{fam}({eid},{i})", VarKind.BINARY, 0.0, 1.0, "alignment_binary")

    for fam in FAMILIES:
        edge = _FAMILY_EDGE[fam]
        extent = cw if _FAMILY_AXIS[fam] == "w" else ch
        for eid in ids:
            inst.add_constraint(
                [(1.0, x[(fam, eid, i)]) for i in range(n)], Sense.EQ, 1.0, f"assign{fam}({eid})")
            ev = inst.var(edge, eid)
            for i in range(n):
                xv = x[(fam, eid, i)]
                vv = values[fam][i]
                inst.add_constraint(
                    [(1.0, ev), (-1.0, vv), (extent, xv)], Sense.LE, extent, f"link_up{fam}({eid},{i})")
                inst.add_constraint(
                    [(-1.0, ev), (1.0, vv), (extent, xv)], Sense.LE, extent, f"link_dn{fam}({eid},{i})")
                inst.add_constraint(
                    [(1.0, xv), (-1.0, u[fam][i])], Sense.LE, 0.0, f"use{fam}({eid},{i})")
        for i in range(n - 1):
            inst.add_constraint(
                [(1.0, u[fam][i + 1]), (-1.0, u[fam][i])], Sense.LE, 0.0, f"uorder{fam}({i})")
            inst.add_constraint(
                [(1.0, values[fam][i]), (-1.0, values[fam][i + 1]),
                 (extent, u[fam][i]), (extent, u[fam][i + 1])],
                Sense.LE, 2.0 * extent, f"vorder{fam}({i})")

    if strengthen:
        for ai in range(n):
            for bi in range(ai + 1, n):
                a, b = ids[ai], ids[bi]
                horizontal = [(1.0, inst.var("before", a, b)), (1.0, inst.var("before", b, a))]
                vertical = [(1.0, inst.var("above", a, b)), (1.0, inst.var("above", b, a))]
                for fam, rel in (("LG", horizontal), ("RG", horizontal),
                                 ("TG", vertical), ("BG", vertical)):
                    for i in range(n):
                        # Order along the family axis forbids sharing a group.
                        inst.add_constraint(
                            [(1.0, x[(fam, a, i)]), (1.0, x[(fam, b, i)]), *rel],
                            Sense.LE, 2.0, f"sepgrp{fam}({a},{b},{i})")
    if chain_cuts != "none":
        _add_chain_cuts(inst, p, u, chain_cuts)

    inst.has_alignment = True
    return AlignmentHandles(x=x, u=u, values=values)


def _add_chain_cuts(inst: MilpInstance, p: LayoutProblem,
                    u: dict[str, list[VarRef]], mode: str) -> None:
    """Valid inequalities lifting the LP bound on used alignment groups.

    A before-chain a->b->c forces strictly increasing left (and right) edge
    values along the chain, so the group count of the LG/RG families is at
    least one more than the number of chain links taken; likewise for
    above-chains and the TG/BG families.
    """
    ids = p.element_ids()
    n = len(ids)

    def emit(fams: tuple[str, str], links: list[tuple[str, str, str]]) -> None:
        rel_terms = [(-1.0, inst.var(role, a, b)) for role, a, b in links]
        for fam in fams:
            inst.add_constraint(
                [(1.0, uv) for uv in u[fam]] + rel_terms, Sense.GE, 1.0,
                f"chain{fam}({'|'.join(a + '>' + b for _, a, b in links)})")

    for ai in range(n):
        for bi in range(ai + 1, n):
            a, b = ids[ai], ids[bi]
            emit(("LG", "RG"), [("before", a, b), ("before", b, a)])
            emit(("TG", "BG"), [("above", a, b), ("above", b, a)])
    if mode == "full" or (mode == "auto" and n <= 6):
        for ai in range(n):
            for bi in range(n):
                if bi == ai:
                    continue
                for ci in range(n):
                    if ci in (ai, bi):
                        continue
                    a, b, c = ids[ai], ids[bi], ids[ci]
                    emit(("LG", "RG"), [("before", a, b), ("before", b, c)])
                    emit(("TG", "BG"), [("above", a, b), ("above", b, c)])


# -- rectangular outline -------------------------------------------------------


def add_rectangularity(inst: MilpInstance, p: LayoutProblem,
                       align: AlignmentHandles) -> RectHandles:
    """Smallest-rectangular-outline variables plus edge-adherence rewards.

    sro_l/sro_t are the minima of the left/top edges, sro_r/sro_b the maxima
    of right/bottom; picker binaries pin each side to an achieving element.
    An adherence binary may be 1 only when its edge sits exactly on the
    matching outline side.
    """
    del align  # adherence works on raw edges; alignment groups merely coexist
    ids = p.element_ids()
    cw, ch = p.canvas.width, p.canvas.height

    sro: dict[str, VarRef] = {}
    pick: dict[tuple[str, str], VarRef] = {}
    adh: dict[tuple[str, str], VarRef] = {}
    for side in SIDES:
        extent = cw if side in ("l", "r") else ch
        sro[side] = inst.add_var(("sro", side), f"sro({side})", VarKind.CONTINUOUS, 0.0, extent, "rect_value")
        for eid in ids:
            pick[(side, eid)] = inst.add_var(
                ("sro_pick", side, eid), f"pick{side}({eid})", VarKind.BINARY, 0.0, 1.0, "rect_binary")
            adh[(side, eid)] = inst.add_var(
                ("adh", side, eid), f"adh{side}({eid})", VarKind.BINARY, 0.0, 1.0, "rect_binary")

    for side in SIDES:
        edge = _SIDE_EDGE[side]
        extent = cw if side in ("l", "r") else ch
        outer_is_min = side in ("l", "t")
        for eid in ids:
            ev = inst.var(edge, eid)
            if outer_is_min:
                inst.add_constraint([(1.0, sro[side]), (-1.0, ev)], Sense.LE, 0.0, f"sro_le({side},{eid})")
                inst.add_constraint(
                    [(1.0, sro[side]), (-1.0, ev), (-extent, pick[(side, eid)])],
                    Sense.GE, -extent, f"sro_pick({side},{eid})")
                inst.add_constraint(
                    [(1.0, ev), (-1.0, sro[side]), (extent, adh[(side, eid)])],
                    Sense.LE, extent, f"adhere({side},{eid})")
            else:
                inst.add_constraint([(1.0, sro[side]), (-1.0, ev)], Sense.GE, 0.0, f"sro_ge({side},{eid})")
                inst.add_constraint(
                    [(1.0, sro[side]), (-1.0, ev), (extent, pick[(side, eid)])],
                    Sense.LE, extent, f"sro_pick({side},{eid})")
                inst.add_constraint(
                    [(1.0, sro[side]), (-1.0, ev), (extent, adh[(side, eid)])],
                    Sense.LE, extent, f"adhere({side},{eid})")
        inst.add_constraint(
            [(1.0, pick[(side, eid)]) for eid in ids], Sense.EQ, 1.0, f"one_pick({side})")

    # The picked extremal achiever adheres by definition, and an element with a
    # neighbour towards a side can never reach that outline side.  Both facts
    # tighten the otherwise loose big-M relaxation of the adherence count.
    for side in SIDES:
        for eid in ids:
            inst.add_constraint(
                [(1.0, adh[(side, eid)]), (-1.0, pick[(side, eid)])],
                Sense.GE, 0.0, f"adh_pick({side},{eid})")
    for a in ids:
        for b in ids:
            if a == b:
                continue
            lam = inst.var("before", a, b)
            sig = inst.var("above", a, b)
            inst.add_constraint([(1.0, adh[("l", b)]), (1.0, lam)], Sense.LE, 1.0, f"adh_block_l({a},{b})")
            inst.add_constraint([(1.0, adh[("r", a)]), (1.0, lam)], Sense.LE, 1.0, f"adh_block_r({a},{b})")
            inst.add_constraint([(1.0, adh[("t", b)]), (1.0, sig)], Sense.LE, 1.0, f"adh_block_t({a},{b})")
            inst.add_constraint([(1.0, adh[("b", a)]), (1.0, sig)], Sense.LE, 1.0, f"adh_block_b({a},{b})")
    n = len(ids)
    for ai in range(n):
        for bi in range(ai + 1, n):
            a, b = ids[ai], ids[bi]
            vert = [(-1.0, inst.var("above", a, b)), (-1.0, inst.var("above", b, a))]
            horz = [(-1.0, inst.var("before", a, b)), (-1.0, inst.var("before", b, a))]
            # Sharing an outline side means sharing that edge value, which
            # requires separation along the other axis.
            for side, rel in (("l", vert), ("r", vert), ("t", horz), ("b", horz)):
                inst.add_constraint(
                    [(1.0, adh[(side, a)]), (1.0, adh[(side, b)]), *rel],
                    Sense.LE, 1.0, f"adh_pairs({side},{a},{b})")
    if n >= 2:
        for eid in ids:
            # Touching all four outline sides would cover every other element.
            inst.add_constraint(
                [(1.0, adh[(side, eid)]) for side in SIDES], Sense.LE, 3.0, f"adh_cap({eid})")

    inst.has_rect = True
    return RectHandles(sro=sro, pick=pick, adherence=adh)


def add_extremal_tightening(inst: MilpInstance, p: LayoutProblem,
                            align: AlignmentHandles, rect: RectHandles,
                            delta: Optional[float] = None) -> None:
    """Extra rows that make group usage and adherence counts exact both ways.

    By default `u` may exceed the truly used groups and adherence binaries
    may undercount; that is harmless when the objective pushes them the
    honest way.  Worst-objective reference solves push them the other way,
    so they need: used groups must host an assignment, consecutive used
    values must differ by at least `delta`, and a zero adherence binary
    forces the edge at least `delta` off the outline side.
    """
    n = len(p.elements)
    ids = p.element_ids()
    cw, ch = p.canvas.width, p.canvas.height
    if delta is None:
        delta = 1e-3 * max(cw, ch)

    for fam in FAMILIES:
        extent = cw if _FAMILY_AXIS[fam] == "w" else ch
        for i in range(n):
            inst.add_constraint(
                [(1.0, align.u[fam][i])] + [(-1.0, align.x[(fam, eid, i)]) for eid in ids],
                Sense.LE, 0.0, f"u_tie{fam}({i})")
        for i in range(n - 1):
            inst.add_constraint(
                [(1.0, align.values[fam][i + 1]), (-1.0, align.values[fam][i]),
                 (-extent, align.u[fam][i]), (-extent, align.u[fam][i + 1])],
                Sense.GE, delta - 2.0 * extent, f"vsep{fam}({i})")

    for side in SIDES:
        edge = _SIDE_EDGE[side]
        extent = cw if side in ("l", "r") else ch
        sign = 1.0 if side in ("l", "t") else -1.0
        for eid in ids:
            ev = inst.var(edge, eid)
            # side l/t: edge - sro >= delta (1 - adh); side r/b: sro - edge >= ...
            inst.add_constraint(
                [(sign, ev), (-sign, rect.sro[side]), (delta, rect.adherence[(side, eid)])],
                Sense.GE, delta, f"adh_tie({side},{eid})")


# -- preferences, groups, traversal ---------------------------------------------


def add_placement_prefs(inst: MilpInstance, p: LayoutProblem) -> None:
    """Fix relative-order binaries implied by side preferences.

    A top preference means nothing may sit strictly above the element;
    placement beside it stays legal.  Locks were already fixed by build_core.
    """
    ids = p.element_ids()
    for e in p.elements:
        for other in ids:
            if other == e.id:
                continue
            if e.v_pref is VPref.TOP:
                inst.var("above", other, e.id).upper = 0.0
            elif e.v_pref is VPref.BOTTOM:
                inst.var("above", e.id, other).upper = 0.0
            if e.h_pref is HPref.LEFT:
                inst.var("before", other, e.id).upper = 0.0
            elif e.h_pref is HPref.RIGHT:
                inst.var("before", e.id, other).upper = 0.0


def add_grouping(inst: MilpInstance, p: LayoutProblem) -> None:
    """Contiguity via a bounding box per group that non-members must avoid."""
    cw, ch, g = p.canvas.width, p.canvas.height, p.gutter
    mv = ch + g
    mh = cw + g
    for grp in p.groups:
        gid = grp.id
        gl = inst.add_var(("grp", gid, "l"), f"G_L({gid})", VarKind.CONTINUOUS, 0.0, cw, "group_value")
        gr = inst.add_var(("grp", gid, "r"), f"G_R({gid})", VarKind.CONTINUOUS, 0.0, cw, "group_value")
        gt = inst.add_var(("grp", gid, "t"), f"G_T({gid})", VarKind.CONTINUOUS, 0.0, ch, "group_value")
        gb = inst.add_var(("grp", gid, "b"), f"G_B({gid})", VarKind.CONTINUOUS, 0.0, ch, "group_value")
        for eid in grp.members:
            inst.add_constraint([(1.0, gl), (-1.0, inst.var("L", eid))], Sense.LE, 0.0, f"gin_l({gid},{eid})")
            inst.add_constraint([(1.0, gr), (-1.0, inst.var("R", eid))], Sense.GE, 0.0, f"gin_r({gid},{eid})")
            inst.add_constraint([(1.0, gt), (-1.0, inst.var("T", eid))], Sense.LE, 0.0, f"gin_t({gid},{eid})")
            inst.add_constraint([(1.0, gb), (-1.0, inst.var("B", eid))], Sense.GE, 0.0, f"gin_b({gid},{eid})")
        members = set(grp.members)
        for eid in p.element_ids():
            if eid in members:
                continue
            sa = inst.add_var(("grp_above", gid, eid), f"gabove({gid},{eid})", VarKind.BINARY, 0.0, 1.0, "group_binary")
            sb = inst.add_var(("grp_below", gid, eid), f"gbelow({gid},{eid})", VarKind.BINARY, 0.0, 1.0, "group_binary")
            la = inst.add_var(("grp_before", gid, eid), f"gbefore({gid},{eid})", VarKind.BINARY, 0.0, 1.0, "group_binary")
            lb_ = inst.add_var(("grp_after", gid, eid), f"gafter({gid},{eid})", VarKind.BINARY, 0.0, 1.0, "group_binary")
            four = [(1.0, sa), (1.0, sb), (1.0, la), (1.0, lb_)]
            inst.add_constraint(four, Sense.GE, 1.0, f"gpair_lo({gid},{eid})")
            inst.add_constraint(four, Sense.LE, 2.0, f"gpair_hi({gid},{eid})")
            # group above element / below / left of / right of
            inst.add_constraint([(1.0, inst.var("T", eid)), (-1.0, gb), (-mv, sa)],
                                Sense.GE, g - mv, f"gsep_v({gid},{eid})")
            inst.add_constraint([(1.0, gt), (-1.0, inst.var("B", eid)), (-mv, sb)],
                                Sense.GE, g - mv, f"gsep_v2({gid},{eid})")
            inst.add_constraint([(1.0, inst.var("L", eid)), (-1.0, gr), (-mh, la)],
                                Sense.GE, g - mh, f"gsep_h({gid},{eid})")
            inst.add_constraint([(1.0, gl), (-1.0, inst.var("R", eid)), (-mh, lb_)],
                                Sense.GE, g - mh, f"gsep_h2({gid},{eid})")


def symmetry_classes(p: LayoutProblem) -> list[list[str]]:
    """Classes of mutually interchangeable elements (same bounds and prefs,
    free of locks, groups and traversal pairs), in problem order."""
    pinned = {m for grp in p.groups for m in grp.members}
    pinned |= {tp.a for tp in p.traversal} | {tp.b for tp in p.traversal}
    classes: dict[tuple, list[str]] = {}
    for e in p.elements:
        if e.locked is not None or e.id in pinned:
            continue
        key = (e.min_width, e.max_width, e.min_height, e.max_height, e.h_pref, e.v_pref)
        classes.setdefault(key, []).append(e.id)
    return [members for members in classes.values() if len(members) >= 2]


def add_symmetry_breaking(inst: MilpInstance, p: LayoutProblem) -> None:
    """Order interchangeable elements to prune permuted duplicates.

    Within each interchangeability class the top edges are forced
    non-decreasing in problem order.  Every pruned layout has a permuted
    representative with identical objective value and relation sums, so
    optima and signature spans are unaffected.
    """
    for members in symmetry_classes(p):
        for a, b in zip(members, members[1:]):
            inst.add_constraint(
                [(1.0, inst.var("T", a)), (-1.0, inst.var("T", b))],
                Sense.LE, 0.0, f"sym({a},{b})")


def add_traversal(inst: MilpInstance, p: LayoutProblem) -> TraversalHandle:
    """L1 distance between element centers, linearised per traversal pair."""
    cw, ch = p.canvas.width, p.canvas.height
    terms: list[tuple[float, VarRef]] = []
    for k, tp in enumerate(p.traversal):
        dx = inst.add_var(("dx", k), f"dx({tp.a},{tp.b})", VarKind.CONTINUOUS, 0.0, cw, "traversal")
        dy = inst.add_var(("dy", k), f"dy({tp.a},{tp.b})", VarKind.CONTINUOUS, 0.0, ch, "traversal")
        for sgn in (1.0, -1.0):
            inst.add_constraint(
                [(1.0, dx),
                 (-0.5 * sgn, inst.var("L", tp.a)), (-0.5 * sgn, inst.var("R", tp.a)),
                 (0.5 * sgn, inst.var("L", tp.b)), (0.5 * sgn, inst.var("R", tp.b))],
                Sense.GE, 0.0, f"trav_x({k},{int(sgn > 0)})")
            inst.add_constraint(
                [(1.0, dy),
                 (-0.5 * sgn, inst.var("T", tp.a)), (-0.5 * sgn, inst.var("B", tp.a)),
                 (0.5 * sgn, inst.var("T", tp.b)), (0.5 * sgn, inst.var("B", tp.b))],
                Sense.GE, 0.0, f"trav_y({k},{int(sgn > 0)})")
        terms.append((tp.weight, dx))
        terms.append((tp.weight, dy))
    return TraversalHandle(terms=terms)


# -- objectives and removable constraints ---------------------------------------


def _signature_terms(inst: MilpInstance, role: str) -> list[tuple[float, VarRef]]:
    ids = inst.problem.element_ids()
    return [(1.0, inst.var(role, a, b)) for a in ids for b in ids if a != b]


def set_objective(inst: MilpInstance, mode: ObjectiveMode,
                  handles: Optional[BuildHandles] = None,
                  weights=None) -> None:
    handles = handles or BuildHandles()
    if mode is ObjectiveMode.COMPOSITE:
        w = weights if weights is not None else inst.problem.weights
        terms: dict[int, float] = {}
        if w.alignment:
            if handles.alignment is None:
                raise UnknownHandle("composite objective needs alignment handles")
            for v in handles.alignment.epsilon_vars:
                terms[v.index] = terms.get(v.index, 0.0) + w.alignment
        if w.rectangularity:
            if handles.rect is None:
                raise UnknownHandle("composite objective needs rectangularity handles")
            for v in handles.rect.adherence_vars:
                terms[v.index] = terms.get(v.index, 0.0) - w.rectangularity
        if w.traversal and inst.problem.traversal:
            if handles.traversal is None:
                raise UnknownHandle("composite objective needs traversal handles")
            for coef, v in handles.traversal.terms:
                terms[v.index] = terms.get(v.index, 0.0) + w.traversal * coef
        inst.set_objective_terms("min", terms)
        return
    if mode is ObjectiveMode.MIN_EPSILON:
        if handles.alignment is None:
            raise UnknownHandle("min-epsilon objective needs alignment handles")
        inst.set_objective_terms("min", {v.index: 1.0 for v in handles.alignment.epsilon_vars})
        return
    if mode is ObjectiveMode.MAX_RECT:
        if handles.rect is None:
            raise UnknownHandle("max-rect objective needs rectangularity handles")
        inst.set_objective_terms("max", {v.index: 1.0 for v in handles.rect.adherence_vars})
        return
    role = "above" if mode in (ObjectiveMode.MAX_GAMMA, ObjectiveMode.MIN_GAMMA) else "before"
    sense = "max" if mode in (ObjectiveMode.MAX_GAMMA, ObjectiveMode.MAX_PI) else "min"
    inst.set_objective_terms(sense, {v.index: 1.0 for _, v in _signature_terms(inst, role)})


def enforce_signature(inst: MilpInstance, gamma_val: int, pi_val: int,
                      band: int = 0) -> ConstraintHandle:
    cids = []
    gterms = _signature_terms(inst, "above")
    pterms = _signature_terms(inst, "before")
    cids.append(inst.add_constraint(gterms, Sense.LE, gamma_val + band, "sig_gamma_hi"))
    cids.append(inst.add_constraint(gterms, Sense.GE, gamma_val - band, "sig_gamma_lo"))
    cids.append(inst.add_constraint(pterms, Sense.LE, pi_val + band, "sig_pi_hi"))
    cids.append(inst.add_constraint(pterms, Sense.GE, pi_val - band, "sig_pi_lo"))
    return ConstraintHandle(tuple(cids), inst)


def update_signature(inst: MilpInstance, handle: ConstraintHandle,
                     gamma_val: int, pi_val: int, band: int = 0) -> None:
    """Move an existing signature enforcement to a new point in place."""
    hi_g, lo_g, hi_p, lo_p = handle.cids
    inst.set_rhs(hi_g, gamma_val + band)
    inst.set_rhs(lo_g, gamma_val - band)
    inst.set_rhs(hi_p, pi_val + band)
    inst.set_rhs(lo_p, pi_val - band)


def enforce_signature_ring(inst: MilpInstance, gamma_val: int, pi_val: int,
                           radius: int) -> ConstraintHandle:
    """|dGamma| + |dPi| <= radius around a seed signature (outer bound only).

    The inner >=1 exclusion of the seed itself is not linear; callers filter
    exact seed signatures from results instead.
    """
    gterms = _signature_terms(inst, "above")
    pterms = _signature_terms(inst, "before")
    cids = []
    for sg in (1.0, -1.0):
        for sp_ in (1.0, -1.0):
            terms = [(sg, v) for _, v in gterms] + [(sp_, v) for _, v in pterms]
            rhs = radius + sg * gamma_val + sp_ * pi_val
            cids.append(inst.add_constraint(terms, Sense.LE, rhs, f"sig_ring({sg},{sp_})"))
    return ConstraintHandle(tuple(cids), inst)


def cap_epsilon(inst: MilpInstance, align: AlignmentHandles, cap: int) -> ConstraintHandle:
    cid = inst.add_constraint([(1.0, v) for v in align.epsilon_vars], Sense.LE, float(cap), "eps_cap")
    return ConstraintHandle((cid,), inst)


def floor_rectangularity(inst: MilpInstance, rect: RectHandles, floor: int) -> ConstraintHandle:
    cid = inst.add_constraint([(1.0, v) for v in rect.adherence_vars], Sense.GE, float(floor), "rect_floor")
    return ConstraintHandle((cid,), inst)


def build_full(p: LayoutProblem, *, alignment: bool = True, rect: bool = True,
               grouping: bool = True, traversal: bool = True,
               prefs: bool = True, strengthen: Optional[bool] = None,
               chain_cuts: str = "auto", symmetry: bool = True,
               ) -> tuple[MilpInstance, BuildHandles]:
    inst = build_core(p)
    handles = BuildHandles()
    if prefs:
        add_placement_prefs(inst, p)
    if grouping and p.groups:
        add_grouping(inst, p)
    if alignment:
        handles.alignment = add_alignment(inst, p, strengthen=strengthen, chain_cuts=chain_cuts)
    if rect:
        if handles.alignment is None:
            raise ValueError("rectangularity requires alignment to be added first")
        handles.rect = add_rectangularity(inst, p, handles.alignment)
    if traversal and p.traversal:
        handles.traversal = add_traversal(inst, p)
    if symmetry:
        add_symmetry_breaking(inst, p)
    return inst, handles


def branch_priorities(inst: MilpInstance) -> "np.ndarray":
    """Branching order hint: decide group usage first, then relative order,
    then group assignment; remaining binaries last."""
    prio = np.zeros(len(inst.vars))
    for key, ref in inst.var_map.items():
        if key[0] == "u":
            prio[ref.index] = 3.0
        elif key[0] in ("above", "before", "grp_above", "grp_below", "grp_before", "grp_after"):
            prio[ref.index] = 2.0
        elif key[0] == "x":
            prio[ref.index] = 1.0
    return prio


# -- decoding -------------------------------------------------------------------


def decode_solution(inst: MilpInstance, values: np.ndarray) -> LayoutSolution:
    """Turn a feasible assignment into concrete placements with statistics.

    Locked rectangles are snapped to their exact input coordinates so that
    partial-design completion keeps them bit-identical.
    """
    p = inst.problem
    placements = []
    for e in p.elements:
        if e.locked is not None:
            lk = e.locked
            placements.append(PlacedElement(e.id, lk.l, lk.t, lk.r, lk.b))
            continue
        placements.append(PlacedElement(
            e.id,
            float(values[inst.var("L", e.id).index]),
            float(values[inst.var("T", e.id).index]),
            float(values[inst.var("R", e.id).index]),
            float(values[inst.var("B", e.id).index]),
        ))
    placements = tuple(placements)

    ids = p.element_ids()
    gamma = sum(int(round(values[inst.var("above", a, b).index]))
                for a in ids for b in ids if a != b)
    pi = sum(int(round(values[inst.var("before", a, b).index]))
             for a in ids for b in ids if a != b)
    tol = p.tolerance()
    stats = SolutionStats(
        grid_lines=scoring.grid_line_count_of(placements, tol),
        rect_cases=scoring.adherence_cases_of(placements, tol),
        gamma=gamma,
        pi=pi,
        objective=scoring.composite_objective_of(p, placements),
        optimality_pct=None,
    )
    return LayoutSolution(placements=placements, stats=stats)
