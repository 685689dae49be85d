"""Brute-force oracles, independent of the branch-and-bound search path.

The relation-pattern oracle enumerates every assignment of the above/before
binaries that satisfies the pairwise non-overlap counting rule, keeps the
patterns whose geometry LP is feasible, and answers extremal questions by
exhaustive search: relation sums directly, minimal alignment-group counts by
enumerating per-family merge partitions, and maximal outline adherence by
enumerating adherent subsets per side.

Only the plain LP solver is reused from the package; the model construction
here is written from scratch against the geometry rules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from gridlayout.model import HPref, LayoutProblem, VPref
from gridlayout.simplex import EQ, GE, LE, LpProblem, LpStatus, solve_lp_problem

# (above_ab, above_ba, before_ab, before_ba) combos with 1 <= sum <= 2
VALID_PAIR_CODES = [c for c in itertools.product((0, 1), repeat=4) if 1 <= sum(c) <= 2]


@dataclass
class Pattern:
    """One integral assignment of the relation binaries for all pairs."""

    above: dict[tuple[str, str], int]
    before: dict[tuple[str, str], int]

    def gamma(self) -> int:
        return sum(self.above.values())

    def pi(self) -> int:
        return sum(self.before.values())


def _pref_allows(p: LayoutProblem, pattern: Pattern) -> bool:
    for e in p.elements:
        for o in p.elements:
            if o.id == e.id:
                continue
            if e.v_pref is VPref.TOP and pattern.above[(o.id, e.id)]:
                return False
            if e.v_pref is VPref.BOTTOM and pattern.above[(e.id, o.id)]:
                return False
            if e.h_pref is HPref.LEFT and pattern.before[(o.id, e.id)]:
                return False
            if e.h_pref is HPref.RIGHT and pattern.before[(e.id, o.id)]:
                return False
    return True


class _GeoLp:
    """Geometry feasibility LP for a fixed relation pattern."""

    def __init__(self, p: LayoutProblem):
        self.p = p
        self.ids = p.element_ids()
        self.index = {}
        for eid in self.ids:
            for role in ("L", "R", "T", "B"):
                self.index[(role, eid)] = len(self.index)
        self.nvars = len(self.index)

    def var(self, role: str, eid: str) -> int:
        return self.index[(role, eid)]

    def base_rows(self) -> list[tuple[dict[int, float], int, float]]:
        rows = []
        p = self.p
        for e in p.elements:
            l, r = self.var("L", e.id), self.var("R", e.id)
            t, b = self.var("T", e.id), self.var("B", e.id)
            rows.append(({r: 1.0, l: -1.0}, GE, e.min_width))
            rows.append(({r: 1.0, l: -1.0}, LE, e.max_width))
            rows.append(({b: 1.0, t: -1.0}, GE, e.min_height))
            rows.append(({b: 1.0, t: -1.0}, LE, e.max_height))
            if e.locked is not None:
                rows.append(({l: 1.0}, EQ, e.locked.l))
                rows.append(({r: 1.0}, EQ, e.locked.r))
                rows.append(({t: 1.0}, EQ, e.locked.t))
                rows.append(({b: 1.0}, EQ, e.locked.b))
        return rows

    def pattern_rows(self, pattern: Pattern) -> list[tuple[dict[int, float], int, float]]:
        p = self.p
        g = p.gutter
        rows = []
        for a in self.ids:
            for b in self.ids:
                if a == b:
                    continue
                ta, ba_ = self.var("T", a), self.var("B", a)
                tb, bb = self.var("T", b), self.var("B", b)
                la, ra = self.var("L", a), self.var("R", a)
                lb, rb = self.var("L", b), self.var("R", b)
                if pattern.above[(a, b)]:
                    rows.append(({tb: 1.0, ba_: -1.0}, GE, g))
                else:
                    rows.append(({tb: 1.0, ba_: -1.0}, LE, 0.0))
                if pattern.before[(a, b)]:
                    rows.append(({lb: 1.0, ra: -1.0}, GE, g))
                else:
                    rows.append(({lb: 1.0, ra: -1.0}, LE, 0.0))
        return rows

    def solve(self, extra_rows: Iterable[tuple[dict[int, float], int, float]],
              objective: Optional[dict[int, float]] = None) -> Optional[np.ndarray]:
        rows = list(extra_rows)
        data, ri, ci = [], [], []
        senses, rhs = [], []
        for k, (terms, sense, b) in enumerate(rows):
            senses.append(sense)
            rhs.append(b)
            for idx, coef in terms.items():
                data.append(coef)
                ri.append(k)
                ci.append(idx)
        a = sp.csc_matrix((data, (ri, ci)), shape=(len(rows), self.nvars))
        lb = np.zeros(self.nvars)
        ub = np.empty(self.nvars)
        for eid in self.ids:
            ub[self.var("L", eid)] = self.p.canvas.width
            ub[self.var("R", eid)] = self.p.canvas.width
            ub[self.var("T", eid)] = self.p.canvas.height
            ub[self.var("B", eid)] = self.p.canvas.height
        c = np.zeros(self.nvars)
        if objective:
            for idx, coef in objective.items():
                c[idx] = coef
        res = solve_lp_problem(LpProblem(c=c, a=a, senses=np.array(senses),
                                         b=np.array(rhs), lb=lb, ub=ub))
        if res.status is not LpStatus.OPTIMAL:
            return None
        return res.values


def enumerate_patterns(p: LayoutProblem) -> list[Pattern]:
    """All relation patterns that pass preferences and geometric feasibility."""
    ids = p.element_ids()
    pairs = [(ids[i], ids[j]) for i in range(len(ids)) for j in range(i + 1, len(ids))]
    geo = _GeoLp(p)
    base = geo.base_rows()
    out = []
    for combo in itertools.product(VALID_PAIR_CODES, repeat=len(pairs)):
        above = {}
        before = {}
        for (a, b), code in zip(pairs, combo):
            above[(a, b)], above[(b, a)] = code[0], code[1]
            before[(a, b)], before[(b, a)] = code[2], code[3]
        pattern = Pattern(above=above, before=before)
        if not _pref_allows(p, pattern):
            continue
        if geo.solve(base + geo.pattern_rows(pattern)) is None:
            continue
        out.append(pattern)
    return out


def oracle_signature_bounds(p: LayoutProblem,
                            patterns: Optional[list[Pattern]] = None) -> tuple[int, int, int, int]:
    if patterns is None:
        patterns = enumerate_patterns(p)
    gammas = [pt.gamma() for pt in patterns]
    pis = [pt.pi() for pt in patterns]
    return min(gammas), max(gammas), min(pis), max(pis)


def _partitions(items: list[str]) -> list[list[list[str]]]:
    if not items:
        return [[]]
    first, rest = items[0], items[1:]
    out = []
    for sub in _partitions(rest):
        for k in range(len(sub)):
            out.append(sub[:k] + [[first] + sub[k]] + sub[k + 1:])
        out.append([[first]] + sub)
    return out


def oracle_min_epsilon(p: LayoutProblem, patterns: Optional[list[Pattern]] = None) -> int:
    """Minimal total used alignment groups over all feasible layouts."""
    ids = p.element_ids()
    geo = _GeoLp(p)
    base = geo.base_rows()
    if patterns is None:
        patterns = enumerate_patterns(p)
    parts = _partitions(ids)
    best = 4 * len(ids)
    for pattern in patterns:
        rows_pattern = base + geo.pattern_rows(pattern)

        def family_ok(groups: list[list[str]], separated) -> bool:
            for grp in groups:
                for x, y in itertools.combinations(grp, 2):
                    if separated(x, y):
                        return False
            return True

        horizontally = lambda x, y: pattern.before[(x, y)] or pattern.before[(y, x)]
        vertically = lambda x, y: pattern.above[(x, y)] or pattern.above[(y, x)]
        lg_parts = [g for g in parts if family_ok(g, horizontally)]
        tb_parts = [g for g in parts if family_ok(g, vertically)]
        for lg, rg in itertools.product(lg_parts, lg_parts):
            width_lhs = len(lg) + len(rg)
            if width_lhs + 2 >= best:
                continue
            for tg, bg in itertools.product(tb_parts, tb_parts):
                total = width_lhs + len(tg) + len(bg)
                if total >= best:
                    continue
                rows = list(rows_pattern)
                for role, groups in (("L", lg), ("R", rg), ("T", tg), ("B", bg)):
                    for grp in groups:
                        for x, y in zip(grp, grp[1:]):
                            rows.append(({geo.var(role, x): 1.0, geo.var(role, y): -1.0}, EQ, 0.0))
                if geo.solve(rows) is not None:
                    best = total
    return best


def oracle_max_rect(p: LayoutProblem, patterns: Optional[list[Pattern]] = None) -> int:
    """Maximal outline-adherence cases over all feasible layouts."""
    ids = p.element_ids()
    geo = _GeoLp(p)
    base = geo.base_rows()
    if patterns is None:
        patterns = enumerate_patterns(p)
    best = 0
    for pattern in patterns:
        rows_pattern = base + geo.pattern_rows(pattern)
        candidates = {
            "l": [e for e in ids if not any(pattern.before[(o, e)] for o in ids if o != e)],
            "r": [e for e in ids if not any(pattern.before[(e, o)] for o in ids if o != e)],
            "t": [e for e in ids if not any(pattern.above[(o, e)] for o in ids if o != e)],
            "b": [e for e in ids if not any(pattern.above[(e, o)] for o in ids if o != e)],
        }
        role_of = {"l": "L", "r": "R", "t": "T", "b": "B"}

        def subsets(xs):
            for k in range(len(xs), 0, -1):
                yield from itertools.combinations(xs, k)

        for sl in subsets(candidates["l"]):
            for sr in subsets(candidates["r"]):
                for st_ in subsets(candidates["t"]):
                    for sb in subsets(candidates["b"]):
                        score = len(sl) + len(sr) + len(st_) + len(sb)
                        if score <= best:
                            continue
                        rows = list(rows_pattern)
                        for side, members in (("l", sl), ("r", sr), ("t", st_), ("b", sb)):
                            role = role_of[side]
                            lead = members[0]
                            for other in members[1:]:
                                rows.append(({geo.var(role, lead): 1.0,
                                              geo.var(role, other): -1.0}, EQ, 0.0))
                            # The shared value must be the extreme over all elements.
                            for eid in ids:
                                if eid == lead:
                                    continue
                                sense = LE if side in ("l", "t") else GE
                                rows.append(({geo.var(role, lead): 1.0,
                                              geo.var(role, eid): -1.0}, sense, 0.0))
                        if geo.solve(rows) is not None:
                            best = score
    return best
