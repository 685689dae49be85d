"""Constructive primal heuristics for the layout MILP.

A deterministic bottom-left packer builds a geometrically valid layout at
minimum element sizes, then the full variable assignment (relative-order
binaries, alignment groups, outline variables, traversal distances) is
derived from that geometry.  Candidates that violate extra instance
constraints (pinned signatures, groups the packer ignored) are simply
rejected by the solver's algebraic check.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .milp import FAMILIES, MilpInstance, SIDES, _FAMILY_AXIS, _FAMILY_EDGE, _SIDE_EDGE, symmetry_classes
from .model import HPref, LayoutProblem, VPref

_EPS = 1e-9


def canonicalize_geometry(p: LayoutProblem,
                          geometry: dict[str, tuple[float, float, float, float]]
                          ) -> dict[str, tuple[float, float, float, float]]:
    """Reassign rects within each interchangeability class into reading order.

    The optimisation model orders identical elements by top edge to break
    permutation symmetry; candidate layouts must respect the same canon.
    """
    out = dict(geometry)
    for members in symmetry_classes(p):
        rects = sorted((geometry[eid] for eid in members), key=lambda r: (r[1], r[0]))
        for eid, rect in zip(members, rects):
            out[eid] = rect
    return out


def bottom_left_pack(p: LayoutProblem) -> Optional[dict[str, tuple[float, float, float, float]]]:
    """Greedy bottom-left packing at minimum sizes around any locked elements.

    Positions are drawn from existing edges plus the gutter, so axis gaps come
    out as exactly 0 or >= gutter, matching what the order model permits.
    Returns None when some element cannot be placed.
    """
    g = p.gutter
    cw, ch = p.canvas.width, p.canvas.height
    placed: dict[str, tuple[float, float, float, float]] = {}

    for e in p.elements:
        if e.locked is not None:
            lk = e.locked
            placed[e.id] = (lk.l, lk.t, lk.r, lk.b)

    def pref_rank(e) -> tuple:
        v = {VPref.TOP: 0, VPref.NONE: 1, VPref.BOTTOM: 2}[e.v_pref]
        h = {HPref.LEFT: 0, HPref.NONE: 1, HPref.RIGHT: 2}[e.h_pref]
        return (v, h)

    free = [e for e in p.elements if e.locked is None]
    order = sorted(range(len(free)), key=lambda i: (*pref_rank(free[i]), i))

    for idx in order:
        e = free[idx]
        w, h = e.min_width, e.min_height
        xs = sorted({0.0} | {r + g for (_, _, r, _) in placed.values() if r + g + w <= cw + _EPS})
        ys = sorted({0.0} | {b + g for (_, _, _, b) in placed.values() if b + g + h <= ch + _EPS})
        spot = None
        for y in ys:
            for x in xs:
                if x + w > cw + _EPS or y + h > ch + _EPS:
                    continue
                ok = True
                for (ql, qt, qr, qb) in placed.values():
                    hgap = max(x - qr, ql - (x + w))
                    vgap = max(y - qb, qt - (y + h))
                    if hgap < -_EPS and vgap < -_EPS:
                        ok = False  # interior overlap
                        break
                    # The order model forbids positive axis gaps below the gutter.
                    if _EPS < hgap < g - _EPS or _EPS < vgap < g - _EPS:
                        ok = False
                        break
                    if max(hgap, vgap) < g - _EPS:
                        ok = False
                        break
                if ok:
                    spot = (x, y)
                    break
            if spot:
                break
        if spot is None:
            return None
        x, y = spot
        placed[e.id] = (x, y, x + w, y + h)
    return placed


def _clusters(vals: list[tuple[str, float]]) -> list[tuple[float, list[str]]]:
    """Group (id, coordinate) pairs by exactly-equal coordinate, ascending."""
    out: dict[float, list[str]] = {}
    for eid, v in vals:
        key = round(v, 9)
        out.setdefault(key, []).append(eid)
    return sorted(out.items())


def assignment_from_geometry(
    inst: MilpInstance,
    geometry: dict[str, tuple[float, float, float, float]],
) -> np.ndarray:
    """Derive a full variable assignment from concrete rectangles."""
    p = inst.problem
    g = p.gutter
    values = np.zeros(len(inst.vars))
    ids = p.element_ids()

    for eid in ids:
        l, t, r, b = geometry[eid]
        values[inst.var("L", eid).index] = l
        values[inst.var("T", eid).index] = t
        values[inst.var("R", eid).index] = r
        values[inst.var("B", eid).index] = b
        values[inst.var("W", eid).index] = r - l
        values[inst.var("H", eid).index] = b - t

    for a in ids:
        for o in ids:
            if a == o:
                continue
            _, _, ra, ba = geometry[a]
            lo, to, _, _ = geometry[o]
            values[inst.var("above", a, o).index] = 1.0 if to - ba >= g - _EPS else 0.0
            values[inst.var("before", a, o).index] = 1.0 if lo - ra >= g - _EPS else 0.0

    if inst.has_alignment:
        n = len(ids)
        for fam in FAMILIES:
            edge = _FAMILY_EDGE[fam]
            axis = _FAMILY_AXIS[fam]
            extent = p.canvas.width if axis == "w" else p.canvas.height
            coord = {"L": 0, "T": 1, "R": 2, "B": 3}[edge]
            clusters = _clusters([(eid, geometry[eid][coord]) for eid in ids])
            for i, (val, members) in enumerate(clusters):
                values[inst.var("V", fam, i).index] = val
                values[inst.var("u", fam, i).index] = 1.0
                for eid in members:
                    values[inst.var("x", fam, eid, i).index] = 1.0
            for i in range(len(clusters), n):
                values[inst.var("V", fam, i).index] = extent

    if inst.has_rect:
        sro = {
            "l": min(geometry[eid][0] for eid in ids),
            "t": min(geometry[eid][1] for eid in ids),
            "r": max(geometry[eid][2] for eid in ids),
            "b": max(geometry[eid][3] for eid in ids),
        }
        for side in SIDES:
            values[inst.var("sro", side).index] = sro[side]
            coord = {"l": 0, "t": 1, "r": 2, "b": 3}[side]
            picked = False
            for eid in ids:
                on_side = abs(geometry[eid][coord] - sro[side]) <= _EPS
                if on_side:
                    values[inst.var("adh", side, eid).index] = 1.0
                    if not picked:
                        values[inst.var("sro_pick", side, eid).index] = 1.0
                        picked = True

    for grp in p.groups:
        if ("grp", grp.id, "l") not in inst.var_map:
            continue
        gl = min(geometry[m][0] for m in grp.members)
        gt = min(geometry[m][1] for m in grp.members)
        gr = max(geometry[m][2] for m in grp.members)
        gb = max(geometry[m][3] for m in grp.members)
        values[inst.var("grp", grp.id, "l").index] = gl
        values[inst.var("grp", grp.id, "t").index] = gt
        values[inst.var("grp", grp.id, "r").index] = gr
        values[inst.var("grp", grp.id, "b").index] = gb
        members = set(grp.members)
        for eid in ids:
            if eid in members:
                continue
            l, t, r, b = geometry[eid]
            values[inst.var("grp_above", grp.id, eid).index] = 1.0 if t - gb >= g - _EPS else 0.0
            values[inst.var("grp_below", grp.id, eid).index] = 1.0 if gt - b >= g - _EPS else 0.0
            values[inst.var("grp_before", grp.id, eid).index] = 1.0 if l - gr >= g - _EPS else 0.0
            values[inst.var("grp_after", grp.id, eid).index] = 1.0 if gl - r >= g - _EPS else 0.0

    for k, tp in enumerate(p.traversal):
        if ("dx", k) not in inst.var_map:
            continue
        la, ta, ra, ba = geometry[tp.a]
        lb, tb, rb, bb = geometry[tp.b]
        values[inst.var("dx", k).index] = abs((la + ra) / 2 - (lb + rb) / 2)
        values[inst.var("dy", k).index] = abs((ta + ba) / 2 - (tb + bb) / 2)

    return values


def packed_candidates(inst: MilpInstance) -> list[np.ndarray]:
    """Candidate assignments for the solver; empty when packing fails."""
    geometry = bottom_left_pack(inst.problem)
    if geometry is None:
        return []
    geometry = canonicalize_geometry(inst.problem, geometry)
    return [assignment_from_geometry(inst, geometry)]


def _compositions(n: int, cap: int) -> list[list[int]]:
    """Ordered compositions of n with parts of size at most cap."""
    if n == 0:
        return [[]]
    out = []
    for first in range(1, min(n, cap) + 1):
        for rest in _compositions(n - first, cap):
            out.append([first] + rest)
    return out


def _banded_geometry(p: LayoutProblem, sizes: list[int], horizontal_rows: bool
                     ) -> Optional[dict[str, tuple[float, float, float, float]]]:
    """Rows (or columns) of the given sizes, each band stretched to full span."""
    g = p.gutter
    span = p.canvas.width if horizontal_rows else p.canvas.height
    depth_limit = p.canvas.height if horizontal_rows else p.canvas.width
    elements = list(p.elements)
    geometry: dict[str, tuple[float, float, float, float]] = {}
    cursor_depth = 0.0
    taken = 0
    for band_index, k in enumerate(sizes):
        members = elements[taken:taken + k]
        taken += k
        cell = (span - (k - 1) * g) / k
        band_depth = 0.0
        for i, e in enumerate(members):
            if horizontal_rows:
                # Uniform split keeps neighbours abutting at exactly the gutter.
                if cell < e.min_width - 1e-9 or cell > e.max_width + 1e-9:
                    return None
                h = e.min_height
                x = i * (cell + g)
                geometry[e.id] = (x, cursor_depth, x + cell, cursor_depth + h)
                band_depth = max(band_depth, h)
            else:
                if cell < e.min_height - 1e-9 or cell > e.max_height + 1e-9:
                    return None
                w = e.min_width
                y = i * (cell + g)
                geometry[e.id] = (cursor_depth, y, cursor_depth + w, y + cell)
                band_depth = max(band_depth, w)
        cursor_depth += band_depth + (g if band_index + 1 < len(sizes) else 0.0)
        if cursor_depth > depth_limit + 1e-9:
            return None
    return geometry


def structured_candidates(inst: MilpInstance, max_band: int = 4
                          ) -> dict[tuple[int, int], np.ndarray]:
    """Row/column band layouts keyed by their relation signature.

    These give signature-pinned solves an instant incumbent whose geometry
    the solver then polishes; compositions that violate size bounds or the
    instance's extra constraints are dropped.  Memoised per instance.
    """
    cached = getattr(inst, "_structured_cache", None)
    if cached is not None:
        return cached
    p = inst.problem
    if any(e.locked is not None for e in p.elements):
        inst._structured_cache = {}
        return {}
    n = len(p.elements)
    binaries = inst.binary_indices()
    lb, ub = inst.bounds_arrays()
    ids = p.element_ids()
    out: dict[tuple[int, int], np.ndarray] = {}
    for horizontal in (True, False):
        for sizes in _compositions(n, min(max_band, n)):
            geometry = _banded_geometry(p, sizes, horizontal)
            if geometry is None:
                continue
            geometry = canonicalize_geometry(p, geometry)
            values = assignment_from_geometry(inst, geometry)
            if np.any(values < lb - 1e-7) or np.any(values > ub + 1e-7):
                continue
            gamma = int(sum(round(values[inst.var("above", a, b).index])
                            for a in ids for b in ids if a != b))
            pi = int(sum(round(values[inst.var("before", a, b).index])
                         for a in ids for b in ids if a != b))
            out.setdefault((gamma, pi), values)
    inst._structured_cache = out
    return out
