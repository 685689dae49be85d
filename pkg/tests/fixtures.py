"""Shared problem fixtures and a deterministic fuzz generator."""

from __future__ import annotations

import random

from gridlayout.model import (  # noqa: F401 re-exported for tests
    Canvas,
    Element,
    Group,
    HPref,
    Kind,
    LayoutProblem,
    ObjectiveWeights,
    Rect,
    TraversalPair,
    VPref,
)


def one_free() -> LayoutProblem:
    return LayoutProblem(canvas=Canvas(200.0, 200.0),
                         elements=(Element("solo", 100, 200, 100, 200),))


def two_free() -> LayoutProblem:
    """Two flexible equal elements forced to split the canvas evenly."""
    return LayoutProblem(canvas=Canvas(200.0, 200.0), elements=(
        Element("a", 100, 200, 100, 200),
        Element("b", 100, 200, 100, 200),
    ))


def grid4() -> LayoutProblem:
    """Four equal elements whose bounds force an exact 2x2 tiling."""
    return LayoutProblem(canvas=Canvas(200.0, 200.0), elements=tuple(
        Element(f"e{i}", 100, 200, 100, 200) for i in range(4)))


def row3() -> LayoutProblem:
    """Heights pinned to the canvas force a single row of three."""
    return LayoutProblem(canvas=Canvas(300.0, 100.0), elements=(
        Element("a", 100, 300, 100, 100),
        Element("b", 100, 300, 100, 100),
        Element("c", 100, 300, 100, 100),
    ))


def semi3() -> LayoutProblem:
    return LayoutProblem(canvas=Canvas(200.0, 200.0), elements=(
        Element("a", 100, 200, 100, 200),
        Element("b", 100, 200, 100, 200),
        Element("c", 60, 80, 60, 80),
    ))


def loose3() -> LayoutProblem:
    return LayoutProblem(canvas=Canvas(200.0, 200.0), elements=(
        Element("a", 50, 200, 40, 200),
        Element("b", 60, 150, 50, 120),
        Element("c", 40, 90, 40, 90),
    ))


def five_template() -> LayoutProblem:
    """Five-element page template used for diversification demos."""
    return LayoutProblem(canvas=Canvas(144.0, 144.0), elements=(
        Element("hero", 48, 144, 32, 144, kind=Kind.IMAGE),
        Element("intro", 48, 144, 32, 144, kind=Kind.PARAGRAPH),
        Element("list", 48, 144, 32, 144, kind=Kind.PARAGRAPH),
        Element("panel", 48, 144, 32, 144, kind=Kind.IMAGE),
        Element("cta", 48, 144, 32, 144, kind=Kind.BUTTON),
    ))


def twelve_gallery() -> LayoutProblem:
    """Twelve-element webpage, the largest fixture used for model sizing."""
    mk = Element
    return LayoutProblem(canvas=Canvas(1280.0, 800.0), elements=(
        mk("banner", 1280, 1280, 80, 120, kind=Kind.HEADING),
        mk("nav", 160, 320, 400, 680, kind=Kind.OTHER),
        mk("hero", 480, 960, 240, 420, kind=Kind.IMAGE),
        mk("intro", 320, 720, 120, 260, kind=Kind.PARAGRAPH),
        mk("card1", 220, 420, 180, 300, kind=Kind.IMAGE),
        mk("card2", 220, 420, 180, 300, kind=Kind.IMAGE),
        mk("card3", 220, 420, 180, 300, kind=Kind.IMAGE),
        mk("quote", 320, 640, 90, 200, kind=Kind.PARAGRAPH),
        mk("list", 240, 520, 160, 320, kind=Kind.PARAGRAPH),
        mk("promo", 220, 560, 120, 240, kind=Kind.BUTTON),
        mk("links", 240, 640, 80, 160, kind=Kind.OTHER),
        mk("footer", 1280, 1280, 60, 100, kind=Kind.OTHER),
    ))


def fuzz_problem(rng: random.Random, n: int | None = None) -> LayoutProblem:
    """Random feasible-leaning problem: n in [2,6], ~20% locked, random prefs."""
    if n is None:
        n = rng.randint(2, 6)
    cw = rng.choice([120.0, 200.0, 320.0])
    ch = rng.choice([120.0, 200.0, 280.0])
    # Keep total minimum area comfortably inside the canvas.
    budget = 0.55 * cw * ch / n
    elements = []
    for i in range(n):
        min_w = round(rng.uniform(0.12, 0.3) * cw, 1)
        min_h = round(min(budget / min_w, rng.uniform(0.12, 0.3) * ch), 1)
        min_h = max(min_h, 8.0)
        max_w = round(min(cw, min_w * rng.uniform(1.2, 3.0)), 1)
        max_h = round(min(ch, min_h * rng.uniform(1.2, 3.0)), 1)
        h_pref = HPref.NONE
        v_pref = VPref.NONE
        roll = rng.random()
        if roll < 0.12:
            v_pref = rng.choice([VPref.TOP, VPref.BOTTOM])
        elif roll < 0.2:
            h_pref = rng.choice([HPref.LEFT, HPref.RIGHT])
        elements.append(Element(
            f"e{i}", min_w, max_w, min_h, max_h,
            kind=rng.choice(list(Kind)), h_pref=h_pref, v_pref=v_pref))
    # Lock roughly one in five elements somewhere collision-free.
    locked_ids = [e.id for e in elements if rng.random() < 0.2]
    locks: dict[str, Rect] = {}
    cursor_x, cursor_y, row_h = 0.0, 0.0, 0.0
    for eid in locked_ids:
        e = next(el for el in elements if el.id == eid)
        w, h = e.min_width, e.min_height
        if cursor_x + w > cw:
            cursor_x, cursor_y = 0.0, cursor_y + row_h
            row_h = 0.0
        if cursor_y + h > ch:
            break
        locks[eid] = Rect(cursor_x, cursor_y, w, h)
        cursor_x += w
        row_h = max(row_h, h)
    elements = [
        e if e.id not in locks else Element(
            e.id, e.min_width, e.max_width, e.min_height, e.max_height,
            kind=e.kind, locked=locks[e.id])
        for e in elements
    ]
    p = LayoutProblem(canvas=Canvas(cw, ch), elements=tuple(elements))
    return p


def eight_panel() -> LayoutProblem:
    """Eight-element dashboard used for first-solution latency checks."""
    mk = Element
    return LayoutProblem(canvas=Canvas(400.0, 300.0), elements=(
        mk("title", 400, 400, 30, 50, kind=Kind.HEADING),
        mk("menu", 60, 120, 150, 250, kind=Kind.OTHER),
        mk("chart1", 100, 200, 80, 140, kind=Kind.IMAGE),
        mk("chart2", 100, 200, 80, 140, kind=Kind.IMAGE),
        mk("table", 120, 260, 90, 160, kind=Kind.PARAGRAPH),
        mk("note", 80, 180, 40, 90, kind=Kind.PARAGRAPH),
        mk("cta", 60, 120, 30, 60, kind=Kind.BUTTON),
        mk("status", 400, 400, 20, 40, kind=Kind.OTHER),
    ))
