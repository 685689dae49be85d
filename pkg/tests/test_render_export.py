"""SVG rendering and LP-format export tests."""

from pathlib import Path

import pytest

import fixtures
import gridlayout as gl
from gridlayout import lpformat, milp, svg
from gridlayout.model import LayoutSolution, PlacedElement, SolutionStats

GOLDEN = Path(__file__).parent / "golden"


def sol(rects):
    placements = tuple(PlacedElement(eid, *r) for eid, r in rects.items())
    return LayoutSolution(placements=placements, stats=SolutionStats(4, 4, 0, 0, 0.0))


def test_single_element_svg_has_one_element_rect():
    p = fixtures.one_free()
    s = sol({"solo": (0, 0, 120, 120)})
    text = svg.render_svg(s, p)
    assert text.count("<rect") == 2  # canvas background + the element
    assert "<title>solo</title>" in text


def test_grid_overlay_draws_six_lines_and_hull():
    p = fixtures.grid4()
    s = sol({"e0": (0, 0, 100, 100), "e1": (100, 0, 200, 100),
             "e2": (0, 100, 100, 200), "e3": (100, 100, 200, 200)})
    text = svg.render_svg(s, p, overlay=True)
    assert text.count("<line") == 6
    assert text.count("<rect") == 1 + 4 + 1  # canvas + elements + hull


def test_gallery_concatenates_side_by_side():
    p = fixtures.two_free()
    s1 = sol({"a": (0, 0, 100, 200), "b": (100, 0, 200, 200)})
    s2 = sol({"a": (0, 0, 200, 100), "b": (0, 100, 200, 200)})
    text = svg.render_gallery([s1, s2], p)
    assert text.count("<g transform") == 2
    assert text.count("<title>a</title>") == 2


def test_svg_byte_stable():
    p = fixtures.two_free()
    s = sol({"a": (0, 0, 100.5, 200), "b": (100.5, 0, 200, 200)})
    assert svg.render_svg(s, p, overlay=True) == svg.render_svg(s, p, overlay=True)


def test_element_color_used_for_fill():
    import dataclasses
    p = fixtures.one_free()
    p = dataclasses.replace(p, elements=(
        dataclasses.replace(p.elements[0], color=(1, 2, 3)),))
    text = svg.render_svg(sol({"solo": (0, 0, 100, 100)}), p)
    assert "rgb(1,2,3)" in text


def test_lp_export_single_element():
    p = fixtures.one_free()
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    text = lpformat.export_lp(inst)
    stats = lpformat.check_lp(text)
    assert stats["sense"] == "Minimize"
    # No relation binaries for one element; alignment/outline binaries remain.
    assert "above" not in text and "before" not in text
    bounds_lines = [ln for ln in text.splitlines() if "<=" in ln and ":" not in ln]
    for role in ("L_solo", "R_solo", "T_solo", "B_solo", "W_solo", "H_solo"):
        assert any(role in ln for ln in bounds_lines)


def test_lp_export_two_elements_declares_pair_binaries():
    p = fixtures.two_free()
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    text = lpformat.export_lp(inst)
    binaries_section = text.split("Binaries")[1]
    pair_names = [tok for tok in binaries_section.split()
                  if tok.startswith(("above_", "before_"))]
    assert len(pair_names) == 4


def test_lp_lines_respect_column_limit_and_reparse():
    p = fixtures.five_template()
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    text = lpformat.export_lp(inst)
    assert max(len(line) for line in text.splitlines()) <= 255
    stats = lpformat.check_lp(text)
    assert stats["constraints"] == len(inst.constraints)
    assert stats["binaries"] == len(inst.binary_indices())


def test_lp_checker_rejects_garbage():
    with pytest.raises(lpformat.LpSyntaxError):
        lpformat.check_lp("Minimize\n obj: x\nSubject To\n c1: x ? 4\nEnd\n")
    with pytest.raises(lpformat.LpSyntaxError):
        lpformat.check_lp("Hello\n")
