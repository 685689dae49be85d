"""JSON document round trips, schema rejection, golden stability."""

import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

import fixtures
from gridlayout import jsonio
from gridlayout.model import (
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
    VPref,
)

GOLDEN = Path(__file__).parent / "golden"


def test_golden_problem_roundtrips_byte_identically():
    text = (GOLDEN / "five_template.problem.json").read_text(encoding="utf-8")
    p = jsonio.problem_from_dict(json.loads(text))
    assert jsonio.dumps(jsonio.problem_to_dict(p)) == text


def test_missing_canvas_reports_path():
    with pytest.raises(jsonio.ParseError) as err:
        jsonio.problem_from_dict({"elements": [
            {"id": "a", "minW": 1, "maxW": 2, "minH": 1, "maxH": 2}]})
    assert err.value.path == "$.canvas"


def test_unknown_field_reports_path():
    doc = {"canvas": {"width": 10, "height": 10},
           "elements": [{"id": "a", "minW": 1, "maxW": 2, "minH": 1, "maxH": 2, "zap": 1}]}
    with pytest.raises(jsonio.ParseError) as err:
        jsonio.problem_from_dict(doc)
    assert "$.elements[0]" in err.value.path


def test_json_syntax_error_carries_position():
    from gridlayout.jsonio import _parse_json
    with pytest.raises(jsonio.ParseError) as err:
        _parse_json("{\n  \"canvas\": ,\n}")
    assert err.value.line == 2


def test_twelve_gallery_fixture_loads_clean():
    from gridlayout.model import validate_problem
    text = (GOLDEN / "twelve_gallery.problem.json").read_text(encoding="utf-8")
    p = jsonio.problem_from_dict(json.loads(text))
    assert len(p.elements) == 12
    assert validate_problem(p) == []


def test_number_formatting_limits_fraction_digits():
    p = LayoutProblem(canvas=Canvas(100.123456789, 100.0),
                      elements=(Element("a", 10.000000004, 20, 10, 20),))
    doc = jsonio.problem_to_dict(p)
    assert doc["canvas"]["width"] == 100.123457
    assert doc["elements"][0]["minW"] == 10


ids = st.lists(st.text(alphabet="abcdefgh", min_size=1, max_size=4),
               min_size=1, max_size=5, unique=True)


@st.composite
def problems(draw):
    names = draw(ids)
    cw = draw(st.integers(50, 400))
    ch = draw(st.integers(50, 400))
    elements = []
    for name in names:
        min_w = draw(st.integers(5, 40))
        min_h = draw(st.integers(5, 40))
        locked = None
        if draw(st.booleans()) and min_w < cw and min_h < ch:
            locked = Rect(0.0, 0.0, float(min_w), float(min_h))
        elements.append(Element(
            name, float(min_w), float(draw(st.integers(min_w, 50))),
            float(min_h), float(draw(st.integers(min_h, 50))),
            kind=draw(st.sampled_from(list(Kind))),
            color=(draw(st.integers(0, 255)), 0, 10) if draw(st.booleans()) else None,
            locked=locked,
            h_pref=draw(st.sampled_from(list(HPref))),
            v_pref=draw(st.sampled_from(list(VPref))),
        ))
    groups = ()
    if len(names) >= 2 and draw(st.booleans()):
        groups = (Group("g0", tuple(names[:2])),)
    traversal = ()
    if len(names) >= 2 and draw(st.booleans()):
        traversal = (TraversalPair(names[0], names[1], float(draw(st.integers(0, 5)))),)
    return LayoutProblem(
        canvas=Canvas(float(cw), float(ch)),
        elements=tuple(elements), groups=groups, traversal=traversal,
        gutter=float(draw(st.integers(0, 8))),
        weights=ObjectiveWeights(*[float(draw(st.integers(0, 3))) for _ in range(3)]),
    )


@settings(max_examples=60, deadline=None)
@given(problems())
def test_problem_roundtrip_structural_equality(p):
    assert jsonio.problem_from_dict(jsonio.problem_to_dict(p)) == p


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 500), st.floats(0, 500),
                          st.floats(0.1, 100), st.floats(0.1, 100)),
                min_size=1, max_size=5))
def test_solution_roundtrip(rects):
    placements = tuple(
        PlacedElement(f"e{i}", round(l, 3), round(t, 3), round(l + w, 3), round(t + h, 3))
        for i, (l, t, w, h) in enumerate(rects))
    s = LayoutSolution(placements=placements,
                       stats=SolutionStats(5, 6, 1, 2, -3.5, 88.25))
    assert jsonio.solution_from_dict(jsonio.solution_to_dict(s)) == s


def test_save_and_load_files(tmp_path):
    p = fixtures.two_free()
    path = tmp_path / "p.json"
    jsonio.save_problem(p, path)
    assert jsonio.load_problem(path) == p
