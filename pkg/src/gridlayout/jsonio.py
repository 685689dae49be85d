"""Problem and solution JSON documents: schema-validated, losslessly ordered.

Documents reject unknown fields, reporting the offending path.  Output key
order is fixed and numbers are rounded to at most six fractional digits so
that repeated runs produce byte-identical files.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Optional, Union

import jsonschema

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
    VPref,
)

_SCHEMA_DIR = Path(__file__).resolve().parent / "schemas"


class ParseError(ValueError):
    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        detail = message
        if path is not None:
            detail = f"{message} at {path}"
        if line is not None:
            detail = f"{detail} (line {line}, column {column})"
        super().__init__(detail)
        self.path = path
        self.line = line
        self.column = column


def _load_schema(name: str) -> dict:
    with open(_SCHEMA_DIR / name, encoding="utf-8") as fh:
        return json.load(fh)


_PROBLEM_SCHEMA = _load_schema("problem.schema.json")
_SOLUTION_SCHEMA = _load_schema("solution.schema.json")


def _parse_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path="$",
                         line=exc.lineno, column=exc.colno) from exc


def _check_schema(data: Any, schema: dict) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        path = err.json_path
        missing = re.match(r"'([^']+)' is a required property", err.message)
        if missing:
            path = f"{path}.{missing.group(1)}" if path != "$" else f"$.{missing.group(1)}"
        raise ParseError(err.message, path=path)


def problem_from_dict(data: dict) -> LayoutProblem:
    _check_schema(data, _PROBLEM_SCHEMA)
    elements = []
    for entry in data["elements"]:
        locked = None
        if entry.get("locked") is not None:
            lk = entry["locked"]
            locked = Rect(float(lk["l"]), float(lk["t"]), float(lk["w"]), float(lk["h"]))
        color = tuple(entry["color"]) if entry.get("color") is not None else None
        elements.append(Element(
            id=entry["id"],
            min_width=float(entry["minW"]), max_width=float(entry["maxW"]),
            min_height=float(entry["minH"]), max_height=float(entry["maxH"]),
            kind=Kind(entry.get("kind", "other")),
            color=color,
            locked=locked,
            h_pref=HPref(entry.get("hPref", "none")),
            v_pref=VPref(entry.get("vPref", "none")),
        ))
    groups = tuple(Group(id=g["id"], members=tuple(g["members"]))
                   for g in data.get("groups", []))
    traversal = tuple(TraversalPair(a=t["a"], b=t["b"], weight=float(t.get("weight", 1.0)))
                      for t in data.get("traversal", []))
    wd = data.get("weights", {})
    weights = ObjectiveWeights(
        alignment=float(wd.get("alignment", 1.0)),
        rectangularity=float(wd.get("rectangularity", 1.0)),
        traversal=float(wd.get("traversal", 1.0)),
    )
    return LayoutProblem(
        canvas=Canvas(float(data["canvas"]["width"]), float(data["canvas"]["height"])),
        elements=tuple(elements),
        groups=groups,
        traversal=traversal,
        gutter=float(data.get("gutter", 0.0)),
        weights=weights,
    )


def problem_to_dict(p: LayoutProblem) -> dict:
    elements = []
    for e in p.elements:
        entry: dict[str, Any] = {
            "id": e.id,
            "kind": e.kind.value,
            "minW": _num(e.min_width), "maxW": _num(e.max_width),
            "minH": _num(e.min_height), "maxH": _num(e.max_height),
        }
        if e.color is not None:
            entry["color"] = list(e.color)
        if e.locked is not None:
            entry["locked"] = {"l": _num(e.locked.l), "t": _num(e.locked.t),
                               "w": _num(e.locked.w), "h": _num(e.locked.h)}
        entry["hPref"] = e.h_pref.value
        entry["vPref"] = e.v_pref.value
        elements.append(entry)
    doc: dict[str, Any] = {
        "canvas": {"width": _num(p.canvas.width), "height": _num(p.canvas.height)},
        "gutter": _num(p.gutter),
        "elements": elements,
    }
    if p.groups:
        doc["groups"] = [{"id": g.id, "members": list(g.members)} for g in p.groups]
    if p.traversal:
        doc["traversal"] = [{"a": t.a, "b": t.b, "weight": _num(t.weight)} for t in p.traversal]
    doc["weights"] = {
        "alignment": _num(p.weights.alignment),
        "rectangularity": _num(p.weights.rectangularity),
        "traversal": _num(p.weights.traversal),
    }
    return doc


def solution_from_dict(data: dict) -> LayoutSolution:
    _check_schema(data, _SOLUTION_SCHEMA)
    placements = tuple(
        PlacedElement(pl["id"], float(pl["l"]), float(pl["t"]), float(pl["r"]), float(pl["b"]))
        for pl in data["placements"])
    st = data["stats"]
    stats = SolutionStats(
        grid_lines=int(st["gridLines"]),
        rect_cases=int(st["rectCases"]),
        gamma=int(st["gamma"]),
        pi=int(st["pi"]),
        objective=float(st["objective"]),
        optimality_pct=None if st.get("optimalityPct") is None else float(st["optimalityPct"]),
    )
    return LayoutSolution(placements=placements, stats=stats)


def solution_to_dict(s: LayoutSolution) -> dict:
    return {
        "placements": [
            {"id": pl.id, "l": _num(pl.l), "t": _num(pl.t), "r": _num(pl.r), "b": _num(pl.b)}
            for pl in s.placements
        ],
        "stats": {
            "gridLines": s.stats.grid_lines,
            "rectCases": s.stats.rect_cases,
            "gamma": s.stats.gamma,
            "pi": s.stats.pi,
            "objective": _num(s.stats.objective),
            "optimalityPct": None if s.stats.optimality_pct is None else _num(s.stats.optimality_pct),
        },
    }


def _num(v: float) -> Union[int, float]:
    """Numbers carry at most six fractional digits; integral values stay short."""
    r = round(float(v), 6)
    if r == int(r):
        return int(r)
    return r


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def load_problem(path: Union[str, Path]) -> LayoutProblem:
    text = Path(path).read_text(encoding="utf-8")
    return problem_from_dict(_parse_json(text))


def save_problem(p: LayoutProblem, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(problem_to_dict(p)), encoding="utf-8")


def load_solution(path: Union[str, Path]) -> LayoutSolution:
    text = Path(path).read_text(encoding="utf-8")
    return solution_from_dict(_parse_json(text))


def save_solution(s: LayoutSolution, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(solution_to_dict(s)), encoding="utf-8")
