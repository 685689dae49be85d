"""LP text format export plus a small grammar checker for self-tests.

The writer emits the classic sections (Minimize/Maximize, Subject To,
Bounds, Binaries, End) with deterministic names and lines wrapped well
below the format's 255-character limit.
"""

from __future__ import annotations

import re
from typing import Optional

from .milp import MilpInstance, Sense, VarKind

_MAX_LINE = 255
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _sanitize(raw: str, index: int) -> str:
    clean = re.sub(r"[^A-Za-z0-9_]", "_", raw)
    if not clean or not re.match(r"[A-Za-z_]", clean) or clean[0] in "eE":
        clean = "v_" + clean
    return f"{clean}_{index}"


def var_names(inst: MilpInstance) -> list[str]:
    return [_sanitize(v.name, v.index) for v in inst.vars]


def _wrap(parts: list[str], indent: str = "      ") -> list[str]:
    lines: list[str] = []
    cur = ""
    for part in parts:
        attempt = part if not cur else f"{cur} {part}"
        if len(attempt) > _MAX_LINE - len(indent):
            lines.append(cur)
            cur = part
        else:
            cur = attempt
    if cur:
        lines.append(cur)
    return [(indent if i else "") + ln for i, ln in enumerate(lines)]


def _term_text(coef: float, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    coef_txt = "" if mag == 1.0 else (f"{mag:.12g} ")
    lead = f"{sign} " if sign and not first else ("-" if sign and first else "")
    return f"{lead}{coef_txt}{name}".strip()


def _expr(terms: list[tuple[float, int]], names: list[str]) -> list[str]:
    parts = []
    for k, (coef, idx) in enumerate(terms):
        parts.append(_term_text(coef, names[idx], first=(k == 0)))
    return parts


def export_lp(inst: MilpInstance, name: str = "layout") -> str:
    names = var_names(inst)
    lines: list[str] = [f"\\ {name}"]
    sense = "Minimize" if inst.objective_sense == "min" else "Maximize"
    lines.append(sense)
    obj_terms = sorted(inst.objective.items())
    if obj_terms:
        parts = _expr([(c, i) for i, c in obj_terms], names)
        lines.extend(_wrap(["obj:"] + parts, indent="      "))
    else:
        lines.append(" obj: 0 " + names[0])
    lines.append("Subject To")
    for k, con in enumerate(inst.constraints):
        rel = {Sense.LE: "<=", Sense.EQ: "=", Sense.GE: ">="}[con.sense]
        cname = _sanitize(con.name or "c", k)
        parts = _expr([(coef, var.index) for coef, var in con.terms], names)
        parts += [rel, f"{con.rhs:.12g}"]
        lines.extend(_wrap([f" {cname}:"] + parts))
    lines.append("Bounds")
    for v in inst.vars:
        nm = names[v.index]
        if v.kind is VarKind.BINARY:
            if v.lower == v.upper:
                # Preference-fixed binaries keep their pinned value.
                lines.append(f" {v.lower:.12g} <= {nm} <= {v.upper:.12g}")
            continue
        lo = f"{v.lower:.12g}" if v.lower != float("-inf") else "-inf"
        hi = f"{v.upper:.12g}" if v.upper != float("inf") else "+inf"
        if v.lower == float("-inf") and v.upper == float("inf"):
            lines.append(f" {nm} free")
        else:
            lines.append(f" {lo} <= {nm} <= {hi}")
    binaries = [names[v.index] for v in inst.vars if v.kind is VarKind.BINARY]
    if binaries:
        lines.append("Binaries")
        lines.extend(_wrap([" "] + binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


class LpSyntaxError(ValueError):
    pass


def check_lp(text: str) -> dict:
    """Parse an LP document; returns section statistics or raises.

    This is a self-consistency checker for exported files, not a general
    reader: it accepts the section layout and expression grammar the writer
    produces (which is standard LP format).
    """
    lines = [ln for ln in text.splitlines()]
    pos = 0

    def skip_blank_comments():
        nonlocal pos
        while pos < len(lines) and (not lines[pos].strip() or lines[pos].lstrip().startswith("\\")):
            pos += 1

    skip_blank_comments()
    if pos >= len(lines) or lines[pos].strip() not in ("Minimize", "Maximize"):
        raise LpSyntaxError("expected Minimize or Maximize header")
    sense = lines[pos].strip()
    pos += 1

    def gather_until(stops: set[str]) -> list[str]:
        nonlocal pos
        chunk = []
        while pos < len(lines) and lines[pos].strip() not in stops:
            if lines[pos].strip() and not lines[pos].lstrip().startswith("\\"):
                chunk.append(lines[pos])
            pos += 1
        return chunk

    obj_chunk = gather_until({"Subject To", "such that", "st", "s.t."})
    if pos >= len(lines):
        raise LpSyntaxError("missing Subject To section")
    pos += 1
    con_chunk = gather_until({"Bounds", "Binaries", "Generals", "End"})

    expr_re = re.compile(
        r"^(?:[A-Za-z_][A-Za-z0-9_]*\s*:)?\s*"
        r"(?:[+-]?\s*(?:\d+(?:\.\d*)?(?:[eE][+-]?\d+)?\s*)?[A-Za-z_][A-Za-z0-9_]*\s*)+"
        r"(?:(<=|>=|=)\s*[+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*$")

    def check_logical(chunk: list[str], need_rel: bool, what: str) -> int:
        count = 0
        logical: list[str] = []
        for ln in chunk:
            # Writer convention: wrapped continuations are deeply indented.
            if ln.startswith("  ") and logical:
                logical[-1] += " " + ln.strip()
            else:
                logical.append(ln.strip())
        for entry in logical:
            m = expr_re.match(entry)
            if not m:
                raise LpSyntaxError(f"bad {what} syntax: {entry[:80]!r}")
            if need_rel and not m.group(1):
                raise LpSyntaxError(f"constraint missing relation: {entry[:80]!r}")
            count += 1
        return count

    n_obj = check_logical(obj_chunk, need_rel=False, what="objective")
    n_cons = check_logical(con_chunk, need_rel=True, what="constraint")

    bound_re = re.compile(
        r"^\s*(?:[+-]?(?:\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|inf)\s*<=\s*)?"
        r"[A-Za-z_][A-Za-z0-9_]*"
        r"(?:\s*<=\s*[+-]?(?:\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|inf))?\s*$|"
        r"^\s*[A-Za-z_][A-Za-z0-9_]*\s+free\s*$")
    n_bounds = 0
    n_bin = 0
    saw_end = False
    while pos < len(lines):
        head = lines[pos].strip()
        pos += 1
        if head == "Bounds":
            while pos < len(lines) and lines[pos].strip() not in ("Binaries", "Generals", "End"):
                if lines[pos].strip():
                    if not bound_re.match(lines[pos]):
                        raise LpSyntaxError(f"bad bound: {lines[pos][:80]!r}")
                    n_bounds += 1
                pos += 1
        elif head == "Binaries":
            while pos < len(lines) and lines[pos].strip() not in ("Bounds", "Generals", "End"):
                for tok in lines[pos].split():
                    if not _NAME_RE.fullmatch(tok):
                        raise LpSyntaxError(f"bad binary name: {tok!r}")
                    n_bin += 1
                pos += 1
        elif head == "End":
            saw_end = True
            break
        elif not head:
            continue
        else:
            raise LpSyntaxError(f"unexpected section: {head!r}")
    if not saw_end:
        raise LpSyntaxError("missing End")
    return {"sense": sense, "objectives": n_obj, "constraints": n_cons,
            "bounds": n_bounds, "binaries": n_bin}
