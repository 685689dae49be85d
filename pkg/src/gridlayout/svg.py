"""SVG 1.1 wireframe rendering for layouts.

Hand-assembled markup keeps the output byte-stable for golden tests.  Fills
come from element colors with a fallback palette per element kind.
"""

from __future__ import annotations

from typing import Optional, Sequence

from . import scoring
from .model import Kind, LayoutProblem, LayoutSolution

KIND_FILL = {
    Kind.HEADING: (52, 101, 164),
    Kind.PARAGRAPH: (186, 189, 182),
    Kind.IMAGE: (233, 185, 110),
    Kind.BUTTON: (115, 210, 22),
    Kind.OTHER: (114, 159, 207),
}


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return s.rstrip("0").rstrip(".") if "." in s else s


def _rgb(color: tuple[int, int, int]) -> str:
    return f"rgb({color[0]},{color[1]},{color[2]})"


def render_svg(s: LayoutSolution, p: LayoutProblem, overlay: bool = False,
               scale: float = 1.0) -> str:
    """One rect per element; optional grid-line and outline overlay."""
    w = p.canvas.width * scale
    h = p.canvas.height * scale
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(w)}" height="{_fmt(h)}" viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
        f'  <rect x="0" y="0" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'fill="white" stroke="#888" stroke-width="1"/>',
    ]
    by_id = {e.id: e for e in p.elements}
    for pl in s.placements:
        e = by_id[pl.id]
        fill = _rgb(e.color if e.color is not None else KIND_FILL[e.kind])
        out.append(
            f'  <rect x="{_fmt(pl.l * scale)}" y="{_fmt(pl.t * scale)}" '
            f'width="{_fmt(pl.width * scale)}" height="{_fmt(pl.height * scale)}" '
            f'fill="{fill}" fill-opacity="0.85" stroke="#2e3436" stroke-width="1">'
            f'<title>{pl.id}</title></rect>'
        )
    if overlay:
        tol = p.tolerance()
        xs = sorted({round(v / max(tol, 1e-12)) * tol for pl in s.placements for v in (pl.l, pl.r)})
        ys = sorted({round(v / max(tol, 1e-12)) * tol for pl in s.placements for v in (pl.t, pl.b)})
        for x in xs:
            out.append(f'  <line x1="{_fmt(x * scale)}" y1="0" x2="{_fmt(x * scale)}" '
                       f'y2="{_fmt(h)}" stroke="#cc0000" stroke-width="0.5" stroke-dasharray="4,3"/>')
        for y in ys:
            out.append(f'  <line x1="0" y1="{_fmt(y * scale)}" x2="{_fmt(w)}" '
                       f'y2="{_fmt(y * scale)}" stroke="#cc0000" stroke-width="0.5" stroke-dasharray="4,3"/>')
        sro_l = min(pl.l for pl in s.placements) * scale
        sro_t = min(pl.t for pl in s.placements) * scale
        sro_r = max(pl.r for pl in s.placements) * scale
        sro_b = max(pl.b for pl in s.placements) * scale
        out.append(
            f'  <rect x="{_fmt(sro_l)}" y="{_fmt(sro_t)}" width="{_fmt(sro_r - sro_l)}" '
            f'height="{_fmt(sro_b - sro_t)}" fill="none" stroke="#204a87" '
            f'stroke-width="1.5" stroke-dasharray="8,4"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_gallery(solutions: Sequence[LayoutSolution], p: LayoutProblem,
                   overlay: bool = False, scale: float = 1.0,
                   padding: float = 12.0) -> str:
    """Solutions side by side in one SVG, in the given order."""
    if not solutions:
        return ('<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                'width="0" height="0"/>\n')
    w = p.canvas.width * scale
    h = p.canvas.height * scale
    total_w = len(solutions) * w + (len(solutions) + 1) * padding
    total_h = h + 2 * padding
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(total_w)}" height="{_fmt(total_h)}" '
        f'viewBox="0 0 {_fmt(total_w)} {_fmt(total_h)}">'
    ]
    for i, sol in enumerate(solutions):
        x = padding + i * (w + padding)
        inner = render_svg(sol, p, overlay=overlay, scale=scale)
        body = "\n".join(inner.splitlines()[1:-1])
        out.append(f'  <g transform="translate({_fmt(x)},{_fmt(padding)})">')
        out.append(body)
        out.append("  </g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
