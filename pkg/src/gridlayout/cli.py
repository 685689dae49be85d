"""Command-line interface.

Exit codes: 0 success, 1 violations or infeasible problems, 2 usage and
parse errors.  With --json all machine-readable output goes to stdout and
diagnostics to stderr.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import bnb, diversifier as dv, jsonio, lpformat, milp, scoring, svg
from .model import LayoutProblem, validate_problem, validate_solution


class _Ctx:
    def __init__(self):
        self.time_limit: Optional[float] = None
        self.band = 0
        self.grid_points = 3
        self.gutter: Optional[float] = None
        self.quiet = False
        self.json_out = False

    def config(self, count: int = 5) -> dv.DiversifyConfig:
        return dv.DiversifyConfig(count=count, grid_points=self.grid_points,
                                  band=self.band, per_solve=self.time_limit)

    def log(self, message: str) -> None:
        if not self.quiet:
            click.echo(message, err=True)

    def emit(self, payload, human: str) -> None:
        if self.json_out:
            click.echo(json.dumps(payload, indent=2))
        elif human:
            click.echo(human)


pass_ctx = click.make_pass_decorator(_Ctx)


@click.group()
@click.option("--time-limit", type=float, default=5.0, show_default=True,
              help="Per-solve time limit in seconds (0 disables the limit).")
@click.option("--band", type=int, default=0, show_default=True,
              help="Signature band for diversify/nearby point enforcement.")
@click.option("--grid-points", type=int, default=3, show_default=True,
              help="Signature grid resolution per axis.")
@click.option("--gutter", type=float, default=None,
              help="Override the problem's minimum element spacing.")
@click.option("--quiet", is_flag=True, help="Suppress progress logs on stderr.")
@click.option("--json", "json_out", is_flag=True,
              help="Machine-readable JSON on stdout; logs stay on stderr.")
@click.pass_context
def main(ctx, time_limit, band, grid_points, gutter, quiet, json_out):
    """Grid layout engine: validate, solve and diversify wireframe layouts."""
    obj = _Ctx()
    obj.time_limit = None if time_limit is not None and time_limit <= 0 else time_limit
    obj.band = band
    obj.grid_points = grid_points
    obj.gutter = gutter
    obj.quiet = quiet
    obj.json_out = json_out
    ctx.obj = obj


def _load_problem(ctx: _Ctx, path: str) -> LayoutProblem:
    try:
        p = jsonio.load_problem(path)
    except FileNotFoundError as exc:
        raise click.exceptions.UsageError(f"cannot read {path}: {exc}")
    except jsonio.ParseError as exc:
        raise click.exceptions.UsageError(f"{path}: {exc}")
    if ctx.gutter is not None:
        p = dataclasses.replace(p, gutter=ctx.gutter)
    return p


def _load_solution(path: str):
    try:
        return jsonio.load_solution(path)
    except FileNotFoundError as exc:
        raise click.exceptions.UsageError(f"cannot read {path}: {exc}")
    except jsonio.ParseError as exc:
        raise click.exceptions.UsageError(f"{path}: {exc}")


def _violations_payload(violations) -> list[dict]:
    return [{"code": v.code, "subject": v.subject, "message": v.message} for v in violations]


@main.command()
@click.argument("problem", type=click.Path())
@pass_ctx
def validate(ctx: _Ctx, problem):
    """Check problem well-formedness; exit 1 when violations exist."""
    p = _load_problem(ctx, problem)
    violations = validate_problem(p)
    ctx.emit({"violations": _violations_payload(violations)},
             "\n".join(str(v) for v in violations) or "ok")
    if violations:
        sys.exit(1)


def _solve_guarded(ctx: _Ctx, fn):
    try:
        return fn()
    except dv.InfeasibleProblem as exc:
        ctx.emit({"error": "InfeasibleProblem", "message": str(exc)}, f"infeasible: {exc}")
        sys.exit(1)
    except dv.TimeBudgetExhausted as exc:
        if getattr(exc, "partial", None):
            return exc.partial
        ctx.emit({"error": "TimeBudgetExhausted", "message": str(exc)}, f"budget exhausted: {exc}")
        sys.exit(1)


@main.command()
@click.argument("problem", type=click.Path())
@click.option("-o", "--output", type=click.Path(), default=None, help="Solution JSON path.")
@pass_ctx
def solve(ctx: _Ctx, problem, output):
    """Solve for one best-effort layout under the composite objective."""
    p = _load_problem(ctx, problem)
    bad = validate_problem(p)
    if bad:
        ctx.emit({"violations": _violations_payload(bad)}, "\n".join(str(v) for v in bad))
        sys.exit(1)
    sol = _solve_guarded(ctx, lambda: dv.solve_single(p, ctx.config()))
    doc = jsonio.solution_to_dict(sol)
    if output:
        Path(output).write_text(jsonio.dumps(doc), encoding="utf-8")
        ctx.log(f"wrote {output}")
    ctx.emit(doc, "" if output else jsonio.dumps(doc).rstrip("\n"))


def _run_pool(ctx: _Ctx, problem, count, out_prefix, runner, label):
    p = _load_problem(ctx, problem)
    bad = validate_problem(p)
    if bad:
        ctx.emit({"violations": _violations_payload(bad)}, "\n".join(str(v) for v in bad))
        sys.exit(1)
    sols = _solve_guarded(ctx, lambda: runner(p))
    written = []
    for i, sol in enumerate(sols, start=1):
        path = f"{out_prefix}-{i}.json"
        Path(path).write_text(jsonio.dumps(jsonio.solution_to_dict(sol)), encoding="utf-8")
        written.append(path)
        ctx.log(f"wrote {path}")
    payload = {
        label: [jsonio.solution_to_dict(s) for s in sols],
        "files": written,
    }
    ctx.emit(payload, f"{len(sols)} solution(s) -> {out_prefix}-*.json")
    if not sols:
        sys.exit(1)


@main.command(name="diversify")
@click.argument("problem", type=click.Path())
@click.option("-k", "--count", type=int, default=5, show_default=True)
@click.option("--out-prefix", default="solution", show_default=True)
@pass_ctx
def diversify_cmd(ctx: _Ctx, problem, count, out_prefix):
    """Generate up to K mutually distinct layouts spanning the design space."""
    _run_pool(ctx, problem, count, out_prefix,
              lambda p: dv.diversify(p, ctx.config(count)), "solutions")


@main.command()
@click.argument("problem", type=click.Path())
@click.option("-k", "--count", type=int, default=5, show_default=True)
@click.option("--out-prefix", default="completion", show_default=True)
@pass_ctx
def complete(ctx: _Ctx, problem, count, out_prefix):
    """Complete a partially locked design; locked rectangles stay put."""
    _run_pool(ctx, problem, count, out_prefix,
              lambda p: dv.complete_partial(p, count, ctx.config(count)), "solutions")


@main.command()
@click.argument("problem", type=click.Path())
@click.option("--seed", type=click.Path(), required=True, help="Seed solution JSON.")
@click.option("--radius", type=int, default=2, show_default=True)
@click.option("-k", "--count", type=int, default=5, show_default=True)
@click.option("--out-prefix", default="nearby", show_default=True)
@pass_ctx
def nearby(ctx: _Ctx, problem, seed, radius, count, out_prefix):
    """Find alternatives within a signature-distance radius of a seed layout."""
    seed_sol = _load_solution(seed)
    _run_pool(ctx, problem, count, out_prefix,
              lambda p: dv.nearby(p, seed_sol, radius, count, ctx.config(count)), "solutions")


@main.command()
@click.argument("problem", type=click.Path())
@click.argument("solution", type=click.Path())
@click.option("--with-optimality", is_flag=True,
              help="Run the two reference solves and report the optimality percentage.")
@pass_ctx
def score(ctx: _Ctx, problem, solution, with_optimality):
    """Recompute geometric metrics of a solution; exit 1 if it is invalid."""
    p = _load_problem(ctx, problem)
    sol = _load_solution(solution)
    try:
        violations = validate_solution(p, sol)
    except Exception as exc:
        raise click.exceptions.UsageError(str(exc))
    ref = None
    if with_optimality:
        ref = _solve_guarded(ctx, lambda: dv.optimality_refs(p, ctx.config()))
    report = scoring.score(p, sol, ref)
    payload = {
        "gridLines": report.grid_lines,
        "rectCases": report.rect_cases,
        "gamma": report.gamma,
        "pi": report.pi,
        "epsilon": report.epsilon,
        "objective": report.objective,
        "optimalityPct": report.optimality_pct,
        "violations": _violations_payload(violations),
    }
    ctx.emit(payload, json.dumps(payload, indent=2))
    if violations:
        sys.exit(1)


@main.command()
@click.argument("problem", type=click.Path())
@click.argument("solutions", type=click.Path(), nargs=-1, required=True)
@click.option("--svg", "svg_out", type=click.Path(), required=True, help="Output SVG path.")
@click.option("--overlay", is_flag=True, help="Draw grid lines and the outline hull.")
@pass_ctx
def render(ctx: _Ctx, problem, solutions, svg_out, overlay):
    """Render one solution (or a gallery of several) to SVG."""
    p = _load_problem(ctx, problem)
    sols = [_load_solution(s) for s in solutions]
    if len(sols) == 1:
        text = svg.render_svg(sols[0], p, overlay=overlay)
    else:
        text = svg.render_gallery(sols, p, overlay=overlay)
    Path(svg_out).write_text(text, encoding="utf-8")
    ctx.log(f"wrote {svg_out}")
    ctx.emit({"file": svg_out}, "")


@main.command(name="export-lp")
@click.argument("problem", type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True)
@pass_ctx
def export_lp(ctx: _Ctx, problem, output):
    """Export the full optimisation model in LP text format."""
    p = _load_problem(ctx, problem)
    bad = validate_problem(p)
    if bad:
        ctx.emit({"violations": _violations_payload(bad)}, "\n".join(str(v) for v in bad))
        sys.exit(1)
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    Path(output).write_text(lpformat.export_lp(inst), encoding="utf-8")
    ctx.log(f"wrote {output}")
    ctx.emit({"file": output}, "")


if __name__ == "__main__":
    main()
