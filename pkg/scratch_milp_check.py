"""Dev scratch: end-to-end build/solve/decode on tiny fixtures."""
import time

import numpy as np

from gridlayout import bnb, heuristics, milp, scoring
from gridlayout.model import Canvas, Element, LayoutProblem, validate_problem, validate_solution


def make(n, canvas=200.0, mn=100.0, mx=200.0):
    els = tuple(Element(f"e{i}", mn, mx, mn, mx) for i in range(n))
    return LayoutProblem(canvas=Canvas(canvas, canvas), elements=els)


def run(p, mode, **kw):
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, mode, handles)
    cfg = bnb.SolveConfig(candidates=heuristics.packed_candidates(inst), **kw)
    t = time.monotonic()
    res = bnb.solve(inst, cfg)
    dt = time.monotonic() - t
    print(f"n={len(p.elements)} {mode.value}: status={res.status.value} obj={res.objective} "
          f"bound={res.bound:.2f} nodes={res.nodes} {dt:.2f}s")
    if res.values is not None:
        sol = milp.decode_solution(inst, res.values)
        viols = validate_solution(p, sol)
        print("   stats:", sol.stats, "violations:", viols)
        assert not viols
    return res


p1 = make(1)
assert validate_problem(p1) == []
run(p1, milp.ObjectiveMode.MIN_EPSILON)
run(p1, milp.ObjectiveMode.MAX_RECT)

p2 = make(2)
r = run(p2, milp.ObjectiveMode.MIN_EPSILON)
assert r.objective == 6, r.objective
r = run(p2, milp.ObjectiveMode.MAX_GAMMA)
assert r.objective == 1, r.objective
r = run(p2, milp.ObjectiveMode.MIN_GAMMA)
assert r.objective == 0, r.objective
r = run(p2, milp.ObjectiveMode.MAX_RECT)
assert r.objective == 6, r.objective

p4 = make(4)
r = run(p4, milp.ObjectiveMode.MIN_EPSILON)
print("expect eps=8 for forced 2x2:", r.objective)
inst, handles = milp.build_full(p4)
milp.set_objective(inst, milp.ObjectiveMode.MIN_EPSILON, handles)
res = bnb.solve(inst, bnb.SolveConfig(candidates=heuristics.packed_candidates(inst)))
sol = milp.decode_solution(inst, res.values)
print("2x2 lines:", scoring.grid_line_count(sol, p4.tolerance()),
      "cases:", scoring.adherence_cases_of(sol.placements, p4.tolerance()))
