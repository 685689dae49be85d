"""Model-builder structure tests: variable counts, constraints, handles."""

import numpy as np
import pytest

import fixtures
from gridlayout import bnb, heuristics, milp
from gridlayout.model import Canvas, Element, LayoutProblem, Rect, VPref, validate_solution


def counts_for(n):
    p = LayoutProblem(canvas=Canvas(1000.0, 1000.0), elements=tuple(
        Element(f"e{i}", 10, 40, 10, 40) for i in range(n)))
    inst, _ = milp.build_full(p)
    return p, inst, inst.counts()


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_variable_count_formulas(n):
    _, _, counts = counts_for(n)
    assert counts.get("pair_binary", 0) == 2 * n * (n - 1)
    assert counts["geometric"] == 6 * n
    assert counts["alignment_binary"] == 4 * (n * n + n)


def test_pair_constraint_count_formula():
    for n in (1, 2, 3, 5):
        p, inst, _ = counts_for(n)
        pair_rows = [c for c in inst.constraints
                     if c.name.startswith(("pair_lo", "pair_hi", "sep_v", "sep_h",
                                           "force_h", "force_v"))]
        assert len(pair_rows) == 5 * n * (n - 1)


def test_single_element_core_model():
    p = LayoutProblem(canvas=Canvas(100.0, 100.0), elements=(Element("a", 10, 50, 10, 50),))
    inst = milp.build_core(p)
    assert inst.counts().get("pair_binary", 0) == 0
    assert inst.counts()["geometric"] == 6
    assert all(not c.name.startswith("pair") for c in inst.constraints)


def test_every_element_has_six_geometric_vars():
    p, inst, _ = counts_for(3)
    for e in p.elements:
        for role in ("L", "R", "T", "B", "W", "H"):
            assert inst.var(role, e.id).kind is milp.VarKind.CONTINUOUS
    ids = p.element_ids()
    for a in ids:
        for b in ids:
            if a != b:
                assert inst.var("above", a, b).kind is milp.VarKind.BINARY
                assert inst.var("before", a, b).kind is milp.VarKind.BINARY


def test_assignment_rows_sum_to_one():
    p, inst, _ = counts_for(3)
    assigns = [c for c in inst.constraints if c.name.startswith("assign")]
    assert len(assigns) == 4 * 3
    for c in assigns:
        assert c.sense is milp.Sense.EQ and c.rhs == 1.0


def test_locked_elements_fixed_by_equality_rows():
    p = LayoutProblem(canvas=Canvas(100.0, 100.0), elements=(
        Element("a", 10, 50, 10, 50, locked=Rect(5, 5, 20, 20)),
        Element("b", 10, 50, 10, 50),
    ))
    inst = milp.build_core(p)
    locks = [c for c in inst.constraints if c.name.startswith("lock")]
    assert len(locks) == 4
    assert {c.rhs for c in locks} == {5.0, 25.0}


def test_infeasible_lock_raises():
    p = LayoutProblem(canvas=Canvas(100.0, 100.0), elements=(
        Element("a", 10, 50, 10, 50, locked=Rect(80, 0, 30, 20)),))
    with pytest.raises(milp.InfeasibleLock):
        milp.build_core(p)


def test_header_pref_fixes_binaries():
    p = LayoutProblem(canvas=Canvas(300.0, 300.0), elements=(
        Element("h", 50, 300, 20, 60, v_pref=VPref.TOP),
        Element("a", 50, 200, 50, 200),
        Element("b", 50, 200, 50, 200),
    ))
    inst = milp.build_core(p)
    add = milp.add_placement_prefs(inst, p)
    fixed = [v for v in inst.vars if v.kind is milp.VarKind.BINARY and v.upper == 0.0]
    assert {v.name for v in fixed} == {"above(a,h)", "above(b,h)"}


def test_two_top_preferences_stay_feasible():
    p = LayoutProblem(canvas=Canvas(300.0, 300.0), elements=(
        Element("h1", 50, 300, 20, 300, v_pref=VPref.TOP),
        Element("h2", 50, 300, 20, 300, v_pref=VPref.TOP),
    ))
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    res = bnb.solve(inst, bnb.SolveConfig(candidates=heuristics.packed_candidates(inst)))
    assert res.status is bnb.MilpStatus.OPTIMAL
    sol = milp.decode_solution(inst, res.values)
    assert validate_solution(p, sol) == []


def test_enforce_signature_roundtrip():
    p = fixtures.two_free()
    inst, handles = milp.build_full(p)
    before = len(inst.constraints)
    handle = milp.enforce_signature(inst, 1, 0, band=0)
    assert len(inst.constraints) == before + 4
    handle.remove()
    assert len(inst.constraints) == before


def test_signature_enforcement_restricts_layouts():
    p = fixtures.two_free()
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    handle = milp.enforce_signature(inst, 1, 0, band=0)
    res = bnb.solve(inst, bnb.SolveConfig(candidates=heuristics.packed_candidates(inst)))
    assert res.status is bnb.MilpStatus.OPTIMAL
    sol = milp.decode_solution(inst, res.values)
    assert (sol.stats.gamma, sol.stats.pi) == (1, 0)  # stacked only
    handle.remove()
    # Beyond the reachable maximum the model must be infeasible.
    handle = milp.enforce_signature(inst, 2, 0, band=0)
    res = bnb.solve(inst, bnb.SolveConfig())
    assert res.status is bnb.MilpStatus.INFEASIBLE


def test_every_constraint_references_registered_vars():
    p, inst, _ = counts_for(4)
    nvars = len(inst.vars)
    for c in inst.constraints:
        assert c.terms
        for coef, var in c.terms:
            assert 0 <= var.index < nvars
            assert inst.vars[var.index] is var


def test_traversal_locked_distance():
    p = LayoutProblem(canvas=Canvas(100.0, 100.0), elements=(
        Element("a", 10, 10, 10, 10, locked=Rect(0, 0, 10, 10)),
        Element("b", 10, 10, 10, 10, locked=Rect(20, 0, 10, 10)),
    ), traversal=(fixtures.TraversalPair("a", "b", 1.0),))
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    res = bnb.solve(inst, bnb.SolveConfig(candidates=heuristics.packed_candidates(inst)))
    assert res.status is bnb.MilpStatus.OPTIMAL
    dx = res.values[inst.var("dx", 0).index]
    dy = res.values[inst.var("dy", 0).index]
    assert dx == pytest.approx(20.0, abs=1e-6)  # centers at 5 and 25
    assert dy == pytest.approx(0.0, abs=1e-6)


def test_free_pair_traversal_optimum():
    # Minimizing traversal alone: optimal center distance is the gutter plus
    # half of each element's extent along the cheaper axis (equal here).
    p = LayoutProblem(canvas=Canvas(100.0, 100.0), elements=(
        Element("a", 20, 20, 20, 20), Element("b", 30, 30, 30, 30),
    ), traversal=(fixtures.TraversalPair("a", "b", 1.0),), gutter=4.0)
    inst, handles = milp.build_full(p)
    terms = {v.index: coef for coef, v in handles.traversal.terms}
    inst.set_objective_terms("min", terms)
    res = bnb.solve(inst, bnb.SolveConfig(candidates=heuristics.packed_candidates(inst)))
    assert res.status is bnb.MilpStatus.OPTIMAL
    assert res.objective == pytest.approx(4.0 + (20 + 30) / 2, abs=1e-6)


def test_zero_weight_traversal_contributes_nothing():
    p = LayoutProblem(canvas=Canvas(100.0, 100.0), elements=(
        Element("a", 20, 20, 20, 20), Element("b", 30, 30, 20, 20),
    ), traversal=(fixtures.TraversalPair("a", "b", 0.0),))
    inst, handles = milp.build_full(p)
    assert all(coef == 0.0 for coef, _ in handles.traversal.terms)


def test_grouping_excludes_outsiders():
    p = LayoutProblem(canvas=Canvas(300.0, 120.0), elements=(
        Element("a", 50, 80, 50, 80),
        Element("b", 50, 80, 50, 80),
        Element("c", 50, 80, 50, 80),
    ), groups=(fixtures.Group("g", ("a", "b")),))
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    res = bnb.solve(inst, bnb.SolveConfig(candidates=heuristics.packed_candidates(inst),
                                          time_limit=30))
    assert res.values is not None
    sol = milp.decode_solution(inst, res.values)
    assert validate_solution(p, sol) == []
    from gridlayout.model import group_bbox
    box = group_bbox(sol, ["a", "b"])
    c = sol.placement("c")
    hgap = max(c.l - box.r, box.l - c.r)
    vgap = max(c.t - box.b, box.t - c.b)
    assert max(hgap, vgap) >= -1e-6  # outsider clear of the member bbox


def test_decoded_incumbents_always_validate():
    import random
    rng = random.Random(42)
    for _ in range(6):
        p = fixtures.fuzz_problem(rng, n=rng.randint(2, 4))
        inst, handles = milp.build_full(p)
        milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
        res = bnb.solve(inst, bnb.SolveConfig(
            candidates=heuristics.packed_candidates(inst), time_limit=10,
            branch_priority=milp.branch_priorities(inst)))
        if res.values is None:
            continue
        sol = milp.decode_solution(inst, res.values)
        assert validate_solution(p, sol) == []
        # Order binaries must agree with geometry on separated pairs.
        by_id = {pl.id: pl for pl in sol.placements}
        for a in p.element_ids():
            for b in p.element_ids():
                if a == b:
                    continue
                if round(res.values[inst.var("above", a, b).index]):
                    assert by_id[a].b <= by_id[b].t + p.tolerance() + p.gutter
                if round(res.values[inst.var("before", a, b).index]):
                    assert by_id[a].r <= by_id[b].l + p.tolerance() + p.gutter
