"""LP solver tests: oracle agreement, duality, determinism."""

import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from gridlayout.simplex import (
    EQ,
    GE,
    LE,
    LpProblem,
    LpStatus,
    SimplexOptions,
    SolveCancelled,
    solve_lp_problem,
)


def make_lp(c, a, senses, b, lb, ub):
    return LpProblem(c=np.array(c, dtype=float),
                     a=sp.csc_matrix(np.atleast_2d(np.array(a, dtype=float)).reshape(len(b), len(c)) if len(b) else np.zeros((0, len(c)))),
                     senses=np.array(senses, dtype=int),
                     b=np.array(b, dtype=float),
                     lb=np.array(lb, dtype=float),
                     ub=np.array(ub, dtype=float))


def test_maximize_single_bounded_variable():
    # max x == min -x for x in [0, 1]
    lp = make_lp([-1.0], [], [], [], [0.0], [1.0])
    res = solve_lp_problem(lp)
    assert res.status is LpStatus.OPTIMAL
    assert res.objective == pytest.approx(-1.0)
    assert res.values[0] == pytest.approx(1.0)


def test_two_variable_covering():
    lp = make_lp([1.0, 1.0], [[1.0, 1.0]], [GE], [2.0], [0.0, 0.0], [5.0, 5.0])
    res = solve_lp_problem(lp)
    assert res.status is LpStatus.OPTIMAL
    assert res.objective == pytest.approx(2.0)


def test_infeasible_and_unbounded():
    lp = make_lp([1.0], [[1.0]], [GE], [10.0], [0.0], [1.0])
    assert solve_lp_problem(lp).status is LpStatus.INFEASIBLE
    lp = make_lp([-1.0], [[1.0]], [GE], [0.0], [0.0], [np.inf])
    assert solve_lp_problem(lp).status is LpStatus.UNBOUNDED


def brute_force_optimum(lp: LpProblem):
    """Enumerate candidate vertices: active sets drawn from rows and bounds."""
    m, n = lp.nrows, lp.ncols
    a = lp.a.toarray()
    rows = [(a[i], lp.b[i]) for i in range(m)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(lp.lb[j]):
            rows.append((e.copy(), lp.lb[j]))
        if np.isfinite(lp.ub[j]):
            rows.append((e.copy(), lp.ub[j]))
    best = None
    for active in itertools.combinations(range(len(rows)), n):
        mat = np.array([rows[i][0] for i in active])
        rhs = np.array([rows[i][1] for i in active])
        try:
            x = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError:
            continue
        if np.any(x < lp.lb - 1e-9) or np.any(x > lp.ub + 1e-9):
            continue
        ax = a @ x if m else np.zeros(0)
        ok = True
        for i in range(m):
            if lp.senses[i] == LE and ax[i] > lp.b[i] + 1e-9:
                ok = False
            if lp.senses[i] == GE and ax[i] < lp.b[i] - 1e-9:
                ok = False
            if lp.senses[i] == EQ and abs(ax[i] - lp.b[i]) > 1e-9:
                ok = False
        if not ok:
            continue
        val = float(lp.c @ x)
        if best is None or val < best:
            best = val
    return best


def random_bounded_lp(rng):
    n, m = 6, 4
    c = rng.normal(size=n).round(2)
    a = rng.normal(size=(m, n)).round(2)
    senses = rng.choice([LE, GE, EQ], size=m, p=[0.5, 0.4, 0.1])
    b = rng.normal(size=m).round(2) * 2
    lb = rng.uniform(-3, 0, n).round(1)
    ub = rng.uniform(0.5, 4, n).round(1)
    return make_lp(c, a, senses, b, lb, ub)


def test_random_lps_match_vertex_enumeration():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(60):
        lp = random_bounded_lp(rng)
        expected = brute_force_optimum(lp)
        res = solve_lp_problem(lp)
        if expected is None:
            assert res.status is LpStatus.INFEASIBLE
        else:
            assert res.status is LpStatus.OPTIMAL
            assert res.objective == pytest.approx(expected, abs=1e-6)
            checked += 1
    assert checked >= 20


def test_weak_duality_on_random_optima():
    rng = np.random.default_rng(7)
    seen = 0
    for _ in range(40):
        lp = random_bounded_lp(rng)
        res = solve_lp_problem(lp)
        if res.status is LpStatus.OPTIMAL:
            assert res.dual_objective <= res.objective + 1e-6 * (1 + abs(res.objective))
            seen += 1
    assert seen >= 15


def test_deterministic_pivot_sequences():
    rng = np.random.default_rng(99)
    for _ in range(10):
        lp = random_bounded_lp(rng)
        r1 = solve_lp_problem(lp)
        r2 = solve_lp_problem(lp)
        assert r1.status == r2.status
        assert r1.iterations == r2.iterations
        if r1.status is LpStatus.OPTIMAL:
            assert np.array_equal(r1.values, r2.values)


def test_feasibility_of_reported_optimum():
    rng = np.random.default_rng(5)
    for _ in range(25):
        lp = random_bounded_lp(rng)
        res = solve_lp_problem(lp)
        if res.status is not LpStatus.OPTIMAL:
            continue
        x = res.values
        assert np.all(x >= lp.lb - 1e-7) and np.all(x <= lp.ub + 1e-7)
        ax = lp.a @ x
        for i in range(lp.nrows):
            if lp.senses[i] == LE:
                assert ax[i] <= lp.b[i] + 1e-6
            elif lp.senses[i] == GE:
                assert ax[i] >= lp.b[i] - 1e-6
            else:
                assert ax[i] == pytest.approx(lp.b[i], abs=1e-6)


def test_warm_start_reproduces_optimum_quickly():
    rng = np.random.default_rng(11)
    lp = random_bounded_lp(rng)
    first = solve_lp_problem(lp)
    assert first.status is LpStatus.OPTIMAL
    again = solve_lp_problem(lp, basis=first.basis)
    assert again.status is LpStatus.OPTIMAL
    assert again.objective == pytest.approx(first.objective, abs=1e-9)
    assert again.iterations <= 2


def test_cooperative_cancellation():
    rng = np.random.default_rng(3)
    lp = random_bounded_lp(rng)
    opts = SimplexOptions(should_stop=lambda: True, check_every=1)
    with pytest.raises(SolveCancelled):
        solve_lp_problem(lp, options=opts)
