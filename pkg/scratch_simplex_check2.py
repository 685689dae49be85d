"""Dev scratch: harder simplex fuzz (degenerate, binary bounds, warm starts)."""
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from gridlayout.simplex import LE, EQ, GE, Basis, LpProblem, LpStatus, solve_lp_problem

rng = np.random.default_rng(99)
mismatch = 0
iters_total = 0
for trial in range(160):
    n = int(rng.integers(5, 40))
    m = int(rng.integers(3, 35))
    c = rng.choice([-1.0, 0.0, 1.0, 2.0], size=n)
    a = rng.choice([0.0, 0.0, 0.0, 1.0, -1.0, 100.0], size=(m, n))
    keep = a.any(axis=1)
    a, m = a[keep], int(keep.sum())
    if m == 0:
        continue
    senses = rng.choice([LE, EQ, GE], size=m, p=[0.5, 0.2, 0.3])
    b = rng.choice([0.0, 1.0, -1.0, 100.0], size=m)
    lb = np.zeros(n)
    ub = np.where(rng.random(n) < 0.5, 1.0, 100.0)

    lp = LpProblem(c=c, a=sp.csc_matrix(a), senses=senses, b=b, lb=lb, ub=ub)
    res = solve_lp_problem(lp)
    iters_total += res.iterations

    a_ub = np.vstack([a[senses == LE], -a[senses == GE]]) if ((senses == LE) | (senses == GE)).any() else None
    b_ub = np.concatenate([b[senses == LE], -b[senses == GE]]) if a_ub is not None else None
    a_eq = a[senses == EQ] if (senses == EQ).any() else None
    b_eq = b[senses == EQ] if a_eq is not None else None
    ref = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=list(zip(lb, ub)), method="highs")
    if ref.status == 0:
        ok = res.status == LpStatus.OPTIMAL and abs(res.objective - ref.fun) < 1e-5 * (1 + abs(ref.fun))
        if ok:
            # warm restart from the optimal basis must reproduce the answer fast
            res2 = solve_lp_problem(lp, basis=res.basis)
            assert res2.status == LpStatus.OPTIMAL and abs(res2.objective - res.objective) < 1e-7, trial
            assert res2.iterations <= 2, (trial, res2.iterations)
            # weak duality at optimum
            assert res.dual_objective <= res.objective + 1e-6 * (1 + abs(res.objective)), (
                trial, res.dual_objective, res.objective)
            # and a perturbed-bound warm start
            lb2, ub2 = lb.copy(), ub.copy()
            j = int(rng.integers(0, n))
            lb2[j] = ub2[j] = 1.0
            lp2 = LpProblem(c=c, a=sp.csc_matrix(a), senses=senses, b=b, lb=lb2, ub=ub2)
            r_cold = solve_lp_problem(lp2)
            r_warm = solve_lp_problem(lp2, basis=res.basis)
            assert r_cold.status == r_warm.status, (trial, r_cold.status, r_warm.status)
            if r_cold.status == LpStatus.OPTIMAL:
                assert abs(r_cold.objective - r_warm.objective) < 1e-5 * (1 + abs(r_cold.objective)), trial
    elif ref.status == 2:
        ok = res.status == LpStatus.INFEASIBLE
    elif ref.status == 3:
        ok = res.status == LpStatus.UNBOUNDED
    else:
        continue
    if not ok:
        mismatch += 1
        print(f"trial {trial}: mine={res.status} {res.objective} ref={ref.status} {getattr(ref, 'fun', None)}")
        if mismatch > 4:
            break
print("mismatches:", mismatch, "total iters:", iters_total)
