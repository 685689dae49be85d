"""Dev scratch: fuzz the simplex against scipy HiGHS. Not part of the suite."""
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from gridlayout.simplex import LE, EQ, GE, LpProblem, LpStatus, solve_lp_problem

rng = np.random.default_rng(7)
mismatch = 0
for trial in range(400):
    n = rng.integers(1, 9)
    m = rng.integers(0, 7)
    c = rng.normal(size=n).round(3)
    a = rng.normal(size=(m, n)).round(3)
    a[rng.random(size=a.shape) < 0.35] = 0.0
    senses = rng.choice([LE, EQ, GE], size=m)
    b = rng.normal(size=m).round(3) * 2
    lb = np.where(rng.random(n) < 0.8, rng.uniform(-5, 0, n).round(2), -np.inf)
    ub = np.where(rng.random(n) < 0.8, rng.uniform(0, 5, n).round(2), np.inf)
    ub = np.maximum(ub, lb)

    lp = LpProblem(c=c, a=sp.csc_matrix(a), senses=senses, b=b, lb=lb, ub=ub)
    res = solve_lp_problem(lp)

    cons = []
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for i in range(m):
        if senses[i] == LE:
            a_ub.append(a[i]); b_ub.append(b[i])
        elif senses[i] == GE:
            a_ub.append(-a[i]); b_ub.append(-b[i])
        else:
            a_eq.append(a[i]); b_eq.append(b[i])
    ref = linprog(
        c,
        A_ub=np.array(a_ub) if a_ub else None, b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq) if a_eq else None, b_eq=np.array(b_eq) if b_eq else None,
        bounds=list(zip(lb, ub)), method="highs",
    )
    if ref.status == 0:
        ok = res.status == LpStatus.OPTIMAL and abs(res.objective - ref.fun) < 1e-6 * (1 + abs(ref.fun))
    elif ref.status == 2:
        ok = res.status == LpStatus.INFEASIBLE
    elif ref.status == 3:
        ok = res.status == LpStatus.UNBOUNDED
    else:
        continue
    if not ok:
        mismatch += 1
        print(f"trial {trial}: mine={res.status} {res.objective:.6f} ref={ref.status} {getattr(ref, 'fun', None)}")
        if mismatch > 5:
            break
print("mismatches:", mismatch)
