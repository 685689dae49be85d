"""Bounded-variable revised simplex solver.

Solves  min c.x  subject to  A x {<=,=,>=} b,  lb <= x <= ub.

Internally every row gets a slack column (A x + s = b) so the basis always
has one column per row.  The basis is kept as a dense LU factorisation plus
product-form eta updates, refactorised periodically.  Phase 1 minimises the
total bound violation of basic variables (composite method, no artificial
columns).  Pricing is Dantzig (most negative reduced cost) with Bland's rule
as an anti-cycling fallback once the objective stalls.

The pivot sequence is fully deterministic for identical input.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

LE, EQ, GE = -1, 0, 1

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2
_FREE = 3


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class NumericalBreakdown(RuntimeError):
    """Basis factorisation failed beyond recovery."""


class SolveCancelled(RuntimeError):
    """Cooperative cancellation requested mid-solve."""


@dataclass
class LpProblem:
    """Computational-form LP; senses use the LE/EQ/GE module constants."""

    c: np.ndarray
    a: sp.csc_matrix
    senses: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    @property
    def nrows(self) -> int:
        return self.a.shape[0]

    @property
    def ncols(self) -> int:
        return self.a.shape[1]


@dataclass
class Basis:
    """Warm-start snapshot: basic variable indices plus nonbasic statuses."""

    basic: np.ndarray
    vstat: np.ndarray


@dataclass
class LpResult:
    status: LpStatus
    values: np.ndarray
    objective: float
    iterations: int
    basis: Optional[Basis] = None
    dual_objective: float = float("nan")


@dataclass
class SimplexOptions:
    tol_feas: float = 1e-7
    tol_opt: float = 1e-9
    tol_pivot: float = 1e-8
    refactor_every: int = 50
    max_iterations: int = 200000
    check_every: int = 256
    should_stop: Optional[Callable[[], bool]] = None


class _Factor:
    """LU factorisation of the basis with product-form eta updates."""

    def __init__(self, a_full: sp.csc_matrix, basic: np.ndarray, identity: bool = False):
        self.a_full = a_full
        self.m = a_full.shape[0]
        self.etas: list[tuple[int, np.ndarray]] = []
        self.identity = False
        if identity:
            self.identity = True
            self.lu = self.piv = None
        else:
            self.refactor(basic)

    def _gather(self, basic: np.ndarray) -> np.ndarray:
        dense = np.zeros((self.m, self.m))
        indptr = self.a_full.indptr
        starts = indptr[basic]
        counts = indptr[basic + 1] - starts
        total = int(counts.sum())
        if total:
            flat = (np.arange(total)
                    - np.repeat(np.cumsum(counts) - counts, counts)
                    + np.repeat(starts, counts))
            rows = self.a_full.indices[flat]
            cols = np.repeat(np.arange(self.m), counts)
            dense[rows, cols] = self.a_full.data[flat]
        return dense

    def refactor(self, basic: np.ndarray) -> None:
        self.identity = False
        dense = self._gather(basic)
        try:
            with warnings.catch_warnings():
                # Singular bases are detected right below and trigger recovery.
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                self.lu, self.piv = scipy.linalg.lu_factor(dense, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:  # pragma: no cover
            raise NumericalBreakdown(f"basis LU factorisation failed: {exc}")
        if not np.all(np.isfinite(self.lu)):
            raise NumericalBreakdown("basis LU factorisation produced non-finite entries")
        diag = np.abs(np.diag(self.lu))
        if self.m and diag.min() < 1e-12 * max(1.0, diag.max()):
            raise NumericalBreakdown("basis is numerically singular")
        self.etas = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        if self.identity:
            x = np.asarray(v, dtype=float).copy()
        else:
            x = scipy.linalg.lu_solve((self.lu, self.piv), v, check_finite=False)
        for r, w in self.etas:
            t = x[r] / w[r]
            x -= t * w
            x[r] = t
        return x

    def btran(self, v: np.ndarray) -> np.ndarray:
        u = v.astype(float, copy=True)
        for r, w in reversed(self.etas):
            t = (u[r] - (w @ u - w[r] * u[r])) / w[r]
            u[r] = t
        if self.identity:
            return u
        return scipy.linalg.lu_solve((self.lu, self.piv), u, trans=1, check_finite=False)

    def push_eta(self, r: int, w: np.ndarray) -> None:
        self.etas.append((r, w.copy()))


class PreparedLp:
    """LP with the structural matrix prepared once; bounds vary per solve.

    Branch-and-bound re-solves the same rows thousands of times with only
    variable bounds changing, so the slack-extended matrix and its transpose
    are built a single time here.
    """

    def __init__(self, c: np.ndarray, a: sp.csc_matrix, senses: np.ndarray,
                 b: np.ndarray, lb: np.ndarray, ub: np.ndarray):
        self.m, self.n = a.shape
        self.c_struct = np.asarray(c, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.senses = np.asarray(senses)
        self.base_lb = np.asarray(lb, dtype=float)
        self.base_ub = np.asarray(ub, dtype=float)
        self.slack_lb = np.where(self.senses == GE, -np.inf, 0.0)
        self.slack_ub = np.where(self.senses == LE, np.inf, 0.0)
        self.c = np.concatenate([self.c_struct, np.zeros(self.m)])
        self.a_full = sp.hstack([a, sp.identity(self.m, format="csc")], format="csc") \
            if self.m else a
        self.at_full = self.a_full.T.tocsr() if self.m else a.T

    def solve(self, lb: Optional[np.ndarray] = None, ub: Optional[np.ndarray] = None,
              basis: Optional[Basis] = None,
              options: Optional[SimplexOptions] = None) -> LpResult:
        return LpEngine(self).solve(lb=lb, ub=ub, basis=basis, options=options)


class LpEngine:
    """Reusable solver over one PreparedLp; keeps basis and factorisation warm.

    Consecutive solves that only change bounds (branch-and-bound plunges) skip
    refactorisation entirely: the basis matrix does not depend on bounds.
    `warm="continue"` resumes from wherever the previous solve ended;
    passing an explicit basis reuses the factor when the basic set is
    unchanged and refactorises otherwise.
    """

    def __init__(self, prepared: PreparedLp):
        self.prep = prepared
        self._state: Optional[_State] = None

    def solve(self, lb: Optional[np.ndarray] = None, ub: Optional[np.ndarray] = None,
              basis: Optional[Basis] = None,
              options: Optional[SimplexOptions] = None,
              warm: str = "auto") -> LpResult:
        opts = options or SimplexOptions()
        prep = self.prep
        m, n = prep.m, prep.n
        s_lb = prep.base_lb if lb is None else lb
        s_ub = prep.base_ub if ub is None else ub

        if m == 0:
            values = _bound_minimiser(prep.c_struct, s_lb, s_ub)
            if values is None:
                return LpResult(LpStatus.UNBOUNDED, np.zeros(n), -np.inf, 0)
            obj = float(prep.c_struct @ values)
            return LpResult(LpStatus.OPTIMAL, values, obj, 0, basis=None, dual_objective=obj)

        full_lb = np.concatenate([s_lb, prep.slack_lb])
        full_ub = np.concatenate([s_ub, prep.slack_ub])
        nt = n + m

        state = self._state
        fresh = state is None
        if fresh:
            state = _State(prep.a_full, prep.at_full, prep.c, full_lb, full_ub, prep.b, opts)
            self._state = state
        else:
            state.rebind(full_lb, full_ub, opts)

        warm_basis = False
        if basis is not None and len(basis.basic) == m and len(basis.vstat) == nt:
            if not fresh and np.array_equal(state.basic, basis.basic):
                state.adopt_vstat(basis.vstat)
            else:
                state.install_basis(basis.basic, basis.vstat)
            warm_basis = True
        elif fresh or warm != "continue":
            state.install_slack_basis()
        else:
            warm_basis = True
        # A dual-feasible start (warm basis, or an all-zero objective) lets the
        # dual simplex restore feasibility in few pivots.
        try_dual = warm_basis or not prep.c.any()

        try:
            state.prepare()
            status = state.run(try_dual=try_dual)
        except NumericalBreakdown:
            state = _State(prep.a_full, prep.at_full, prep.c, full_lb, full_ub, prep.b, opts)
            self._state = state
            state.install_slack_basis()
            state.prepare()
            status = state.run()

        values = state.xval[:n].copy()
        objective = float(prep.c_struct @ values) if status is LpStatus.OPTIMAL else float("nan")
        dual = state.dual_objective() if status is LpStatus.OPTIMAL else float("nan")
        if status is LpStatus.UNBOUNDED:
            objective = -np.inf
        return LpResult(
            status=status,
            values=values,
            objective=objective,
            iterations=state.iterations,
            basis=Basis(state.basic.copy(), state.vstat.copy()),
            dual_objective=dual,
        )


def solve_lp_problem(
    lp: LpProblem,
    basis: Optional[Basis] = None,
    options: Optional[SimplexOptions] = None,
) -> LpResult:
    prepared = PreparedLp(lp.c, lp.a, lp.senses, lp.b, lp.lb, lp.ub)
    return prepared.solve(lb=lp.lb, ub=lp.ub, basis=basis, options=options)


def _bound_minimiser(c: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> Optional[np.ndarray]:
    values = np.where(c >= 0, lb, ub)
    values = np.where(np.isfinite(values), values, np.where(c == 0, 0.0, values))
    if not np.all(np.isfinite(values)):
        return None
    return values.astype(float)


class _State:
    def __init__(self, a_full, at_full, c, lb, ub, b, opts: SimplexOptions):
        self.a_full = a_full
        self.at_full = at_full
        self.c = c
        self.lb = lb
        self.ub = ub
        self.b = b.astype(float)
        self.opts = opts
        self.m = a_full.shape[0]
        self.nt = a_full.shape[1]
        self.iterations = 0
        self.factor: Optional[_Factor] = None

    # -- basis installation ------------------------------------------------

    def rebind(self, lb: np.ndarray, ub: np.ndarray, opts: SimplexOptions) -> None:
        """Point the state at new bounds; basis and factorisation stay valid."""
        self.lb = lb
        self.ub = ub
        self.opts = opts

    def adopt_vstat(self, vstat: np.ndarray) -> None:
        self.vstat = vstat.copy()

    def install_slack_basis(self) -> None:
        n_struct = self.nt - self.m
        self.basic = np.arange(n_struct, n_struct + self.m)
        self.vstat = np.full(self.nt, _AT_LOWER, dtype=np.int8)
        self.vstat[self.basic] = _BASIC
        self.factor = _Factor(self.a_full, self.basic, identity=True)

    def install_basis(self, basic: np.ndarray, vstat: np.ndarray) -> None:
        self.basic = basic.copy()
        self.vstat = vstat.copy()
        try:
            self.factor = _Factor(self.a_full, self.basic)
        except NumericalBreakdown:
            self.install_slack_basis()

    def prepare(self) -> None:
        """Recompute variable values for the current bounds and basis."""
        self.iterations = 0
        self._init_nonbasic_values()
        self._recompute_basics()

    def _init_nonbasic_values(self) -> None:
        xv = np.zeros(self.nt)
        at_upper = self.vstat == _AT_UPPER
        at_lower = self.vstat == _AT_LOWER
        xv[at_lower] = self.lb[at_lower]
        xv[at_upper] = self.ub[at_upper]
        # Nonbasic variables on an infinite bound rest at the other bound or 0.
        bad = ~np.isfinite(xv) & (self.vstat != _BASIC)
        for j in np.flatnonzero(bad):
            if np.isfinite(self.lb[j]):
                xv[j], self.vstat[j] = self.lb[j], _AT_LOWER
            elif np.isfinite(self.ub[j]):
                xv[j], self.vstat[j] = self.ub[j], _AT_UPPER
            else:
                xv[j], self.vstat[j] = 0.0, _FREE
        self.xval = xv

    def _recompute_basics(self) -> None:
        rhs = self.b - self.a_full @ np.where(self.vstat == _BASIC, 0.0, self.xval)
        self.xval[self.basic] = self.factor.ftran(rhs)

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        a = self.a_full
        lo, hi = a.indptr[j], a.indptr[j + 1]
        col[a.indices[lo:hi]] = a.data[lo:hi]
        return col

    # -- main loop ---------------------------------------------------------

    def run(self, try_dual: bool = False) -> LpStatus:
        if try_dual:
            status = self._run_dual()
            if status is not None:
                return status
        for _attempt in range(3):
            status = self._phase(phase1=True)
            if status is not LpStatus.OPTIMAL:
                return status
            if self._total_infeasibility() > self._feas_target():
                # Re-measure from a fresh factorisation before giving up.
                self.factor.refactor(self.basic)
                self._recompute_basics()
                if self._total_infeasibility() > self._feas_target():
                    return LpStatus.INFEASIBLE
            status = self._phase(phase1=False)
            if status is not LpStatus.OPTIMAL:
                return status
            if self.factor.etas:
                self.factor.refactor(self.basic)
                self._recompute_basics()
            if self._total_infeasibility() <= self._feas_target():
                return LpStatus.OPTIMAL
        raise NumericalBreakdown("feasibility could not be restored after repeated cleanup")

    def _reduced_costs(self) -> np.ndarray:
        y = self.factor.btran(self.c[self.basic])
        return self.c - self.at_full @ y

    def _dual_feasible(self, d: np.ndarray) -> bool:
        tol = 1e-7
        at_lower = self.vstat == _AT_LOWER
        at_upper = self.vstat == _AT_UPPER
        free = self.vstat == _FREE
        fixed = self.lb == self.ub
        if np.any(d[at_lower & ~fixed] < -tol):
            return False
        if np.any(d[at_upper & ~fixed] > tol):
            return False
        if np.any(np.abs(d[free]) > tol):
            return False
        return True

    def _run_dual(self) -> Optional[LpStatus]:
        """Bounded dual simplex from a dual-feasible basis; None = fall back.

        Branch-and-bound re-solves change only variable bounds, which leaves
        the parent basis dual feasible, so few dual pivots restore primal
        feasibility (or prove the node infeasible).  The ratio test is
        bound-flipping: boxed nonbasics whose breakpoint the dual step passes
        are flipped to their other bound in bulk, which collapses the long
        degenerate pivot chains binary-heavy models otherwise produce.
        """
        opts = self.opts
        m = self.m
        d = self._reduced_costs()
        if not self._dual_feasible(d):
            return None
        tol = opts.tol_feas
        tolp = opts.tol_pivot
        limit = 2 * (m + 200)
        best_total = math.inf
        stall = 0
        # Steepest-edge row weights (Forrest-Goldfarb), started at 1.
        gamma = np.ones(m)

        for it in range(limit):
            if opts.should_stop is not None and it % opts.check_every == 0:
                if opts.should_stop():
                    raise SolveCancelled()
            xb = self.xval[self.basic]
            below = self.lb[self.basic] - xb
            above = xb - self.ub[self.basic]
            below[~np.isfinite(below)] = -np.inf
            above[~np.isfinite(above)] = -np.inf
            viol = np.maximum(below, above)
            worst = viol.max(initial=-np.inf)
            if worst <= tol:
                return LpStatus.OPTIMAL
            cand_rows = viol > tol
            score = np.where(cand_rows, viol * viol / np.maximum(gamma, 1e-10), -np.inf)
            r = int(np.argmax(score))
            # Degenerate dual steps can cycle; give the primal a go instead.
            total = float(np.maximum(viol, 0.0).sum())
            if total < best_total - 1e-10 * (1.0 + best_total):
                best_total = total
                stall = 0
            else:
                stall += 1
                if stall > 60:
                    return None
            leaving_low = below[r] >= above[r]

            er = np.zeros(m)
            er[r] = 1.0
            rho = self.factor.btran(er)
            alpha = self.at_full @ rho
            # Case "leaving at upper" is the mirrored case; negate the row.
            row = alpha if leaving_low else -alpha

            at_lower = (self.vstat == _AT_LOWER) | (self.vstat == _FREE)
            at_upper = self.vstat == _AT_UPPER
            open_bounds = self.lb != self.ub
            cand = ((at_lower & (row < -tolp)) | (at_upper & (row > tolp))) & open_bounds
            cand[self.basic] = False
            idx = np.flatnonzero(cand)
            if idx.size == 0:
                return LpStatus.INFEASIBLE

            # Bound-flipping walk along breakpoints in |dual ratio| order.
            ratios = d[idx] / row[idx]  # all <= ~0 by dual feasibility
            order = np.argsort(-ratios, kind="stable")
            remaining = float(viol[r])
            flips: list[int] = []
            entering = -1
            for k in order:
                j = int(idx[k])
                rng = self.ub[j] - self.lb[j]
                reduction = abs(row[j]) * rng
                if np.isfinite(reduction) and remaining - reduction > tol:
                    flips.append(j)
                    remaining -= reduction
                else:
                    entering = j
                    break
            if entering < 0:
                return LpStatus.INFEASIBLE

            if flips:
                dx = np.zeros(len(flips))
                acol = np.zeros(m)
                for t, j in enumerate(flips):
                    to_upper = self.vstat[j] != _AT_UPPER
                    dx[t] = (self.ub[j] - self.lb[j]) * (1.0 if to_upper else -1.0)
                    lo, hi = self.a_full.indptr[j], self.a_full.indptr[j + 1]
                    acol[self.a_full.indices[lo:hi]] += dx[t] * self.a_full.data[lo:hi]
                    self.vstat[j] = _AT_UPPER if to_upper else _AT_LOWER
                    self.xval[j] = self.ub[j] if to_upper else self.lb[j]
                self.xval[self.basic] -= self.factor.ftran(acol)

            q = entering
            w = self.factor.ftran(self._column(q))
            if abs(w[r]) < 1e-11:
                self.factor.refactor(self.basic)
                self._recompute_basics()
                d = self._reduced_costs()
                if not self._dual_feasible(d):
                    return None
                continue

            bound = self.lb[self.basic[r]] if leaving_low else self.ub[self.basic[r]]
            delta = (self.xval[self.basic[r]] - bound) / w[r]
            theta_d = d[q] / alpha[q]
            leaving = int(self.basic[r])

            # Forrest-Goldfarb update of the steepest-edge weights.
            tau = self.factor.ftran(rho.copy())
            ratio_w = w / w[r]
            gamma_r = max(float(rho @ rho), 1e-10)
            gamma = gamma - 2.0 * ratio_w * tau + ratio_w * ratio_w * gamma_r
            gamma[r] = gamma_r / (w[r] * w[r])
            gamma = np.maximum(gamma, 1e-10)

            self.xval[self.basic] -= delta * w
            self.xval[q] = self.xval[q] + delta
            self.xval[leaving] = bound
            self.vstat[leaving] = _AT_LOWER if leaving_low else _AT_UPPER
            self.vstat[q] = _BASIC
            self.basic[r] = q
            d = d - theta_d * alpha
            d[q] = 0.0
            d[leaving] = -theta_d
            self.factor.push_eta(r, w)
            self.iterations += 1

            if len(self.factor.etas) >= opts.refactor_every:
                self.factor.refactor(self.basic)
                self._recompute_basics()
                d = self._reduced_costs()
                if not self._dual_feasible(d):
                    return None
        return None

    def _feas_target(self) -> float:
        return 10.0 * self.opts.tol_feas

    def _total_infeasibility(self) -> float:
        xb = self.xval[self.basic]
        low = np.maximum(self.lb[self.basic] - xb, 0.0)
        high = np.maximum(xb - self.ub[self.basic], 0.0)
        low[~np.isfinite(low)] = 0.0
        high[~np.isfinite(high)] = 0.0
        return float(low.sum() + high.sum())

    def _phase_cost(self, phase1: bool) -> np.ndarray:
        if not phase1:
            return self.c
        cost = np.zeros(self.nt)
        xb = self.xval[self.basic]
        tol = self.opts.tol_feas
        below = xb < self.lb[self.basic] - tol
        above = xb > self.ub[self.basic] + tol
        cost[self.basic[below]] = -1.0
        cost[self.basic[above]] = 1.0
        return cost

    def _phase(self, phase1: bool) -> LpStatus:
        opts = self.opts
        stall_limit = 2 * self.m
        stall = 0
        best_obj = np.inf
        bland = False

        while True:
            if self.iterations >= opts.max_iterations:
                raise NumericalBreakdown(f"iteration limit {opts.max_iterations} exceeded")
            if opts.should_stop is not None and self.iterations % opts.check_every == 0:
                if opts.should_stop():
                    raise SolveCancelled()

            if phase1 and self._total_infeasibility() <= opts.tol_feas:
                return LpStatus.OPTIMAL

            cost = self._phase_cost(phase1)
            y = self.factor.btran(cost[self.basic])
            d = cost - self.at_full @ y

            entering, direction = self._price(d, bland)
            if entering < 0:
                return LpStatus.OPTIMAL

            w = self.factor.ftran(self._column(entering))
            step, blocker, to_upper = self._ratio_test(entering, direction, w, phase1)
            if step is None:
                if phase1:
                    # Cannot happen for a bounded-below phase-1 objective; be safe.
                    raise NumericalBreakdown("phase-1 ray with unbounded improvement")
                return LpStatus.UNBOUNDED

            self._apply_step(entering, direction, w, step, blocker, to_upper)
            self.iterations += 1

            obj = float(self._phase_objective(phase1))
            if obj < best_obj - 1e-12 * (1.0 + abs(best_obj)):
                best_obj = obj
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > stall_limit:
                    bland = True

            if len(self.factor.etas) >= opts.refactor_every:
                self.factor.refactor(self.basic)
                self._recompute_basics()

    def _phase_objective(self, phase1: bool) -> float:
        if phase1:
            return self._total_infeasibility()
        return float(self.c @ self.xval)

    def _price(self, d: np.ndarray, bland: bool) -> tuple[int, int]:
        tol = self.opts.tol_opt
        fixed = self.lb == self.ub
        can_up = ((self.vstat == _AT_LOWER) | (self.vstat == _FREE)) & ~fixed & (d < -tol)
        can_down = ((self.vstat == _AT_UPPER) | (self.vstat == _FREE)) & ~fixed & (d > tol)
        candidates = np.flatnonzero(can_up | can_down)
        if candidates.size == 0:
            return -1, 0
        if bland:
            j = int(candidates[0])
        else:
            j = int(candidates[np.argmax(np.abs(d[candidates]))])
        return j, (1 if can_up[j] else -1)

    def _ratio_test(
        self, entering: int, direction: int, w: np.ndarray, phase1: bool
    ) -> tuple[Optional[float], int, bool]:
        """Returns (step, blocking basis position or -1 for a bound flip, leaves_at_upper)."""
        tolp = self.opts.tol_pivot
        xb = self.xval[self.basic]
        lb_b = self.lb[self.basic]
        ub_b = self.ub[self.basic]
        rate = -direction * w  # d(x_B)/d(step)

        steps = np.full(self.m, np.inf)
        leaves_upper = np.zeros(self.m, dtype=bool)

        dec = rate < -tolp
        inc = rate > tolp
        tol = self.opts.tol_feas

        if phase1:
            below = xb < lb_b - tol
            above = xb > ub_b + tol
            feas = ~(below | above)
            # Feasible basics block at the bound they travel towards.
            sel = feas & dec & np.isfinite(lb_b)
            steps[sel] = (xb[sel] - lb_b[sel]) / -rate[sel]
            sel = feas & inc & np.isfinite(ub_b)
            steps[sel] = np.minimum(steps[sel], (ub_b[sel] - xb[sel]) / rate[sel])
            leaves_upper[feas & inc] = True
            # Infeasible basics block on reaching the violated bound.
            sel = below & inc
            steps[sel] = (lb_b[sel] - xb[sel]) / rate[sel]
            leaves_upper[sel] = False
            sel = above & dec
            steps[sel] = (ub_b[sel] - xb[sel]) / rate[sel]
            leaves_upper[sel] = True
        else:
            sel = dec & np.isfinite(lb_b)
            steps[sel] = (xb[sel] - lb_b[sel]) / -rate[sel]
            sel = inc & np.isfinite(ub_b)
            steps[sel] = (ub_b[sel] - xb[sel]) / rate[sel]
            leaves_upper[inc] = True

        steps = np.maximum(steps, 0.0)
        theta = steps.min(initial=np.inf)

        own_range = self.ub[entering] - self.lb[entering]
        if np.isfinite(own_range) and own_range < theta:
            return float(own_range), -1, direction > 0

        if not np.isfinite(theta):
            return None, -1, False

        near = np.flatnonzero(steps <= theta + 1e-12)
        pick = near[np.argmax(np.abs(w[near]))]
        ties = near[np.abs(w[near]) >= np.abs(w[pick]) - 1e-15]
        pick = ties[np.argmin(self.basic[ties])]
        return float(steps[pick]), int(pick), bool(leaves_upper[pick])

    def _apply_step(
        self, entering: int, direction: int, w: np.ndarray,
        step: float, blocker: int, to_upper: bool,
    ) -> None:
        if step > 0:
            self.xval[self.basic] -= direction * step * w
            self.xval[entering] += direction * step
        if blocker < 0:
            # Bound flip: the entering variable runs to its other bound.
            self.vstat[entering] = _AT_UPPER if to_upper else _AT_LOWER
            self.xval[entering] = self.ub[entering] if to_upper else self.lb[entering]
            return
        leaving = int(self.basic[blocker])
        bound = self.ub[leaving] if to_upper else self.lb[leaving]
        self.xval[leaving] = bound
        self.vstat[leaving] = _AT_UPPER if to_upper else _AT_LOWER
        self.basic[blocker] = entering
        self.vstat[entering] = _BASIC
        if abs(w[blocker]) < 1e-11:
            self.factor.refactor(self.basic)
            self._recompute_basics()
        else:
            self.factor.push_eta(blocker, w)

    def dual_objective(self) -> float:
        """y.b plus reduced-cost contributions of nonbasic bounds (weak duality check)."""
        y = self.factor.btran(self.c[self.basic])
        d = self.c - self.at_full @ y
        total = float(y @ self.b)
        for j in np.flatnonzero(self.vstat != _BASIC):
            xj = self.xval[j]
            if abs(d[j]) > 1e-12 and np.isfinite(xj):
                total += float(d[j] * xj)
        return total
