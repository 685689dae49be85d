"""Branch-and-bound over the binary variables with LP relaxations.

Best-bound node selection, branching on the most fractional binary (ties go
to the lowest variable index), warm-started LP re-solves from the parent
basis, and two primal heuristics: caller-supplied candidate assignments
checked algebraically, and an LP-guided rounding dive.  Every improved
incumbent is reported through the config callback before return.

The search runs on one logical worker; a cancellation token is checked at
node boundaries (and inside long LP solves) for cooperative interruption.
"""

from __future__ import annotations

import heapq
import math
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .milp import MilpInstance, VarKind
from .simplex import (
    Basis,
    LpEngine,
    LpProblem,
    LpResult,
    LpStatus,
    NumericalBreakdown,
    PreparedLp,
    SimplexOptions,
    SolveCancelled,
    solve_lp_problem,
)

EQ_INT = {"<=": -1, "=": 0, ">=": 1}


class MilpStatus(Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


class CancelToken:
    def __init__(self) -> None:
        self._event = threading.Event()

    def set(self) -> None:
        self._event.set()

    def is_set(self) -> bool:
        return self._event.is_set()


@dataclass
class SolveConfig:
    time_limit: Optional[float] = None
    gap_tolerance: float = 1e-6
    integrality_tolerance: float = 1e-6
    node_limit: Optional[int] = None
    incumbent_callback: Optional[Callable[[np.ndarray, float, float], None]] = None
    cancel: Optional[CancelToken] = None
    candidates: Sequence[np.ndarray] = ()
    dive_every: int = 64
    max_dive_lps: int = 120
    feas_tol: float = 1e-6
    branch_priority: Optional[np.ndarray] = None  # per-variable; higher branches first
    stop_after_incumbent: bool = False  # return as soon as any incumbent exists


@dataclass
class MilpResult:
    status: MilpStatus
    values: Optional[np.ndarray]
    objective: Optional[float]
    bound: float
    gap: float
    nodes: int
    elapsed: float
    reason: str = ""

    @property
    def incumbent(self) -> Optional[np.ndarray]:
        return self.values


def solve_lp(inst: MilpInstance, overrides: Optional[dict[int, tuple[float, float]]] = None,
             basis: Optional[Basis] = None,
             options: Optional[SimplexOptions] = None) -> LpResult:
    """One LP-relaxation solve of the instance under bound overrides."""
    lp = inst.to_lp()
    if overrides:
        lp.lb = lp.lb.copy()
        lp.ub = lp.ub.copy()
        for idx, (lo, hi) in overrides.items():
            lp.lb[idx] = lo
            lp.ub[idx] = hi
    return solve_lp_problem(lp, basis=basis, options=options)


class SolverSession:
    """Warm solver state reusable across repeated solves of one instance.

    Valid as long as the instance keeps the same rows in the same order;
    right-hand sides, objective coefficients and variable bounds may change
    between solves.  The engines keep their bases, so consecutive solves
    start from a dual-feasible point and typically need few pivots.
    """

    def __init__(self, inst: MilpInstance):
        self.inst = inst
        lp = inst.to_lp()
        self.row_ids = tuple(c.cid for c in inst.constraints)
        self.prepared = PreparedLp(lp.c, lp.a, lp.senses, lp.b, lp.lb, lp.ub)
        self.engine = LpEngine(self.prepared)
        self.dive_engine = LpEngine(self.prepared)
        self.aux_engine = LpEngine(self.prepared)

    def refresh(self) -> bool:
        """Re-sync objective, rhs and bounds from the instance; False when the
        row structure changed and the session cannot be reused."""
        inst = self.inst
        if tuple(c.cid for c in inst.constraints) != self.row_ids:
            return False
        self.prepared.c_struct = inst.objective_vector()
        self.prepared.c = np.concatenate([self.prepared.c_struct, np.zeros(self.prepared.m)])
        self.prepared.b = inst.rhs_vector()
        lb, ub = inst.bounds_arrays()
        self.prepared.base_lb = lb
        self.prepared.base_ub = ub
        for engine in (self.engine, self.dive_engine, self.aux_engine):
            state = engine._state
            if state is not None:
                state.c = self.prepared.c
                state.b = self.prepared.b
        return True


def check_assignment(lp: LpProblem, values: np.ndarray, binaries: np.ndarray,
                     tol: float = 1e-6) -> bool:
    """Algebraic feasibility of a full assignment against the computational form."""
    if values.shape[0] != lp.ncols:
        return False
    if np.any(values < lp.lb - tol) or np.any(values > lp.ub + tol):
        return False
    if binaries.size and np.any(np.abs(values[binaries] - np.round(values[binaries])) > tol):
        return False
    ax = lp.a @ values
    resid = ax - lp.b
    scale = tol * (1.0 + np.abs(lp.b))
    if np.any((lp.senses == -1) & (resid > scale)):
        return False
    if np.any((lp.senses == 1) & (resid < -scale)):
        return False
    if np.any((lp.senses == 0) & (np.abs(resid) > scale)):
        return False
    return True


class _Search:
    def __init__(self, inst: MilpInstance, cfg: SolveConfig,
                 session: Optional[SolverSession] = None):
        self.inst = inst
        self.cfg = cfg
        if session is not None and session.inst is inst and session.refresh():
            self.prepared = session.prepared
            self.engine = session.engine
            self.dive_engine = session.dive_engine
            self.aux_engine = session.aux_engine
            self.lp = LpProblem(c=self.prepared.c_struct,
                                a=self.prepared.a_full[:, :self.prepared.n],
                                senses=self.prepared.senses, b=self.prepared.b,
                                lb=self.prepared.base_lb, ub=self.prepared.base_ub)
        else:
            self.lp = inst.to_lp()
            self.prepared = PreparedLp(self.lp.c, self.lp.a, self.lp.senses,
                                       self.lp.b, self.lp.lb, self.lp.ub)
            self.engine = LpEngine(self.prepared)
            self.dive_engine = LpEngine(self.prepared)
            self.aux_engine = LpEngine(self.prepared)
        self.binaries = inst.binary_indices()
        self.sense_min = inst.objective_sense == "min"
        self.t0 = time.monotonic()
        self.deadline = self.t0 + cfg.time_limit if cfg.time_limit else None
        self.nodes = 0
        self.incumbent: Optional[np.ndarray] = None
        self.incumbent_obj = math.inf  # minimisation space
        self.global_bound = -math.inf
        self.granule = self._objective_granule()
        self.reason = "optimal"
        if cfg.branch_priority is not None and self.binaries.size:
            self.bin_priority = np.asarray(cfg.branch_priority, dtype=float)[self.binaries]
        else:
            self.bin_priority = np.zeros(self.binaries.size)

    def _branch_score(self, frac: np.ndarray, undecided: np.ndarray) -> np.ndarray:
        """Most fractional wins within the highest available priority class."""
        score = np.where(undecided, np.minimum(frac, 1.0 - frac), -np.inf)
        return np.where(undecided, score + 2.0 * self.bin_priority, score)

    # -- plumbing -----------------------------------------------------------

    def _objective_granule(self) -> float:
        """Positive step between attainable objective values when all objective
        terms are integral binaries; 0 when continuous terms participate."""
        if not self.inst.objective:
            return 1.0
        coefs = []
        for idx, coef in self.inst.objective.items():
            if self.inst.vars[idx].kind is not VarKind.BINARY:
                return 0.0
            if abs(coef - round(coef)) > 1e-9:
                return 0.0
            coefs.append(abs(int(round(coef))))
        coefs = [c for c in coefs if c]
        if not coefs:
            return 1.0
        return float(math.gcd(*coefs))

    def _stopped(self) -> Optional[str]:
        if self.cfg.cancel is not None and self.cfg.cancel.is_set():
            return "cancelled"
        if self.cfg.stop_after_incumbent and self.incumbent is not None:
            return "first_incumbent"
        if self.deadline is not None and time.monotonic() > self.deadline:
            return "time_limit"
        if self.cfg.node_limit is not None and self.nodes >= self.cfg.node_limit:
            return "node_limit"
        return None

    def _lp_options(self) -> SimplexOptions:
        def should_stop() -> bool:
            if self.cfg.cancel is not None and self.cfg.cancel.is_set():
                return True
            return self.deadline is not None and time.monotonic() > self.deadline

        return SimplexOptions(should_stop=should_stop)

    def _solve_node(self, overrides: dict[int, tuple[float, float]],
                    basis: Optional[Basis], engine: Optional[LpEngine] = None,
                    warm: str = "auto") -> LpResult:
        lb = self.lp.lb.copy()
        ub = self.lp.ub.copy()
        for idx, (lo, hi) in overrides.items():
            lb[idx] = lo
            ub[idx] = hi
        engine = engine or self.engine
        return engine.solve(lb=lb, ub=ub, basis=basis, options=self._lp_options(), warm=warm)

    def _rounded(self, bound: float) -> float:
        if self.granule > 0 and math.isfinite(bound):
            return math.ceil(bound / self.granule - 1e-9) * self.granule
        return bound

    def _prunable(self, bound: float) -> bool:
        if self.incumbent is None:
            return False
        return self._rounded(bound) >= self.incumbent_obj - 1e-9

    def _gap_closed(self) -> bool:
        if self.incumbent is None or not math.isfinite(self.global_bound):
            return False
        gap = self.incumbent_obj - self._rounded(self.global_bound)
        return gap <= self.cfg.gap_tolerance * max(1.0, abs(self.incumbent_obj))

    # -- incumbents -----------------------------------------------------------

    def _try_incumbent(self, values: np.ndarray, polish: bool = True) -> bool:
        values = values.copy()
        if self.binaries.size:
            snapped = np.round(values[self.binaries])
            if np.any(np.abs(values[self.binaries] - snapped) > self.cfg.integrality_tolerance):
                return False
            values[self.binaries] = snapped
        # Cheap algebraic screen before any polishing LP runs.
        if not check_assignment(self.lp, values, self.binaries, self.cfg.feas_tol):
            return False
        if polish:
            # Re-optimise the continuous part for the fixed binaries.
            overrides = {int(j): (float(values[j]), float(values[j])) for j in self.binaries}
            try:
                res = self._solve_node(overrides, None, engine=self.aux_engine, warm="continue")
                if res.status is LpStatus.OPTIMAL:
                    polished = res.values
                    polished[self.binaries] = np.round(polished[self.binaries])
                    if check_assignment(self.lp, polished, self.binaries, self.cfg.feas_tol):
                        values = polished
            except (NumericalBreakdown, SolveCancelled):
                pass
        obj = float(self.lp.c @ values)
        if obj >= self.incumbent_obj - 1e-12:
            return False
        self.incumbent = values
        self.incumbent_obj = obj
        if self.cfg.incumbent_callback is not None:
            declared_obj = obj if self.sense_min else -obj
            declared_bound = self._declared_bound()
            self.cfg.incumbent_callback(values.copy(), declared_obj, declared_bound)
        return True

    def _declared_bound(self) -> float:
        # Stays infinite until the root relaxation proves something, so that
        # reported bounds never weaken over a run.
        b = self.global_bound
        return b if self.sense_min else -b

    def _dive(self, overrides: dict[int, tuple[float, float]], basis: Optional[Basis],
              start: Optional[LpResult]) -> None:
        local = dict(overrides)
        res = start
        flips = 2
        first_solve = True
        last: Optional[tuple[int, float]] = None
        for _ in range(self.cfg.max_dive_lps):
            if res is None:
                try:
                    res = self._solve_node(local, basis if first_solve else None,
                                           engine=self.dive_engine,
                                           warm="auto" if first_solve else "continue")
                except (NumericalBreakdown, SolveCancelled):
                    return
                first_solve = False
                if res.status is not LpStatus.OPTIMAL:
                    if last is not None and flips > 0:
                        j, v = last
                        local[j] = (1.0 - v, 1.0 - v)
                        flips -= 1
                        last = None
                        res = None
                        continue
                    return
                if self._prunable(res.objective):
                    return
            x = res.values
            frac = x[self.binaries]
            dist = np.abs(frac - np.round(frac))
            open_mask = np.array([int(j) not in local for j in self.binaries])
            undecided = open_mask & (dist > self.cfg.integrality_tolerance)
            if not undecided.any():
                self._try_incumbent(x)
                return
            # Mass-fix near-integral binaries, then pin the most fractional one.
            for k in np.flatnonzero(open_mask & ~undecided):
                j = int(self.binaries[k])
                local[j] = (round(float(frac[k])),) * 2
            k = int(np.argmax(self._branch_score(frac, undecided)))
            j = int(self.binaries[k])
            v = float(round(frac[k]))
            local[j] = (v, v)
            last = (j, v)
            basis = res.basis
            res = None

    # -- main -----------------------------------------------------------------

    def run(self) -> MilpResult:
        for cand in self.cfg.candidates:
            self._try_incumbent(np.asarray(cand, dtype=float))
            if self.cfg.stop_after_incumbent and self.incumbent is not None:
                return self._finish("first_incumbent")

        try:
            root = self._solve_node({}, None, warm="continue")
        except SolveCancelled:
            return self._finish("cancelled")
        if root.status is LpStatus.INFEASIBLE:
            return MilpResult(MilpStatus.INFEASIBLE, None, None,
                              float("nan"), float("nan"), 1,
                              time.monotonic() - self.t0, "infeasible")
        if root.status is LpStatus.UNBOUNDED:
            raise NumericalBreakdown("LP relaxation is unbounded; the model is malformed")

        self.nodes = 1
        self.global_bound = root.objective
        next_id = 1
        heap: list[tuple[float, int, dict, Optional[Basis]]] = []
        dive_countdown = 0
        # Current plunge: (overrides, solved relaxation, inherited estimate).
        current: Optional[tuple[dict, LpResult, float]] = ({}, root, root.objective)

        while current is not None or heap:
            why = self._stopped()
            if why:
                return self._finish(why)
            frontier = min(
                current[2] if current is not None else math.inf,
                heap[0][0] if heap else math.inf,
            )
            self.global_bound = max(self.global_bound, frontier)
            if self._gap_closed():
                return self._finish("optimal")

            if current is None:
                est, _nid, overrides, basis = heapq.heappop(heap)
                if self._prunable(est):
                    continue
                try:
                    res = self._solve_node(overrides, basis)
                except SolveCancelled:
                    return self._finish("cancelled")
                self.nodes += 1
                current = (overrides, res, est)
                continue

            overrides, res, est = current
            current = None
            if res.status is not LpStatus.OPTIMAL:
                continue
            bound = res.objective
            if self._prunable(bound):
                continue

            x = res.values
            frac = x[self.binaries] if self.binaries.size else np.empty(0)
            dist = np.abs(frac - np.round(frac))
            undecided = dist > self.cfg.integrality_tolerance
            if not undecided.any():
                self._try_incumbent(x)
                continue

            if dive_countdown <= 0:
                self._dive(overrides, res.basis, res)
                dive_countdown = self.cfg.dive_every
                if self._prunable(bound):
                    continue
            dive_countdown -= 1

            score = self._branch_score(frac, undecided)
            k = int(np.argmax(score))
            j = int(self.binaries[k])
            first = float(round(frac[k]))

            other = dict(overrides)
            other[j] = (1.0 - first, 1.0 - first)
            heapq.heappush(heap, (bound, next_id, other, res.basis))
            next_id += 1

            # Plunge into the preferred child, reusing the engine state in place.
            plunge = dict(overrides)
            plunge[j] = (first, first)
            try:
                child_res = self._solve_node(plunge, None, warm="continue")
            except SolveCancelled:
                return self._finish("cancelled")
            self.nodes += 1
            current = (plunge, child_res, bound)

        return self._finish("optimal")

    def _finish(self, reason: str) -> MilpResult:
        elapsed = time.monotonic() - self.t0
        self.reason = reason
        if reason == "optimal":
            if self.incumbent is None:
                return MilpResult(MilpStatus.INFEASIBLE, None, None, float("nan"),
                                  float("nan"), self.nodes, elapsed, "exhausted")
            self.global_bound = max(self.global_bound, self.incumbent_obj)
            obj = self.incumbent_obj if self.sense_min else -self.incumbent_obj
            return MilpResult(MilpStatus.OPTIMAL, self.incumbent, obj, obj, 0.0,
                              self.nodes, elapsed, reason)
        obj = None
        gap = float("inf")
        if self.incumbent is not None:
            obj = self.incumbent_obj if self.sense_min else -self.incumbent_obj
            if math.isfinite(self.global_bound):
                gap = abs(self.incumbent_obj - self.global_bound) / max(1.0, abs(self.incumbent_obj))
        return MilpResult(MilpStatus.FEASIBLE, self.incumbent, obj,
                          self._declared_bound(), gap, self.nodes, elapsed, reason)


def solve(inst: MilpInstance, cfg: Optional[SolveConfig] = None,
          session: Optional[SolverSession] = None) -> MilpResult:
    """Solve the MILP instance to proven optimality or until a limit stops us.

    Passing a SolverSession created for this instance keeps LP bases warm
    across repeated solves that only change bounds, objective or rhs values.
    """
    return _Search(inst, cfg or SolveConfig(), session=session).run()
