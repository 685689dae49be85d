"""Diverse layout generation by spanning the relation-signature space.

The procedure first computes the extremal sums of the above/before binaries
(the corners of the reachable signature space) plus the minimal alignment
group count and the best outline-adherence count under that alignment cap.
It then sweeps a grid of signature points, solving the full model with the
signature pinned, the alignment capped and the adherence floored, pooling
distinct solutions.  If a sweep yields too few, the alignment cap is
loosened one unit at a time.

Inner solves accept a per-solve time or node budget; the best incumbent of
a budgeted solve is used in place of a proven optimum.  With no time budget
the whole pipeline is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import bnb, heuristics, milp, scoring
from .model import LayoutProblem, LayoutSolution, validate_problem, validate_solution


class InfeasibleProblem(ValueError):
    """No feasible layout exists for the problem."""


class TimeBudgetExhausted(RuntimeError):
    """The overall budget ran out; `partial` holds what was found."""

    def __init__(self, message: str, partial: Optional[list[LayoutSolution]] = None):
        super().__init__(message)
        self.partial = partial or []


@dataclass(frozen=True)
class Bounds:
    gamma_min: int
    gamma_max: int
    pi_min: int
    pi_max: int
    eps_min: int
    rect_min: int
    eps_cap_used: int = 0  # loosening applied while computing rect_min


@dataclass
class DiversifyConfig:
    count: int = 5
    grid_points: int = 3
    band: int = 0
    loosen_limit: int = 3
    per_solve: Optional[float] = 5.0
    per_solve_nodes: Optional[int] = None
    total_time: Optional[float] = None
    thorough: bool = False  # keep optimising sweep points after an incumbent
    cancel: Optional[bnb.CancelToken] = None
    on_solution: Optional[Callable[[LayoutSolution], None]] = None

    def solver_config(self, sweep: bool = False, **kw) -> bnb.SolveConfig:
        return bnb.SolveConfig(time_limit=self.per_solve, node_limit=self.per_solve_nodes,
                               cancel=self.cancel,
                               stop_after_incumbent=sweep and not self.thorough, **kw)


def _solve(inst: milp.MilpInstance, cfg: bnb.SolveConfig,
           session: Optional[bnb.SolverSession] = None) -> bnb.MilpResult:
    library = heuristics.structured_candidates(inst)
    extra = [values for _key, values in sorted(library.items(), key=lambda kv: kv[0])]
    cfg.candidates = (tuple(cfg.candidates)
                      + tuple(heuristics.packed_candidates(inst))
                      + tuple(extra))
    if cfg.branch_priority is None:
        cfg.branch_priority = milp.branch_priorities(inst)
    return bnb.solve(inst, cfg, session=session)


def _extremal(inst: milp.MilpInstance, handles: milp.BuildHandles,
              mode: milp.ObjectiveMode, cfg: DiversifyConfig, what: str) -> int:
    milp.set_objective(inst, mode, handles)
    res = _solve(inst, cfg.solver_config())
    if res.status is bnb.MilpStatus.INFEASIBLE:
        raise InfeasibleProblem(f"no feasible layout while computing {what}")
    if res.values is None:
        raise TimeBudgetExhausted(f"no incumbent while computing {what}")
    return int(round(res.objective))


def compute_bounds(p: LayoutProblem, cfg: Optional[DiversifyConfig] = None) -> Bounds:
    """Extremal relation sums, minimal alignment count, best adherence count.

    Uses exact solves when the config carries no budget; with a budget the
    incumbent of each solve stands in, which can only shrink the signature
    box or loosen the quality floors, never break feasibility.
    """
    cfg = cfg or DiversifyConfig()
    violations = validate_problem(p)
    if violations:
        raise InfeasibleProblem(f"problem is malformed: {violations[0]}")

    core, core_handles = milp.build_full(p, alignment=False, rect=False)
    gamma_max = _extremal(core, core_handles, milp.ObjectiveMode.MAX_GAMMA, cfg, "gamma_max")
    gamma_min = _extremal(core, core_handles, milp.ObjectiveMode.MIN_GAMMA, cfg, "gamma_min")
    pi_max = _extremal(core, core_handles, milp.ObjectiveMode.MAX_PI, cfg, "pi_max")
    pi_min = _extremal(core, core_handles, milp.ObjectiveMode.MIN_PI, cfg, "pi_min")

    align_inst, align_handles = milp.build_full(p, rect=False)
    milp.set_objective(align_inst, milp.ObjectiveMode.MIN_EPSILON, align_handles)
    eps_res = _solve(align_inst, cfg.solver_config())
    if eps_res.status is bnb.MilpStatus.INFEASIBLE:
        raise InfeasibleProblem("no feasible layout while minimising alignment groups")
    if eps_res.values is None:
        raise TimeBudgetExhausted("no incumbent while minimising alignment groups")
    eps_min = int(round(eps_res.objective))

    full, full_handles = milp.build_full(p)
    milp.set_objective(full, milp.ObjectiveMode.MAX_RECT, full_handles)
    rect_min = 4
    cap_used = 0
    for loosen in range(cfg.loosen_limit + 1):
        cap = milp.cap_epsilon(full, full_handles.alignment, eps_min + loosen)
        res = _solve(full, cfg.solver_config())
        cap.remove()
        if res.values is not None:
            rect_min = int(round(res.objective))
            cap_used = loosen
            break
        if res.status is not bnb.MilpStatus.INFEASIBLE:
            raise TimeBudgetExhausted("no incumbent while maximising outline adherence")
    return Bounds(gamma_min=gamma_min, gamma_max=gamma_max,
                  pi_min=pi_min, pi_max=pi_max,
                  eps_min=eps_min, rect_min=rect_min, eps_cap_used=cap_used)


def _grid_values(lo: int, hi: int, points: int) -> list[int]:
    if hi <= lo:
        return [lo]
    points = max(2, points)
    raw = [lo + round(k * (hi - lo) / (points - 1)) for k in range(points)]
    out: list[int] = []
    for v in raw:
        if v not in out:
            out.append(int(v))
    return out


def _candidate_points(bounds: Bounds, cfg: DiversifyConfig, n: int,
                      library: dict[tuple[int, int], "np.ndarray"]) -> list[tuple[int, int]]:
    """Signature points to visit: the sampled grid plus known-reachable spots.

    Points whose total relation count cannot satisfy the per-pair counting
    rule are dropped outright.  Structured-layout signatures inside the box
    are appended so sweeps do not burn their budget solely on samples that
    happen to be infeasible.
    """
    gammas = _grid_values(bounds.gamma_min, bounds.gamma_max, cfg.grid_points)
    pis = _grid_values(bounds.pi_min, bounds.pi_max, cfg.grid_points)
    points = [(g, q) for g in gammas for q in pis]
    extras = [key for key in sorted(library)
              if bounds.gamma_min <= key[0] <= bounds.gamma_max
              and bounds.pi_min <= key[1] <= bounds.pi_max]
    lo_total = n * (n - 1) // 2
    hi_total = n * (n - 1)
    out: list[tuple[int, int]] = []
    for point in points + extras:
        if point in out:
            continue
        if point[0] + point[1] + cfg.band * 2 < lo_total:
            continue
        if point[0] + point[1] - cfg.band * 2 > hi_total:
            continue
        out.append(point)
    return out


def _dedup_key(p: LayoutProblem, sol: LayoutSolution) -> tuple:
    tol = p.tolerance()
    xs = sorted(round(v / max(tol, 1e-12)) for pl in sol.placements for v in (pl.l, pl.r))
    ys = sorted(round(v / max(tol, 1e-12)) for pl in sol.placements for v in (pl.t, pl.b))
    return (sol.stats.gamma, sol.stats.pi, tuple(xs), tuple(ys))


class _Pool:
    def __init__(self, p: LayoutProblem, on_solution):
        self.p = p
        self.on_solution = on_solution
        self.keys: set[tuple] = set()
        self.solutions: list[LayoutSolution] = []

    def offer(self, sol: LayoutSolution) -> bool:
        key = _dedup_key(self.p, sol)
        if key in self.keys:
            return False
        self.keys.add(key)
        self.solutions.append(sol)
        if self.on_solution is not None:
            self.on_solution(sol)
        return True

    def ranked(self, k: int) -> list[LayoutSolution]:
        """Best first; one layout per signature preferred before repeats."""
        order = sorted(range(len(self.solutions)),
                       key=lambda i: (round(self.solutions[i].stats.objective, 9), i))
        primary: list[int] = []
        seen_sigs: set[tuple[int, int]] = set()
        repeats: list[int] = []
        for i in order:
            sig = (self.solutions[i].stats.gamma, self.solutions[i].stats.pi)
            if sig in seen_sigs:
                repeats.append(i)
            else:
                seen_sigs.add(sig)
                primary.append(i)
        return [self.solutions[i] for i in (primary + repeats)[:k]]


class _Sweeper:
    """One full model with mutable signature and alignment-cap rows.

    Keeping the rows in place (only right-hand sides move between points)
    lets the solver session reuse its warm basis from point to point.
    """

    def __init__(self, p: LayoutProblem, cfg: DiversifyConfig, bounds: Bounds):
        self.p = p
        self.cfg = cfg
        self.bounds = bounds
        self.inst, self.handles = milp.build_full(p)
        milp.set_objective(self.inst, milp.ObjectiveMode.COMPOSITE, self.handles)
        self.library = heuristics.structured_candidates(self.inst)
        self.sig = milp.enforce_signature(self.inst, 0, 0, band=cfg.band)
        self.relax_signature()
        self.cap = milp.cap_epsilon(self.inst, self.handles.alignment,
                                    bounds.eps_min + bounds.eps_cap_used)
        self.floor = milp.floor_rectangularity(self.inst, self.handles.rect, bounds.rect_min)
        self.session = bnb.SolverSession(self.inst)
        self.solved_points: set[tuple[int, int]] = set()
        self.attempts: dict[tuple[int, int], int] = {}
        self.current_cap = bounds.eps_min + bounds.eps_cap_used
        u_idx = [v.index for v in self.handles.alignment.epsilon_vars]
        self.library_eps = {sig: int(round(values[u_idx].sum()))
                           for sig, values in self.library.items()}

    def relax_signature(self) -> None:
        n = len(self.p.elements)
        wide = n * n + self.cfg.band
        milp.update_signature(self.inst, self.sig, wide // 2, wide // 2, band=wide)

    def set_cap(self, cap: int) -> None:
        self.current_cap = cap
        self.inst.set_rhs(self.cap.cids[0], float(cap))

    def order_points(self, points: list[tuple[int, int]]) -> list[tuple[int, int]]:
        """Known-reachable points under the current alignment cap first."""
        def rank(point):
            eps = self.library_eps.get(point)
            reachable = eps is not None and eps <= self.current_cap
            return (0 if reachable else 1,)
        return sorted(points, key=rank)

    def solve_point(self, gamma_val: int, pi_val: int) -> Optional[LayoutSolution]:
        cfg = self.cfg
        milp.update_signature(self.inst, self.sig, gamma_val, pi_val, band=cfg.band)
        candidates = [values for (g, q), values in sorted(self.library.items())
                      if abs(g - gamma_val) <= cfg.band and abs(q - pi_val) <= cfg.band]
        solver_cfg = cfg.solver_config(sweep=True, candidates=candidates)
        # Points that stayed dry at tighter caps get geometrically less budget.
        tried = self.attempts.get((gamma_val, pi_val), 0)
        if solver_cfg.time_limit is not None and tried:
            solver_cfg.time_limit = max(0.25, solver_cfg.time_limit * (0.5 ** tried))
        self.attempts[(gamma_val, pi_val)] = tried + 1
        res = _solve(self.inst, solver_cfg, self.session)
        self.relax_signature()
        if res.values is None:
            return None
        sol = milp.decode_solution(self.inst, res.values)
        if validate_solution(self.p, sol):
            return None  # defensive: never emit an invalid layout
        return sol

    def sweep(self, points, pool: _Pool, deadline: Optional[float]) -> None:
        import time as _time

        for point in self.order_points(points):
            if len(pool.solutions) >= self.cfg.count:
                break
            if self.cfg.cancel is not None and self.cfg.cancel.is_set():
                break
            if deadline is not None and _time.monotonic() > deadline:
                raise TimeBudgetExhausted("diversify budget exhausted",
                                          pool.ranked(self.cfg.count))
            if point in self.solved_points:
                continue
            known_eps = self.library_eps.get(point)
            if known_eps is not None and known_eps > self.current_cap:
                continue  # revisit once the alignment cap admits the known layout
            sol = self.solve_point(*point)
            if sol is not None:
                self.solved_points.add(point)
                pool.offer(sol)


def diversify(p: LayoutProblem, cfg: Optional[DiversifyConfig] = None,
              bounds: Optional[Bounds] = None) -> list[LayoutSolution]:
    """Up to `count` mutually distinct layouts spanning the signature space."""
    import time as _time

    cfg = cfg or DiversifyConfig()
    deadline = _time.monotonic() + cfg.total_time if cfg.total_time else None
    if bounds is None:
        bounds = compute_bounds(p, cfg)

    pool = _Pool(p, cfg.on_solution)
    sweeper = _Sweeper(p, cfg, bounds)
    points = _candidate_points(bounds, cfg, len(p.elements), sweeper.library)

    for loosen in range(cfg.loosen_limit + 1):
        sweeper.set_cap(bounds.eps_min + bounds.eps_cap_used + loosen)
        sweeper.sweep(points, pool, deadline)
        if len(pool.solutions) >= cfg.count:
            break
        if cfg.cancel is not None and cfg.cancel.is_set():
            break
    if not pool.solutions and cfg.cancel is not None and cfg.cancel.is_set():
        return []
    if not pool.solutions:
        # Nothing matched any pinned signature: fall back to one plain solve
        # (signature relaxed, quality floors dropped) so a feasible problem
        # always yields at least one suggestion.
        sweeper.set_cap(4 * len(p.elements))
        sweeper.inst.set_rhs(sweeper.floor.cids[0], 4.0)
        res = _solve(sweeper.inst, cfg.solver_config(), sweeper.session)
        if res.status is bnb.MilpStatus.INFEASIBLE:
            raise InfeasibleProblem("core model has no feasible layout")
        if res.values is not None:
            sol = milp.decode_solution(sweeper.inst, res.values)
            if not validate_solution(p, sol):
                pool.offer(sol)
    return pool.ranked(cfg.count)


def nearby(p: LayoutProblem, seed: LayoutSolution, radius: int,
           k: int, cfg: Optional[DiversifyConfig] = None,
           bounds: Optional[Bounds] = None) -> list[LayoutSolution]:
    """Alternatives whose signature distance from the seed is in [1, radius]."""
    cfg = cfg or DiversifyConfig()
    cfg = replace(cfg, count=k + 1)  # one spare in case the band recaptures the seed
    if radius <= 0:
        return []
    seed_violations = validate_solution(p, seed)
    if seed_violations:
        raise InfeasibleProblem(f"seed layout invalid: {seed_violations[0]}")
    if bounds is None:
        bounds = compute_bounds(p, cfg)

    s0 = seed.stats
    points = []
    for dg in range(-radius, radius + 1):
        for dq in range(-radius, radius + 1):
            dist = abs(dg) + abs(dq)
            if not (1 <= dist <= radius):
                continue
            g, q = s0.gamma + dg, s0.pi + dq
            if bounds.gamma_min <= g <= bounds.gamma_max and bounds.pi_min <= q <= bounds.pi_max:
                points.append((g, q))
    points.sort(key=lambda t: (abs(t[0] - s0.gamma) + abs(t[1] - s0.pi), t))

    pool = _Pool(p, cfg.on_solution)
    sweeper = _Sweeper(p, cfg, bounds)
    sweeper.set_cap(bounds.eps_min + bounds.eps_cap_used + cfg.loosen_limit)
    deadline = None
    if cfg.total_time:
        import time as _time
        deadline = _time.monotonic() + cfg.total_time
    sweeper.sweep(points, pool, deadline)
    seed_key = _dedup_key(p, seed)
    ranked = [s for s in pool.ranked(k + 1) if _dedup_key(p, s) != seed_key]
    return ranked[:k]


def complete_partial(p: LayoutProblem, k: int,
                     cfg: Optional[DiversifyConfig] = None) -> list[LayoutSolution]:
    """Diverse completions around the locked elements.

    Locks are equality constraints of the core model, so this is the plain
    diversify sweep; every returned layout keeps locked rectangles exactly.
    """
    cfg = cfg or DiversifyConfig()
    cfg = replace(cfg, count=k)
    return diversify(p, cfg)


def solve_single(p: LayoutProblem, cfg: Optional[DiversifyConfig] = None) -> LayoutSolution:
    """One best-effort composite-objective layout."""
    cfg = cfg or DiversifyConfig()
    violations = validate_problem(p)
    if violations:
        raise InfeasibleProblem(f"problem is malformed: {violations[0]}")
    inst, handles = milp.build_full(p)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    res = _solve(inst, cfg.solver_config())
    if res.status is bnb.MilpStatus.INFEASIBLE:
        raise InfeasibleProblem("core model has no feasible layout")
    if res.values is None:
        raise TimeBudgetExhausted("no layout found within the budget")
    sol = milp.decode_solution(inst, res.values)
    bad = validate_solution(p, sol)
    if bad:
        raise AssertionError(f"solver produced an invalid layout: {bad[0]}")
    return sol


def generate_in_band(p: LayoutProblem, band_lo: float, band_hi: float,
                     refs: scoring.OptimalityRef,
                     cfg: Optional[DiversifyConfig] = None) -> LayoutSolution:
    """A layout whose optimality percentage lands inside [band_lo, band_hi].

    Works by pinning the used-alignment-group count and the adherence count
    to values whose composite objective maps into the requested band, using
    the tie-down rows that make both counts geometrically exact.  Raises
    InfeasibleProblem when no pinned pair inside the band is feasible.
    """
    cfg = cfg or DiversifyConfig()
    n = len(p.elements)
    w = p.weights
    span = refs.worst - refs.best
    if span <= 0:
        raise InfeasibleProblem("degenerate optimality range")

    inst, handles = milp.build_full(p)
    milp.add_extremal_tightening(inst, p, handles.alignment, handles.rect)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    eps_terms = [(1.0, v) for v in handles.alignment.epsilon_vars]
    adh_terms = [(1.0, v) for v in handles.rect.adherence_vars]

    combos = []
    for eps_val in range(4, 4 * n + 1):
        for r_val in range(4, 4 * n + 1):
            f_pred = w.alignment * eps_val - w.rectangularity * r_val
            pct = 100.0 * (refs.worst - f_pred) / span
            if band_lo <= pct <= band_hi:
                combos.append((abs(pct - 0.5 * (band_lo + band_hi)), eps_val, r_val))
    combos.sort()
    for _, eps_val, r_val in combos:
        cids = [
            inst.add_constraint(eps_terms, milp.Sense.EQ, float(eps_val), "band_eps"),
            inst.add_constraint(adh_terms, milp.Sense.EQ, float(r_val), "band_rect"),
        ]
        res = _solve(inst, cfg.solver_config(sweep=True))
        inst.remove_constraints(cids)
        if res.values is None:
            continue
        sol = milp.decode_solution(inst, res.values)
        if validate_solution(p, sol):
            continue
        pct = scoring.optimality(p, sol, refs)
        if band_lo <= pct <= band_hi:
            return sol
    raise InfeasibleProblem(f"no layout found in optimality band [{band_lo}, {band_hi}]")


def optimality_refs(p: LayoutProblem, cfg: Optional[DiversifyConfig] = None) -> scoring.OptimalityRef:
    """Best and worst composite objective values for optimality scoring.

    The worst-side solve runs with extra tie-down rows so that group usage
    and adherence counts cannot be inflated or deflated away from their
    geometric meaning.
    """
    cfg = cfg or DiversifyConfig()
    best = solve_single(p, cfg)

    inst, handles = milp.build_full(p)
    milp.add_extremal_tightening(inst, p, handles.alignment, handles.rect)
    milp.set_objective(inst, milp.ObjectiveMode.COMPOSITE, handles)
    inst.objective_sense = "max"
    res = _solve(inst, cfg.solver_config())
    if res.values is None:
        raise TimeBudgetExhausted("no worst-reference layout found within the budget")
    worst = milp.decode_solution(inst, res.values)
    return scoring.OptimalityRef(best=best.stats.objective, worst=worst.stats.objective)
