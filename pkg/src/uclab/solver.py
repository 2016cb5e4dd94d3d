"""Exact LP and MILP solving on top of the simplex core.

``solve_lp`` drops integrality, ``solve_milp`` runs depth-first
branch-and-bound with best-bound reopening over the binary variables,
``solve_fixed`` is the fix-and-solve step used by neural diving, and
``brute_force_milp`` enumerates every binary fixing as an independent
test oracle. All entry points are deterministic: same problem, same
status, objective, and node counts.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .milp import BINARY, Assignment, MilpProblem, ValidationError
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, CoreResult, SolverFailure, solve_core

NODE_LIMIT = "node_limit"


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-6
    int_tol: float = 1e-6
    node_limit: int = 10**6
    time_limit: float | None = None

    def __post_init__(self):
        if self.feas_tol <= 0 or self.int_tol <= 0:
            raise ValidationError("tolerances must be positive")


@dataclass(frozen=True)
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    values: Assignment
    objective: float | None
    iterations: int


@dataclass(frozen=True)
class BnbResult:
    status: str  # optimal | infeasible | node_limit
    incumbent: Assignment | None
    objective: float | None
    nodes_explored: int


@dataclass
class _Compiled:
    names: list[str]
    index: dict[str, int]
    c: np.ndarray
    offset: float
    A: np.ndarray
    senses: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    binary_idx: np.ndarray
    bin_only_rows: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))


def _compile(problem: MilpProblem) -> _Compiled:
    names = problem.variable_names
    index = {name: j for j, name in enumerate(names)}
    n = len(names)
    m = len(problem.constraints)
    c = np.zeros(n)
    for var, coef in problem.objective.items():
        c[index[var]] = coef
    A = np.zeros((m, n))
    senses = np.zeros(m, dtype=np.int8)
    b = np.zeros(m)
    sense_code = {"<=": -1, "=": 0, ">=": 1}
    for i, con in enumerate(problem.constraints):
        for var, coef in con.terms.items():
            A[i, index[var]] = coef
        senses[i] = sense_code[con.sense]
        b[i] = con.rhs
    lo = np.array([v.lower for v in problem.variables], dtype=float)
    hi = np.array([v.upper for v in problem.variables], dtype=float)
    binary_idx = np.array(
        [j for j, v in enumerate(problem.variables) if v.kind == BINARY], dtype=np.int64
    )
    is_bin = np.zeros(n, dtype=bool)
    is_bin[binary_idx] = True
    support_ok = np.array([(A[i] != 0).sum() > 0 and np.all(is_bin[A[i] != 0]) for i in range(m)])
    return _Compiled(
        names, index, c, problem.offset, A, senses, b, lo, hi, binary_idx,
        np.flatnonzero(support_ok),
    )


def _solve_bounds(comp: _Compiled, lo, hi, cfg: SolverConfig) -> tuple[CoreResult, float | None]:
    res = solve_core(comp.A, comp.senses, comp.b, comp.c, lo, hi, feas_tol=cfg.feas_tol)
    obj = None
    if res.status == OPTIMAL:
        obj = float(comp.c @ res.x) + comp.offset
    return res, obj


def _to_solution(comp: _Compiled, res: CoreResult, obj: float | None) -> LpSolution:
    if res.status != OPTIMAL:
        return LpSolution(res.status, {}, None, res.iterations)
    values = {name: float(res.x[j]) for name, j in comp.index.items()}
    return LpSolution(OPTIMAL, values, obj, res.iterations)


def solve_lp(problem: MilpProblem, cfg: SolverConfig | None = None) -> LpSolution:
    """Solve the LP relaxation: binaries become continuous on [0, 1]."""
    cfg = cfg or SolverConfig()
    comp = _compile(problem)
    res, obj = _solve_bounds(comp, comp.lo, comp.hi, cfg)
    return _to_solution(comp, res, obj)


def solve_fixed(
    problem: MilpProblem, fixing: Assignment, cfg: SolverConfig | None = None
) -> LpSolution:
    """Clamp every binary to its 0/1 value in ``fixing`` and solve the LP.

    A pure dive: the caller must fix all binaries; anything left unfixed is
    a contract violation, not a silent relaxation.
    """
    cfg = cfg or SolverConfig()
    comp = _compile(problem)
    binaries = {problem.variables[j].name for j in comp.binary_idx}
    unknown = set(fixing) - set(comp.index)
    if unknown:
        raise ValidationError(f"fixing names unknown variables: {sorted(unknown)}")
    not_binary = [v for v in fixing if v not in binaries]
    if not_binary:
        raise ValidationError(f"fixing lists non-binary variables: {sorted(not_binary)}")
    unfixed = sorted(binaries - set(fixing))
    if unfixed:
        raise ValidationError(f"unfixed binary variables present: {unfixed}")
    lo = comp.lo.copy()
    hi = comp.hi.copy()
    for var, value in fixing.items():
        if value not in (0, 1):
            raise ValidationError(f"fixing value for {var} must be 0 or 1, got {value}")
        j = comp.index[var]
        lo[j] = hi[j] = float(value)
    res, obj = _solve_bounds(comp, lo, hi, cfg)
    return _to_solution(comp, res, obj)


def solve_milp(problem: MilpProblem, cfg: SolverConfig | None = None) -> BnbResult:
    """Branch-and-bound over the binary variables.

    Branching picks the most fractional binary (ties by lowest variable
    index), dives depth-first into the nearest-integer child, and reopens
    the best-bound open node when a dive ends. Nodes are pruned once their
    relaxation bound reaches the incumbent minus 1e-9.
    """
    cfg = cfg or SolverConfig()
    comp = _compile(problem)
    deadline = None if cfg.time_limit is None else time.monotonic() + cfg.time_limit

    nodes_explored = 0
    incumbent_x: np.ndarray | None = None
    incumbent_obj = math.inf
    hit_limit = False

    # Heap of reopened nodes keyed by parent relaxation bound, then age.
    open_heap: list[tuple[float, int, np.ndarray, np.ndarray]] = []
    seq = 0
    current: tuple[np.ndarray, np.ndarray] | None = (comp.lo.copy(), comp.hi.copy())

    while True:
        if current is None:
            while open_heap:
                bound, _, lo, hi = heapq.heappop(open_heap)
                if bound < incumbent_obj - 1e-9:
                    current = (lo, hi)
                    break
            if current is None:
                break
        if nodes_explored >= cfg.node_limit or (
            deadline is not None and time.monotonic() > deadline
        ):
            hit_limit = True
            break

        lo, hi = current
        current = None
        res, obj = _solve_bounds(comp, lo, hi, cfg)
        nodes_explored += 1
        if res.status == UNBOUNDED:
            raise SolverFailure("MILP relaxation is unbounded")
        if res.status != OPTIMAL or obj >= incumbent_obj - 1e-9:
            continue

        frac = np.abs(res.x[comp.binary_idx] - np.round(res.x[comp.binary_idx]))
        worst = int(np.argmax(frac)) if frac.size else 0
        if frac.size == 0 or frac[worst] <= cfg.int_tol:
            if obj < incumbent_obj - 1e-9:
                incumbent_obj = obj
                incumbent_x = res.x
            continue
        # np.argmax returns the first (lowest-index) maximizer, as required.
        j = int(comp.binary_idx[worst])
        value = res.x[j]
        first = 1.0 if value >= 0.5 else 0.0

        other_lo, other_hi = lo.copy(), hi.copy()
        if first == 1.0:
            other_hi[j] = 0.0
        else:
            other_lo[j] = 1.0
        heapq.heappush(open_heap, (obj, seq, other_lo, other_hi))
        seq += 1

        lo[j] = hi[j] = first
        current = (lo, hi)

    if incumbent_x is None:
        status = NODE_LIMIT if hit_limit else INFEASIBLE
        return BnbResult(status, None, None, nodes_explored)
    values = {name: float(incumbent_x[j]) for name, j in comp.index.items()}
    status = NODE_LIMIT if hit_limit else OPTIMAL
    return BnbResult(status, values, incumbent_obj, nodes_explored)


def brute_force_milp(problem: MilpProblem, cfg: SolverConfig | None = None) -> BnbResult:
    """Enumerate all 2^k binary fixings and keep the best LP value.

    Test oracle only; refuses more than 22 binaries. Fixings that violate a
    constraint supported entirely on binaries are screened out in bulk (they
    cannot be feasible); every surviving fixing is solved as an LP.
    """
    cfg = cfg or SolverConfig()
    comp = _compile(problem)
    k = len(comp.binary_idx)
    if k > 22:
        raise ValidationError(f"brute force refuses {k} > 22 binary variables")
    if k == 0:
        res, obj = _solve_bounds(comp, comp.lo, comp.hi, cfg)
        if res.status == UNBOUNDED:
            raise SolverFailure("relaxation is unbounded")
        if res.status != OPTIMAL:
            return BnbResult(INFEASIBLE, None, None, 0)
        values = {name: float(res.x[j]) for name, j in comp.index.items()}
        return BnbResult(OPTIMAL, values, obj, 1)

    A_bin = comp.A[np.ix_(comp.bin_only_rows, comp.binary_idx)]
    sen_bin = comp.senses[comp.bin_only_rows]
    b_bin = comp.b[comp.bin_only_rows]

    best_obj = math.inf
    best_x: np.ndarray | None = None
    explored = 0
    chunk = 1 << 16
    for base in range(0, 1 << k, chunk):
        count = min(chunk, (1 << k) - base)
        codes = np.arange(base, base + count, dtype=np.int64)
        patterns = ((codes[:, None] >> np.arange(k)) & 1).astype(float)
        act = patterns @ A_bin.T
        ok = np.ones(count, dtype=bool)
        ok &= np.all(act[:, sen_bin == -1] <= b_bin[sen_bin == -1] + cfg.feas_tol, axis=1)
        ok &= np.all(act[:, sen_bin == 1] >= b_bin[sen_bin == 1] - cfg.feas_tol, axis=1)
        eq = sen_bin == 0
        ok &= np.all(np.abs(act[:, eq] - b_bin[eq]) <= cfg.feas_tol, axis=1)
        for row in np.flatnonzero(ok):
            lo = comp.lo.copy()
            hi = comp.hi.copy()
            lo[comp.binary_idx] = hi[comp.binary_idx] = patterns[row]
            res, obj = _solve_bounds(comp, lo, hi, cfg)
            explored += 1
            if res.status == OPTIMAL and obj < best_obj:
                best_obj = obj
                best_x = res.x
    if best_x is None:
        return BnbResult(INFEASIBLE, None, None, explored)
    values = {name: float(best_x[j]) for name, j in comp.index.items()}
    return BnbResult(OPTIMAL, values, best_obj, explored)
