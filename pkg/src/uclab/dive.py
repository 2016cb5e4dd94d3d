"""Fix-and-solve diving with a trained predictor, plus evaluation statistics.

A dive thresholds the predicted on-probabilities at 0.5 (ties go to 1),
fixes every binary, and solves the remaining LP. Feasible dives carry a
cost and a signed relative error against the exact optimum; infeasible
dives carry neither (there is no LP solution to price). The R-squared
statistic is computed over the cost-bearing cases of each evaluator and
that population is recorded next to the number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gcnn import GcnnParams, forward
from .graph import encode
from .milp import Assignment, ValidationError
from .solver import BnbResult, LpSolution, SolverConfig, solve_fixed, solve_milp
from .ucmodel import UcInstance, build_milp

HIST_BIN_WIDTH = 0.01


@dataclass(frozen=True)
class DiveOutcome:
    fixed: Assignment
    lp: LpSolution
    feasible: bool
    cost: float | None
    rel_error: float | None


@dataclass(frozen=True)
class HistBin:
    lo: float
    hi: float
    feasible_count: int
    infeasible_count: int


@dataclass(frozen=True)
class EvalStats:
    n: int
    feasible_rate: float
    rel_errors: tuple[float, ...]  # feasible cases only
    histogram: tuple[HistBin, ...]
    r2: float | None
    r2_population: str  # which cases the r2 covers
    mean_abs_rel_error: float
    excluded: int = 0  # oracle-infeasible instances skipped with a warning


def rel_error(cost: float, opt: float) -> float:
    """Signed relative cost gap (cost - opt) / |opt|."""
    if opt == 0:
        raise ValidationError("relative error undefined for zero optimal cost")
    return (cost - opt) / abs(opt)


def r_squared(y, yhat) -> float:
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.size == 0:
        raise ValidationError("r_squared needs equal-length nonempty sequences")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValidationError("r_squared undefined when the targets have no variance")
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def threshold_probs(
    names: list[str], probs: np.ndarray, threshold: float = 0.5
) -> Assignment:
    # Ties go to 1: a probability exactly at the threshold commits the unit.
    return {name: (1.0 if p >= threshold else 0.0) for name, p in zip(names, probs)}


def dive(
    params: GcnnParams,
    inst: UcInstance,
    optimum: float | None = None,
    cfg: SolverConfig | None = None,
    threshold: float = 0.5,
) -> DiveOutcome:
    """Predict, fix every binary, and solve the remaining LP.

    ``optimum`` is the exact MILP objective when the caller already knows it;
    otherwise it is computed here so the relative error can be reported.
    """
    cfg = cfg or SolverConfig()
    problem = build_milp(inst)
    graph = encode(problem)
    probs = forward(params, graph)
    names = [graph.var_names[j] for j in graph.binary_mask]
    fixing = threshold_probs(names, probs, threshold)
    lp = solve_fixed(problem, fixing, cfg)
    feasible = lp.status == "optimal"
    if not feasible:
        return DiveOutcome(fixing, lp, False, None, None)
    if optimum is None:
        oracle = solve_milp(problem, cfg)
        if oracle.status != "optimal":
            raise ValidationError("oracle MILP did not solve to optimality")
        optimum = oracle.objective
    return DiveOutcome(fixing, lp, True, lp.objective, rel_error(lp.objective, optimum))


def build_stats(
    outcomes: list[tuple[bool, float | None]],
    feasible_pairs: list[tuple[float, float]],
    r2_population: str,
    excluded: int = 0,
) -> EvalStats:
    """Aggregate (feasible, rel_error or None) rows into an EvalStats.

    ``feasible_pairs`` holds (optimal cost, predicted cost) for every case
    that carries a cost; they feed the r2.
    """
    n = len(outcomes)
    if n == 0:
        raise ValidationError("cannot aggregate an empty evaluation")
    feas_count = sum(1 for f, _ in outcomes if f)
    rel_errors = tuple(r for f, r in outcomes if f and r is not None)

    binned: dict[int, list[int]] = {}
    for feas, rel in outcomes:
        if rel is None:
            continue
        idx = math.floor(rel / HIST_BIN_WIDTH)
        cell = binned.setdefault(idx, [0, 0])
        cell[0 if feas else 1] += 1
    histogram = tuple(
        HistBin(idx * HIST_BIN_WIDTH, (idx + 1) * HIST_BIN_WIDTH, c[0], c[1])
        for idx, c in sorted(binned.items())
    )
    r2: float | None
    try:
        r2 = r_squared([p[0] for p in feasible_pairs], [p[1] for p in feasible_pairs])
    except ValidationError:
        r2 = None
    mean_abs = float(np.mean([abs(r) for r in rel_errors])) if rel_errors else math.nan
    return EvalStats(
        n=n,
        feasible_rate=feas_count / n,
        rel_errors=rel_errors,
        histogram=histogram,
        r2=r2,
        r2_population=r2_population,
        mean_abs_rel_error=mean_abs,
        excluded=excluded,
    )


def evaluate_dive(
    params: GcnnParams,
    test: list[UcInstance],
    cfg: SolverConfig | None = None,
    optima: list[float] | None = None,
    threshold: float = 0.5,
) -> tuple[EvalStats, list[DiveOutcome]]:
    """Dive on every test instance and compare against the exact optimum.

    ``optima`` may carry precomputed exact objectives (one per instance,
    None for unknown); oracle-infeasible instances are excluded and counted.
    """
    if not test:
        raise ValidationError("test set is empty")
    cfg = cfg or SolverConfig()
    outcomes: list[DiveOutcome] = []
    rows: list[tuple[bool, float | None]] = []
    pairs: list[tuple[float, float]] = []
    excluded = 0
    for k, inst in enumerate(test):
        opt = optima[k] if optima is not None else None
        if opt is None:
            oracle = solve_milp(build_milp(inst), cfg)
            if oracle.status != "optimal":
                excluded += 1
                continue
            opt = oracle.objective
        outcome = dive(params, inst, optimum=opt, cfg=cfg, threshold=threshold)
        outcomes.append(outcome)
        rows.append((outcome.feasible, outcome.rel_error))
        if outcome.feasible:
            pairs.append((opt, outcome.cost))
    stats = build_stats(rows, pairs, "feasible dives", excluded=excluded)
    return stats, outcomes


def format_eval_csv(rows: list[tuple[str, bool, float, float | None, float | None]]) -> str:
    """Rows of (instance, feasible, opt_cost, pred_cost, rel_error)."""
    lines = ["instance,feasible,opt_cost,pred_cost,rel_error"]
    for name, feasible, opt, pred, rel in rows:
        pred_s = "" if pred is None else repr(float(pred))
        rel_s = "" if rel is None else repr(float(rel))
        lines.append(f"{name},{int(feasible)},{float(opt)!r},{pred_s},{rel_s}")
    return "\n".join(lines) + "\n"


def format_hist_csv(stats: EvalStats) -> str:
    lines = ["bin_lo,bin_hi,feasible_count,infeasible_count"]
    for b in stats.histogram:
        lines.append(f"{b.lo!r},{b.hi!r},{b.feasible_count},{b.infeasible_count}")
    return "\n".join(lines) + "\n"


def format_summary(stats: EvalStats) -> str:
    r2 = "undefined" if stats.r2 is None else repr(stats.r2)
    mean_abs = (
        "undefined" if math.isnan(stats.mean_abs_rel_error) else repr(stats.mean_abs_rel_error)
    )
    return (
        f"instances evaluated: {stats.n}\n"
        f"oracle-infeasible excluded: {stats.excluded}\n"
        f"feasible rate: {stats.feasible_rate!r}\n"
        f"mean |relative error| (feasible): {mean_abs}\n"
        f"r2 over {stats.r2_population}: {r2}\n"
    )
