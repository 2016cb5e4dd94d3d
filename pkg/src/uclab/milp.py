"""Solver-agnostic MILP containers: variables, constraints, assignments.

All containers are plain dataclasses, validated on construction and treated
as immutable afterwards, so they can be shared freely across threads.
Objectives are always minimized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

BINARY = "binary"
CONTINUOUS = "continuous"

SENSES = ("<=", "=", ">=")

INF = math.inf


class ValidationError(ValueError):
    """Raised when a domain object violates its invariants."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = INF

    def __post_init__(self):
        if self.kind not in (BINARY, CONTINUOUS):
            raise ValidationError(f"unknown variable kind {self.kind!r}")
        if self.kind == BINARY and not (0.0 <= self.lower and self.upper <= 1.0):
            raise ValidationError(
                f"binary variable {self.name} must have bounds within [0,1], "
                f"got [{self.lower}, {self.upper}]"
            )
        if self.lower > self.upper:
            raise ValidationError(
                f"variable {self.name} has empty bound interval "
                f"[{self.lower}, {self.upper}]"
            )


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: dict[str, float]
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValidationError(
                f"constraint {self.name}: sense must be one of {SENSES}"
            )
        if not math.isfinite(self.rhs):
            raise ValidationError(f"constraint {self.name}: non-finite rhs")


# A (possibly partial) mapping from variable name to value.
Assignment = dict[str, float]


@dataclass(frozen=True)
class MilpProblem:
    """Sparse minimization MILP over named binary/continuous variables."""

    variables: tuple[Variable, ...]
    objective: dict[str, float]
    offset: float = 0.0
    constraints: tuple[Constraint, ...] = ()
    sense: str = "minimize"

    def __post_init__(self):
        if self.sense != "minimize":
            raise ValidationError("only minimization problems are supported")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate variable names")
        known = set(names)
        for var in self.objective:
            if var not in known:
                raise ValidationError(f"objective references unknown variable {var!r}")
        row_names = [c.name for c in self.constraints]
        if len(set(row_names)) != len(row_names):
            raise ValidationError("duplicate constraint names")
        for con in self.constraints:
            for var in con.terms:
                if var not in known:
                    raise ValidationError(
                        f"constraint {con.name} references unknown variable {var!r}"
                    )

    @property
    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def variable_index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    def binaries(self) -> list[str]:
        return [v.name for v in self.variables if v.kind == BINARY]


@dataclass(frozen=True)
class Violation:
    """One reported feasibility defect: a row, a bound, or an integrality gap.

    ``amount`` is the signed residual (row activity minus rhs for rows,
    overshoot past the bound for bounds, distance to the nearest integer
    for binaries).
    """

    kind: str  # "constraint" | "bound" | "integrality"
    name: str
    amount: float


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    def worst(self) -> float:
        return max((abs(v.amount) for v in self.violations), default=0.0)


def _require_total(problem: MilpProblem, assignment: Assignment) -> None:
    missing = [v.name for v in problem.variables if v.name not in assignment]
    if missing:
        raise ValidationError(f"assignment is missing variables: {missing}")
    unknown = set(assignment) - set(problem.variable_names)
    if unknown:
        raise ValidationError(f"assignment names unknown variables: {sorted(unknown)}")


def evaluate_objective(problem: MilpProblem, assignment: Assignment) -> float:
    """Objective value of a total assignment: dot product plus offset."""
    _require_total(problem, assignment)
    return sum(coef * assignment[var] for var, coef in problem.objective.items()) + problem.offset


def check_feasible(
    problem: MilpProblem, assignment: Assignment, tol: float = 1e-6
) -> FeasibilityReport:
    """Check a total assignment against every row, bound, and binary.

    Infeasibility is reported as data, never raised. A violation is listed
    only when it exceeds ``tol``.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    _require_total(problem, assignment)
    violations: list[Violation] = []
    for var in problem.variables:
        x = assignment[var.name]
        if x > var.upper + tol or x < var.lower - tol:
            over = x - var.upper if x > var.upper else x - var.lower
            violations.append(Violation("bound", var.name, over))
        if var.kind == BINARY:
            gap = x - round(x)
            if abs(gap) > tol:
                violations.append(Violation("integrality", var.name, gap))
    for con in problem.constraints:
        activity = sum(coef * assignment[var] for var, coef in con.terms.items())
        resid = activity - con.rhs
        bad = (
            (con.sense == "<=" and resid > tol)
            or (con.sense == ">=" and resid < -tol)
            or (con.sense == "=" and abs(resid) > tol)
        )
        if bad:
            violations.append(Violation("constraint", con.name, resid))
    return FeasibilityReport(feasible=not violations, violations=tuple(violations))


def format_solution_csv(status: str, objective: float | None, values: Assignment) -> str:
    """Serialize a solution as CSV with a leading status/objective comment."""
    obj = "" if objective is None else repr(float(objective))
    lines = [f"# status={status} objective={obj}", "variable,value"]
    for name, value in values.items():
        lines.append(f"{name},{float(value)!r}")
    return "\n".join(lines) + "\n"


def parse_solution_csv(text: str) -> tuple[str, float | None, Assignment]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValidationError("solution CSV must start with a '# status=...' comment")
    header = lines[0][1:].strip()
    fields = dict(part.split("=", 1) for part in header.split())
    status = fields["status"]
    objective = float(fields["objective"]) if fields.get("objective") else None
    if lines[1] != "variable,value":
        raise ValidationError("expected 'variable,value' header row")
    values: Assignment = {}
    for ln in lines[2:]:
        name, _, val = ln.partition(",")
        values[name] = float(val)
    return status, objective, values
