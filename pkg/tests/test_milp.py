import math

import numpy as np
import pytest

from uclab import (
    MilpProblem,
    ValidationError,
    Variable,
    build_milp,
    check_feasible,
    evaluate_objective,
    solve_milp,
)
from uclab.milp import (
    BINARY,
    CONTINUOUS,
    Constraint,
    format_solution_csv,
    parse_solution_csv,
)

from conftest import two_unit_patterns


def test_zero_assignment_zero_offset(two_unit):
    problem = build_milp(two_unit)
    zeros = {v.name: 0.0 for v in problem.variables}
    assert evaluate_objective(problem, zeros) == 0.0


def test_two_unit_optimum_is_120(two_unit):
    # Oracle: enumerate all four commitment patterns by hand.
    feasible_costs = [c for _, ok, c in two_unit_patterns(two_unit) if ok]
    assert min(feasible_costs) == 120.0

    problem = build_milp(two_unit)
    result = solve_milp(problem)
    assert result.status == "optimal"
    assert evaluate_objective(problem, result.incumbent) == pytest.approx(120.0)


def test_missing_variable_errors(two_unit):
    problem = build_milp(two_unit)
    partial = {v.name: 0.0 for v in problem.variables[:-1]}
    with pytest.raises(ValidationError, match="missing"):
        evaluate_objective(problem, partial)
    with pytest.raises(ValidationError, match="missing"):
        check_feasible(problem, partial, 1e-6)


def test_objective_is_linear(two_unit):
    problem = build_milp(two_unit)
    rng = np.random.default_rng(7)
    names = [v.name for v in problem.variables]
    a = {n: float(rng.uniform(-3, 3)) for n in names}
    b = {n: float(rng.uniform(-3, 3)) for n in names}
    summed = {n: a[n] + b[n] for n in names}
    lhs = evaluate_objective(problem, summed)
    rhs = (
        evaluate_objective(problem, a)
        + evaluate_objective(problem, b)
        - problem.offset
    )
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_optimum_feasible_and_perturbation_violates(two_unit):
    problem = build_milp(two_unit)
    result = solve_milp(problem)
    report = check_feasible(problem, result.incumbent, 1e-6)
    assert report.feasible and report.violations == ()

    bumped = dict(result.incumbent)
    bumped["p_0_0"] += 1.0
    report = check_feasible(problem, bumped, 1e-6)
    assert not report.feasible
    bal = [v for v in report.violations if v.name == "bal_0"]
    assert len(bal) == 1
    assert bal[0].amount == pytest.approx(1.0)


def test_fractional_binary_reports_integrality(two_unit):
    problem = build_milp(two_unit)
    result = solve_milp(problem)
    values = dict(result.incumbent)
    values["u_1_0"] = 0.4
    report = check_feasible(problem, values, 1e-6)
    kinds = {v.kind for v in report.violations}
    assert "integrality" in kinds
    gap = [v for v in report.violations if v.kind == "integrality"][0]
    assert gap.amount == pytest.approx(0.4)


def test_bound_violation_reported():
    problem = MilpProblem(
        variables=(Variable("x", CONTINUOUS, 0.0, 5.0),),
        objective={"x": 1.0},
    )
    report = check_feasible(problem, {"x": 6.0}, 1e-6)
    assert not report.feasible
    assert report.violations[0].kind == "bound"
    assert report.violations[0].amount == pytest.approx(1.0)


def test_check_feasible_requires_positive_tol(two_unit):
    problem = build_milp(two_unit)
    zeros = {v.name: 0.0 for v in problem.variables}
    with pytest.raises(ValidationError):
        check_feasible(problem, zeros, 0.0)


def test_capacity_shortfall_never_feasible():
    # If total capacity cannot meet peak demand, no assignment that respects
    # the pmax rows can balance; check_feasible must reject all of them.
    inst_vars = (
        Variable("p_0_0", CONTINUOUS, 0.0, 30.0),
        Variable("u_0_0", BINARY, 0.0, 1.0),
    )
    problem = MilpProblem(
        variables=inst_vars,
        objective={"p_0_0": 1.0},
        constraints=(
            Constraint("bal_0", {"p_0_0": 1.0}, "=", 50.0),
            Constraint("pmax_0_0", {"p_0_0": 1.0, "u_0_0": -30.0}, "<=", 0.0),
        ),
    )
    rng = np.random.default_rng(3)
    for _ in range(25):
        u = float(rng.integers(0, 2))
        p = float(rng.uniform(0, 30.0 * u))
        report = check_feasible(problem, {"p_0_0": p, "u_0_0": u}, 1e-6)
        assert not report.feasible


def test_duplicate_variable_names_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        MilpProblem(
            variables=(Variable("x"), Variable("x")),
            objective={},
        )


def test_constraint_unknown_variable_rejected():
    with pytest.raises(ValidationError, match="unknown"):
        MilpProblem(
            variables=(Variable("x"),),
            objective={},
            constraints=(Constraint("c", {"y": 1.0}, "<=", 0.0),),
        )


def test_binary_bounds_must_stay_in_unit_interval():
    with pytest.raises(ValidationError):
        Variable("b", BINARY, 0.0, 2.0)
    # Clamped binaries (for example fixed by branching) stay legal.
    Variable("b", BINARY, 1.0, 1.0)


def test_solution_csv_round_trip():
    text = format_solution_csv("optimal", 120.0, {"x": 1.0, "y": 0.25})
    status, objective, values = parse_solution_csv(text)
    assert status == "optimal"
    assert objective == 120.0
    assert values == {"x": 1.0, "y": 0.25}

    text = format_solution_csv("infeasible", None, {})
    status, objective, values = parse_solution_csv(text)
    assert (status, objective, values) == ("infeasible", None, {})
