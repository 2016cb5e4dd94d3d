"""Serialize a model to LP text, parse it back, and audit a solution.

Shows the canonical LP writer/parser pair, the feasibility report with
signed violations, and objective pricing of arbitrary assignments.
Run with:  python3 demos/02_lp_files_and_feasibility.py
"""

from uclab import (
    GeneratorSpec,
    UcInstance,
    build_milp,
    check_feasible,
    evaluate_objective,
    parse_lp,
    solve_milp,
    write_lp,
)

inst = UcInstance(
    generators=(
        GeneratorSpec(0, 10, 100, 2.0, init_periods_in_state=1),
        GeneratorSpec(1, 10, 50, 5.0, init_periods_in_state=1),
    ),
    demand=(60.0,),
)
problem = build_milp(inst)

text = write_lp(problem)
print("---- LP file ----")
print(text)

again = parse_lp(text)
print("parse(write(p)) == p:", again == problem)
print("byte-stable writer:", write_lp(again) == text)

result = solve_milp(problem)
print(f"\noptimal cost {result.objective:.1f}")
report = check_feasible(problem, result.incumbent, 1e-6)
print("optimum feasible:", report.feasible)

# Nudge the dispatch off balance and watch the report name the row.
broken = dict(result.incumbent)
broken["p_0_0"] += 1.0
report = check_feasible(problem, broken, 1e-6)
for violation in report.violations:
    print(f"violated {violation.kind} {violation.name}: {violation.amount:+.3f}")
print("priced anyway:", evaluate_objective(problem, broken))
