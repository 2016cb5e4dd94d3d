"""Build a small unit-commitment instance and solve it exactly.

A three-unit, six-period system with a morning ramp: the cheap base unit
stays on, the mid unit picks up the shoulder, and the peaker fires only at
the top. Run with:  python3 demos/01_build_and_solve.py
"""

from uclab import GeneratorSpec, UcInstance, build_milp, solve_lp, solve_milp

fleet = (
    GeneratorSpec(0, p_min=30, p_max=120, fuel_cost=18.0, no_load_cost=4.0,
                  startup_cost=40.0, shutdown_cost=10.0, min_up=3, min_down=2,
                  init_on=True, init_periods_in_state=6, init_power=80.0),
    GeneratorSpec(1, p_min=20, p_max=80, fuel_cost=27.0, no_load_cost=3.0,
                  startup_cost=25.0, shutdown_cost=8.0, min_up=2, min_down=2,
                  init_on=False, init_periods_in_state=4),
    GeneratorSpec(2, p_min=5, p_max=40, fuel_cost=45.0, no_load_cost=1.5,
                  startup_cost=10.0, shutdown_cost=3.0, min_up=1, min_down=1,
                  init_on=False, init_periods_in_state=2),
)
demand = (90.0, 110.0, 150.0, 215.0, 170.0, 120.0)
inst = UcInstance(generators=fleet, demand=demand)

problem = build_milp(inst)
print(f"MILP: {len(problem.variables)} variables, {len(problem.constraints)} rows")

relaxation = solve_lp(problem)
print(f"LP relaxation: {relaxation.objective:.2f} ({relaxation.iterations} pivots)")

result = solve_milp(problem)
print(f"exact optimum: {result.objective:.2f} ({result.nodes_explored} nodes)\n")

print("t  demand   " + "  ".join(f"unit{g}" for g in range(len(fleet))))
for t in range(inst.horizon):
    row = []
    for g in range(len(fleet)):
        on = result.incumbent[f"u_{g}_{t}"] > 0.5
        power = result.incumbent[f"p_{g}_{t}"]
        row.append(f"{power:5.0f}" if on else "    -")
    print(f"{t}  {demand[t]:6.0f}  " + "  ".join(row))

gap = result.objective - relaxation.objective
print(f"\nintegrality gap closed by branch and bound: {gap:.2f}")
