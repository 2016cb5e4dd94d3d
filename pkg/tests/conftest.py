import numpy as np
import pytest

from uclab import GeneratorSpec, MilpProblem, UcInstance, Variable, build_milp
from uclab.milp import BINARY, CONTINUOUS, Constraint


@pytest.fixture
def two_unit() -> UcInstance:
    """Two units, one period: fuel 2 vs 5, p_max 100 vs 50, demand 60.

    Optimal commitment turns only unit 0 on at 60 MW for a cost of 120.
    """
    return UcInstance(
        generators=(
            GeneratorSpec(0, 10, 100, 2.0, init_periods_in_state=1),
            GeneratorSpec(1, 10, 50, 5.0, init_periods_in_state=1),
        ),
        demand=(60.0,),
    )


@pytest.fixture
def g2t3() -> UcInstance:
    """Two units over three periods, min up/down of 1, no ramp or emission."""
    return UcInstance(
        generators=(
            GeneratorSpec(0, 10, 100, 2.0, min_up=1, min_down=1,
                          init_periods_in_state=5),
            GeneratorSpec(1, 10, 50, 5.0, min_up=1, min_down=1,
                          init_periods_in_state=5),
        ),
        demand=(60.0, 55.0, 70.0),
    )


def two_unit_patterns(inst: UcInstance):
    """Hand enumeration of the four commitment patterns of the 1-period fixture.

    For each (on0, on1) pattern, the cheapest dispatch is found by filling the
    cheaper committed unit first; returns (pattern, feasible, cost) triples.
    """
    g0, g1 = inst.generators
    demand = inst.demand[0]
    results = []
    for on0 in (0, 1):
        for on1 in (0, 1):
            lo = on0 * g0.p_min + on1 * g1.p_min
            hi = on0 * g0.p_max + on1 * g1.p_max
            if not lo <= demand <= hi:
                results.append(((on0, on1), False, None))
                continue
            ordered = sorted(
                [(g0.fuel_cost, on0, g0), (g1.fuel_cost, on1, g1)]
            )
            remaining = demand
            cost = 0.0
            mins = sum(g.p_min for _, on, g in ordered if on)
            for fuel, on, g in ordered:
                if not on:
                    continue
                mins -= g.p_min
                take = min(g.p_max, remaining - mins)
                take = max(take, g.p_min)
                cost += fuel * take
                remaining -= take
            results.append(((on0, on1), True, cost))
    return results


def random_uc(rng: np.random.Generator, brute_ok: bool = True) -> UcInstance:
    """Random small instance; with brute_ok the binary count stays <= 22."""
    while True:
        n_units = int(rng.integers(1, 4))
        horizon = int(rng.integers(1, 5))
        if not brute_ok or 3 * n_units * horizon <= 22:
            break
    gens = []
    for g in range(n_units):
        p_min = float(rng.uniform(5, 20))
        p_max = float(p_min + rng.uniform(30, 120))
        init_on = bool(rng.integers(0, 2))
        gens.append(
            GeneratorSpec(
                id=g,
                p_min=p_min,
                p_max=p_max,
                fuel_cost=float(rng.uniform(1, 10)),
                no_load_cost=float(rng.uniform(0, 5)),
                startup_cost=float(rng.uniform(0, 20)),
                shutdown_cost=float(rng.uniform(0, 10)),
                min_up=int(rng.integers(1, 3)),
                min_down=int(rng.integers(1, 3)),
                init_on=init_on,
                init_periods_in_state=int(rng.integers(0, 4)),
                init_power=float(rng.uniform(p_min, p_max)) if init_on else 0.0,
            )
        )
    cap = sum(g.p_max for g in gens)
    floor = min(g.p_min for g in gens)
    demand = tuple(
        float(rng.uniform(floor, 0.85 * cap)) for _ in range(horizon)
    )
    return UcInstance(generators=tuple(gens), demand=demand)


def random_problem(rng: np.random.Generator) -> MilpProblem:
    """Random canonical MILP for serialization round trips."""
    n_vars = int(rng.integers(1, 8))
    variables = []
    for j in range(n_vars):
        if rng.random() < 0.4:
            variables.append(Variable(f"x_{j}", BINARY, 0.0, 1.0))
        else:
            lower = float(np.round(rng.uniform(-10, 5), 3))
            upper = lower + float(np.round(rng.uniform(0, 20), 3))
            if rng.random() < 0.2:
                upper = np.inf
            variables.append(Variable(f"x_{j}", CONTINUOUS, lower, upper))
    objective = {
        v.name: float(np.round(rng.uniform(-9, 9), 4))
        for v in variables
        if rng.random() < 0.8
    }
    objective = {k: v for k, v in objective.items() if v != 0.0}
    offset = float(np.round(rng.uniform(-5, 5), 3)) if rng.random() < 0.4 else 0.0
    constraints = []
    for i in range(int(rng.integers(0, 6))):
        terms = {}
        for v in variables:
            if rng.random() < 0.5:
                coef = float(np.round(rng.uniform(-6, 6), 3))
                if coef != 0.0:
                    terms[v.name] = coef
        if not terms:
            continue
        sense = ("<=", "=", ">=")[int(rng.integers(0, 3))]
        constraints.append(
            Constraint(f"c_{i}", terms, sense, float(np.round(rng.uniform(-20, 20), 3)))
        )
    return MilpProblem(
        variables=tuple(variables),
        objective=objective,
        offset=offset,
        constraints=tuple(constraints),
    )
