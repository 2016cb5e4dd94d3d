import numpy as np
import pytest

from uclab import (
    GeneratorSpec,
    TrainConfig,
    UcInstance,
    ValidationError,
    baseline_evaluate,
    baseline_train,
    build_milp,
    solve_milp,
)
from uclab.baseline import (
    instance_features,
    parse_mlp_params,
    predict,
    write_mlp_params,
)


def small_family(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    gens = (
        GeneratorSpec(0, 5, 80, 2.0, init_periods_in_state=1),
        GeneratorSpec(1, 5, 40, 5.0, init_periods_in_state=1),
    )
    out = []
    for _ in range(n):
        demand = tuple(float(rng.uniform(30, 90)) for _ in range(2))
        out.append(UcInstance(generators=gens, demand=demand))
    return out


def solved(instances):
    solutions = []
    for inst in instances:
        res = solve_milp(build_milp(inst))
        assert res.status == "optimal"
        solutions.append(res.incumbent)
    return solutions


def test_feature_vector_layout():
    inst = small_family(1)[0]
    feats = instance_features(inst)
    assert feats.shape == (2 + 2,)
    assert tuple(feats[:2]) == inst.demand
    assert feats[2] == 2.0 and feats[3] == 5.0


def test_memorizes_single_instance():
    instances = small_family(1, seed=4)
    solutions = solved(instances)
    cfg = TrainConfig(epochs=800, learning_rate=3e-3, seed=0)
    params, history = baseline_train(instances, solutions, cfg)
    assert history[-1] < history[0]
    values = predict(params, instances[0])
    target = solutions[0]
    worst = max(abs(values[n] - target[n]) for n in values)
    assert worst < 0.5  # close enough that rounded binaries match
    stats, detail = baseline_evaluate(params, instances)
    assert stats.n == 1
    assert abs(stats.rel_errors[0]) < 0.05 if stats.rel_errors else True


def test_zero_params_prediction_infeasible(two_unit):
    instances = [two_unit]
    solutions = solved(instances)
    params, _ = baseline_train(instances, solutions, TrainConfig(epochs=1))
    for name, arr in params.tensors():
        arr[:] = 0.0
    values = predict(params, two_unit)
    assert set(values.values()) == {0.0}
    stats, detail = baseline_evaluate(params, instances)
    assert stats.feasible_rate == 0.0
    # Infeasible predictions still carry a cost: n = feasible + infeasible.
    assert stats.n == len(detail) == 1
    total = sum(b.feasible_count + b.infeasible_count for b in stats.histogram)
    assert total == stats.n


def test_partition_counts():
    instances = small_family(6, seed=8)
    solutions = solved(instances)
    params, _ = baseline_train(instances, solutions,
                               TrainConfig(epochs=30, seed=3))
    stats, detail = baseline_evaluate(params, instances)
    feasible = sum(1 for f, _, _ in detail if f)
    infeasible = sum(1 for f, _, _ in detail if not f)
    assert feasible + infeasible == stats.n == 6
    assert stats.feasible_rate == pytest.approx(feasible / 6)
    total = sum(b.feasible_count + b.infeasible_count for b in stats.histogram)
    assert total == stats.n


def test_heterogeneous_family_rejected():
    gens = (GeneratorSpec(0, 5, 80, 2.0, init_periods_in_state=1),)
    mixed = [
        UcInstance(generators=gens, demand=(30.0,)),
        UcInstance(generators=gens, demand=(30.0, 40.0)),
    ]
    with pytest.raises(ValidationError, match="fixed"):
        baseline_train(mixed, [{}, {}], TrainConfig(epochs=1))


def test_mlp_params_round_trip():
    instances = small_family(2, seed=5)
    solutions = solved(instances)
    params, _ = baseline_train(instances, solutions, TrainConfig(epochs=2, seed=1))
    text = write_mlp_params(params)
    again = parse_mlp_params(text)
    for (name_a, a), (name_b, b) in zip(params.tensors(), again.tensors()):
        assert name_a == name_b
        assert np.array_equal(a, b)
    assert write_mlp_params(again) == text
