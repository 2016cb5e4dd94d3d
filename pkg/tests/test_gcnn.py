import math

import numpy as np
import pytest

from uclab import (
    BipartiteGraph,
    LabeledGraph,
    TrainConfig,
    ValidationError,
    bce_loss,
    build_milp,
    encode,
    forward,
    gradient,
    init_params,
    relabel,
    train,
)
from uclab.gcnn import _loss_and_gradient, parse_params, write_params


def random_graph(rng: np.random.Generator, n_vars=7, n_cons=5) -> BipartiteGraph:
    """Dense-ish random bipartite graph with smooth random features."""
    edges = []
    for v in range(n_vars):
        for c in range(n_cons):
            if rng.random() < 0.45:
                edges.append((v, c, float(rng.normal())))
    if not edges:
        edges.append((0, 0, 1.0))
    n_mask = max(1, n_vars // 2)
    mask = np.sort(rng.choice(n_vars, size=n_mask, replace=False))
    return BipartiteGraph(
        var_names=tuple(f"v{j}" for j in range(n_vars)),
        var_features=rng.normal(size=(n_vars, 4)),
        con_names=tuple(f"c{i}" for i in range(n_cons)),
        con_features=rng.normal(size=(n_cons, 4)),
        edge_var=np.array([e[0] for e in edges], dtype=np.int64),
        edge_con=np.array([e[1] for e in edges], dtype=np.int64),
        edge_features=np.array([e[2] for e in edges]),
        binary_mask=mask,
    )


def randomized_params(cfg: TrainConfig, seed: int):
    """Glorot init plus noise on every tensor so no ReLU sits on its kink."""
    params = init_params(cfg, seed)
    rng = np.random.default_rng(seed + 1000)
    for arr in params.data.values():
        arr += rng.normal(scale=0.05, size=arr.shape)
    return params


def test_init_is_deterministic():
    cfg = TrainConfig(hidden=6, layers=2)
    a = init_params(cfg, 42)
    b = init_params(cfg, 42)
    for name in a.data:
        assert np.array_equal(a.data[name], b.data[name])
    c = init_params(cfg, 43)
    assert any(not np.array_equal(a.data[n], c.data[n]) for n in a.data)


def test_init_minimal_shapes():
    cfg = TrainConfig(hidden=1, layers=1)
    params = init_params(cfg, 0)
    assert params.data["var_embed_w"].shape == (4, 1)
    assert params.data["conv0_con_w"].shape == (2, 1)
    assert params.data["head_w"].shape == (1, 1)


def test_zero_params_give_half(g2t3):
    graph = encode(build_milp(g2t3))
    params = init_params(TrainConfig(hidden=4, layers=2), 0).zeros_like()
    probs = forward(params, graph)
    assert np.allclose(probs, 0.5)
    assert len(probs) == len(graph.binary_mask)


def test_outputs_strictly_inside_unit_interval():
    rng = np.random.default_rng(8)
    graph = random_graph(rng)
    params = randomized_params(TrainConfig(hidden=8, layers=2), 5)
    probs = forward(params, graph)
    assert np.all(probs > 0.0) and np.all(probs < 1.0)


def test_permutation_equivariance(g2t3):
    graph = encode(build_milp(g2t3))
    params = randomized_params(TrainConfig(hidden=8, layers=2), 3)
    rng = np.random.default_rng(17)
    perm = rng.permutation(graph.n_vars)
    permuted = relabel(graph, perm)

    base = dict(zip([graph.var_names[j] for j in graph.binary_mask],
                    forward(params, graph)))
    moved = dict(zip([permuted.var_names[j] for j in permuted.binary_mask],
                     forward(params, permuted)))
    assert base.keys() == moved.keys()
    for name in base:
        assert moved[name] == pytest.approx(base[name], abs=1e-9)


def test_empty_mask_empty_output():
    graph = BipartiteGraph(
        var_names=("a",),
        var_features=np.zeros((1, 4)),
        con_names=("c",),
        con_features=np.zeros((1, 4)),
        edge_var=np.array([0]),
        edge_con=np.array([0]),
        edge_features=np.array([1.0]),
        binary_mask=np.array([], dtype=np.int64),
    )
    params = init_params(TrainConfig(hidden=4, layers=1), 1)
    assert forward(params, graph).size == 0


def test_dimension_mismatch_raises():
    rng = np.random.default_rng(2)
    graph = random_graph(rng)
    params = init_params(TrainConfig(hidden=4, layers=1), 1)
    params.data["var_embed_w"] = np.zeros((5, 4))
    with pytest.raises(ValidationError):
        forward(params, graph)


def test_bce_values():
    assert bce_loss(np.array([1.0 - 1e-12, 1e-12]), np.array([1.0, 0.0])) < 1e-10
    assert bce_loss(np.array([0.5, 0.5]), np.array([0.0, 1.0])) == pytest.approx(
        math.log(2.0), abs=1e-12
    )
    assert bce_loss(np.array([0.9]), np.array([0.0])) == pytest.approx(
        -math.log(0.1), abs=1e-12
    )
    with pytest.raises(ValidationError):
        bce_loss(np.array([0.5]), np.array([0.0, 1.0]))


def test_gradient_zero_when_saturated_correct():
    rng = np.random.default_rng(3)
    graph = random_graph(rng)
    params = init_params(TrainConfig(hidden=4, layers=1), 1).zeros_like()
    params.data["head_b"][:] = 50.0  # saturate towards 1
    labels = np.ones(len(graph.binary_mask))
    grad = gradient(params, LabeledGraph(graph, labels))
    norm = math.sqrt(sum(float((g**2).sum()) for g in grad.data.values()))
    assert norm < 1e-9


def test_gradient_matches_finite_differences():
    step = 1e-5
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        graph = random_graph(rng)
        labels = rng.integers(0, 2, size=len(graph.binary_mask)).astype(float)
        lg = LabeledGraph(graph, labels)
        params = randomized_params(TrainConfig(hidden=5, layers=2), seed)
        _, grad = _loss_and_gradient(params, lg)
        for name, arr in params.data.items():
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + step
                up = bce_loss(forward(params, graph), labels)
                arr[idx] = orig - step
                down = bce_loss(forward(params, graph), labels)
                arr[idx] = orig
                fd = (up - down) / (2 * step)
                an = float(grad.data[name][idx])
                if abs(fd) > 1e-8 or abs(an) > 1e-8:
                    worst = max(worst, abs(fd - an) / max(abs(fd), abs(an)))
    assert worst <= 1e-4


def test_gradient_mean_invariance_under_duplication():
    # Duplicating the graph doubles the mask; the mean keeps gradients equal.
    rng = np.random.default_rng(12)
    graph = random_graph(rng, n_vars=5, n_cons=4)
    labels = rng.integers(0, 2, size=len(graph.binary_mask)).astype(float)
    doubled = BipartiteGraph(
        var_names=graph.var_names + tuple(f"{n}_copy" for n in graph.var_names),
        var_features=np.vstack([graph.var_features, graph.var_features]),
        con_names=graph.con_names + tuple(f"{n}_copy" for n in graph.con_names),
        con_features=np.vstack([graph.con_features, graph.con_features]),
        edge_var=np.concatenate([graph.edge_var, graph.edge_var + graph.n_vars]),
        edge_con=np.concatenate([graph.edge_con, graph.edge_con + graph.n_cons]),
        edge_features=np.concatenate([graph.edge_features, graph.edge_features]),
        binary_mask=np.concatenate([graph.binary_mask, graph.binary_mask + graph.n_vars]),
    )
    params = randomized_params(TrainConfig(hidden=6, layers=2), 7)
    g_single = gradient(params, LabeledGraph(graph, labels))
    g_double = gradient(params, LabeledGraph(doubled, np.tile(labels, 2)))
    for name in g_single.data:
        assert np.allclose(g_single.data[name], g_double.data[name], atol=1e-12)


def test_train_descends_and_is_deterministic(g2t3):
    problem = build_milp(g2t3)
    graph = encode(problem)
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 2, size=len(graph.binary_mask)).astype(float)
    dataset = [LabeledGraph(graph, labels)]
    cfg = TrainConfig(hidden=8, layers=2, epochs=40, learning_rate=5e-3, seed=9)
    params_a, hist_a = train(dataset, cfg)
    assert hist_a[-1] < hist_a[0]
    params_b, hist_b = train(dataset, cfg)
    assert hist_a == hist_b
    for name in params_a.data:
        assert np.array_equal(params_a.data[name], params_b.data[name])


def test_train_zero_learning_rate_flat():
    rng = np.random.default_rng(1)
    graph = random_graph(rng)
    labels = rng.integers(0, 2, size=len(graph.binary_mask)).astype(float)
    cfg = TrainConfig(hidden=4, layers=1, epochs=5, learning_rate=0.0, seed=2)
    _, history = train([LabeledGraph(graph, labels)], cfg)
    assert len(set(history)) == 1


def test_train_rejects_empty_dataset():
    with pytest.raises(ValidationError):
        train([], TrainConfig())


def test_params_file_round_trip():
    params = randomized_params(TrainConfig(hidden=5, layers=2), 21)
    text = write_params(params)
    again = parse_params(text)
    assert (again.hidden, again.layers) == (params.hidden, params.layers)
    for name in params.data:
        assert np.array_equal(params.data[name], again.data[name])
    assert write_params(again) == text
