"""Train the graph predictor on a small dataset and dive on fresh cases.

A compact version of the full pipeline: draw perturbed instances, label
them with the exact solver, train the GCNN, then fix-and-solve unseen
instances and compare against the exact optimum.
Takes a couple of minutes. Run with:  python3 demos/04_neural_dive.py
"""

import numpy as np

from uclab import (
    LabeledGraph,
    TrainConfig,
    build_milp,
    dive,
    encode,
    solve_milp,
    train,
)
from uclab.pipeline import PipelineConfig, draw_instance

cfg = PipelineConfig(units=4, horizon=6, seed=11)
train_cfg = TrainConfig(hidden=32, layers=3, epochs=80, seed=11)

print("labeling training instances with the exact solver...")
dataset = []
for k in range(40):
    inst = draw_instance(cfg, "train", k)
    problem = build_milp(inst)
    result = solve_milp(problem)
    if result.status != "optimal":
        continue
    graph = encode(problem)
    labels = np.array(
        [round(result.incumbent[graph.var_names[j]]) for j in graph.binary_mask]
    )
    dataset.append(LabeledGraph(graph, labels.astype(float)))

params, history = train(dataset, train_cfg)
print(f"trained on {len(dataset)} graphs; loss {history[0]:.4f} -> {history[-1]:.4f}")

print("\ndiving on unseen test instances:")
feasible = 0
for k in range(12):
    inst = draw_instance(cfg, "test", k)
    oracle = solve_milp(build_milp(inst))
    outcome = dive(params, inst, optimum=oracle.objective)
    if outcome.feasible:
        feasible += 1
        print(f"  test {k}: feasible, cost {outcome.cost:9.3f} vs opt "
              f"{oracle.objective:9.3f}  rel {outcome.rel_error:+.4f}")
    else:
        print(f"  test {k}: predicted commitment infeasible")
print(f"\nfeasible dives: {feasible}/12")
