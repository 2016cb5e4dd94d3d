"""Direct-prediction baseline: one MLP regresses every variable value.

The input vector is the demand profile followed by the per-unit fuel costs;
the output is the full variable vector in canonical order. At evaluation
time binaries are rounded at 0.5, the raw assignment is feasibility-checked
as-is (no LP repair), and its objective is priced whether or not it is
feasible, so the error histogram covers every prediction.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from .dive import EvalStats, build_stats, rel_error
from .gcnn import TrainConfig
from .milp import Assignment, ValidationError, check_feasible, evaluate_objective
from .solver import SolverConfig, solve_milp
from .ucmodel import UcInstance, build_milp, canonical_names

HIDDEN = 64


@dataclass
class MlpParams:
    n_units: int
    horizon: int
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray

    def tensors(self) -> list[tuple[str, np.ndarray]]:
        return [
            ("w1", self.w1), ("b1", self.b1),
            ("w2", self.w2), ("b2", self.b2),
            ("w3", self.w3), ("b3", self.b3),
        ]


def instance_features(inst: UcInstance) -> np.ndarray:
    return np.array(
        list(inst.demand) + [g.fuel_cost for g in inst.generators], dtype=float
    )


def _check_family(instances: list[UcInstance]) -> tuple[int, int]:
    shapes = {(len(inst.generators), inst.horizon) for inst in instances}
    if len(shapes) != 1:
        raise ValidationError(
            f"baseline requires a fixed fleet size and horizon, got {sorted(shapes)}"
        )
    return shapes.pop()


def _init(rng: np.random.Generator, n_in: int, n_out: int) -> np.ndarray:
    s = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-s, s, size=(n_in, n_out))


def _forward(params: MlpParams, x: np.ndarray):
    z1 = x @ params.w1 + params.b1
    h1 = np.maximum(z1, 0.0)
    z2 = h1 @ params.w2 + params.b2
    h2 = np.maximum(z2, 0.0)
    out = h2 @ params.w3 + params.b3
    return out, (x, z1, h1, z2, h2)


def predict(params: MlpParams, inst: UcInstance) -> Assignment:
    if (len(inst.generators), inst.horizon) != (params.n_units, params.horizon):
        raise ValidationError("instance shape does not match trained baseline")
    out, _ = _forward(params, instance_features(inst))
    names = canonical_names(params.n_units, params.horizon)
    values: Assignment = {}
    for name, value in zip(names, out):
        if name.split("_")[0] == "p":
            values[name] = float(value)
        else:
            values[name] = 1.0 if value >= 0.5 else 0.0
    return values


def baseline_train(
    instances: list[UcInstance],
    solutions: list[Assignment],
    cfg: TrainConfig,
) -> tuple[MlpParams, list[float]]:
    """Squared-error regression on optimal variable vectors, Adam per sample."""
    if not instances or len(instances) != len(solutions):
        raise ValidationError("need one optimal solution per training instance")
    n_units, horizon = _check_family(instances)
    names = canonical_names(n_units, horizon)
    xs = [instance_features(inst) for inst in instances]
    ys = []
    for sol in solutions:
        missing = [n for n in names if n not in sol]
        if missing:
            raise ValidationError(f"solution is missing variables: {missing[:4]}...")
        ys.append(np.array([sol[n] for n in names], dtype=float))

    rng = np.random.default_rng([cfg.seed, 2])
    n_in, n_out = len(xs[0]), len(names)
    params = MlpParams(
        n_units, horizon,
        _init(rng, n_in, HIDDEN), np.zeros(HIDDEN),
        _init(rng, HIDDEN, HIDDEN), np.zeros(HIDDEN),
        _init(rng, HIDDEN, n_out), np.zeros(n_out),
    )
    shuffle_rng = np.random.default_rng([cfg.seed, 3])
    moments = {name: (np.zeros_like(a), np.zeros_like(a)) for name, a in params.tensors()}
    step = 0
    history: list[float] = []
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(len(xs))
        losses = []
        for idx in order:
            out, (x, z1, h1, z2, h2) = _forward(params, xs[idx])
            diff = out - ys[idx]
            losses.append(float(np.mean(diff**2)))
            d_out = 2.0 * diff / len(diff)
            g_w3 = np.outer(h2, d_out)
            g_b3 = d_out
            d_h2 = (params.w3 @ d_out) * (z2 > 0.0)
            g_w2 = np.outer(h1, d_h2)
            g_b2 = d_h2
            d_h1 = (params.w2 @ d_h2) * (z1 > 0.0)
            g_w1 = np.outer(x, d_h1)
            g_b1 = d_h1
            grads = {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2,
                     "w3": g_w3, "b3": g_b3}
            step += 1
            b1c = 1.0 - cfg.beta1**step
            b2c = 1.0 - cfg.beta2**step
            for name, arr in params.tensors():
                m, v = moments[name]
                gk = grads[name]
                m[:] = cfg.beta1 * m + (1.0 - cfg.beta1) * gk
                v[:] = cfg.beta2 * v + (1.0 - cfg.beta2) * gk * gk
                arr -= cfg.learning_rate * (m / b1c) / (np.sqrt(v / b2c) + cfg.eps)
        history.append(float(np.mean(losses)))
    return params, history


def baseline_evaluate(
    params: MlpParams,
    test: list[UcInstance],
    cfg: SolverConfig | None = None,
    optima: list[float] | None = None,
) -> tuple[EvalStats, list[tuple[bool, float, float]]]:
    """Evaluate raw predictions; every case carries a cost and an error.

    Returns the stats plus per-instance (feasible, opt_cost, predicted_cost).
    """
    if not test:
        raise ValidationError("test set is empty")
    cfg = cfg or SolverConfig()
    rows: list[tuple[bool, float | None]] = []
    detail: list[tuple[bool, float, float]] = []
    pairs: list[tuple[float, float]] = []
    excluded = 0
    for k, inst in enumerate(test):
        opt = optima[k] if optima is not None else None
        problem = build_milp(inst)
        if opt is None:
            oracle = solve_milp(problem, cfg)
            if oracle.status != "optimal":
                excluded += 1
                continue
            opt = oracle.objective
        values = predict(params, inst)
        report = check_feasible(problem, values, cfg.feas_tol)
        cost = evaluate_objective(problem, values)
        rows.append((report.feasible, rel_error(cost, opt)))
        pairs.append((opt, cost))
        detail.append((report.feasible, opt, cost))
    stats = build_stats(rows, pairs, "all predictions", excluded=excluded)
    return stats, detail


def write_mlp_params(params: MlpParams) -> str:
    lines = [f"{params.n_units} {params.horizon}"]
    for name, arr in params.tensors():
        mat = np.atleast_2d(arr)
        lines.append(f"{name} {mat.shape[0]} {mat.shape[1]}")
        for row in mat:
            lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def parse_mlp_params(text: str) -> MlpParams:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n_units, horizon = (int(tok) for tok in lines[0].split())
    arrays: dict[str, np.ndarray] = {}
    pos = 1
    for name in ("w1", "b1", "w2", "b2", "w3", "b3"):
        header = lines[pos].split()
        if header[0] != name:
            raise ValidationError(f"expected tensor {name!r}, got {header[0]!r}")
        rows, cols = int(header[1]), int(header[2])
        block = np.array(
            [[float(x) for x in lines[pos + 1 + r].split()] for r in range(rows)]
        ).reshape(rows, cols)
        arrays[name] = block.ravel() if name.startswith("b") else block
        pos += 1 + rows
    return MlpParams(n_units, horizon, arrays["w1"], arrays["b1"],
                     arrays["w2"], arrays["b2"], arrays["w3"], arrays["b3"])
