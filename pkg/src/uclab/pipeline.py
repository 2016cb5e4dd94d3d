"""End-to-end dataset generation, training, diving, and evaluation stages.

Every instance is drawn from an RNG stream keyed by (master seed, split,
index, attempt), so datasets are byte-identical no matter how generation is
ordered or parallelized. Labels come from the exact branch-and-bound solver;
infeasible draws are rejected and redrawn a bounded number of times.

Quantities are in GW and costs in k$, which keeps every LP coefficient and
graph feature at a friendly scale.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import gcnn, graph, lpformat, metrics, milp, solver, ucmodel
from .baseline import baseline_evaluate, baseline_train, write_mlp_params
from .dive import (
    EvalStats,
    evaluate_dive,
    format_eval_csv,
    format_hist_csv,
    format_summary,
    rel_error,
)
from .milp import ValidationError

MAX_RETRIES = 20

DEFAULT_FLEET = (
    ucmodel.GeneratorSpec(0, 0.10, 0.30, 18.0, 0.50, 1.80, 0.40, 6, 4,
                          init_on=True, init_periods_in_state=8, init_power=0.22),
    ucmodel.GeneratorSpec(1, 0.06, 0.20, 24.0, 0.40, 1.30, 0.30, 4, 3,
                          init_on=True, init_periods_in_state=4, init_power=0.12),
    ucmodel.GeneratorSpec(2, 0.04, 0.14, 31.0, 0.30, 0.80, 0.20, 3, 2,
                          init_on=False, init_periods_in_state=4),
    ucmodel.GeneratorSpec(3, 0.02, 0.09, 39.0, 0.18, 0.40, 0.10, 2, 2,
                          init_on=False, init_periods_in_state=3),
    ucmodel.GeneratorSpec(4, 0.01, 0.06, 47.0, 0.09, 0.15, 0.05, 1, 1,
                          init_on=False, init_periods_in_state=2),
)

DEFAULT_DEMAND = (0.38, 0.36, 0.35, 0.37, 0.42, 0.48, 0.54, 0.58, 0.60, 0.56,
                  0.48, 0.41)

SPLITS = {"train": 0, "test": 1}


@dataclass(frozen=True)
class DiveConfig:
    threshold: float = 0.5
    feas_tol: float = 1e-6
    int_tol: float = 1e-6
    node_limit: int = 10**6

    def solver_config(self) -> solver.SolverConfig:
        return solver.SolverConfig(self.feas_tol, self.int_tol, self.node_limit)


@dataclass(frozen=True)
class PipelineConfig:
    units: int = 5
    horizon: int = 12
    train_size: int = 200
    test_size: int = 100
    perturb_lo: float = 0.8
    perturb_hi: float = 1.2
    seed: int = 0
    out_dir: str = "out"
    workers: int = 0  # 0 = one per cpu (capped at 4)
    train: gcnn.TrainConfig = field(default_factory=gcnn.TrainConfig)
    dive: DiveConfig = field(default_factory=DiveConfig)

    def __post_init__(self):
        if self.train_size < 1 or self.test_size < 1:
            raise ValidationError("dataset sizes must be >= 1")
        if not 0 < self.perturb_lo <= self.perturb_hi:
            raise ValidationError("need 0 < perturb_lo <= perturb_hi")
        if not 1 <= self.units <= len(DEFAULT_FLEET):
            raise ValidationError(f"units must be in 1..{len(DEFAULT_FLEET)}")
        if not 1 <= self.horizon <= len(DEFAULT_DEMAND):
            raise ValidationError(f"horizon must be in 1..{len(DEFAULT_DEMAND)}")

    def base_instance(self) -> ucmodel.UcInstance:
        fleet = DEFAULT_FLEET[: self.units]
        scale = sum(g.p_max for g in fleet) / sum(g.p_max for g in DEFAULT_FLEET)
        demand = tuple(d * scale for d in DEFAULT_DEMAND[: self.horizon])
        return ucmodel.UcInstance(generators=fleet, demand=demand)

    def effective_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        return max(1, min(4, os.cpu_count() or 1))


def instance_name(split: str, k: int) -> str:
    return f"{split}_{k:04d}"


def draw_instance(cfg: PipelineConfig, split: str, k: int, attempt: int = 0
                  ) -> ucmodel.UcInstance:
    """Perturb the base case using the stream keyed by (seed, split, k, attempt)."""
    base = cfg.base_instance()
    rng = np.random.default_rng([cfg.seed, SPLITS[split], k, attempt])
    demand_mult = rng.uniform(cfg.perturb_lo, cfg.perturb_hi, size=len(base.demand))
    fuel_mult = rng.uniform(cfg.perturb_lo, cfg.perturb_hi, size=len(base.generators))
    generators = tuple(
        replace(g, fuel_cost=g.fuel_cost * fuel_mult[i])
        for i, g in enumerate(base.generators)
    )
    demand = tuple(d * demand_mult[t] for t, d in enumerate(base.demand))
    return ucmodel.UcInstance(generators=generators, demand=demand)


def _generate_one(args: tuple[PipelineConfig, str, int]) -> tuple[int, str, str, str]:
    cfg, split, k = args
    scfg = cfg.dive.solver_config()
    for attempt in range(MAX_RETRIES):
        inst = draw_instance(cfg, split, k, attempt)
        problem = ucmodel.build_milp(inst)
        result = solver.solve_milp(problem, scfg)
        if result.status != "optimal":
            continue
        report = milp.check_feasible(problem, result.incumbent, scfg.feas_tol)
        if not report.feasible:
            raise solver.SolverFailure(
                f"labels for {instance_name(split, k)} fail their own constraints"
            )
        label_csv = milp.format_solution_csv(
            result.status, result.objective, result.incumbent
        )
        return k, ucmodel.write_uc(inst), lpformat.write_lp(problem), label_csv
    raise ValidationError(
        f"instance {instance_name(split, k)}: no feasible draw in {MAX_RETRIES} attempts"
    )


def stage_generate(cfg: PipelineConfig, splits: tuple[str, ...] = ("train", "test")) -> None:
    out = Path(cfg.out_dir)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    (out / "labels").mkdir(parents=True, exist_ok=True)
    for split in splits:
        size = cfg.train_size if split == "train" else cfg.test_size
        jobs = [(cfg, split, k) for k in range(size)]
        workers = cfg.effective_workers()
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_generate_one, jobs, chunksize=4))
        else:
            results = [_generate_one(job) for job in jobs]
        for k, uc_text, lp_text, label_csv in sorted(results):
            name = instance_name(split, k)
            (out / "instances" / f"{name}.uc").write_text(uc_text)
            (out / "instances" / f"{name}.lp").write_text(lp_text)
            (out / "labels" / f"{name}.csv").write_text(label_csv)


def _split_names(cfg: PipelineConfig, split: str) -> list[str]:
    size = cfg.train_size if split == "train" else cfg.test_size
    return [instance_name(split, k) for k in range(size)]


def stage_encode(cfg: PipelineConfig, splits: tuple[str, ...] = ("train", "test")) -> None:
    out = Path(cfg.out_dir)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    for split in splits:
        for name in _split_names(cfg, split):
            lp_path = out / "instances" / f"{name}.lp"
            problem = lpformat.parse_lp(lp_path.read_text())
            g = graph.encode(problem)
            (out / "graphs" / f"{name}.bgr").write_text(graph.write_graph(g))


def _load_labeled(cfg: PipelineConfig, name: str) -> gcnn.LabeledGraph:
    out = Path(cfg.out_dir)
    g = graph.parse_graph((out / "graphs" / f"{name}.bgr").read_text())
    _, _, values = milp.parse_solution_csv((out / "labels" / f"{name}.csv").read_text())
    labels = np.array(
        [round(values[g.var_names[j]]) for j in g.binary_mask], dtype=float
    )
    return gcnn.LabeledGraph(g, labels)


def stage_train(cfg: PipelineConfig) -> list[float]:
    out = Path(cfg.out_dir)
    dataset = [_load_labeled(cfg, name) for name in _split_names(cfg, "train")]
    params, history = gcnn.train(dataset, cfg.train)
    (out / "model.txt").write_text(gcnn.write_params(params))
    (out / "train_loss.csv").write_text(gcnn.write_loss_csv(history))
    return history


def _load_test(cfg: PipelineConfig) -> tuple[list[ucmodel.UcInstance], list[float]]:
    out = Path(cfg.out_dir)
    instances, optima = [], []
    for name in _split_names(cfg, "test"):
        instances.append(
            ucmodel.parse_uc((out / "instances" / f"{name}.uc").read_text())
        )
        _, objective, _ = milp.parse_solution_csv(
            (out / "labels" / f"{name}.csv").read_text()
        )
        optima.append(objective)
    return instances, optima


def stage_evaluate(cfg: PipelineConfig) -> EvalStats:
    out = Path(cfg.out_dir)
    model_path = out / "model.txt"
    if not model_path.exists():
        raise FileNotFoundError(f"missing model file {model_path}; run train first")
    params = gcnn.parse_params(model_path.read_text())
    instances, optima = _load_test(cfg)
    scfg = cfg.dive.solver_config()
    stats, outcomes = evaluate_dive(
        params, instances, scfg, optima=optima, threshold=cfg.dive.threshold
    )
    rows = []
    for name, opt, outcome in zip(_split_names(cfg, "test"), optima, outcomes):
        rows.append((name, outcome.feasible, opt, outcome.cost, outcome.rel_error))
    (out / "eval.csv").write_text(format_eval_csv(rows))
    (out / "hist.csv").write_text(format_hist_csv(stats))
    (out / "summary.txt").write_text(format_summary(stats))
    return stats


def stage_baseline(cfg: PipelineConfig) -> EvalStats:
    out = Path(cfg.out_dir)
    train_instances = []
    train_solutions = []
    for name in _split_names(cfg, "train"):
        train_instances.append(
            ucmodel.parse_uc((out / "instances" / f"{name}.uc").read_text())
        )
        _, _, values = milp.parse_solution_csv(
            (out / "labels" / f"{name}.csv").read_text()
        )
        train_solutions.append(values)
    params, _ = baseline_train(train_instances, train_solutions, cfg.train)
    (out / "baseline_model.txt").write_text(write_mlp_params(params))

    instances, optima = _load_test(cfg)
    stats, detail = baseline_evaluate(params, instances, cfg.dive.solver_config(),
                                         optima=optima)
    rows = []
    for name, opt, (feasible, _, cost) in zip(_split_names(cfg, "test"), optima, detail):
        rows.append((name, feasible, opt, cost, rel_error(cost, opt)))
    (out / "baseline_eval.csv").write_text(format_eval_csv(rows))
    (out / "baseline_hist.csv").write_text(format_hist_csv(stats))
    (out / "baseline_summary.txt").write_text(format_summary(stats))
    return stats


def stage_metrics(cfg: PipelineConfig, table_paths: list[str] | None = None) -> str:
    """Metric report over trial tables (the shipped fixtures by default)."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if table_paths:
        tables = [metrics.parse_trial_table(Path(p).read_text()) for p in table_paths]
    else:
        tables = metrics.load_all_fixtures()
    reports = [(t.llm_name, metrics.compute_report(t)) for t in tables]
    csv_text = metrics.export_report(reports)
    (out / "metrics.csv").write_text(csv_text)

    curve_lines = ["llm,task,prompt_type,k0,k1,k2,k3"]
    for t in tables:
        for task in (metrics.MODEL, metrics.CODE):
            for i in metrics.PROMPT_TYPES:
                curve = metrics.iteration_curve(t, task, i)
                curve_lines.append(
                    f"{t.llm_name},{task},{i}," + ",".join(str(v) for v in curve)
                )
    (out / "curves.csv").write_text("\n".join(curve_lines) + "\n")
    return csv_text


# ----------------------------------------------------------------------
# Flat key-value config files.
# ----------------------------------------------------------------------

_CONFIG_KEYS = {
    "units": int,
    "horizon": int,
    "train_size": int,
    "test_size": int,
    "perturb_lo": float,
    "perturb_hi": float,
    "seed": int,
    "out_dir": str,
    "workers": int,
    "hidden": int,
    "layers": int,
    "learning_rate": float,
    "epochs": int,
    "threshold": float,
    "feas_tol": float,
    "int_tol": float,
    "node_limit": int,
}


def parse_config(text: str) -> PipelineConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        if key not in _CONFIG_KEYS:
            raise ValidationError(f"line {lineno}: unknown config key {key!r}")
        if not value.strip():
            raise ValidationError(f"line {lineno}: key {key!r} has no value")
        raw[key] = value.strip()

    def take(key: str, default):
        if key in raw:
            return _CONFIG_KEYS[key](raw[key])
        return default

    train = gcnn.TrainConfig(
        hidden=take("hidden", 32),
        layers=take("layers", 2),
        learning_rate=take("learning_rate", 1e-3),
        epochs=take("epochs", 100),
        seed=take("seed", 0),
    )
    dive_cfg = DiveConfig(
        threshold=take("threshold", 0.5),
        feas_tol=take("feas_tol", 1e-6),
        int_tol=take("int_tol", 1e-6),
        node_limit=take("node_limit", 10**6),
    )
    return PipelineConfig(
        units=take("units", 5),
        horizon=take("horizon", 12),
        train_size=take("train_size", 200),
        test_size=take("test_size", 100),
        perturb_lo=take("perturb_lo", 0.8),
        perturb_hi=take("perturb_hi", 1.2),
        seed=take("seed", 0),
        out_dir=take("out_dir", "out"),
        workers=take("workers", 0),
        train=train,
        dive=dive_cfg,
    )


def write_config(cfg: PipelineConfig) -> str:
    lines = [
        f"units {cfg.units}",
        f"horizon {cfg.horizon}",
        f"train_size {cfg.train_size}",
        f"test_size {cfg.test_size}",
        f"perturb_lo {cfg.perturb_lo!r}",
        f"perturb_hi {cfg.perturb_hi!r}",
        f"seed {cfg.seed}",
        f"out_dir {cfg.out_dir}",
        f"workers {cfg.workers}",
        f"hidden {cfg.train.hidden}",
        f"layers {cfg.train.layers}",
        f"learning_rate {cfg.train.learning_rate!r}",
        f"epochs {cfg.train.epochs}",
        f"threshold {cfg.dive.threshold!r}",
        f"feas_tol {cfg.dive.feas_tol!r}",
        f"int_tol {cfg.dive.int_tol!r}",
        f"node_limit {cfg.dive.node_limit}",
    ]
    return "\n".join(lines) + "\n"
