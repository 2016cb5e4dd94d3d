import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from uclab import build_milp, check_feasible, draw_instance
from uclab.cli import run
from uclab.gcnn import TrainConfig
from uclab.milp import parse_solution_csv
from uclab.pipeline import (
    DiveConfig,
    PipelineConfig,
    parse_config,
    stage_baseline,
    stage_encode,
    stage_evaluate,
    stage_generate,
    stage_metrics,
    stage_train,
    write_config,
)


def smoke_config(out_dir: str, **overrides) -> PipelineConfig:
    base = dict(
        units=3,
        horizon=3,
        train_size=6,
        test_size=10,
        seed=7,
        out_dir=out_dir,
        workers=1,
        train=TrainConfig(hidden=8, layers=2, epochs=4, learning_rate=3e-3, seed=7),
    )
    base.update(overrides)
    return PipelineConfig(**base)


def test_draw_is_deterministic_and_split_disjoint():
    cfg = smoke_config("unused")
    a = draw_instance(cfg, "train", 0)
    b = draw_instance(cfg, "train", 0)
    assert a == b
    test_inst = draw_instance(cfg, "test", 0)
    assert a.demand != test_inst.demand


def test_identity_perturbation_returns_base():
    cfg = smoke_config("unused", perturb_lo=1.0, perturb_hi=1.0)
    inst = draw_instance(cfg, "train", 3)
    base = cfg.base_instance()
    assert np.allclose(inst.demand, base.demand)
    assert all(
        g.fuel_cost == pytest.approx(b.fuel_cost)
        for g, b in zip(inst.generators, base.generators)
    )


def test_config_file_round_trip(tmp_path):
    cfg = smoke_config(str(tmp_path / "out"))
    text = write_config(cfg)
    again = parse_config(text)
    assert again == cfg


@pytest.fixture(scope="module")
def smoke_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("smoke")
    cfg = smoke_config(str(out))
    stage_generate(cfg)
    stage_encode(cfg)
    stage_train(cfg)
    stats = stage_evaluate(cfg)
    baseline_stats = stage_baseline(cfg)
    stage_metrics(cfg)
    return cfg, stats, baseline_stats


def test_smoke_artifacts_exist(smoke_run):
    cfg, _, _ = smoke_run
    out = Path(cfg.out_dir)
    assert (out / "instances" / "train_0000.lp").exists()
    assert (out / "instances" / "test_0009.uc").exists()
    assert (out / "labels" / "train_0005.csv").exists()
    assert (out / "graphs" / "train_0000.bgr").exists()
    assert (out / "model.txt").exists()
    eval_lines = (out / "eval.csv").read_text().strip().splitlines()
    assert len(eval_lines) == 1 + cfg.test_size
    assert (out / "hist.csv").exists()
    assert (out / "metrics.csv").read_text().strip().splitlines()[1:]


def test_labels_feasible_for_own_milp(smoke_run):
    cfg, _, _ = smoke_run
    out = Path(cfg.out_dir)
    for k in range(cfg.train_size):
        name = f"train_{k:04d}"
        inst = draw_instance(cfg, "train", k)
        status, objective, values = parse_solution_csv(
            (out / "labels" / f"{name}.csv").read_text()
        )
        assert status == "optimal"
        problem = build_milp(inst)
        assert check_feasible(problem, values, 1e-6).feasible


def test_metrics_csv_has_four_rows(smoke_run):
    cfg, _, _ = smoke_run
    lines = (Path(cfg.out_dir) / "metrics.csv").read_text().strip().splitlines()
    assert len(lines) == 5


def test_evaluate_before_train_fails(tmp_path):
    cfg = smoke_config(str(tmp_path / "fresh"), train_size=1, test_size=1)
    with pytest.raises(FileNotFoundError, match="model"):
        stage_evaluate(cfg)


def test_cli_metrics_and_solve(tmp_path, two_unit):
    out = tmp_path / "cli_out"
    assert run(["metrics", "--out", str(out)]) == 0
    assert (out / "metrics.csv").exists()
    assert (out / "curves.csv").exists()

    from uclab import write_lp

    lp_path = tmp_path / "fixture.lp"
    lp_path.write_text(write_lp(build_milp(two_unit)))
    sol_path = tmp_path / "sol.csv"
    assert run(["solve", str(lp_path), "--solution", str(sol_path)]) == 0
    status, objective, values = parse_solution_csv(sol_path.read_text())
    assert status == "optimal"
    assert objective == pytest.approx(120.0)


def test_cli_error_exit_code(tmp_path):
    script = (
        "import sys; from uclab.cli import main; "
        "sys.argv = ['uclab', 'evaluate', '--out', r'%s']; main()" % (tmp_path / "nope")
    )
    proc = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert "error" in proc.stderr.lower()


def test_end_to_end_determinism(tmp_path):
    texts = []
    for label in ("a", "b"):
        cfg = smoke_config(
            str(tmp_path / label),
            units=2,
            horizon=2,
            train_size=3,
            test_size=3,
            train=TrainConfig(hidden=4, layers=1, epochs=2, seed=7),
        )
        stage_generate(cfg)
        stage_encode(cfg)
        stage_train(cfg)
        stage_evaluate(cfg)
        texts.append((Path(cfg.out_dir) / "eval.csv").read_bytes())
    assert texts[0] == texts[1]


def test_workers_do_not_change_output(tmp_path):
    texts = []
    for label, workers in (("w1", 1), ("w2", 2)):
        cfg = smoke_config(
            str(tmp_path / label),
            units=2,
            horizon=2,
            train_size=4,
            test_size=2,
            workers=workers,
        )
        stage_generate(cfg)
        blob = b""
        for split, size in (("train", 4), ("test", 2)):
            for k in range(size):
                name = f"{split}_{k:04d}"
                blob += (Path(cfg.out_dir) / "instances" / f"{name}.uc").read_bytes()
                blob += (Path(cfg.out_dir) / "labels" / f"{name}.csv").read_bytes()
        texts.append(blob)
    assert texts[0] == texts[1]
