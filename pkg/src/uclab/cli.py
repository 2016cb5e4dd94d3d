"""Command-line entry point wiring the pipeline stages to disk.

Subcommands: generate | solve | encode | train | dive | evaluate |
baseline | metrics. Each stage reads and writes only its documented files
under the output directory; failures exit nonzero with a one-line message.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import gcnn, lpformat, milp, pipeline, solver, ucmodel
from .dive import dive as run_dive
from .dive import format_summary


def _load_config(args: argparse.Namespace) -> pipeline.PipelineConfig:
    if args.config:
        cfg = pipeline.parse_config(Path(args.config).read_text())
    else:
        cfg = pipeline.PipelineConfig()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
        updates["train"] = gcnn.TrainConfig(
            hidden=cfg.train.hidden,
            layers=cfg.train.layers,
            learning_rate=cfg.train.learning_rate,
            epochs=cfg.train.epochs,
            seed=args.seed,
        )
    if args.out is not None:
        updates["out_dir"] = args.out
    if getattr(args, "workers", None) is not None:
        updates["workers"] = args.workers
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uclab",
        description="Unit-commitment lab: exact solving, neural diving, metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key-value config file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output directory override")

    p = sub.add_parser("generate", help="draw instances and solve them for labels")
    common(p)
    p.add_argument("--split", choices=["train", "test", "both"], default="both")
    p.add_argument("--workers", type=int, help="parallel label workers")

    p = sub.add_parser("solve", help="solve one .lp file exactly")
    common(p)
    p.add_argument("lp_file")
    p.add_argument("--solution", help="write the solution CSV here (default stdout)")

    p = sub.add_parser("encode", help="encode instance .lp files into graphs")
    common(p)

    p = sub.add_parser("train", help="train the graph predictor on the train split")
    common(p)

    p = sub.add_parser("dive", help="fix-and-solve one instance with the trained model")
    common(p)
    p.add_argument("uc_file")

    p = sub.add_parser("evaluate", help="dive on the test split and write eval.csv")
    common(p)

    p = sub.add_parser("baseline", help="train and evaluate the direct-prediction MLP")
    common(p)

    p = sub.add_parser("metrics", help="compute trial-table metrics (shipped fixtures)")
    common(p)
    p.add_argument("tables", nargs="*", help="trial-table CSV paths (default: fixtures)")

    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _load_config(args)

    if args.command == "generate":
        splits = ("train", "test") if args.split == "both" else (args.split,)
        pipeline.stage_generate(cfg, splits)
        print(f"wrote {', '.join(splits)} instances and labels under {cfg.out_dir}")
    elif args.command == "solve":
        problem = lpformat.parse_lp(Path(args.lp_file).read_text())
        result = solver.solve_milp(problem, cfg.dive.solver_config())
        text = milp.format_solution_csv(
            result.status, result.objective, result.incumbent or {}
        )
        if args.solution:
            Path(args.solution).write_text(text)
        else:
            sys.stdout.write(text)
    elif args.command == "encode":
        pipeline.stage_encode(cfg)
        print(f"wrote graphs under {cfg.out_dir}/graphs")
    elif args.command == "train":
        history = pipeline.stage_train(cfg)
        print(f"trained {cfg.train.epochs} epochs; final mean loss {history[-1]:.6f}")
    elif args.command == "dive":
        model_path = Path(cfg.out_dir) / "model.txt"
        if not model_path.exists():
            raise FileNotFoundError(f"missing model file {model_path}; run train first")
        params = gcnn.parse_params(model_path.read_text())
        inst = ucmodel.parse_uc(Path(args.uc_file).read_text())
        outcome = run_dive(params, inst, cfg=cfg.dive.solver_config(),
                          threshold=cfg.dive.threshold)
        status = "feasible" if outcome.feasible else "infeasible"
        cost = "" if outcome.cost is None else f" cost={outcome.cost!r}"
        rel = "" if outcome.rel_error is None else f" rel_error={outcome.rel_error!r}"
        print(f"dive {status}{cost}{rel}")
    elif args.command == "evaluate":
        stats = pipeline.stage_evaluate(cfg)
        sys.stdout.write(format_summary(stats))
    elif args.command == "baseline":
        stats = pipeline.stage_baseline(cfg)
        sys.stdout.write(format_summary(stats))
    elif args.command == "metrics":
        csv_text = pipeline.stage_metrics(cfg, args.tables or None)
        sys.stdout.write(csv_text)
    return 0


def main() -> None:
    try:
        sys.exit(run())
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"uclab: error: {exc}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
