"""Command-line harness.

Subcommands:
  simulate    run one episode under a controller, emit a RunRecord as JSON
  train       train the multi-agent controller and write a model file
  experiment  seeded evaluation batches for both controllers plus a report
  stats       re-analyse stored run CSVs (including the bundled tables)

Configuration comes from built-in defaults, optionally a JSON file of flat
dotted keys (``{"sim.vehicle_speed": 150}``), and finally CLI flags; later
layers win. Data files written by the harness never contain timestamps, so
identical invocations produce byte-identical artifacts; wall-clock timing
goes to a sidecar log.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from concurrent.futures import FIRST_EXCEPTION, ProcessPoolExecutor, wait
from pathlib import Path

from .config import ConfigError, SimConfig
from .control import (
    DEFAULT_DECISION_FRAMES,
    FixedTimeController,
    MarlController,
    run_episode,
)
from .persist import ModelFormatError, load_model, save_model
from .records import (
    CsvFormatError,
    RunRecord,
    read_runs_csv,
    trace_line,
    write_runs_csv,
)
from .rl import Hyperparams, train
from .stats import run_full_comparison
from .world import finalize_metrics, new_world

SIM_KEYS = {f.name: f.type for f in dataclasses.fields(SimConfig)}
HP_KEYS = {f.name: f.type for f in dataclasses.fields(Hyperparams)}

EVAL_SEED_OFFSET = 10_000


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object of dotted keys")
    for key in data:
        scope, _, name = str(key).partition(".")
        if scope == "sim" and name in SIM_KEYS:
            continue
        if scope == "hp" and name in HP_KEYS:
            continue
        raise ConfigError(f"{path}: unknown config key {key!r}")
    return data


def _build_sim_config(file_cfg: dict, overrides: dict) -> SimConfig:
    kwargs = {}
    for key, value in file_cfg.items():
        scope, _, name = key.partition(".")
        if scope == "sim":
            if name not in SIM_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[name] = value
    for name, value in overrides.items():
        if value is not None:
            kwargs[name] = value
    return SimConfig(**kwargs)


def _build_hyperparams(file_cfg: dict, overrides: dict) -> Hyperparams:
    kwargs = {}
    for key, value in file_cfg.items():
        scope, _, name = key.partition(".")
        if scope == "hp":
            if name not in HP_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[name] = tuple(value) if name == "hidden" else value
    for name, value in overrides.items():
        if value is not None:
            kwargs[name] = value
    return Hyperparams(**kwargs)


def _run_one(
    config: SimConfig,
    seed: int,
    controller_kind: str,
    model_path: str | None,
    trace_path: str | None = None,
) -> RunRecord:
    world = new_world(config, seed)
    if controller_kind == "fixed":
        controller = FixedTimeController()
    else:
        networks, _meta = load_model(model_path, expected_lights=len(config.light_positions))
        controller = MarlController(networks, epsilon=0.0)
    if trace_path:
        with open(trace_path, "w") as fh:
            run_episode(world, controller, trace=lambda payload: fh.write(trace_line(payload) + "\n"))
    else:
        run_episode(world, controller)
    metrics = finalize_metrics(world)
    return RunRecord(
        controller=controller_kind,
        seed=seed,
        vehicles_passed=metrics.vehicles_passed,
        total_wait=round(metrics.total_wait, 6),
        mean_wait=round(metrics.mean_wait_per_vehicle, 6),
        spawned=metrics.spawned,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    config = _build_sim_config(file_cfg, {"duration": args.duration})
    record = _run_one(config, args.seed, args.controller, args.model, args.trace)
    payload = record.to_json()
    if args.out:
        Path(args.out).write_text(payload + "\n")
    else:
        print(payload)
    return 0


def _write_training_log(path: Path, log) -> None:
    with open(path, "w") as fh:
        fh.write("episode,mean_reward,mean_loss,epsilon\n")
        for row in log:
            fh.write(f"{row.episode},{row.mean_reward:.6f},{row.mean_loss:.6f},{row.epsilon:.6f}\n")


def cmd_train(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    config = _build_sim_config(file_cfg, {"duration": args.duration})
    hp = _build_hyperparams(
        file_cfg,
        {
            "lr": args.lr,
            "gamma": args.gamma,
            "batch": args.batch,
            "buffer_capacity": args.buffer_capacity,
            "target_sync_every": args.target_sync_every,
            "eps0": args.eps0,
            "eps_min": args.eps_min,
            "eps_decay": args.eps_decay,
        },
    )
    out = Path(args.out)
    log_path = Path(args.log) if args.log else out.with_suffix(".log.csv")
    # Fail on unwritable outputs before spending time training.
    for path in (out, log_path):
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a"):
            pass
    started = time.perf_counter()
    result = train(
        lambda seed: new_world(config, seed),
        hp,
        episodes=args.episodes,
        seed=args.seed,
        decision_frames=args.decision_frames,
    )
    elapsed = time.perf_counter() - started
    save_model(
        out,
        [agent.online for agent in result.agents],
        training_seed=args.seed,
        episodes=args.episodes,
        hp=hp,
        decision_frames=args.decision_frames,
    )
    _write_training_log(log_path, result.log)
    print(
        f"trained {len(result.agents)} agents for {args.episodes} episodes "
        f"in {elapsed:.1f}s -> {out}",
        file=sys.stderr,
    )
    return 0


def _experiment_worker(task) -> tuple[int, str, RunRecord]:
    config_kwargs, seed, kind, model_path = task
    record = _run_one(SimConfig(**config_kwargs), seed, kind, model_path)
    return seed, kind, record


def cmd_experiment(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    config = _build_sim_config(file_cfg, {"duration": args.duration})
    _networks, meta = load_model(args.model, expected_lights=len(config.light_positions))
    base_seed = args.base_seed
    if base_seed is None:
        base_seed = int(meta["seed"]) + EVAL_SEED_OFFSET
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    config_kwargs = dataclasses.asdict(config)
    seeds = [base_seed + k for k in range(args.runs)]
    tasks = [(config_kwargs, seed, kind, args.model) for kind in ("fixed", "marl") for seed in seeds]

    started = time.perf_counter()
    results: dict[tuple[str, int], RunRecord] = {}
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {pool.submit(_experiment_worker, task): task for task in tasks}
            done, not_done = wait(futures, return_when=FIRST_EXCEPTION)
            for future in done:
                task = futures[future]
                exc = future.exception()
                if exc is not None:
                    for pending in not_done:
                        pending.cancel()
                    print(f"run failed for seed {task[1]} ({task[2]}): {exc}", file=sys.stderr)
                    return 1
                seed, kind, record = future.result()
                results[(kind, seed)] = record
    else:
        for task in tasks:
            try:
                seed, kind, record = _experiment_worker(task)
            except Exception as exc:
                print(f"run failed for seed {task[1]} ({task[2]}): {exc}", file=sys.stderr)
                return 1
            results[(kind, seed)] = record
    elapsed = time.perf_counter() - started

    fixed_records = [results[("fixed", s)] for s in seeds]
    marl_records = [results[("marl", s)] for s in seeds]
    write_runs_csv(out_dir / "fixed_runs.csv", fixed_records)
    write_runs_csv(out_dir / "marl_runs.csv", marl_records)

    report = run_full_comparison(fixed_records, marl_records)
    (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    (out_dir / "report.txt").write_text(report.render_text())
    with open(out_dir / "experiment.log", "w") as fh:
        fh.write(f"runs={args.runs} base_seed={base_seed} wall_clock_s={elapsed:.2f}\n")
    print(f"wrote {out_dir}/[fixed_runs.csv marl_runs.csv report.json report.txt]", file=sys.stderr)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    fixed = read_runs_csv(args.fixed_csv, controller="fixed")
    marl = read_runs_csv(args.marl_csv, controller="marl")
    report = run_full_comparison(fixed, marl)
    if args.out_json:
        Path(args.out_json).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    print(report.render_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signalsim")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one seeded episode")
    p_sim.add_argument("--controller", choices=("fixed", "marl"), required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--duration", type=float, default=None)
    p_sim.add_argument("--model", default=None, help="model file (required for marl)")
    p_sim.add_argument("--trace", default=None, help="write a per-frame JSONL trace here")
    p_sim.add_argument("--config", default=None)
    p_sim.add_argument("--out", default=None, help="write the RunRecord JSON here instead of stdout")
    p_sim.set_defaults(func=cmd_simulate)

    p_train = sub.add_parser("train", help="train the multi-agent controller")
    p_train.add_argument("--episodes", type=int, default=20)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument("--log", default=None, help="training log CSV (default: <out>.log.csv)")
    p_train.add_argument("--duration", type=float, default=None)
    p_train.add_argument("--decision-frames", type=int, default=DEFAULT_DECISION_FRAMES)
    p_train.add_argument("--lr", type=float, default=None)
    p_train.add_argument("--gamma", type=float, default=None)
    p_train.add_argument("--batch", type=int, default=None)
    p_train.add_argument("--buffer-capacity", type=int, default=None)
    p_train.add_argument("--target-sync-every", type=int, default=None)
    p_train.add_argument("--eps0", type=float, default=None)
    p_train.add_argument("--eps-min", type=float, default=None)
    p_train.add_argument("--eps-decay", type=float, default=None)
    p_train.add_argument("--config", default=None)
    p_train.set_defaults(func=cmd_train)

    p_exp = sub.add_parser("experiment", help="seeded evaluation batches plus report")
    p_exp.add_argument("--runs", type=int, default=20)
    p_exp.add_argument("--base-seed", type=int, default=None,
                       help="default: model training seed + 10000")
    p_exp.add_argument("--model", required=True)
    p_exp.add_argument("--out-dir", required=True)
    p_exp.add_argument("--duration", type=float, default=None)
    p_exp.add_argument("--jobs", type=int, default=1)
    p_exp.add_argument("--config", default=None)
    p_exp.set_defaults(func=cmd_experiment)

    p_stats = sub.add_parser("stats", help="re-analyse stored run CSVs")
    p_stats.add_argument("--fixed-csv", required=True)
    p_stats.add_argument("--marl-csv", required=True)
    p_stats.add_argument("--out-json", default=None)
    p_stats.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.controller == "marl" and not args.model:
        parser.error("--model is required when --controller marl")
    try:
        return args.func(args)
    except (ConfigError, CsvFormatError, ModelFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
