"""Shared fixtures, including the expensive 3-seed training bundle.

The bundle trains the multi-agent controller with three fixed seeds and
evaluates each against the fixed-time baseline on 20 held-out spawn seeds.
It backs the end-to-end acceptance checks and the training-curve test, so
it runs at most once per session, parallelised across processes.
"""

from __future__ import annotations

import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pytest

from signalsim import Hyperparams, SimConfig, finalize_metrics, new_world, train
from signalsim.control import FixedTimeController, MarlController, run_episode
from signalsim.world import RunMetrics

TRAINING_SEEDS = (1, 2, 3)
EVAL_RUNS = 20
EVAL_SEED_OFFSET = 10_000


@dataclass
class TrainedSeed:
    seed: int
    episode_rewards: list[float]
    constraint_checks: int
    constraint_violations: int
    train_wall_s: float
    eval_wall_s: float
    fixed_metrics: list[RunMetrics]
    marl_metrics: list[RunMetrics]
    weights: list[list[np.ndarray]]
    biases: list[list[np.ndarray]]
    hyperparams: Hyperparams
    episodes: int


def _train_and_evaluate(seed: int) -> TrainedSeed:
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    config = SimConfig()
    hp = Hyperparams()
    episodes = 20

    started = time.perf_counter()
    result = train(lambda s: new_world(config, s), hp, episodes=episodes, seed=seed)
    train_wall = time.perf_counter() - started

    networks = [agent.online for agent in result.agents]
    started = time.perf_counter()
    fixed_metrics: list[RunMetrics] = []
    marl_metrics: list[RunMetrics] = []
    for k in range(EVAL_RUNS):
        eval_seed = seed + EVAL_SEED_OFFSET + k
        world = run_episode(new_world(config, eval_seed), MarlController(networks, epsilon=0.0))
        marl_metrics.append(finalize_metrics(world))
        world = run_episode(new_world(config, eval_seed), FixedTimeController())
        fixed_metrics.append(finalize_metrics(world))
    eval_wall = time.perf_counter() - started

    return TrainedSeed(
        seed=seed,
        episode_rewards=[row.mean_reward for row in result.log],
        constraint_checks=result.constraint_checks,
        constraint_violations=result.constraint_violations,
        train_wall_s=train_wall,
        eval_wall_s=eval_wall,
        fixed_metrics=fixed_metrics,
        marl_metrics=marl_metrics,
        weights=[[w.copy() for w in net.weights] for net in networks],
        biases=[[b.copy() for b in net.biases] for net in networks],
        hyperparams=hp,
        episodes=episodes,
    )


@pytest.fixture(scope="session")
def trained_bundle() -> list[TrainedSeed]:
    workers = min(len(TRAINING_SEEDS), os.cpu_count() or 1)
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(_train_and_evaluate, TRAINING_SEEDS))
