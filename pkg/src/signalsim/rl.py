"""Deep Q-learning engine: replay, targets, exploration, multi-agent training.

One agent per traffic light. All agents observe the same global feature
vector, pick actions independently under the dwell constraints, receive
local rewards, and learn off-policy from their own replay buffers. Target
networks are refreshed by copy every 100 update steps and epsilon decays
linearly per update step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import SimConfig
from .control import (
    ACTIONS,
    DEFAULT_DECISION_FRAMES,
    ConstraintState,
    DecisionRecord,
    apply_constraints,
    check_constraint_decision,
    observe,
    reward_terms,
)
from .nn import QNetwork
from .world import WorldState, new_world, step_frame


@dataclass(frozen=True)
class Hyperparams:
    gamma: float = 0.99
    lr: float = 1e-3
    batch: int = 64
    buffer_capacity: int = 10_000
    target_sync_every: int = 100
    eps0: float = 1.0
    eps_min: float = 0.05
    eps_decay: float = 1e-4
    hidden: tuple[int, int] = (128, 64)

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 < self.eps_min <= self.eps0 <= 1.0:
            raise ValueError("need 0 < eps_min <= eps0 <= 1")
        if self.batch > self.buffer_capacity:
            raise ValueError("batch cannot exceed buffer capacity")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")


@dataclass
class Transition:
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    done: bool


class ReplayBuffer:
    """Fixed-capacity ring buffer over flat numpy storage."""

    def __init__(self, capacity: int, state_dim: int, dtype=np.float32):
        self.capacity = capacity
        self.state_dim = state_dim
        self._s = np.empty((capacity, state_dim), dtype=dtype)
        self._a = np.empty(capacity, dtype=np.int64)
        self._r = np.empty(capacity, dtype=dtype)
        self._s_next = np.empty((capacity, state_dim), dtype=dtype)
        self._done = np.empty(capacity, dtype=bool)
        self._head = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, s, a: int, r: float, s_next, done: bool) -> None:
        i = self._head
        self._s[i] = s
        self._a[i] = a
        self._r[i] = r
        self._s_next[i] = s_next
        self._done[i] = done
        self._head = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator):
        """Uniform sample with replacement."""
        idx = rng.integers(0, self._size, size=batch)
        return (
            self._s[idx],
            self._a[idx],
            self._r[idx],
            self._s_next[idx],
            self._done[idx],
        )

    def transition(self, i: int) -> Transition:
        """The i-th oldest stored transition (test and inspection helper)."""
        if not 0 <= i < self._size:
            raise IndexError(i)
        if self._size < self.capacity:
            j = i
        else:
            j = (self._head + i) % self.capacity
        return Transition(
            self._s[j].copy(), int(self._a[j]), float(self._r[j]), self._s_next[j].copy(), bool(self._done[j])
        )


@dataclass
class AgentState:
    online: QNetwork
    target: QNetwork
    buffer: ReplayBuffer
    epsilon: float
    update_steps: int = 0


def make_agent(
    input_dim: int, hp: Hyperparams, rng: np.random.Generator, dtype=np.float32
) -> AgentState:
    dims = (input_dim, *hp.hidden, len(ACTIONS))
    online = QNetwork(dims, rng=rng, dtype=dtype)
    target = QNetwork(dims, rng=0, dtype=dtype)
    target.copy_parameters_from(online)
    return AgentState(
        online=online,
        target=target,
        buffer=ReplayBuffer(hp.buffer_capacity, input_dim, dtype=dtype),
        epsilon=hp.eps0,
    )


def td_targets(
    rewards: np.ndarray,
    next_states: np.ndarray,
    done: np.ndarray,
    target_net: QNetwork,
    gamma: float,
) -> np.ndarray:
    """Bootstrap targets r + gamma * max_a' Q_target(s', a'), cut at episode end."""
    if len(rewards) == 0:
        raise ValueError("td_targets needs a non-empty batch")
    q_next = target_net.forward(np.atleast_2d(next_states))
    bootstrap = q_next.max(axis=1)
    return rewards + gamma * bootstrap * (~np.asarray(done, dtype=bool))


def epsilon_greedy(
    q_values: np.ndarray, eps: float, rng: np.random.Generator | None
) -> int:
    """Uniform action with probability eps, else argmax (lowest index wins ties)."""
    if eps > 0.0:
        if rng is None:
            raise ValueError("an rng is required when eps > 0")
        if rng.random() < eps:
            return int(rng.integers(len(q_values)))
    return int(np.argmax(q_values))


def epsilon_step(eps: float, hp: Hyperparams) -> float:
    """Linear decay by one update step, floored at eps_min.

    Values within float drift of the floor snap onto it, so the schedule
    reaches eps_min after exactly (eps0 - eps_min) / eps_decay steps.
    """
    decayed = eps - hp.eps_decay
    if decayed <= hp.eps_min + 1e-12:
        return hp.eps_min
    return decayed


def sync_target(agent: AgentState) -> None:
    """Copy online weights into the target network (moments excluded)."""
    agent.target.copy_parameters_from(agent.online)


def train_step(
    agent: AgentState, hp: Hyperparams, rng: np.random.Generator
) -> float | None:
    """One sampled Q-update. Returns the pre-update loss, or None if the
    buffer cannot yet fill a batch."""
    if len(agent.buffer) < hp.batch:
        return None
    s, a, r, s_next, done = agent.buffer.sample(hp.batch, rng)
    y = td_targets(r, s_next, done, agent.target, hp.gamma)
    loss, grads_w, grads_b = agent.online.loss_and_grads(s, a, y)
    agent.online.adam_step(grads_w, grads_b, hp.lr)
    agent.update_steps += 1
    return loss


@dataclass
class EpisodeLog:
    episode: int
    mean_reward: float
    mean_loss: float
    epsilon: float


@dataclass
class TrainResult:
    agents: list[AgentState]
    log: list[EpisodeLog]
    constraint_checks: int = 0
    constraint_violations: int = 0
    decision_records: list[DecisionRecord] = field(default_factory=list)


def default_sim_factory(config: SimConfig) -> Callable[[int], WorldState]:
    return lambda seed: new_world(config, seed)


def train(
    sim_factory: Callable[[int], WorldState],
    hp: Hyperparams,
    episodes: int,
    seed: int,
    decision_frames: int = DEFAULT_DECISION_FRAMES,
    t_min: float = 1.0,
    t_max: float = 10.0,
    keep_decision_records: bool = False,
    dtype=np.float32,
) -> TrainResult:
    """Train one Q-network per light with decentralised updates.

    Per decision tick every agent picks an epsilon-greedy action from the
    shared global state, the constrained actions run for one interval, each
    agent stores its local transition and performs one sampled update.
    Episode ``e`` uses spawn seed ``seed + e``; the final tick of an episode
    is stored with ``done`` set.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    probe = sim_factory(seed)
    n_lights = len(probe.lights)
    input_dim = n_lights * 20

    root = np.random.SeedSequence(seed)
    init_seq, action_seq, sample_seq = root.spawn(3)
    init_rngs = [np.random.default_rng(s) for s in init_seq.spawn(n_lights)]
    sample_rngs = [np.random.default_rng(s) for s in sample_seq.spawn(n_lights)]
    action_rng = np.random.default_rng(action_seq)

    agents = [make_agent(input_dim, hp, init_rngs[i], dtype=dtype) for i in range(n_lights)]
    log: list[EpisodeLog] = []
    checks = 0
    violations = 0
    records: list[DecisionRecord] = []

    for episode in range(episodes):
        world = sim_factory(seed + episode)
        cfg = world.config
        ticks = cfg.total_frames // decision_frames
        period = decision_frames / cfg.fps
        cs = ConstraintState(n_lights, t_min=t_min, t_max=t_max)
        episode_reward = np.zeros(n_lights)
        loss_sum = 0.0
        loss_count = 0

        features, _, _ = observe(world)
        for tick in range(ticks):
            dt = 0.0 if tick == 0 else period
            applied_actions = [0] * n_lights
            for i, agent in enumerate(agents):
                q = agent.online.forward(features)
                proposed = epsilon_greedy(q, agent.epsilon, action_rng)
                dwell = cs.time_in_state[i] + dt
                previous = cs.previous[i]
                applied = apply_constraints(proposed, q, cs, i, dt)
                checks += 1
                if not check_constraint_decision(dwell, previous, applied, q, t_min, t_max):
                    violations += 1
                if keep_decision_records:
                    records.append(
                        DecisionRecord(tick, i, dwell, previous, proposed, applied, tuple(map(float, q)))
                    )
                applied_actions[i] = applied
            phases = [ACTIONS[a] for a in applied_actions]

            moved = [0] * n_lights
            for _ in range(decision_frames):
                _, events = step_frame(world, phases)
                for li in range(n_lights):
                    moved[li] += events.favorable_moved[li]

            next_features, queue, stopped = observe(world)
            done = tick == ticks - 1
            for i, agent in enumerate(agents):
                terms = reward_terms(moved[i], queue[i], stopped[i])
                episode_reward[i] += terms.reward
                agent.buffer.push(features, applied_actions[i], terms.reward, next_features, done)
                loss = train_step(agent, hp, sample_rngs[i])
                if loss is not None:
                    loss_sum += loss
                    loss_count += 1
                    agent.epsilon = epsilon_step(agent.epsilon, hp)
                    if agent.update_steps % hp.target_sync_every == 0:
                        sync_target(agent)
            features = next_features

        log.append(
            EpisodeLog(
                episode=episode,
                mean_reward=float(episode_reward.mean()),
                mean_loss=loss_sum / loss_count if loss_count else 0.0,
                epsilon=float(np.mean([a.epsilon for a in agents])),
            )
        )

    return TrainResult(
        agents=agents,
        log=log,
        constraint_checks=checks,
        constraint_violations=violations,
        decision_records=records,
    )
