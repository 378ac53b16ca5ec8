"""Per-epoch training: one on-policy episode, then one batch update of the
forward model, both critics, the temperature and (every second epoch) the
actor, in that order, with Polyak target tracking in between.

Curiosity bonuses enter only the critic targets; the replay buffer keeps
raw environment rewards. Convolutional passes run on real (unmasked)
batch cells only; padded cells never touch any loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diffcore import (
    ParamSet,
    Tensor,
    adam_step,
    add,
    backward,
    concat,
    minimum,
    mul,
    narrow0,
    no_grad,
    reshape,
    scatter_rows,
    square,
    sub,
    take_rows,
    tsum,
)
from ..genmodel import (
    Actor,
    Critic,
    ForwardModel,
    free_energy_from_unroll,
    make_target,
    polyak_update,
    unroll,
)
from ..genmodel.unroll import BatchView, make_view
from ..mazeworld import Maze, reset, step
from ..replay import EpisodeRecord, ReplayBuffer
from .config import AgentConfig


@dataclass
class EpisodeInfo:
    env_seed: int
    steps: int
    episode_return: float
    event: str
    exit_id: int | None
    actions: list[list[float]]


@dataclass
class EpochReport:
    epoch: int
    maze: str
    episode_return: float
    steps: int
    event: str
    exit_id: int | None
    env_seed: int
    actions: list[list[float]]
    losses: dict[str, float | None]
    curiosity_mean: float
    alpha: float


class Agent:
    """The three learned models plus twin targets and the temperature."""

    def __init__(self, config: AgentConfig, seed_seq: np.random.SeedSequence):
        self.config = config
        ss_fm, ss_actor, ss_c1, ss_c2 = seed_seq.spawn(4)
        self.fm = ForwardModel(np.random.default_rng(ss_fm))
        self.actor = Actor(np.random.default_rng(ss_actor))
        self.critics = [Critic(np.random.default_rng(ss_c1)), Critic(np.random.default_rng(ss_c2))]
        self.targets = [make_target(c, np.random.default_rng(0)) for c in self.critics]
        self.alpha_params = ParamSet()
        self.log_alpha = self.alpha_params.add("log_alpha", np.zeros(()))

    @property
    def alpha(self) -> float:
        if self.config.alpha_mode == "dynamic":
            return float(np.exp(self.log_alpha.data))
        return self.config.alpha_fixed

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays: dict[str, np.ndarray] = {}
        groups = {
            "fm": self.fm.params,
            "actor": self.actor.params,
            "critic1": self.critics[0].params,
            "critic2": self.critics[1].params,
            "target1": self.targets[0].params,
            "target2": self.targets[1].params,
            "alpha": self.alpha_params,
        }
        for prefix, ps in groups.items():
            for name, t in ps.items():
                arrays[f"{prefix}.{name}"] = t.data
        return arrays

    def save(self, path) -> None:
        from ..diffcore import save_arrays

        save_arrays(path, self.state_arrays())

    def load(self, path) -> None:
        from ..diffcore import load_arrays

        state = load_arrays(path)
        for full_name, tensor_data in self.state_arrays().items():
            np.copyto(tensor_data, state[full_name])


def _obs_to_model(image: np.ndarray, speed: float):
    return Tensor(image[None]), Tensor(np.array([[speed]]))


def collect_episode(agent: Agent, maze: Maze, rng: np.random.Generator):
    """Act on-policy until the episode terminates; no learning happens here
    and no forced random-action phase exists."""
    env_seed = int(rng.integers(2**31))
    state, obs = reset(maze, env_seed)
    images = [obs.image]
    speeds = [obs.speed]
    actions = [np.zeros(2)]
    rewards: list[float] = []
    dones: list[float] = []
    episode_return = 0.0
    with no_grad():
        h = agent.fm.zero_hidden(1)
        a_prev = Tensor(np.zeros((1, 2)))
        while not state.finished:
            img_t, spd_t = _obs_to_model(images[-1], speeds[-1])
            fs = agent.fm.observe(
                h, a_prev, img_t, spd_t, Tensor(rng.standard_normal((1, 32)))
            )
            action_t, _ = agent.actor.act(fs.h, Tensor(rng.standard_normal((1, 2))))
            action = action_t.data[0]
            result = step(state, (action[0], action[1]))
            images.append(result.obs.image)
            speeds.append(result.obs.speed)
            actions.append(action.copy())
            rewards.append(result.reward)
            dones.append(1.0 if result.done else 0.0)
            episode_return += result.reward
            h = fs.h
            a_prev = action_t
    record = EpisodeRecord(
        images=np.stack(images),
        speeds=np.asarray(speeds),
        actions=np.stack(actions),
        rewards=np.asarray(rewards),
        dones=np.asarray(dones),
    )
    info = EpisodeInfo(
        env_seed=env_seed,
        steps=len(rewards),
        episode_return=episode_return,
        event=state.last_event.kind,
        exit_id=state.last_event.exit_id,
        actions=[list(map(float, a)) for a in actions[1:]],
    )
    return record, info


def compute_targets(
    rewards_tm: np.ndarray,
    dones_tm: np.ndarray,
    bootstrap_min_q_tm: np.ndarray,
    logp_next_tm: np.ndarray,
    curiosity_tm: np.ndarray,
    config: AgentConfig,
    alpha: float,
) -> np.ndarray:
    """Bootstrapped critic targets, all arrays time-major (T+1, B).

    target_t = r_t + eta * P_t
             + gamma * (1 - done_t) * (min_q_{t+1} - alpha * (-log pi(a'_{t+1})))
    """
    entropy_next = -logp_next_tm
    return rewards_tm + config.eta * curiosity_tm + config.gamma * (1.0 - dones_tm) * (
        bootstrap_min_q_tm - alpha * entropy_next
    )


def _target_bootstrap(target: Critic, v: BatchView, a_new_tm: np.ndarray) -> np.ndarray:
    """Q-values of the frozen target critic at (o_{t+1}, a'_{t+1}) along its
    replayed hidden trajectory; returns (T+1, B) with zeros on padding."""
    b, t1 = v.b, v.t1
    with no_grad():
        o_enc_real = target.encode_obs(
            Tensor(v.imgs_tm[v.obs_idx]), Tensor(v.spds_tm[v.obs_idx])
        ).data
        o_enc = np.zeros((v.t2 * b, 64))
        o_enc[v.obs_idx] = o_enc_real
        # replayed action a_t sits at slot t+1 of the actions array
        a_enc_replay = target.encode_action(Tensor(v.acts_tm[b:])).data
        h = np.zeros((b, 32))
        h_prevs = np.empty((t1, b, 32))
        for t in range(t1):
            h_prevs[t] = h
            h = target.gru(
                Tensor(
                    np.concatenate(
                        [o_enc[t * b : (t + 1) * b], a_enc_replay[t * b : (t + 1) * b]],
                        axis=1,
                    )
                ),
                Tensor(h),
            ).data
        # one batched throwaway advance with fresh actions at real cells
        idx = v.trans_idx
        o_enc_next = o_enc[idx + b]
        a_enc_new = target.encode_action(Tensor(a_new_tm[idx + b])).data
        h_prev_real = h_prevs.reshape(t1 * b, 32)[idx]
        h_eval = target.gru(
            Tensor(np.concatenate([o_enc_next, a_enc_new], axis=1)), Tensor(h_prev_real)
        )
        q_flat = np.zeros(t1 * b)
        q_flat[idx] = target.q_value(h_eval).data.reshape(-1)
    return q_flat.reshape(t1, b)


def train_epoch(
    agent: Agent,
    maze: Maze,
    buffer: ReplayBuffer,
    rng: np.random.Generator,
    epoch: int,
) -> EpochReport:
    config = agent.config
    record, info = collect_episode(agent, maze, rng)
    buffer.push(record)
    batch = buffer.sample(config.batch_size, rng)
    v = make_view(batch)
    b, t1 = v.b, v.t1

    # fixed-size seed draws keep the noise streams independent of the
    # batch horizon (padding must not shift any randomness)
    z_seed, a_seed = (int(s) for s in rng.integers(2**63, size=2))

    # ---- forward model: free energy on the teacher-forced batch
    u = unroll(agent.fm, batch, np.random.default_rng(z_seed), view=v)
    f_loss = free_energy_from_unroll(u, config.beta)
    backward(f_loss)
    adam_step(agent.fm.params, config.lr)

    # ---- fresh actions from the current policy on detached hidden states
    h_flat = np.ascontiguousarray(u.h_detached.transpose(1, 0, 2)).reshape(v.t2 * b, 32)
    noise_a = np.random.default_rng(a_seed).standard_normal((v.t2 * b, 2))
    actor_epoch = epoch % config.actor_delay == 0
    if actor_epoch:
        a_new, logp_new = agent.actor.act(Tensor(h_flat), Tensor(noise_a))
    else:
        with no_grad():
            a_new, logp_new = agent.actor.act(Tensor(h_flat), Tensor(noise_a))
    a_new_tm = a_new.data  # (T2*B, 2) time-major
    logp_tm = logp_new.data.reshape(v.t2, b)

    # ---- curiosity bonus per configuration (detached; targets only)
    if config.curiosity == "hidden":
        curiosity_tm = np.ascontiguousarray(u.curiosity_hidden.transpose(1, 0))
    elif config.curiosity == "prediction":
        curiosity_tm = np.ascontiguousarray(u.curiosity_prediction.transpose(1, 0))
    else:
        curiosity_tm = np.zeros((t1, b))

    # ---- bootstrapped targets from both frozen target critics
    alpha = agent.alpha
    boot_q = np.minimum(
        _target_bootstrap(agent.targets[0], v, a_new_tm),
        _target_bootstrap(agent.targets[1], v, a_new_tm),
    )
    targets_tm = compute_targets(
        v.rewards_tm, v.dones_tm, boot_q, logp_tm[1:], curiosity_tm, config, alpha
    )
    idx = v.trans_idx
    target_real = Tensor(targets_tm.reshape(t1 * b)[idx])

    # ---- critic regression toward the targets
    imgs_real = Tensor(v.imgs_tm[idx])
    spds_real = Tensor(v.spds_tm[idx])
    acts_steps = Tensor(v.acts_tm[b:])  # a_t for each transition slot
    q_losses = []
    critic_h_prevs = []  # detached (real cells, 32) hidden inputs, for the actor
    critic_o_encs = []  # detached (real cells, 64) observation encodings
    for critic in agent.critics:
        o_enc_real = critic.encode_obs(imgs_real, spds_real)
        o_enc = scatter_rows(o_enc_real, idx, t1 * b)
        a_enc = critic.encode_action(acts_steps)
        h = critic.zero_hidden(b)
        h_list = []
        h_prev_np = np.empty((t1, b, 32))
        for t in range(t1):
            h_prev_np[t] = h.data
            h = critic.advance(
                narrow0(o_enc, t * b, (t + 1) * b),
                narrow0(a_enc, t * b, (t + 1) * b),
                h,
            )
            h_list.append(h)
        h_real = take_rows(concat(h_list, axis=0), idx)
        q_hat = reshape(critic.q_value(h_real), (idx.size,))
        j_q = mul(tsum(square(sub(q_hat, target_real))), 1.0 / max(v.mask_total, 1.0))
        backward(j_q)
        adam_step(critic.params, config.lr)
        q_losses.append(float(j_q.data))
        critic_h_prevs.append(h_prev_np.reshape(t1 * b, 32)[idx])
        critic_o_encs.append(o_enc_real.data)

    # ---- Polyak tracking of both targets
    for target, critic in zip(agent.targets, agent.critics):
        polyak_update(target, critic, config.tau)

    # ---- temperature: driven by the entropy gap on real cells
    j_alpha_val: float | None = None
    if config.alpha_mode == "dynamic":
        entropy_real = -logp_new.data[: t1 * b][idx]
        gap = float(entropy_real.sum() / max(v.mask_total, 1.0)) - config.target_entropy
        j_alpha = mul(agent.log_alpha, gap)
        backward(j_alpha)
        adam_step(agent.alpha_params, config.lr)
        j_alpha_val = float(j_alpha.data)

    # ---- delayed actor update against the lowest live critic
    j_pi_val: float | None = None
    if actor_epoch:
        alpha_now = agent.alpha
        a_new_real = take_rows(a_new, idx)
        q_news = []
        for critic, h_prev_real, o_enc_np in zip(
            agent.critics, critic_h_prevs, critic_o_encs
        ):
            a_enc_new = critic.encode_action(a_new_real)
            h_eval = critic.gru(
                concat([Tensor(o_enc_np), a_enc_new], axis=1), Tensor(h_prev_real)
            )
            q_news.append(reshape(critic.q_value(h_eval), (idx.size,)))
        q_min = minimum(q_news[0], q_news[1])
        logp_real = take_rows(logp_new, idx)
        cells = add(mul(q_min, -1.0), mul(logp_real, alpha_now))
        j_pi = mul(tsum(cells), 1.0 / max(v.mask_total, 1.0))
        backward(j_pi)
        adam_step(agent.actor.params, config.lr)
        for critic in agent.critics:
            critic.params.zero_grads()
        j_pi_val = float(j_pi.data)

    curiosity_mean = float(
        (curiosity_tm * v.masks_tm).sum() / max(v.mask_total, 1.0)
    )
    return EpochReport(
        epoch=epoch,
        maze=maze.name,
        episode_return=info.episode_return,
        steps=info.steps,
        event=info.event,
        exit_id=info.exit_id,
        env_seed=info.env_seed,
        actions=info.actions,
        losses={
            "F": float(f_loss.data),
            "JQ1": q_losses[0],
            "JQ2": q_losses[1],
            "Jalpha": j_alpha_val,
            "Jpi": j_pi_val,
        },
        curiosity_mean=curiosity_mean,
        alpha=agent.alpha,
    )
