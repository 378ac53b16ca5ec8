"""Episode kinematics: rewards, events, determinism, replay."""

import numpy as np
import pytest

from mazerl import mazeworld as mw
from mazerl.mazeworld import SimUsageError, load_asset, replay_positions, reset, step

LEFT_EXIT_SCRIPT = [(0.0, 1.0), (1.0, 1.0), (0.0, 1.0)]  # N, turn W, W


def run_script(maze, seed, script):
    state, obs = reset(maze, seed)
    results = []
    for action in script:
        results.append(step(state, action))
        if results[-1].done:
            break
    return state, results


def test_reset_pose_and_observation():
    maze = load_asset("biased_t")
    state, obs = reset(maze, 0)
    assert (state.x, state.y) == (maze.start_cell[1] + 0.5, maze.start_cell[0] + 0.5)
    assert state.yaw == maze.heading
    assert state.speed == 0.0
    assert obs.speed == 0.0
    assert obs.image.shape == (8, 8, 4)
    assert obs.image.min() >= 0.0 and obs.image.max() <= 1.0


def test_reset_deterministic():
    maze = load_asset("biased_t")
    _, obs1 = reset(maze, 42)
    _, obs2 = reset(maze, 42)
    assert np.array_equal(obs1.image, obs2.image)


def test_trap_seeds_change_colors_not_geometry():
    maze = load_asset("biased_t")
    _, obs1 = reset(maze, 1)
    _, obs2 = reset(maze, 2)
    assert not np.array_equal(obs1.image[:, :, :3], obs2.image[:, :, :3])
    assert np.array_equal(obs1.image[:, :, 3], obs2.image[:, :, 3])


def test_no_trap_maze_seed_invariant():
    maze = load_asset("biased_t").without_traps()
    _, obs1 = reset(maze, 1)
    _, obs2 = reset(maze, 2)
    assert np.array_equal(obs1.image, obs2.image)


def test_three_step_left_exit_discount():
    maze = load_asset("biased_t")
    _, results = run_script(maze, 0, LEFT_EXIT_SCRIPT)
    last = results[-1]
    assert last.done
    assert last.event.kind == "exit" and last.event.exit_id == 1
    assert np.isclose(last.reward, 1.0 * 0.99**3)


def test_collision_punishes_without_ending():
    maze = load_asset("biased_t")
    state, _ = reset(maze, 0)
    for _ in range(3):
        step(state, (0.0, 1.0))
    result = step(state, (0.0, 1.0))  # drives into the top wall
    assert result.event.kind == "collision"
    assert result.reward == -1.0
    assert not result.done
    assert not state.finished


def test_timeout_after_thirty_steps():
    maze = load_asset("biased_t")
    state, _ = reset(maze, 0)
    for i in range(30):
        result = step(state, (1.0, -1.0))  # spin in place
    assert result.done
    assert result.event.kind == "timeout"
    assert result.reward == -1.0
    assert state.step_count == 30


def test_episode_always_terminates_within_cap(rng):
    maze = load_asset("biased_t")
    for trial in range(10):
        state, _ = reset(maze, int(rng.integers(1 << 30)))
        steps = 0
        while not state.finished:
            result = step(state, tuple(rng.uniform(-1, 1, 2)))
            steps += 1
            assert steps <= 30
        assert result.done
        assert result.event.kind in ("exit", "timeout")


def test_reward_support(rng):
    maze = load_asset("biased_t")
    seen = []
    for trial in range(30):
        state, _ = reset(maze, int(rng.integers(1 << 30)))
        while not state.finished:
            result = step(state, tuple(rng.uniform(-1, 1, 2)))
            seen.append((result.reward, result.event.kind, state.step_count))
    for reward, kind, n in seen:
        if kind in ("collision", "timeout"):
            assert reward == -1.0
        elif kind == "exit":
            if reward > 0:
                # positive rewards always carry the per-step factor, n >= 1
                assert n >= 1
                base = reward / (0.99**n)
                assert np.isclose(base, 1.0) or np.isclose(base, 10.0)
            else:
                assert reward == 0.0
        else:
            assert reward == 0.0


def test_biased_exit_monte_carlo_mean(rng):
    # the coin-flip exit averages to half its high payout
    maze = load_asset("biased_t")
    rule = maze.exits[2]
    n = 10_000
    draws = np.array([rule.sample(rng) for _ in range(n)])
    assert set(np.unique(draws)) == {0.0, 10.0}
    sigma = draws.std(ddof=1) / np.sqrt(n)
    assert abs(draws.mean() - 5.0) <= 3 * sigma + 1e-12


def test_step_on_finished_episode_raises():
    maze = load_asset("biased_t")
    state, _ = reset(maze, 0)
    for _ in range(30):
        step(state, (1.0, -1.0))
    with pytest.raises(SimUsageError):
        step(state, (0.0, 0.0))


def test_non_finite_action_rejected():
    maze = load_asset("biased_t")
    state, _ = reset(maze, 0)
    with pytest.raises(SimUsageError):
        step(state, (float("nan"), 0.0))


def test_actions_clamped():
    maze = load_asset("biased_t")
    state, _ = reset(maze, 0)
    step(state, (0.0, 5.0))  # clamps to full speed
    assert state.speed == maze.speed_limit


def test_full_episode_replay_bit_exact(rng):
    maze = load_asset("biased_t")
    seed = 1234
    actions = [tuple(rng.uniform(-1, 1, 2)) for _ in range(30)]

    def rollout():
        state, obs = reset(maze, seed)
        trace = [obs.image.copy()]
        rewards = []
        for action in actions:
            result = step(state, action)
            trace.append(result.obs.image.copy())
            rewards.append(result.reward)
            if result.done:
                break
        return trace, rewards, (state.x, state.y, state.yaw)

    t1, r1, p1 = rollout()
    t2, r2, p2 = rollout()
    assert p1 == p2
    assert r1 == r2
    for a, b in zip(t1, t2):
        assert np.array_equal(a, b)


def test_replay_positions_helper():
    maze = load_asset("biased_t")
    positions = replay_positions(maze, 0, LEFT_EXIT_SCRIPT)
    assert len(positions) == 4  # initial pose + one per step
    assert positions[0] == (maze.start_cell[1] + 0.5, maze.start_cell[0] + 0.5)
    assert positions[-1][0] < 1.0  # inside the exit column
