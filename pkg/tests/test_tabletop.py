"""Push simulator, task variants and the gymnasium front end."""

import numpy as np
from dataclasses import replace
import pytest

from errors import ConfigError, EntityError, GoalMismatchError, PlacementError
from sim.geometry import Corridor, push_out_of_rect, sample_free_position
from sim.tabletop import (TaskConfig, SimState, GoalConfig, TrajectoryStep, VARIANTS, default_horizon, reset,
                          step, gt_reward, goal_reward, match_goals, episode_metrics, trajectory_records)
from sim.gym_env import TabletopEnv


def free_state(agent, objects, codes=None):
    objects = np.asarray(objects, dtype=np.float64).reshape(-1, 2)
    return SimState(agent_pos=np.asarray(agent, dtype=np.float64), object_pos=objects,
                    object_code=tuple(codes if codes is not None else range(len(objects))),
                    bounds=np.array([[0.0, 0.0], [1.0, 1.0]]))


def min_gaps(state):
    r, ra = state.object_radius, state.agent_radius
    gaps = [np.linalg.norm(state.object_pos[i] - state.agent_pos) - (r + ra) for i in range(state.n_objects)]
    for i in range(state.n_objects):
        for j in range(i + 1, state.n_objects):
            gaps.append(np.linalg.norm(state.object_pos[i] - state.object_pos[j]) - 2 * r)
    return min(gaps) if gaps else np.inf


class TestTaskConfig:
    def test_default_horizons(self):
        assert [default_horizon(n) for n in (1, 2, 3, 4, 6)] == [30, 50, 100, 150, 250]
        assert TaskConfig(n_objects=2).horizon == 50

    def test_derived_radii(self):
        task = TaskConfig(object_radius=0.05)
        assert task.success_radius == 0.05
        assert task.corridor_width == pytest.approx(0.11)
        assert task.sort_radius == pytest.approx(0.15)

    def test_sorting_goal_count(self):
        assert TaskConfig(n_objects=8, variant='sorting').n_goals == 2

    @pytest.mark.parametrize('kwargs', [{'variant': 'stacking'}, {'n_objects': 0},
                                        {'variant': 'sorting', 'n_objects': 2, 'n_goals': 3}])
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigError):
            TaskConfig(**kwargs)


@pytest.mark.parametrize('variant', [v for v in VARIANTS if v != 'sorting'])
def test_reset_places_clear_scene(variant):
    task = TaskConfig(n_objects=3, variant=variant)
    rng = np.random.default_rng(0)
    for _ in range(10):
        state, goal = reset(task, rng)
        lo, hi = state.bounds
        assert min_gaps(state) >= 0.0
        assert np.all(state.object_pos >= lo + task.object_radius - 1e-12)
        assert np.all(state.object_pos <= hi - task.object_radius + 1e-12)
        assert sorted(goal.goal_code) == sorted(state.object_code)
        assert goal.goal_pos.shape == (3, 2)


def test_small_table_shrinks_workspace():
    state, goal = reset(TaskConfig(n_objects=2, variant='small_table'), np.random.default_rng(1))
    np.testing.assert_allclose(state.bounds, [[0.2, 0.2], [0.8, 0.8]])
    assert np.all((goal.goal_pos >= 0.2) & (goal.goal_pos <= 0.8))


def test_adjacent_goals_touch():
    task = TaskConfig(n_objects=3, variant='adjacent_goals')
    _, goal = reset(task, np.random.default_rng(2))
    gaps = [np.linalg.norm(goal.goal_pos[i] - goal.goal_pos[j]) for i in range(3) for j in range(i + 1, 3)]
    for gap in gaps:
        assert 2 * task.object_radius - 1e-9 <= gap <= 2 * task.object_radius + task.adjacent_gap + 1e-9


class TestOrderedPush:
    def test_goals_line_the_corridor(self):
        task = TaskConfig(n_objects=3, variant='ordered_push')
        state, goal = reset(task, np.random.default_rng(3))
        corridor = state.corridor
        assert all(corridor.contains(g) for g in goal.goal_pos)
        # first colour sits at the rear wall
        assert goal.goal_pos[0][1] == pytest.approx(corridor.top - task.object_radius)
        assert np.all(state.object_pos[:, 1] <= corridor.mouth)

    def test_shallow_corridor_is_refused(self):
        with pytest.raises(PlacementError):
            reset(TaskConfig(n_objects=5, variant='ordered_push', corridor_depth=0.2), np.random.default_rng(4))

    def test_objects_inside_the_corridor_never_come_back_out(self):
        task = TaskConfig(n_objects=2, variant='ordered_push')
        state, _ = reset(task, np.random.default_rng(10))
        corridor, r = state.corridor, task.object_radius
        centre = 0.5 * (corridor.x_lo + corridor.x_hi)
        start = replace(state, object_pos=np.array([[centre, corridor.mouth + 1.5 * r], [0.3, 0.3]]),
                        agent_pos=np.array([centre, corridor.mouth - task.agent_radius - 0.02]))
        rng = np.random.default_rng(11)
        for _ in range(1000):
            state = start
            drift = np.array([0.0, rng.uniform(0.0, task.a_max)])
            for action in rng.uniform(-task.a_max, task.a_max, size=(15, 2)):
                state = step(state, action + drift)
                assert corridor.depth_past_mouth(state.object_pos[0]) > r
                assert corridor.x_lo + r - 1e-9 <= state.object_pos[0][0] <= corridor.x_hi - r + 1e-9


def test_sorting_cycles_colours():
    task = TaskConfig(n_objects=8, variant='sorting')
    state, goal = reset(task, np.random.default_rng(5))
    assert state.object_code == (0, 1, 0, 1, 0, 1, 0, 1)
    assert goal.goal_code == (0, 1)
    np.testing.assert_array_equal(match_goals(state.object_code, goal.goal_code, 'sorting'), [0, 1] * 4)


def test_sorting_relabeled_goal_matches_each_object_to_itself():
    task = TaskConfig(n_objects=8, variant='sorting')
    state, goal = reset(task, np.random.default_rng(5))
    achieved = state.achieved_goal()
    np.testing.assert_array_equal(match_goals(state.object_code, achieved.goal_code, 'sorting'), np.arange(8))
    assert goal_reward(achieved, achieved, task) == 0.0
    # duplicated codes pair up in entity id order, wrapping when goals run out
    np.testing.assert_array_equal(match_goals((1, 0, 1, 1), (0, 1, 1), 'sorting'), [1, 0, 2, 1])


class TestStep:
    def test_action_is_clamped(self):
        state = free_state([0.5, 0.5], [[0.1, 0.1]])
        moved = step(state, [1.0, -1.0])
        np.testing.assert_allclose(moved.agent_pos, [0.55, 0.45])
        assert moved.step_count == 1

    def test_is_pure(self):
        state = free_state([0.5, 0.5], [[0.6, 0.5]])
        before = state.object_pos.copy()
        step(state, [0.05, 0.0])
        np.testing.assert_array_equal(state.object_pos, before)
        assert state.step_count == 0

    def test_agent_pushes_object(self):
        state = free_state([0.5 - 0.07 - 0.001, 0.5], [[0.5, 0.5]])
        moved = step(state, [0.03, 0.0])
        np.testing.assert_allclose(moved.agent_pos, [0.459, 0.5])
        np.testing.assert_allclose(moved.object_pos[0], [0.529, 0.5], atol=1e-9)

    def test_wall_stops_the_agent(self):
        state = free_state([0.96, 0.5], [[0.1, 0.1]])
        assert step(state, [0.05, 0.0]).agent_pos[0] == pytest.approx(0.97)

    def test_object_pinned_at_wall_stops_the_agent_in_contact(self):
        state = free_state([0.879, 0.5], [[0.95, 0.5]])
        moved = step(state, [0.05, 0.0])
        assert moved.object_pos[0][0] == pytest.approx(0.96)
        assert moved.agent_pos[0] == pytest.approx(0.89)
        assert step(moved, [0.0, 0.0]).agent_pos[0] == pytest.approx(0.89, abs=1e-12)

    def test_random_walk_keeps_scene_clear(self):
        task = TaskConfig(n_objects=3)
        rng = np.random.default_rng(6)
        state, _ = reset(task, rng)
        for _ in range(200):
            state = step(state, rng.uniform(-task.a_max, task.a_max, size=2))
            assert min_gaps(state) >= -1e-3
            assert np.all(state.object_pos >= task.object_radius - 1e-12)
            assert np.all(state.object_pos <= 1.0 - task.object_radius + 1e-12)

    @pytest.mark.parametrize('variant', ['plain', 'small_table', 'ordered_push'])
    def test_zero_action_is_a_fixed_point(self, variant):
        task = TaskConfig(n_objects=4, variant=variant, corridor_depth=0.4)
        rng = np.random.default_rng(17)
        zero = np.zeros(2)
        for _ in range(10):
            state, _ = reset(task, rng)
            # head for an object, then sweep everything into a corner so that contacts jam
            target = state.object_pos[int(rng.integers(task.n_objects))]
            corner = state.bounds[int(rng.integers(2))]
            for t in range(100):
                if t == 40:
                    target = corner
                heading = np.clip(target - state.agent_pos, -task.a_max, task.a_max)
                state = step(state, heading + rng.uniform(-0.02, 0.02, size=2))
                held = step(state, zero)
                np.testing.assert_allclose(held.agent_pos, state.agent_pos, rtol=0, atol=1e-8)
                np.testing.assert_allclose(held.object_pos, state.object_pos, rtol=0, atol=1e-8)


class TestReward:
    def test_gt_reward_is_negative_mean_distance(self):
        task = TaskConfig(n_objects=2, norm_constant=2.0)
        state = free_state([0.5, 0.5], [[0.1, 0.1], [0.9, 0.9]], codes=[3, 1])
        goal = GoalConfig(np.array([[0.9, 0.6], [0.1, 0.4]]), (1, 3))
        # object code 3 -> goal 1 at distance 0.3, code 1 -> goal 0 at 0.3
        assert gt_reward(state, goal, task) == pytest.approx(-0.15)
        assert goal_reward(state.achieved_goal(), state.achieved_goal(), task) == 0.0

    def test_mismatched_codes(self):
        with pytest.raises(GoalMismatchError):
            match_goals((0, 1), (0, 2))
        with pytest.raises(GoalMismatchError):
            match_goals((0, 0), (0, 0))

    def test_episode_metrics(self):
        task = TaskConfig(n_objects=2)
        goal = GoalConfig(np.array([[0.2, 0.2], [0.8, 0.8]]), (0, 1))
        final = free_state([0.5, 0.5], [[0.2, 0.21], [0.6, 0.8]])
        trajectory = [TrajectoryStep(0, final, np.zeros(2), -0.2), TrajectoryStep(1, final, np.zeros(2), -0.1)]
        metrics = episode_metrics(trajectory, goal, task).as_dict()
        assert metrics['success'] == 0
        assert metrics['success_fraction'] == 0.5
        assert metrics['max_obj_dist'] == pytest.approx(0.2)
        assert metrics['avg_obj_dist'] == pytest.approx(0.105)
        assert metrics['avg_return'] == pytest.approx(-0.15)
        assert trajectory_records(trajectory)[1]['object_pos'] == [[0.2, 0.21], [0.6, 0.8]]

    def test_episode_metrics_needs_steps(self):
        with pytest.raises(EntityError):
            episode_metrics([], GoalConfig(np.array([[0.2, 0.2]]), (0,)), TaskConfig())


class TestGeometry:
    def test_push_out_of_rect(self):
        moved = push_out_of_rect(np.array([0.48, 0.5]), 0.04, np.array([0.5, 0.0]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(moved, [0.46, 0.5])
        inside = push_out_of_rect(np.array([0.52, 0.5]), 0.04, np.array([0.5, 0.0]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(inside, [0.46, 0.5])

    def test_corridor_walls_flank_the_opening(self):
        corridor = Corridor(x_lo=0.45, x_hi=0.55, mouth=0.7, top=1.0)
        (left_lo, left_hi), (right_lo, right_hi) = corridor.walls(np.zeros(2), np.ones(2))
        np.testing.assert_allclose([left_hi[0], right_lo[0]], [0.45, 0.55])
        assert corridor.contains([0.5, 0.8]) and not corridor.contains([0.5, 0.6])

    def test_placement_gives_up(self):
        occupied = [(np.array([0.5, 0.5]), 0.5)]
        with pytest.raises(PlacementError):
            sample_free_position(0.1, np.zeros(2), np.ones(2), np.random.default_rng(7), occupied, max_attempts=50)


class TestGymEnv:
    def test_reset_and_step(self):
        task = TaskConfig(n_objects=2, horizon=3)
        env = TabletopEnv(task)
        obs, info = env.reset(seed=11)
        assert obs['observation'].shape == (6,)
        assert obs['achieved_goal'].shape == obs['desired_goal'].shape == (4,)
        assert env.observation_space.contains(obs)
        truncated = False
        for t in range(task.horizon):
            obs, reward, terminated, truncated, info = env.step(env.action_space.sample())
            assert not terminated
            assert reward <= 0.0
            assert reward == pytest.approx(env.compute_reward(obs['achieved_goal'], obs['desired_goal'], info))
        assert truncated

    def test_same_seed_same_scene(self):
        task = TaskConfig(n_objects=2)
        first, _ = TabletopEnv(task).reset(seed=5)
        second, _ = TabletopEnv(task).reset(seed=5)
        for key in first:
            np.testing.assert_array_equal(first[key], second[key])
