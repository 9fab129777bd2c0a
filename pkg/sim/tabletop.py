# -*- coding: UTF-8 -*-

"""
 *
 *    Particle Push - entity-centric goal-conditioned RL on a planar push table
 *
 *    Copyright (C) 2026 Particle Push contributors
 *
 *    This program is free software: you can redistribute it and/or modify
 *    it under the terms of the GNU General Public License as published by
 *    the Free Software Foundation, either version 3 of the License, or
 *    any later version.
 *
 *    This program is distributed in the hope that it will be useful,
 *    but WITHOUT ANY WARRANTY; without even the implied warranty of
 *    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
 *    GNU General Public License for more details.
 *
 *    You should have received a copy of the GNU General Public License
 *    along with this program.  If not, see <https://www.gnu.org/licenses/>.
 *
 */
"""


import logging
import importlib
import numpy as np
from collections import Counter, defaultdict
from dataclasses import dataclass, replace

from errors import GoalMismatchError, ConfigError, EntityError
from sim.geometry import Corridor, push_out_of_rect, sample_free_position
from communication.writer import write_jsonl

log = logging.getLogger('particle-push')

VARIANTS = ('plain', 'adjacent_goals', 'small_table', 'ordered_push', 'sorting')
DEFAULT_HORIZONS = {1: 30, 2: 50, 3: 100}


def default_horizon(n_objects):
    if n_objects in DEFAULT_HORIZONS:
        return DEFAULT_HORIZONS[n_objects]
    return 100 + 50 * (n_objects - 3)


@dataclass
class TaskConfig:
    n_objects: int = 1
    variant: str = 'plain'
    horizon: int = None               # None: 30/50/100 for 1/2/3 objects
    object_radius: float = 0.04       # scene units
    agent_radius: float = 0.03
    success_radius: float = None      # None: equal to object_radius
    norm_constant: float = 1.0        # L, table side length
    a_max: float = 0.05
    table_size: float = 1.0
    small_table_scale: float = 0.6
    adjacent_gap: float = 0.01
    corridor_width: float = None      # None: 2.2 r
    corridor_depth: float = 0.3
    n_goals: int = None               # sorting only, X goals for 4X objects
    sort_radius: float = None         # None: 3 r
    max_placement_attempts: int = 1000
    overlap_iterations: int = 200     # hard cap on contact sweeps per step
    overlap_tol: float = 1e-9

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError('unknown task variant %r, expected one of %s' % (self.variant, ', '.join(VARIANTS)))
        if self.n_objects < 1:
            raise ConfigError('n_objects must be at least 1')
        if self.variant == 'sorting':
            if self.n_goals is None:
                self.n_goals = max(1, self.n_objects // 4)
            if self.n_goals < 1 or self.n_objects < self.n_goals:
                raise ConfigError('sorting needs at least one object per goal')
        if self.horizon is None:
            self.horizon = default_horizon(self.n_objects)
        if self.success_radius is None:
            self.success_radius = self.object_radius
        if self.corridor_width is None:
            self.corridor_width = 2.2 * self.object_radius
        if self.sort_radius is None:
            self.sort_radius = 3.0 * self.object_radius
        if self.success_radius <= 0 or self.horizon < 1:
            raise ConfigError('success_radius and horizon must be positive')


@dataclass(frozen=True, eq=False)
class GoalConfig:
    goal_pos: np.ndarray
    goal_code: tuple

    def as_dict(self):
        return {'goal_pos': self.goal_pos.tolist(), 'goal_code': list(self.goal_code)}


@dataclass(frozen=True, eq=False)
class SimState:
    agent_pos: np.ndarray
    object_pos: np.ndarray
    object_code: tuple
    bounds: np.ndarray                # [[x_lo, y_lo], [x_hi, y_hi]]
    corridor: Corridor = None
    step_count: int = 0
    object_radius: float = 0.04
    agent_radius: float = 0.03
    a_max: float = 0.05
    overlap_iterations: int = 200
    overlap_tol: float = 1e-9

    @property
    def n_objects(self):
        return len(self.object_pos)

    def walls(self):
        if self.corridor is None:
            return ()
        return self.corridor.walls(self.bounds[0], self.bounds[1])

    def achieved_goal(self):
        return GoalConfig(self.object_pos.copy(), tuple(self.object_code))


@dataclass(frozen=True)
class Metrics:
    success: int
    success_fraction: float
    max_obj_dist: float
    avg_obj_dist: float
    avg_return: float

    def as_dict(self):
        return {'success': self.success, 'success_fraction': self.success_fraction,
                'max_obj_dist': self.max_obj_dist, 'avg_obj_dist': self.avg_obj_dist,
                'avg_return': self.avg_return}


@dataclass(frozen=True, eq=False)
class TrajectoryStep:
    t: int
    state: SimState
    action: np.ndarray
    reward: float


def load_task(variant):
    task = importlib.import_module('tasks.' + variant)
    log.debug('Task Loaded: %s', task.get_version())
    return task


def reset(cfg, rng):
    """Fresh scene and goal for the configured task variant."""
    task = load_task(cfg.variant)
    lo, hi = task.workspace(cfg)
    corridor = task.corridor(cfg, lo, hi)
    walls = corridor.walls(lo, hi) if corridor is not None else ()
    colors = task.object_colors(cfg) if hasattr(task, 'object_colors') else list(range(cfg.n_objects))
    region = None
    if corridor is not None:
        # objects and agent start below the corridor mouth
        region = (lo, np.array([hi[0], corridor.mouth - cfg.object_radius]))

    occupied = []
    objects = []
    for _ in range(cfg.n_objects):
        position = sample_free_position(cfg.object_radius, lo, hi, rng, occupied, walls,
                                        max_attempts=cfg.max_placement_attempts, region=region)
        occupied.append((position, cfg.object_radius))
        objects.append(position)
    agent = sample_free_position(cfg.agent_radius, lo, hi, rng, occupied, walls,
                                 max_attempts=cfg.max_placement_attempts, region=region)

    goal_pos, goal_code = task.sample_goals(cfg, lo, hi, corridor, rng, colors)
    state = SimState(agent_pos=agent, object_pos=np.array(objects).reshape(cfg.n_objects, 2),
                     object_code=tuple(int(c) for c in colors), bounds=np.stack([lo, hi]),
                     corridor=corridor, step_count=0, object_radius=cfg.object_radius,
                     agent_radius=cfg.agent_radius, a_max=cfg.a_max,
                     overlap_iterations=cfg.overlap_iterations, overlap_tol=cfg.overlap_tol)
    goal = GoalConfig(np.asarray(goal_pos, dtype=np.float64).reshape(-1, 2), tuple(int(c) for c in goal_code))
    return state, goal


def _contain(center, radius, lo, hi, walls):
    for w_lo, w_hi in walls:
        center = push_out_of_rect(center, radius, w_lo, w_hi)
    return np.clip(center, lo + radius, hi - radius)


def _separate(mover, anchor, distance, tol):
    """Translation that pushes `mover` to `distance` from `anchor`, or None."""
    offset = mover - anchor
    gap = float(np.hypot(offset[0], offset[1]))
    depth = distance - gap
    if depth <= tol:
        return None
    normal = offset / gap if gap > 0 else np.array([1.0, 0.0])
    return normal * depth


def step(s, a):
    """Advance one kinematic push step. Pure: returns a new SimState.

    Each contact sweep lets the agent push objects, separates objects pairwise, holds everything inside
    the walls and then backs the agent out of whatever it still overlaps. Sweeps repeat until none moves
    anything by more than overlap_tol, capped at overlap_iterations.
    """
    a = np.clip(np.asarray(a, dtype=np.float64), -s.a_max, s.a_max)
    lo, hi = s.bounds
    walls = s.walls()
    r, ra, tol = s.object_radius, s.agent_radius, s.overlap_tol

    agent = _contain(s.agent_pos + a, ra, lo, hi, walls)
    objects = s.object_pos.copy()
    n = len(objects)

    for _ in range(s.overlap_iterations):
        agent_before, objects_before = agent, objects.copy()
        for i in range(n):
            push = _separate(objects[i], agent, r + ra, tol)
            if push is not None:
                objects[i] = objects[i] + push
        for i in range(n):
            for j in range(i + 1, n):
                push = _separate(objects[j], objects[i], 2 * r, tol)
                if push is not None:
                    objects[i] = objects[i] - 0.5 * push
                    objects[j] = objects[j] + 0.5 * push
        for i in range(n):
            objects[i] = _contain(objects[i], r, lo, hi, walls)
        # Objects held by walls or neighbours stop the agent in contact
        for i in range(n):
            push = _separate(agent, objects[i], r + ra, tol)
            if push is not None:
                agent = _contain(agent + push, ra, lo, hi, walls)
        moved = max(np.max(np.abs(objects - objects_before)), np.max(np.abs(agent - agent_before)))
        if moved <= tol:
            break
    else:
        log.debug('Contacts unresolved after %d sweeps at step %d', s.overlap_iterations, s.step_count)

    return replace(s, agent_pos=agent, object_pos=objects, step_count=s.step_count + 1)


def match_goals(object_code, goal_code, variant='plain'):
    """Goal index for every object, matched by feature code.

    When several goals share a code, the k-th object carrying it (in entity id order) takes the k-th
    such goal, wrapping around when there are fewer goals than objects of that code.
    """
    object_code, goal_code = list(object_code), list(goal_code)
    if variant != 'sorting':
        if len(object_code) != len(goal_code) or sorted(object_code) != sorted(goal_code):
            raise GoalMismatchError('object codes %s do not match goal codes %s 1:1' % (object_code, goal_code))
        if len(set(goal_code)) != len(goal_code):
            raise GoalMismatchError('goal codes must be distinct outside the sorting task')
    slots = defaultdict(list)
    for index, code in enumerate(goal_code):
        slots[code].append(index)
    taken = Counter()
    matched = []
    for code in object_code:
        if code not in slots:
            raise GoalMismatchError('no goal carries code %s' % code)
        matched.append(slots[code][taken[code] % len(slots[code])])
        taken[code] += 1
    return np.array(matched, dtype=np.int64)


def object_distances(object_pos, object_code, g, variant='plain'):
    index = match_goals(object_code, g.goal_code, variant)
    return np.linalg.norm(np.asarray(g.goal_pos)[index] - np.asarray(object_pos), axis=1)


def goal_reward(achieved, desired, cfg):
    """GT reward between an achieved object layout and a desired goal."""
    return -float(np.mean(object_distances(achieved.goal_pos, achieved.goal_code, desired, cfg.variant))) \
        / cfg.norm_constant


def gt_reward(s, g, cfg):
    return goal_reward(s.achieved_goal(), g, cfg)


def episode_metrics(trajectory, g, cfg):
    if not trajectory:
        raise EntityError('episode_metrics needs a non-empty trajectory')
    final = trajectory[-1].state
    radius = cfg.sort_radius if cfg.variant == 'sorting' else cfg.success_radius
    distances = object_distances(final.object_pos, final.object_code, g, cfg.variant)
    reached = distances < radius
    return Metrics(success=int(reached.all()),
                   success_fraction=float(reached.mean()),
                   max_obj_dist=float(distances.max()),
                   avg_obj_dist=float(distances.mean()),
                   avg_return=float(np.mean([s.reward for s in trajectory])))


def trajectory_records(trajectory):
    return [{'t': int(s.t), 'agent_pos': s.state.agent_pos.tolist(), 'object_pos': s.state.object_pos.tolist(),
             'action': np.asarray(s.action, dtype=np.float64).tolist(), 'reward': float(s.reward)}
            for s in trajectory]


def dump_trajectory(trajectory, file_name):
    write_jsonl(file_name, trajectory_records(trajectory))
    log.debug('Trajectory with %d steps written to %s', len(trajectory), file_name)
