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


import time
import logging
import numpy as np

from errors import DivergenceError
from entities.particle import Observation
from sim.tabletop import TrajectoryStep, episode_metrics, dump_trajectory
from rl.replay import Transition, Relabeler, ReplayBuffer
from rl.td3 import collate, explore_action, update

log = logging.getLogger('particle-push')

METRIC_KEYS = ('success', 'success_fraction', 'max_obj_dist', 'avg_obj_dist', 'avg_return')


def run_episode(env, agent, encoder, reward_fn, rng, progress=None, train_cfg=None, seed=None):
    """Roll one episode. Exploration is on when progress is given.

    Returns (transitions, trajectory) where the trajectory records GT rewards.
    """
    _, info = env.reset(seed=int(rng.integers(2 ** 31)) if seed is None else seed)
    goal = info['goal']
    goal_sets = encoder.encode_goal(goal, rng)
    obs = Observation(encoder.encode_state(env.state, rng), goal_sets)
    transitions, trajectory = [], []
    for t in range(env.cfg.horizon):
        action = agent.act([obs])[0]
        if progress is not None:
            action = explore_action(action, progress, train_cfg.noise_sigma, train_cfg.epsilon, rng,
                                    env.action_space)
        _, gt, _, truncated, _ = env.step(action)
        next_obs = Observation(encoder.encode_state(env.state, rng), goal_sets)
        achieved = env.state.achieved_goal()
        reward = gt if reward_fn is None or reward_fn.kind == 'gt' else float(reward_fn(achieved, goal, next_obs))
        transitions.append(Transition(obs=obs, action=np.asarray(action, dtype=np.float64), next_obs=next_obs,
                                      achieved_goal=achieved, desired_goal=goal, reward=reward, t=t,
                                      done_by_horizon=bool(truncated)))
        trajectory.append(TrajectoryStep(t=t, state=env.state, action=np.asarray(action), reward=gt))
        obs = next_obs
        if truncated:
            break
    return transitions, trajectory


def evaluate(env, agent, encoder, n_episodes, seed, dump_file=None):
    """Greedy rollouts on a fixed goal sample, averaged metrics.

    With dump_file set the first episode's trajectory is written there.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for episode in range(n_episodes):
        _, trajectory = run_episode(env, agent, encoder, None, rng)
        if episode == 0 and dump_file is not None:
            dump_trajectory(trajectory, dump_file)
        rows.append(episode_metrics(trajectory, env.goal, env.cfg).as_dict())
    return {key: float(np.mean([row[key] for row in rows])) for key in METRIC_KEYS}


class DivergenceGuard:
    """Trips after `windows` consecutive loops with mean critic loss above threshold."""

    def __init__(self, threshold, windows):
        self.threshold = threshold
        self.windows = windows
        self.strikes = 0

    def observe(self, critic_loss):
        if critic_loss is None:
            return
        if not np.isfinite(critic_loss) or critic_loss > self.threshold:
            self.strikes += 1
        else:
            self.strikes = 0
        if self.strikes >= self.windows:
            raise DivergenceError('critic loss %.4g above %.4g for %d consecutive loops'
                                  % (critic_loss, self.threshold, self.strikes))


def _mean(values):
    return float(np.mean(values)) if values else None


def train_loop(env, eval_env, encoder, reward_fn, cfg, rng, agent, metrics_stream=None,
               checkpoint_fn=None, killer=None, eval_seed=0):
    """TD3 + HER training until cfg.total_env_steps environment steps.

    Metric records go to metrics_stream (anything with write(dict));
    checkpoint_fn(agent, env_steps) is called on schedule and at the end.
    """
    buffer = ReplayBuffer(cfg.buffer_size)
    relabeler = Relabeler(encoder, reward_fn)
    guard = DivergenceGuard(cfg.divergence_threshold, cfg.divergence_windows)
    records = []
    env_steps = 0
    next_eval = cfg.eval_interval
    next_checkpoint = cfg.checkpoint_interval
    loop = 0

    while env_steps < cfg.total_env_steps:
        start_time = time.time()
        collected = 0
        for _ in range(cfg.episodes_per_loop):
            progress = env_steps / cfg.total_env_steps
            episode, _ = run_episode(env, agent, encoder, reward_fn, rng, progress, cfg)
            buffer.add_episode(episode)
            collected += len(episode)
            env_steps += len(episode)

        critic_losses, actor_losses = [], []
        for _ in range(int(cfg.update_to_data * collected)):
            batch = collate(buffer.sample(min(cfg.batch_size, len(buffer)), rng, cfg.her_ratio, relabeler), agent.net)
            closs, aloss = update(agent, batch, cfg, rng)
            critic_losses.append(closs)
            if aloss is not None:
                actor_losses.append(aloss)
        guard.observe(_mean(critic_losses))
        loop += 1
        log.debug('Loop %d: %d env steps, %d updates, critic loss %s (%.2f s)', loop, env_steps,
                  len(critic_losses), _mean(critic_losses), time.time() - start_time)

        finished = env_steps >= cfg.total_env_steps
        stopping = killer is not None and killer.kill_now
        if env_steps >= next_eval or finished or stopping:
            record = {'env_steps': env_steps, 'critic_loss': _mean(critic_losses), 'actor_loss': _mean(actor_losses)}
            metrics = evaluate(eval_env, agent, encoder, cfg.eval_goals, eval_seed)
            record['success_rate'] = metrics.pop('success')
            record.update(metrics)
            records.append(record)
            if metrics_stream is not None:
                metrics_stream.write(record)
            log.info('Eval at %d env steps: success %.3f, avg return %.4f', env_steps,
                     record['success_rate'], record['avg_return'])
            while next_eval <= env_steps:
                next_eval += cfg.eval_interval
        if checkpoint_fn is not None and (env_steps >= next_checkpoint or finished or stopping):
            checkpoint_fn(agent, env_steps)
            while next_checkpoint <= env_steps:
                next_checkpoint += cfg.checkpoint_interval
        if stopping:
            log.warning('Training stopped by signal at %d env steps', env_steps)
            break

    return agent, records
