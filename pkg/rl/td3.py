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
import numpy as np
from collections import OrderedDict
from dataclasses import dataclass

from errors import ConfigError, DivergenceError
from nets.layers import as_parameters, as_constants, collect_grads, count_parameters
from nets.network import init_network, make_batch, policy_forward, q_forward
from rl.optim import Adam

log = logging.getLogger('particle-push')


@dataclass
class TrainConfig:
    lr: float = 5e-4
    batch_size: int = 512
    gamma: float = 0.98
    tau: float = 0.05
    episodes_per_loop: int = 16
    update_to_data: float = 0.5      # gradient updates per environment step
    her_ratio: float = 0.8
    noise_sigma: float = 0.2         # relative to a_max
    epsilon: float = 0.3
    buffer_size: int = 100000
    policy_delay: int = 2
    target_noise: float = 0.2        # relative to a_max
    noise_clip: float = 0.5          # relative to a_max
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    total_env_steps: int = 200000
    eval_interval: int = 10000
    eval_goals: int = 96
    checkpoint_interval: int = 50000
    divergence_threshold: float = 1e6
    divergence_windows: int = 3

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError('gamma must lie in (0, 1)')
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError('tau must lie in (0, 1]')
        if not 0.0 <= self.her_ratio <= 1.0:
            raise ConfigError('her_ratio must lie in [0, 1]')
        if self.batch_size < 1 or self.episodes_per_loop < 1 or self.policy_delay < 1:
            raise ConfigError('batch_size, episodes_per_loop and policy_delay must be positive')


@dataclass(frozen=True, eq=False)
class TransitionBatch:
    batch: object
    next_batch: object
    actions: np.ndarray
    rewards: np.ndarray

    def __len__(self):
        return len(self.rewards)


def collate(transitions, net_cfg):
    return TransitionBatch(batch=make_batch([t.obs for t in transitions], net_cfg),
                           next_batch=make_batch([t.next_obs for t in transitions], net_cfg),
                           actions=np.stack([np.asarray(t.action, dtype=np.float64) for t in transitions]),
                           rewards=np.array([t.reward for t in transitions], dtype=np.float64))


class Agent:
    """Actor, twin critics, their targets and optimizers."""

    def __init__(self, net_cfg, train_cfg, rng):
        self.net = net_cfg
        self.actor = init_network(net_cfg, rng, 'policy')
        self.critic1 = init_network(net_cfg, rng, 'q')
        self.critic2 = init_network(net_cfg, rng, 'q')
        self.actor_target = copy_params(self.actor)
        self.critic1_target = copy_params(self.critic1)
        self.critic2_target = copy_params(self.critic2)
        betas = (train_cfg.adam_beta1, train_cfg.adam_beta2)
        self.actor_optim = Adam(self.actor, train_cfg.lr, betas)
        self.critic1_optim = Adam(self.critic1, train_cfg.lr, betas)
        self.critic2_optim = Adam(self.critic2, train_cfg.lr, betas)
        self.updates = 0
        log.debug('Agent: %s actor with %d parameters, critics with %d each', net_cfg.kind,
                  count_parameters(self.actor), count_parameters(self.critic1))

    def groups(self):
        return OrderedDict([('actor', self.actor), ('critic1', self.critic1), ('critic2', self.critic2),
                            ('actor_target', self.actor_target), ('critic1_target', self.critic1_target),
                            ('critic2_target', self.critic2_target)])

    def load_groups(self, groups):
        for name in self.groups():
            if name in groups:
                setattr(self, name, OrderedDict(groups[name]))

    def act(self, observations):
        batch = make_batch(observations, self.net)
        return policy_forward(as_constants(self.actor), batch, self.net).value


def copy_params(params):
    return OrderedDict((name, value.copy()) for name, value in params.items())


def target_actions(batch, target_policy, net_cfg, target_noise, noise_clip, rng):
    """Smoothed target action: clip(pi'(s') + clip(noise)) inside the action box."""
    actions = policy_forward(as_constants(target_policy), batch, net_cfg).value
    a_max = net_cfg.a_max
    noise = np.clip(rng.normal(0.0, target_noise * a_max, size=actions.shape),
                    -noise_clip * a_max, noise_clip * a_max)
    return np.clip(actions + noise, -a_max, a_max)


def td_targets(tb, target_q, target_policy, gamma, net_cfg, target_noise, noise_clip, rng):
    next_actions = target_actions(tb.next_batch, target_policy, net_cfg, target_noise, noise_clip, rng)
    q1 = q_forward(as_constants(target_q[0]), tb.next_batch, next_actions, net_cfg).value
    q2 = q_forward(as_constants(target_q[1]), tb.next_batch, next_actions, net_cfg).value
    # Time-limit ends are not absorbing, the target always bootstraps
    return tb.rewards + gamma * np.minimum(q1, q2)


def critic_loss(tb, online_q, target_q, target_policy, gamma, net_cfg, target_noise=0.2, noise_clip=0.5, rng=None):
    """Mean squared TD error summed over both critics.

    Returns (loss, (grads_critic1, grads_critic2)).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    y = td_targets(tb, target_q, target_policy, gamma, net_cfg, target_noise, noise_clip, rng)
    if not np.all(np.isfinite(y)):
        raise DivergenceError('non-finite TD target (reward or target critic diverged)')
    total = 0.0
    grads = []
    for params in online_q:
        leaves = as_parameters(params)
        error = q_forward(leaves, tb.batch, tb.actions, net_cfg) - y
        loss = (error * error).mean()
        loss.backward()
        total += float(loss.value)
        grads.append(collect_grads(leaves))
    return total, tuple(grads)


def actor_loss(tb, online_q, policy, net_cfg, q_fn=None):
    """-mean Q1(s, pi(s)); gradients reach the policy through the action entity.

    q_fn(batch, action_tensor) replaces the critic when given.
    """
    leaves = as_parameters(policy)
    action = policy_forward(leaves, tb.batch, net_cfg)
    if q_fn is None:
        q = q_forward(as_constants(online_q), tb.batch, action, net_cfg)
    else:
        q = q_fn(tb.batch, action)
    loss = -q.mean()
    loss.backward()
    return float(loss.value), collect_grads(leaves)


def polyak_update(target, online, tau):
    if list(target) != list(online):
        raise ConfigError('target and online parameters hold different tensors')
    updated = OrderedDict()
    for name, value in online.items():
        if target[name].shape != value.shape:
            raise ConfigError('shape mismatch for %s: %s vs %s' % (name, target[name].shape, value.shape))
        updated[name] = tau * value + (1.0 - tau) * target[name]
    return updated


def exploration_schedule(progress, sigma0, epsilon0):
    """Noise scale and random-action rate, decaying linearly to half."""
    progress = min(max(float(progress), 0.0), 1.0)
    scale = 1.0 - progress / 2.0
    return sigma0 * scale, epsilon0 * scale


def explore_action(policy_action, progress, sigma0, epsilon0, rng, action_space):
    """Epsilon-greedy uniform action, otherwise Gaussian-perturbed policy action.

    sigma is relative to the half-width of the action box.
    """
    sigma, epsilon = exploration_schedule(progress, sigma0, epsilon0)
    low, high = np.asarray(action_space.low, dtype=np.float64), np.asarray(action_space.high, dtype=np.float64)
    if rng.random() < epsilon:
        return rng.uniform(low, high)
    action = np.asarray(policy_action, dtype=np.float64)
    if sigma > 0:
        action = action + rng.normal(0.0, sigma * (high - low) / 2.0, size=action.shape)
    return np.clip(action, low, high)


def update(agent, tb, cfg, rng):
    """One critic step, plus a delayed actor step and target update.

    Returns (critic_loss, actor_loss or None).
    """
    closs, (g1, g2) = critic_loss(tb, (agent.critic1, agent.critic2), (agent.critic1_target, agent.critic2_target),
                                  agent.actor_target, cfg.gamma, agent.net, cfg.target_noise, cfg.noise_clip, rng)
    agent.critic1_optim.step(agent.critic1, g1)
    agent.critic2_optim.step(agent.critic2, g2)
    agent.updates += 1

    aloss = None
    if agent.updates % cfg.policy_delay == 0:
        aloss, grads = actor_loss(tb, agent.critic1, agent.actor, agent.net)
        agent.actor_optim.step(agent.actor, grads)
        agent.actor_target = polyak_update(agent.actor_target, agent.actor, cfg.tau)
        agent.critic1_target = polyak_update(agent.critic1_target, agent.critic1, cfg.tau)
        agent.critic2_target = polyak_update(agent.critic2_target, agent.critic2, cfg.tau)
    return closs, aloss
