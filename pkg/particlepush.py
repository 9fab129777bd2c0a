#!/usr/bin/env python3
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

import os
import sys
import time
import yaml
import graypy
import signal
import logging
import argparse
import numpy as np

from os import path
from dataclasses import asdict, fields, replace
from scipy.stats import linregress, spearmanr

import settings
from errors import (ParticlePushError, ConfigError, PlacementError, PremiseError, DivergenceError,
                    CheckpointError, EntityError)
from entities.particle import Observation
from sim.tabletop import TaskConfig
from sim.gym_env import TabletopEnv
from nets.eit import NetConfig
from nets.checkpoint import save_checkpoint, load_checkpoint
from setdist.reward import RewardContext, RewardFunction
from rl.td3 import Agent
from rl.trainer import train_loop, evaluate
from theory.certify import theorem_sweep, deepsets_sweep, counterexample_sweep, total_violations
from theory.lemmas import lemma_suite
from communication.writer import JsonlStream, write_json, write_csv, get_host_internals

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_REFUSED = 4

cwd = os.path.dirname(os.path.abspath(__file__))
log = logging.getLogger('particle-push')
start_time = time.time()

EVAL_HEADER = ('n_objects', 'variant', 'episodes', 'success_rate', 'success_fraction', 'max_obj_dist',
               'avg_obj_dist', 'avg_return')
AUDIT_HEADER = ('episode', 't', 'gt_reward', 'chamfer_reward', 'smorl_reward', 'chamfer_reward_occluded')
THEORY_REPORTS = ('theorem1', 'theorem3', 'deepsets', 'counterexample', 'lemmas')


def resolve_config(file_name):
    # Bare names are looked up in the bundled config directory
    if path.exists(file_name):
        return file_name
    bundled = path.join(cwd, 'config', file_name)
    return bundled if path.exists(bundled) else file_name


def checkpoint_meta(cfg, env_steps):
    return {'net': asdict(cfg.net), 'views': asdict(cfg.views), 'seed': cfg.seed, 'env_steps': env_steps,
            'task': {'n_objects': cfg.task.n_objects, 'variant': cfg.task.variant}}


def cmd_train(cfg, killer=None):
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    encoder = cfg.encoder()
    env = TabletopEnv(cfg.task, seed=cfg.seed)
    eval_env = TabletopEnv(cfg.task, seed=cfg.seed + 1)
    reward_fn = RewardFunction(RewardContext(cfg.reward, cfg.task, encoder))
    agent = Agent(cfg.net, cfg.train, rng)
    log.info('Training %s agent on %d object(s), variant %s, reward %s, %d env steps', cfg.net.kind,
             cfg.task.n_objects, cfg.task.variant, cfg.reward.kind, cfg.train.total_env_steps)

    checkpoint_dir = path.join(out, 'checkpoints')

    def checkpoint_fn(agent, env_steps):
        meta = checkpoint_meta(cfg, env_steps)
        save_checkpoint(path.join(checkpoint_dir, 'step_%08d.ckpt' % env_steps), agent.groups(), meta)
        save_checkpoint(path.join(checkpoint_dir, 'last.ckpt'), agent.groups(), meta)

    with JsonlStream(path.join(out, 'metrics.jsonl')) as stream:
        agent, records = train_loop(env, eval_env, encoder, reward_fn, cfg.train, rng, agent,
                                    metrics_stream=stream, checkpoint_fn=checkpoint_fn, killer=killer,
                                    eval_seed=cfg.seed + cfg.eval.seed_offset)

    summary = {
        'command': 'train',
        'seed': cfg.seed,
        'env_steps': records[-1]['env_steps'] if records else 0,
        'evaluations': len(records),
        'final': records[-1] if records else None,
        'stopped': bool(killer is not None and killer.kill_now),
        'checkpoint': 'checkpoints/last.ckpt',
        'net': cfg.net.kind,
        'reward': cfg.reward.kind,
        'n_objects': cfg.task.n_objects,
    }
    write_json(path.join(out, 'summary.json'), summary)
    # Host figures go to the log only so reruns write identical files
    log.info('Host internals: %s', dict(get_host_internals()))
    return EXIT_OK


def eval_task(cfg, n_objects, variant):
    values = {f.name: getattr(cfg.task, f.name) for f in fields(cfg.task)}
    values.update({'n_objects': n_objects, 'variant': variant, 'horizon': None, 'n_goals': None})
    return TaskConfig(**values)


def check_structure(net_cfg, tasks):
    """The concatenating baseline only runs on the entity counts it was trained on."""
    if net_cfg.kind != 'unstructured':
        return
    for task in tasks:
        n_goals = task.n_goals if task.variant == 'sorting' else task.n_objects
        if task.n_objects != net_cfg.n_objects or n_goals != net_cfg.n_goals:
            raise EntityError('unstructured checkpoint trained on %d objects / %d goals cannot run %d objects / '
                              '%d goals' % (net_cfg.n_objects, net_cfg.n_goals, task.n_objects, n_goals))


def generalization_fit(rows):
    """Linear fit of avg_return against N plus the monotonicity flag."""
    rows = [row for row in rows if row['variant'] != 'sorting']
    counts = [row['n_objects'] for row in rows]
    returns = [row['avg_return'] for row in rows]
    monotone = bool(all(b <= a for a, b in zip(returns, returns[1:])))
    if len(set(counts)) < 2:
        return {'slope': None, 'intercept': None, 'r_squared': None, 'monotone_non_increasing': monotone}
    fit = linregress(counts, returns)
    r_squared = float(fit.rvalue ** 2) if np.isfinite(fit.rvalue) else None
    return {'slope': float(fit.slope), 'intercept': float(fit.intercept), 'r_squared': r_squared,
            'monotone_non_increasing': monotone}


def cmd_eval(cfg, checkpoint, n_objects=None):
    if checkpoint is None:
        raise ConfigError('eval needs --checkpoint')
    groups, meta = load_checkpoint(checkpoint)
    try:
        net_cfg = NetConfig(**meta['net'])
        views = settings.ViewsConfig(**meta['views'])
    except (KeyError, TypeError) as e:
        raise CheckpointError('%s: incomplete metadata: %s' % (checkpoint, e))

    counts = [n_objects] if n_objects is not None else sorted(cfg.eval.n_objects)
    tasks = [eval_task(cfg, n, cfg.task.variant) for n in counts]
    if cfg.eval.sorting:
        tasks.append(eval_task(cfg, cfg.eval.sorting_objects, 'sorting'))
    check_structure(net_cfg, tasks)

    agent = Agent(net_cfg, cfg.train, np.random.default_rng(cfg.seed))
    agent.load_groups(groups)
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    rows = []
    for task in tasks:
        task_start = time.time()
        encoder = views.build(task)
        env = TabletopEnv(task, seed=cfg.seed)
        dump_file = None
        if cfg.eval.dump_trajectory:
            dump_file = path.join(out, 'trajectories', '%s_%d.jsonl' % (task.variant, task.n_objects))
        metrics = evaluate(env, agent, encoder, cfg.eval.episodes, cfg.seed + cfg.eval.seed_offset, dump_file)
        row = {'n_objects': task.n_objects, 'variant': task.variant, 'episodes': cfg.eval.episodes,
               'success_rate': metrics.pop('success')}
        row.update(metrics)
        rows.append(row)
        log.info('Eval %s N=%d: success %.3f, avg return %.4f (%.2f s)', task.variant, task.n_objects,
                 row['success_rate'], row['avg_return'], time.time() - task_start)

    report = {'checkpoint': path.basename(checkpoint), 'net': net_cfg.kind, 'rows': rows,
              'fit': generalization_fit(rows)}
    write_json(path.join(out, 'eval.json'), report)
    write_csv(path.join(out, 'eval.csv'), EVAL_HEADER, rows)
    return EXIT_OK


def cmd_verify_theory(cfg):
    theory = cfg.theory
    rng = np.random.default_rng(cfg.seed)
    out = cfg.output_dir
    log.info('Theory certification: M in %s, gamma in %s, epsilon %g, delta %g, lambda %g%s', theory.M_values,
             theory.gammas, theory.epsilon, theory.delta, theory.lam, ' (fault injection)' if theory.fault else '')
    reports = {
        'theorem1': theorem_sweep(theory, rng, 'theorem1'),
        'theorem3': theorem_sweep(theory, rng, 'theorem3'),
        'deepsets': deepsets_sweep(theory, rng),
        'counterexample': counterexample_sweep(theory, rng),
        'lemmas': lemma_suite(theory.lemma_trials, rng),
    }
    failed = []
    for name in THEORY_REPORTS:
        file_name = path.join(out, name + '.json')
        violations = total_violations(reports[name])
        write_json(file_name, {'report': name, 'seed': cfg.seed, 'fault': theory.fault,
                               'violations': violations, 'rows': reports[name]})
        if violations:
            failed.append(file_name)
            log.error('Theory report %s: %d violation(s), see %s', name, violations, file_name)
    return EXIT_VIOLATION if failed else EXIT_OK


def _spearman(a, b):
    rho, _ = spearmanr(a, b)
    return float(rho) if np.isfinite(rho) else None


def cmd_reward_audit(cfg):
    """Random-action rollouts scored by GT, Chamfer and single-goal rewards.

    Observations are noise-free; a second encoder with view dropout shows
    the same states partly occluded.
    """
    task = cfg.task
    clean_views = replace(cfg.views, mode='particles', jitter_sigma=0.0, dropout_prob=0.0, occluded=[])
    occluded_views = replace(clean_views, dropout_prob=cfg.audit.occlusion_dropout, guarantee_visibility=False)
    clean, occluded = clean_views.build(task), occluded_views.build(task)
    chamfer = RewardFunction(RewardContext(replace(cfg.reward, kind='chamfer'), task, clean))
    smorl = RewardFunction(RewardContext(replace(cfg.reward, kind='smorl'), task, clean))
    chamfer_occluded = RewardFunction(RewardContext(replace(cfg.reward, kind='chamfer'), task, occluded))

    rng = np.random.default_rng(cfg.seed)
    clean_rng = np.random.default_rng(cfg.seed + 1)
    occluded_rng = np.random.default_rng(cfg.seed + 2)
    env = TabletopEnv(task, seed=cfg.seed)
    rows = []
    for episode in range(cfg.audit.episodes):
        _, info = env.reset(seed=int(rng.integers(2 ** 31)))
        goal = info['goal']
        clean_goal = clean.encode_goal(goal, clean_rng)
        occluded_goal = occluded.encode_goal(goal, occluded_rng)
        for t in range(task.horizon):
            _, gt, _, truncated, _ = env.step(rng.uniform(-task.a_max, task.a_max, size=2))
            achieved = env.state.achieved_goal()
            obs = Observation(clean.encode_state(env.state, clean_rng), clean_goal)
            obs_occluded = Observation(occluded.encode_state(env.state, occluded_rng), occluded_goal)
            rows.append({'episode': episode, 't': t, 'gt_reward': float(gt),
                         'chamfer_reward': float(chamfer(achieved, goal, obs)),
                         'smorl_reward': float(smorl(achieved, goal, obs)),
                         'chamfer_reward_occluded': float(chamfer_occluded(achieved, goal, obs_occluded))})
            if truncated:
                break

    gt = [row['gt_reward'] for row in rows]
    rho = _spearman([row['chamfer_reward'] for row in rows], gt)
    rho_occluded = _spearman([row['chamfer_reward_occluded'] for row in rows], gt)
    stats = {
        'rows': len(rows),
        'episodes': cfg.audit.episodes,
        'n_objects': task.n_objects,
        'rho_chamfer_gt': rho,
        'rho_chamfer_gt_occluded': rho_occluded,
        'rho_smorl_gt': _spearman([row['smorl_reward'] for row in rows], gt),
        'rho_threshold': cfg.audit.rho_threshold,
        'occlusion_dropout': cfg.audit.occlusion_dropout,
        'passed': rho is not None and rho >= cfg.audit.rho_threshold,
    }
    out = cfg.output_dir
    write_csv(path.join(out, 'audit.csv'), AUDIT_HEADER, rows)
    write_json(path.join(out, 'audit_stats.json'), stats)
    log.info('Reward audit: rho(chamfer, gt) %s, occluded %s', rho, rho_occluded)
    if not stats['passed']:
        log.error('Chamfer/GT rank correlation %s below %.2f', rho, cfg.audit.rho_threshold)
        return EXIT_VIOLATION
    return EXIT_OK


class LoggingFilter(logging.Filter):
    def __init__(self, run_seed, config_file):
        super().__init__()
        self.run_seed = run_seed
        self.config_file = config_file

    def filter(self, record):
        record.run_seed = self.run_seed
        record.config_file = self.config_file
        return True


class GracefulKiller:
    def __init__(self):
        self.kill_now = False
        signal.signal(signal.SIGINT, self.exit_gracefully)
        signal.signal(signal.SIGTERM, self.exit_gracefully)

    def exit_gracefully(self, signum, frame):
        log.critical("=== Received signal %d : %.4f Seconds ===", signum, time.time() - start_time)
        self.kill_now = True


def setup_logging(args):
    for handler in list(log.handlers):
        log.removeHandler(handler)
    for log_filter in list(log.filters):
        log.removeFilter(log_filter)
    log.setLevel(getattr(logging, args.log.upper()))
    formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

    # File Logging
    os.makedirs(path.join(cwd, 'logs'), exist_ok=True)
    log_filename = path.join(cwd, 'logs', 'log_' + path.splitext(path.basename(args.config))[0] + '.log')
    loghandle = logging.FileHandler(log_filename, 'a')
    loghandle.setFormatter(formatter)
    log.addHandler(loghandle)
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    log.addHandler(console)

    # Remote Logging
    if args.graylog:
        graylog_config = path.join(cwd, 'config', 'graylog.yml')
        if not path.exists(graylog_config):
            raise ConfigError('graylog config not found: %s' % graylog_config)
        with open(graylog_config) as file_to_read:
            graylog_servers = yaml.safe_load(file_to_read)
        server = graylog_servers['server'][0]
        log.addHandler(graypy.GELFTCPHandler(server['server_address'], server['port']))
        log.addFilter(LoggingFilter(args.seed, args.config))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help='YAML run configuration. Default "sample-config.yml" '
                        '("sample-theory.yml" for verify-theory)')
    common.add_argument('--seed', type=int, default=None, help='Overrides the configured seed')
    common.add_argument('--out', default=None, help='Output directory, overrides output_dir')
    common.add_argument('--n-objects', type=int, default=None, dest='n_objects', help='Object count override')
    common.add_argument('--episodes', type=int, default=None, help='Evaluation or audit episode count override')
    common.add_argument('--log', default='WARNING', help='Log levels, DEBUG, INFO, WARNING, ERROR or CRITICAL')
    common.add_argument('--graylog', action='store_true', dest='graylog',
                        help='Enable GrayLog remote logging. Graylog config file must be set.')

    parser = argparse.ArgumentParser(description='Entity-centric goal-conditioned RL on a planar push table')
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('train', parents=[common], help='Train a TD3+HER agent')
    evaluate_cmd = commands.add_parser('eval', parents=[common], help='Evaluate a checkpoint across object counts')
    evaluate_cmd.add_argument('--checkpoint', default=None, help='Checkpoint file written by train')
    commands.add_parser('verify-theory', parents=[common], help='Numerically certify the generalization bounds')
    commands.add_parser('reward-audit', parents=[common], help='Compare Chamfer and GT rewards on random rollouts')
    return parser


def run(args, killer=None):
    cfg = settings.load_config(resolve_config(args.config))
    settings.apply_overrides(cfg, seed=args.seed, output_dir=args.out,
                             n_objects=args.n_objects if args.command != 'eval' else None, episodes=args.episodes)
    if args.command == 'train':
        return cmd_train(cfg, killer)
    if args.command == 'eval':
        return cmd_eval(cfg, args.checkpoint, args.n_objects)
    if args.command == 'verify-theory':
        return cmd_verify_theory(cfg)
    return cmd_reward_audit(cfg)


def main(argv=None):
    global start_time
    start_time = time.time()
    args = build_parser().parse_args(argv)
    if args.config is None:
        args.config = 'sample-theory.yml' if args.command == 'verify-theory' else 'sample-config.yml'

    try:
        setup_logging(args)
    except (ConfigError, OSError, KeyError) as e:
        sys.stderr.write('Logging setup failed: %s\n' % e)
        return EXIT_CONFIG

    #Start
    log.info("=== Particle Push %s Started ===", args.command)
    killer = GracefulKiller() if args.command == 'train' else None

    try:
        code = run(args, killer)
    except (ConfigError, PlacementError, PremiseError) as e:
        log.error('Configuration error: %s', e)
        code = EXIT_CONFIG
    except DivergenceError as e:
        log.error('Training diverged: %s', e)
        code = EXIT_DIVERGENCE
    except (CheckpointError, EntityError) as e:
        log.error('Refused: %s', e)
        code = EXIT_REFUSED
    except ParticlePushError as e:
        log.exception('Exception (Main Thread): %s', e)
        code = EXIT_VIOLATION

    #Finish
    log.info("=== Particle Push %s Completed : %.4f Seconds ===", args.command, time.time() - start_time)
    return code


if __name__ == '__main__':
    sys.exit(main())
