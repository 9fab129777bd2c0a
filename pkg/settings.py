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
import yaml
import logging
from os import path
from dataclasses import dataclass, field, fields, replace

from errors import ConfigError, ParticlePushError
from entities.encoder import ObservationEncoder, default_views
from sim.tabletop import TaskConfig
from setdist.distances import RewardConfig
from nets.eit import NetConfig
from rl.td3 import TrainConfig
from theory.certify import TheoryConfig

log = logging.getLogger('particle-push')

ENV_PREFIX = 'PARTICLEPUSH_'


@dataclass
class ViewsConfig:
    mode: str = 'particles'          # particles or oracle
    n_views: int = 2
    jitter_sigma: float = 0.002
    dropout_prob: float = 0.0
    n_decoys: int = 2
    occluded: list = field(default_factory=list)   # per view, object indices always hidden
    feature_dim: int = 4
    feature_scale: float = 1.0
    guarantee_visibility: bool = False

    def __post_init__(self):
        if self.mode not in ('particles', 'oracle'):
            raise ConfigError('unknown observation mode %r' % self.mode)
        if self.n_views < 1:
            raise ConfigError('n_views must be at least 1')
        if len(self.occluded) > self.n_views:
            raise ConfigError('occluded lists %d views but only %d exist' % (len(self.occluded), self.n_views))

    def build(self, task):
        views = default_views(self.n_views, self.jitter_sigma, self.dropout_prob, self.n_decoys)
        views = tuple(replace(view, occluded=frozenset(self.occluded[i]) if i < len(self.occluded) else frozenset())
                      for i, view in enumerate(views))
        return ObservationEncoder(views, self.feature_dim, self.feature_scale, task.object_radius,
                                  task.agent_radius, self.mode, self.guarantee_visibility)


@dataclass
class EvalConfig:
    n_objects: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    episodes: int = 400
    seed_offset: int = 1000
    dump_trajectory: bool = True
    sorting: bool = False            # also evaluate the sorting variant
    sorting_objects: int = 4

    def __post_init__(self):
        if self.episodes < 1 or any(n < 1 for n in self.n_objects):
            raise ConfigError('eval episodes and object counts must be positive')


@dataclass
class AuditConfig:
    episodes: int = 50
    rho_threshold: float = 0.9
    occlusion_dropout: float = 0.3   # dropout applied in the occluded comparison run

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigError('audit episodes must be positive')
        if not 0.0 <= self.occlusion_dropout < 1.0:
            raise ConfigError('occlusion_dropout must lie in [0, 1)')


SECTIONS = {
    'task': TaskConfig,
    'views': ViewsConfig,
    'reward': RewardConfig,
    'net': NetConfig,
    'train': TrainConfig,
    'eval': EvalConfig,
    'audit': AuditConfig,
    'theory': TheoryConfig,
}
TOP_LEVEL = ('seed', 'output_dir')

# Filled from the task and views; setting them in the file is refused.
DERIVED_NET_KEYS = ('n_views', 'feature_dim', 'a_max', 'n_objects', 'n_goals')


@dataclass
class RunConfig:
    task: TaskConfig
    views: ViewsConfig
    reward: RewardConfig
    net: NetConfig
    train: TrainConfig
    eval: EvalConfig
    audit: AuditConfig
    theory: TheoryConfig
    seed: int = 0
    output_dir: str = 'runs/default'
    source: str = None

    def encoder(self, task=None):
        return self.views.build(task or self.task)

    def net_for(self, task):
        """NetConfig sized for a task; only the unstructured baseline cares."""
        n_goals = task.n_goals if task.variant == 'sorting' else task.n_objects
        return replace(self.net, n_objects=task.n_objects, n_goals=n_goals, a_max=task.a_max)


def _key_lines(text, source):
    """Line numbers of top-level sections and their keys via yaml.compose."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigError('YAML parse error: %s' % getattr(e, 'problem', e),
                          line=mark.line + 1 if mark else None, source=source)
    lines = {}
    if root is None:
        return lines
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError('top level must be a mapping', line=root.start_mark.line + 1, source=source)
    for key_node, value_node in root.value:
        lines[(key_node.value,)] = key_node.start_mark.line + 1
        if isinstance(value_node, yaml.MappingNode):
            for sub_key, _ in value_node.value:
                lines[(key_node.value, sub_key.value)] = sub_key.start_mark.line + 1
    return lines


def _env_overrides(environ):
    overrides = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower()
        value = yaml.safe_load(raw) if raw != '' else None
        if '__' in key:
            section, sub = key.split('__', 1)
            if section not in SECTIONS:
                raise ConfigError('%s: unknown section %r' % (name, section))
            overrides.setdefault(section, {})[sub] = value
        elif key in TOP_LEVEL:
            overrides[key] = value
        else:
            raise ConfigError('%s: unknown setting %r' % (name, key))
    return overrides


def _build_section(name, values, lines, source):
    cls = SECTIONS[name]
    known = {f.name for f in fields(cls)}
    section_line = lines.get((name,))
    for key in values:
        if key not in known:
            raise ConfigError('unknown key %r in section %r' % (key, name),
                              line=lines.get((name, key), section_line), source=source)
    if name == 'net':
        for key in DERIVED_NET_KEYS:
            if key in values:
                raise ConfigError('net.%s is derived from the task and views sections' % key,
                                  line=lines.get((name, key), section_line), source=source)
    try:
        return cls(**values)
    except ConfigError as e:
        raise ConfigError(str(e), line=section_line, source=source)
    except (TypeError, ValueError, ParticlePushError) as e:
        raise ConfigError('invalid %s section: %s' % (name, e), line=section_line, source=source)


def parse_config(text, source='<config>', environ=None):
    """RunConfig from YAML text plus PARTICLEPUSH_* environment overrides."""
    lines = _key_lines(text, source)
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError('top level must be a mapping', line=1, source=source)

    for section, values in _env_overrides(os.environ if environ is None else environ).items():
        if isinstance(values, dict):
            merged = dict(data.get(section) or {})
            merged.update(values)
            data[section] = merged
        else:
            data[section] = values

    for key in data:
        if key not in SECTIONS and key not in TOP_LEVEL:
            raise ConfigError('unknown section %r' % key, line=lines.get((key,)), source=source)
    built = {}
    for name in SECTIONS:
        values = data.get(name) or {}
        if not isinstance(values, dict):
            raise ConfigError('section %r must be a mapping' % name, line=lines.get((name,)), source=source)
        built[name] = _build_section(name, values, lines, source)

    encoder = built['views'].build(built['task'])
    built['net'] = replace(built['net'], n_views=encoder.n_views, feature_dim=built['views'].feature_dim)
    seed = data.get('seed', 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError('seed must be a non-negative integer', line=lines.get(('seed',)), source=source)
    cfg = RunConfig(seed=seed, output_dir=str(data.get('output_dir', 'runs/default')), source=source, **built)
    cfg.net = cfg.net_for(cfg.task)
    return cfg


def load_config(file_name, environ=None):
    # Check if the configuration file exists. Raise exception if fails
    if not path.exists(file_name):
        raise ConfigError('config file not found: %s' % file_name)
    log.debug('Reading config %s', file_name)
    with open(file_name) as file_to_read:
        return parse_config(file_to_read.read(), source=file_name, environ=environ)


def apply_overrides(cfg, seed=None, output_dir=None, n_objects=None, episodes=None):
    """Command-line flags win over file and environment.

    A new object count resets the horizon to its per-count default.
    """
    if seed is not None:
        cfg.seed = seed
    if output_dir is not None:
        cfg.output_dir = output_dir
    if n_objects is not None:
        values = {f.name: getattr(cfg.task, f.name) for f in fields(cfg.task)}
        values.update({'n_objects': n_objects, 'horizon': None, 'n_goals': None})
        cfg.task = TaskConfig(**values)
        cfg.net = cfg.net_for(cfg.task)
    if episodes is not None:
        cfg.eval = replace(cfg.eval, episodes=episodes)
        cfg.audit = replace(cfg.audit, episodes=episodes)
    return cfg
