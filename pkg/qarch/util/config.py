#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Experiment configuration. A config file is YAML with one section per
subsystem:

task: iris2_01
dataset:
  seed: 42
  path: null
environment:
  max_depth: 4
  performance_threshold: 1.0
  illegal_action_mode: terminate
  ...
inner_loop:
  learning_rate: 0.01
  ...
ppo:
  learning_rate: 0.003
  ...
run:
  agent: ppo
  seeds: [0, 1, 2]
  cache_dir: null
  out_dir: runs/iris2_01
  wall_time: false

Defaults for every task ship with the package and are loaded by
ExperimentConfig.for_task().
"""
import importlib.resources as pkg_resources
from dataclasses import dataclass, field, replace, fields
from typing import Tuple

import yaml

from qarch.agent.ppo import PpoConfig
from qarch.datasets.loaders import TASKS, DEFAULT_SEED
from qarch.env.environment import ILLEGAL_ACTION_MODES
from qarch.env.rewards import RewardConfig
from qarch.inner.trainer import OptConfig
from qarch.logging.qarch_logger import get_logger
from . import data
from .exceptions import ConfigException

AGENTS = ('ppo', 'random')
SECTIONS = ('task', 'dataset', 'environment', 'inner_loop', 'ppo', 'run')
# maximum depths explored per task family
DEPTH_VARIANTS = {'iris2': (4, ), 'iris': (4, 5, 6), 'mnist2': (4, 5, 6, 7)}


def _build(cls, section: str, values: dict):
    values = dict(values or {})
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigException(f'Unknown keys {sorted(unknown)} in section {section}')
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigException(f'Invalid section {section}: {e}')


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    reward: RewardConfig = field(default_factory=RewardConfig)
    opt: OptConfig = field(default_factory=OptConfig)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    illegal_action_mode: str = 'terminate'
    dataset_seed: int = DEFAULT_SEED
    dataset_path: str = None
    agent: str = 'ppo'
    seeds: Tuple[int, ...] = (0, 1, 2)
    cache_dir: str = None
    out_dir: str = 'runs'
    wall_time: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'seeds', tuple(int(s) for s in self.seeds))
        if self.task not in TASKS:
            raise ConfigException(f'Unknown task {self.task}, choose from {", ".join(TASKS)}')
        if self.agent not in AGENTS:
            raise ConfigException(f'Agent must be one of {AGENTS}, not {self.agent}')
        if self.illegal_action_mode not in ILLEGAL_ACTION_MODES:
            raise ConfigException(f'Illegal-action mode must be one of {ILLEGAL_ACTION_MODES}')
        if len(self.seeds) == 0:
            raise ConfigException('At least one run seed is needed')
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigException(f'Run seeds must be distinct: {self.seeds}')

    @property
    def task_family(self) -> str:
        return 'iris2' if self.task.startswith('iris2') else self.task

    @property
    def max_depth(self) -> int:
        return self.reward.max_depth

    def to_dict(self) -> dict:
        env = self.reward.to_dict()
        env['illegal_action_mode'] = self.illegal_action_mode
        return {'task': self.task,
                'dataset': {'seed': self.dataset_seed, 'path': self.dataset_path},
                'environment': env,
                'inner_loop': self.opt.to_dict(),
                'ppo': self.ppo.to_dict(),
                'run': {'agent': self.agent, 'seeds': list(self.seeds), 'cache_dir': self.cache_dir,
                        'out_dir': self.out_dir, 'wall_time': self.wall_time}}

    @staticmethod
    def from_dict(d: dict):
        if not isinstance(d, dict):
            raise ConfigException('Configuration must be a mapping of sections')
        unknown = set(d) - set(SECTIONS)
        if unknown:
            raise ConfigException(f'Unknown sections {sorted(unknown)}')
        if 'task' not in d:
            raise ConfigException('Configuration does not name a task')
        env = dict(d.get('environment') or {})
        mode = env.pop('illegal_action_mode', 'terminate')
        dataset = dict(d.get('dataset') or {})
        run = dict(d.get('run') or {})
        unknown = (set(dataset) - {'seed', 'path'}) | \
                  (set(run) - {'agent', 'seeds', 'cache_dir', 'out_dir', 'wall_time'})
        if unknown:
            raise ConfigException(f'Unknown keys {sorted(unknown)} in dataset or run section')
        return ExperimentConfig(task=d['task'],
                                reward=_build(RewardConfig, 'environment', env),
                                opt=_build(OptConfig, 'inner_loop', d.get('inner_loop')),
                                ppo=_build(PpoConfig, 'ppo', d.get('ppo')),
                                illegal_action_mode=mode,
                                dataset_seed=int(dataset.get('seed', DEFAULT_SEED)),
                                dataset_path=dataset.get('path'),
                                **run)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    @staticmethod
    def from_yaml(text: str):
        try:
            return ExperimentConfig.from_dict(yaml.safe_load(text))
        except yaml.YAMLError as e:
            raise ConfigException(f'Unable to parse configuration: {e}')

    @staticmethod
    def load(path: str):
        try:
            with open(path, 'r') as f:
                return ExperimentConfig.from_yaml(f.read())
        except IOError as e:
            raise ConfigException(f'Unable to open config file {path}: {e}')

    def save(self, path: str):
        with open(path, 'w') as f:
            f.write(self.to_yaml())

    @staticmethod
    def for_task(task: str):
        """
        Default configuration of a task as shipped with the package
        """
        if task not in TASKS:
            raise ConfigException(f'Unknown task {task}, choose from {", ".join(TASKS)}')
        return ExperimentConfig.from_yaml(pkg_resources.files(data).joinpath(f'{task}.yaml').read_text())

    def with_overrides(self, *, seed: int = None, out_dir: str = None, random: bool = False,
                       max_depth: int = None, total_steps: int = None, cache_dir: str = None):
        """
        Apply command-line overrides; None leaves a field unchanged
        """
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seeds=(seed, ))
        if out_dir is not None:
            cfg = replace(cfg, out_dir=out_dir)
        if random:
            cfg = replace(cfg, agent='random')
        if max_depth is not None:
            cfg = replace(cfg, reward=replace(cfg.reward, max_depth=max_depth))
        if total_steps is not None:
            cfg = replace(cfg, ppo=cfg.ppo.with_changes(total_steps=total_steps))
        if cache_dir is not None:
            cfg = replace(cfg, cache_dir=cache_dir)
        if cfg.max_depth not in DEPTH_VARIANTS[cfg.task_family]:
            get_logger('config').warning(f'Maximum depth {cfg.max_depth} is outside the depths explored for '
                                         f'{cfg.task}: {DEPTH_VARIANTS[cfg.task_family]}')
        return cfg
