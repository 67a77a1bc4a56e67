#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Runs an experiment: one agent run per configured seed, all writing to a
single metrics log. The output directory receives

  config.yaml        configuration actually used
  metrics.csv        per-step metrics of all runs
  checkpoints/       PPO network checkpoints, one per run
  best_circuit.txt   best circuit over all runs, with its trained parameters
  summary.yaml       run metadata
"""
import os
from typing import Callable

import yaml

from qarch.agent.ppo import train
from qarch.agent.random_agent import random_agent
from qarch.agent.tracking import RunTracker
from qarch.circuits.export import save_circuit
from qarch.circuits.metrics import metrics
from qarch.circuits.sequence import decode
from qarch.circuits.tensor import CircuitTensor, canonical_hash, hash_hex
from qarch.datasets.loaders import load_task, TASK_QUBITS
from qarch.env.environment import CircuitDesignEnv
from qarch.inner.cache import open_cache, cached_evaluate
from qarch.inner.trainer import EvalResult
from qarch.logging.metrics_log import MetricsLog
from qarch.logging.qarch_logger import get_logger
from .config import ExperimentConfig
from .exceptions import ConfigException

METRICS_FILE = 'metrics.csv'
SUMMARY_FILE = 'summary.yaml'
CONFIG_FILE = 'config.yaml'
BEST_CIRCUIT_FILE = 'best_circuit.txt'
CHECKPOINT_DIR = 'checkpoints'

Evaluator = Callable[[CircuitTensor], EvalResult]


def _prepare_output(out_dir: str):
    try:
        os.makedirs(os.path.join(out_dir, CHECKPOINT_DIR), exist_ok=True)
    except OSError as e:
        raise ConfigException(f'Unable to create output directory {out_dir}: {e}')
    if not os.access(out_dir, os.W_OK):
        raise ConfigException(f'Output directory {out_dir} is not writable')


def run_experiment(cfg: ExperimentConfig, *, evaluator: Evaluator = None, logger=None) -> str:
    """
    Execute the configured runs.
    :param cfg: ExperimentConfig
    :param evaluator: tensor -> EvalResult; defaults to cached inner-loop training on the task dataset
    :return: output directory
    """
    logger = logger if logger is not None else get_logger('runner')
    _prepare_output(cfg.out_dir)
    cfg.save(os.path.join(cfg.out_dir, CONFIG_FILE))

    cache = None
    if evaluator is None:
        data = load_task(cfg.task, seed=cfg.dataset_seed, path=cfg.dataset_path)
        cache = open_cache(data, cfg.opt, cfg.cache_dir, logger=logger)

        def evaluator(tensor):
            return cached_evaluate(tensor, data, cfg.opt, cache)
        num_qubits = data.num_qubits
    else:
        num_qubits = TASK_QUBITS[cfg.task]

    runs = list()
    best = None
    try:
        with MetricsLog(os.path.join(cfg.out_dir, METRICS_FILE)) as log:
            for seed in cfg.seeds:
                run_id = f'{cfg.agent}-{seed}'
                logger.info(f'Starting {run_id} on {cfg.task}')
                env = CircuitDesignEnv(evaluator=evaluator, num_qubits=num_qubits, reward_config=cfg.reward,
                                       illegal_action_mode=cfg.illegal_action_mode, logger=logger)
                tracker = RunTracker(run_id, metrics_log=log, wall_time=cfg.wall_time, logger=logger)
                if cfg.agent == 'random':
                    random_agent(env, cfg.ppo.total_steps, seed, tracker=tracker, logger=logger)
                else:
                    train(env, cfg.ppo, seed, tracker=tracker, logger=logger,
                          checkpoint_path=os.path.join(cfg.out_dir, CHECKPOINT_DIR, f'{run_id}.pt'))
                runs.append(tracker.summary(cfg.reward.performance_threshold))
                if tracker.best_observation is not None and \
                        (best is None or tracker.best_accuracy > best.best_accuracy or
                         (tracker.best_accuracy == best.best_accuracy and tracker.best_gates < best.best_gates)):
                    best = tracker
        summary = {'task': cfg.task, 'agent': cfg.agent, 'runs': runs,
                   'steps': sum(r['steps'] for r in runs), 'episodes': sum(r['episodes'] for r in runs),
                   'wall_hours': sum(r['wall_hours'] for r in runs),
                   'converged': any(r['converged'] for r in runs)}
        if best is not None:
            tensor = best.best_tensor()
            seq = decode(tensor)
            result = evaluator(tensor)
            save_circuit(os.path.join(cfg.out_dir, BEST_CIRCUIT_FILE), seq, result.best.trained_params)
            summary['best'] = {'run_id': best.run_id, 'step': best.best_step,
                               'test_accuracy': result.aggregate_test_acc,
                               'train_accuracy': result.aggregate_train_acc,
                               'circuit_hash': hash_hex(canonical_hash(tensor)),
                               **metrics(seq).to_dict()}
        else:
            logger.warning('No legal circuit was built in any run')
        if not summary['converged']:
            logger.info(f'The {cfg.task} agent did not reach the performance threshold '
                        f'{cfg.reward.performance_threshold}')
        if cache is not None:
            summary['cache'] = {'entries': len(cache), 'hits': cache.hits, 'misses': cache.misses}
        with open(os.path.join(cfg.out_dir, SUMMARY_FILE), 'w') as f:
            yaml.safe_dump(summary, f, sort_keys=False)
    finally:
        if cache is not None:
            cache.close()
    return cfg.out_dir
