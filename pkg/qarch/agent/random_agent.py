#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Baseline agent drawing every action uniformly from the full action space
"""
import numpy as np

from qarch.logging.qarch_logger import get_logger
from .tracking import RunTracker


def random_action(nvec, rng: np.random.Generator) -> np.ndarray:
    return np.array([int(rng.integers(n)) for n in nvec])


def random_agent(env, total_steps: int, seed: int, *, tracker: RunTracker = None, logger=None) -> RunTracker:
    """
    Take total_steps uniformly random actions, resetting after every episode
    """
    logger = logger if logger is not None else get_logger('agent')
    tracker = tracker if tracker is not None else RunTracker(f'random-{seed}', logger=logger)
    rng = np.random.default_rng(seed)
    nvec = [int(n) for n in env.action_space.nvec]
    env.reset(seed=seed)
    for _ in range(total_steps):
        action = random_action(nvec, rng)
        obs, reward, terminated, truncated, info = env.step(action)
        done = terminated or truncated
        tracker.record(obs, action, reward, done, info)
        if done:
            env.reset()
    logger.info(f'Random run finished after {tracker.step} steps and {tracker.episodes} episodes, '
                f'best accuracy {tracker.best_accuracy:.4f}')
    return tracker
