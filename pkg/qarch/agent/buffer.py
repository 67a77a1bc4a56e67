#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Fixed-length rollout storage and generalized advantage estimation
"""
from typing import Tuple

import numpy as np


class PpoException(Exception):
    """
    Failure in rollout collection or in a policy update
    """
    def __init__(self, msg: str):
        super().__init__(f'PpoException: {msg}')


class RolloutBuffer:
    """
    n_steps transitions of a single environment. done[t] is true when the
    episode ended with transition t.
    """

    def __init__(self, n_steps: int, obs_size: int):
        assert n_steps > 0 and obs_size > 0
        self.n_steps = n_steps
        self.obs_size = obs_size
        self.observations = np.zeros((n_steps, obs_size), dtype=np.float32)
        self.actions = np.zeros((n_steps, 2), dtype=np.int64)
        self.log_probs = np.zeros(n_steps, dtype=np.float64)
        self.rewards = np.zeros(n_steps, dtype=np.float64)
        self.dones = np.zeros(n_steps, dtype=bool)
        self.values = np.zeros(n_steps, dtype=np.float64)
        self.advantages = None
        self.returns = None
        self.pos = 0

    def __len__(self):
        return self.pos

    @property
    def full(self) -> bool:
        return self.pos == self.n_steps

    def add(self, observation, action, log_prob: float, reward: float, done: bool, value: float):
        if self.full:
            raise PpoException(f'Rollout buffer already holds {self.n_steps} transitions')
        self.observations[self.pos] = np.asarray(observation, dtype=np.float32).reshape(self.obs_size)
        self.actions[self.pos] = np.asarray(action, dtype=np.int64)
        self.log_probs[self.pos] = log_prob
        self.rewards[self.pos] = reward
        self.dones[self.pos] = done
        self.values[self.pos] = value
        self.pos += 1

    def reset(self):
        self.pos = 0
        self.advantages = None
        self.returns = None


def gae(rewards: np.ndarray, values: np.ndarray, dones: np.ndarray, last_value: float,
        gamma: float, gae_lambda: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    GAE(gamma, lambda) advantages and returns (advantages + values). The
    value after the last transition is last_value unless it was terminal.
    """
    n = len(rewards)
    if n == 0:
        raise PpoException('Cannot estimate advantages of an empty rollout')
    advantages = np.zeros(n, dtype=np.float64)
    running = 0.0
    for t in reversed(range(n)):
        next_value = last_value if t == n - 1 else values[t + 1]
        live = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * next_value * live - values[t]
        running = delta + gamma * gae_lambda * live * running
        advantages[t] = running
    return advantages, advantages + values


def compute_gae(buffer: RolloutBuffer, gamma: float, gae_lambda: float, last_value: float = 0.0) \
        -> Tuple[np.ndarray, np.ndarray]:
    """
    Fill buffer.advantages and buffer.returns from the stored transitions
    """
    n = len(buffer)
    adv, ret = gae(buffer.rewards[:n], buffer.values[:n], buffer.dones[:n], last_value, gamma, gae_lambda)
    buffer.advantages = adv
    buffer.returns = ret
    return adv, ret
