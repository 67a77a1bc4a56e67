#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Bookkeeping shared by the PPO and the random agent: one metrics row per
environment step, episode counting and the best circuit seen so far.
"""
import time

import numpy as np

from qarch.circuits.tensor import CircuitTensor
from qarch.logging.metrics_log import MetricsLog, MetricsRow
from qarch.logging.qarch_logger import get_logger


class RunTracker:
    """
    Records steps of one run. The best circuit is the legal one with the
    highest test accuracy, fewer gates winning ties.
    """

    def __init__(self, run_id: str, *, metrics_log: MetricsLog = None, wall_time: bool = False,
                 report_every: int = 100, logger=None):
        self.run_id = run_id
        self.metrics_log = metrics_log
        self.wall_time = wall_time
        self.report_every = report_every
        self.logger = logger if logger is not None else get_logger('agent')
        self.step = 0
        self.episodes = 0
        self.best_accuracy = 0.0
        self.best_gates = None
        self.best_observation = None
        self.best_step = 0
        self.best_accuracy_history = list()
        self._start = time.monotonic()

    @property
    def elapsed_hours(self) -> float:
        return (time.monotonic() - self._start) / 3600.0

    def _improves(self, accuracy: float, gates: int) -> bool:
        if self.best_observation is None or accuracy > self.best_accuracy:
            return True
        return accuracy == self.best_accuracy and gates < self.best_gates

    def record(self, observation, action, reward: float, done: bool, info: dict) -> MetricsRow:
        self.step += 1
        accuracy = float(info.get('test_accuracy', 0.0))
        gates = int(info.get('gates', 0))
        legal = bool(info.get('legal', True))
        if legal and gates > 0 and self._improves(accuracy, gates):
            self.best_accuracy = accuracy
            self.best_gates = gates
            self.best_observation = np.array(observation, dtype=np.uint8)
            self.best_step = self.step
            self.logger.info(f'Run {self.run_id} step {self.step}: best accuracy {accuracy:.4f} '
                             f'with {gates} gates')
        self.best_accuracy_history.append(self.best_accuracy)
        row = MetricsRow(run_id=self.run_id, step=self.step, episode=self.episodes,
                         action_gate=int(action[0]), action_qubit=int(action[1]), legal=legal,
                         reward=float(reward), episode_reward=float(info.get('episode_reward', reward)),
                         test_accuracy=accuracy, gates=gates, depth=int(info.get('depth', 0)), done=bool(done),
                         done_reason=str(info.get('done_reason', '')), circuit_hash=str(info.get('circuit_hash', '')),
                         wall_time=time.monotonic() - self._start if self.wall_time else 0.0)
        if self.metrics_log is not None:
            self.metrics_log.append(row)
        if done:
            self.episodes += 1
        if self.report_every and self.step % self.report_every == 0:
            self.logger.debug(f'Run {self.run_id} step {self.step} episodes {self.episodes} '
                              f'best {self.best_accuracy:.4f}')
        return row

    def best_tensor(self) -> CircuitTensor or None:
        if self.best_observation is None:
            return None
        q, _, d = self.best_observation.shape
        return CircuitTensor(num_qubits=q, max_depth=d, bits=self.best_observation)

    def summary(self, threshold: float) -> dict:
        return {'run_id': self.run_id,
                'steps': self.step,
                'episodes': self.episodes,
                'wall_hours': self.elapsed_hours if self.wall_time else 0.0,
                'best_accuracy': self.best_accuracy,
                'best_step': self.best_step,
                'converged': self.best_observation is not None and self.best_accuracy >= threshold}
