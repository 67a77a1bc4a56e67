#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Circuit construction MDP. An episode starts from the empty circuit; every
step appends one gate chosen by a (gate, qubit-permutation) action, the
circuit is scored by the evaluator and the shaped reward is returned.

Episodes end when the score reaches the performance threshold, when an
illegal action is taken (in 'terminate' mode) or when every qubit has
reached the maximum depth.
"""
from typing import Callable

import numpy as np
import gymnasium as gym
from gymnasium import spaces

from qarch.circuits.sequence import place_gate
from qarch.circuits.tensor import CircuitTensor
from qarch.inner.trainer import EvalResult
from qarch.logging.log_collector import LogCollector
from qarch.logging.qarch_logger import get_logger
from qarch.quantum.gates import Gate
from .actions import ActionSpaceSpec, EnvironmentException, decode_action
from .rewards import RewardConfig, compute_reward, complexity_remaining, performance_delta
from .state import EpisodeState, DoneReason, Violation

ILLEGAL_ACTION_MODES = ('terminate', 'mask')

Evaluator = Callable[[CircuitTensor], EvalResult]


def is_illegal(state: EpisodeState, gate: Gate) -> Violation or None:
    """
    RepeatedGate when the gate repeats the most recent gate on any of its
    qubits (same kind, same qubits in the same roles); DepthExceeded when
    it would land at or beyond the maximum depth
    """
    for q in gate.qubits:
        if gate.same_operation(state.seq.last_gate_on(q)):
            return Violation.RepeatedGate
    if state.seq.landing_depth(gate) >= state.max_depth:
        return Violation.DepthExceeded
    return None


class CircuitDesignEnv(gym.Env):
    metadata = {'render_modes': ['ansi']}

    def __init__(self, *, evaluator: Evaluator, num_qubits: int, reward_config: RewardConfig,
                 illegal_action_mode: str = 'terminate', render_mode: str = None, logger=None):
        if illegal_action_mode not in ILLEGAL_ACTION_MODES:
            raise EnvironmentException(f'Illegal-action mode must be one of {ILLEGAL_ACTION_MODES}')
        self.evaluator = evaluator
        self.num_qubits = num_qubits
        self.reward_config = reward_config
        self.max_depth = reward_config.max_depth
        self.illegal_action_mode = illegal_action_mode
        self.render_mode = render_mode
        self.logger = logger if logger is not None else get_logger('env')
        self.action_spec = ActionSpaceSpec(num_qubits)
        self.state: EpisodeState or None = None
        self.episode = 0
        shape = EpisodeState.fresh(num_qubits, self.max_depth).tensor.shape
        self.observation_space = spaces.MultiBinary(list(shape))
        self.action_space = spaces.MultiDiscrete(self.action_spec.nvec)

    @property
    def observation_shape(self):
        return self.observation_space.shape

    def _collect(self, reward: float = 0.0) -> LogCollector:
        collector = LogCollector()
        collector.collect_step_attributes(source=self.state)
        collector.set_reward(reward)
        return collector

    def _info(self, collector: LogCollector) -> dict:
        info = dict(collector.attributes)
        info['episode'] = self.episode
        return info

    def reset(self, *, seed: int = None, options: dict = None):
        super().reset(seed=seed)
        if self.state is not None:
            self.episode += 1
        self.state = EpisodeState.fresh(self.num_qubits, self.max_depth)
        return self.state.tensor.snapshot(), self._info(self._collect())

    def step(self, action):
        state = self.state
        if state is None:
            raise EnvironmentException('Call reset() before step()')
        if state.done:
            raise EnvironmentException(f'Episode is over ({state.done_reason}), call reset()')
        gate = decode_action(action, self.action_spec)
        state.step_count += 1
        violation = is_illegal(state, gate)
        state.last_violation = violation
        if violation is not None:
            reward = compute_reward(self.reward_config, legal=False)
            state.last_p_delta = 0.0
            if self.illegal_action_mode == 'terminate':
                state.done = True
                state.done_reason = DoneReason.IllegalAction
        else:
            place_gate(state.tensor, state.seq, gate)
            result = self.evaluator(state.tensor)
            p_current = result.aggregate_test_acc
            c_rem = complexity_remaining(state.seq, self.max_depth)
            reward = compute_reward(self.reward_config, legal=True, p_current=p_current,
                                    p_previous=state.previous_performance, c_rem=c_rem)
            state.last_p_delta = performance_delta(p_current, state.previous_performance)
            state.last_complexity_remaining = c_rem
            state.previous_performance = p_current
            state.last_result = result
            if p_current >= self.reward_config.performance_threshold:
                state.done = True
                state.done_reason = DoneReason.ThresholdMet
        if not state.done and state.depth_exhausted():
            state.done = True
            state.done_reason = DoneReason.DepthExhausted
        state.episode_reward += reward
        collector = self._collect(reward)
        self.logger.debug(f'Episode {self.episode} {gate.label()} with {collector}')
        return state.tensor.snapshot(), float(reward), state.done, False, self._info(collector)

    def action_mask(self) -> np.ndarray:
        """
        [num_gate_choices x num_permutations] boolean matrix of legal actions
        """
        if self.state is None:
            raise EnvironmentException('Call reset() before action_mask()')
        mask = np.zeros((self.action_spec.num_gate_choices, self.action_spec.num_permutations), dtype=bool)
        for g in range(mask.shape[0]):
            for q in range(mask.shape[1]):
                mask[g, q] = is_illegal(self.state, decode_action((g, q), self.action_spec)) is None
        return mask

    def render(self):
        if self.state is None:
            return ''
        lines = [f'episode {self.episode} step {self.state.step_count}']
        lines.extend(f'  d{d} {g.label()}' for g, d in self.state.seq.placements)
        return '\n'.join(lines)
