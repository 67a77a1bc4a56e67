#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Collects the attributes of an environment step for structured logging
"""
from types import MappingProxyType

from qarch.circuits.metrics import CircuitMetrics, metrics
from qarch.circuits.sequence import GateSequence
from qarch.circuits.tensor import canonical_hash, hash_hex
from qarch.env.state import EpisodeState
from qarch.inner.trainer import EvalResult


class LogCollectorException(Exception):

    def __init__(self, msg: str):
        super().__init__(f"LogCollectorException: {msg}")


class LogCollector:
    """
    Collects step attributes from an EpisodeState, a GateSequence,
    CircuitMetrics or an EvalResult. The mapping returned by the attributes
    property is read-only and has the following keys:
    'step', 'legal', 'violation', 'done', 'done_reason', 'reward',
    'episode_reward', 'p_delta', 'complexity_remaining',
    'gates', 'params', 'cnots', 'depth', 'circuit_hash',
    'test_accuracy', 'train_accuracy'
    """
    METHOD_LUT = {
        EpisodeState: "episode_state",
        GateSequence: "sequence",
        CircuitMetrics: "metrics",
        EvalResult: "eval_result",
    }

    def __init__(self):
        self._attributes = dict(step=0, legal=True, violation='', done=False, done_reason='', reward=0.0,
                                episode_reward=0.0, p_delta=0.0, complexity_remaining=1.0,
                                gates=0, params=0, cnots=0, depth=0, circuit_hash='',
                                test_accuracy=0.0, train_accuracy=0.0)

    @property
    def attributes(self):
        return MappingProxyType(self._attributes)

    def _collect_attributes_from_metrics(self, m: CircuitMetrics):
        self._attributes.update(m.to_dict())

    def _collect_attributes_from_sequence(self, seq: GateSequence):
        self._collect_attributes_from_metrics(metrics(seq))

    def _collect_attributes_from_eval_result(self, result: EvalResult):
        self._attributes['test_accuracy'] = result.aggregate_test_acc
        self._attributes['train_accuracy'] = result.aggregate_train_acc

    def _collect_attributes_from_episode_state(self, state: EpisodeState):
        self._attributes['step'] = state.step_count
        self._attributes['legal'] = state.last_violation is None
        self._attributes['violation'] = str(state.last_violation) if state.last_violation else ''
        self._attributes['done'] = state.done
        self._attributes['done_reason'] = str(state.done_reason) if state.done_reason else ''
        self._attributes['episode_reward'] = state.episode_reward
        self._attributes['p_delta'] = state.last_p_delta
        self._attributes['complexity_remaining'] = state.last_complexity_remaining
        self._attributes['circuit_hash'] = hash_hex(canonical_hash(state.tensor))
        self._collect_attributes_from_sequence(state.seq)
        if state.previous_performance is not None:
            self._attributes['test_accuracy'] = state.previous_performance
        if state.last_result is not None:
            self._attributes['train_accuracy'] = state.last_result.aggregate_train_acc

    def set_reward(self, reward: float):
        self._attributes['reward'] = float(reward)

    def collect_step_attributes(self, *, source: EpisodeState or GateSequence or CircuitMetrics or EvalResult):
        """
        Extract the attributes of source into the collection
        :param source: EpisodeState, GateSequence, CircuitMetrics or EvalResult
        """
        assert source is not None

        method_suffix = LogCollector.METHOD_LUT.get(source.__class__)

        if not method_suffix:
            raise LogCollectorException(f'Unsupported source type {source.__class__} '
                                        f'for collecting attributes')
        self.__getattribute__('_collect_attributes_from_' + method_suffix)(source)

    def __str__(self):
        """
        produce everything that goes after 'with' in a logging message
        """
        a = self._attributes
        circuit = ' circuit ' + ','.join([f'gates:{a["gates"]}', f'params:{a["params"]}',
                                          f'cnots:{a["cnots"]}', f'depth:{a["depth"]}'])
        perf = f' accuracy test:{a["test_accuracy"]:.4f},train:{a["train_accuracy"]:.4f}'
        reward = f' reward {a["reward"]:.4f}'
        legality = f' illegal {a["violation"]}' if a['violation'] else ''
        done = f' done {a["done_reason"]}' if a['done'] else ''
        return ';'.join(filter(lambda n: len(n) > 0, [f'step {a["step"]}', circuit, perf, reward,
                                                      legality, done]))

    def __repr__(self):
        return str(dict(self._attributes))
