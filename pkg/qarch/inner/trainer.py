#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Inner loop: train the rotation angles of a fixed circuit with Adam on
mini-batch cross-entropy, once per fixed seed, and score it by accuracy.
"""
import json
from dataclasses import dataclass, field, asdict, replace
from typing import List, Tuple

import numpy as np

from qarch.datasets.dataset import Dataset, DatasetException
from qarch.logging.qarch_logger import get_logger
from qarch.quantum.gradients import GradientMethod, loss_and_gradient, cross_entropy
from qarch.quantum.statevector import QuantumCoreException, encode_batch, run_batch, \
    class_probabilities_batch, predict_batch
from qarch.util.exceptions import ConfigException
from .optimizer import AdamOptimizer

AGGREGATIONS = ('max', 'mean')
INIT_DISTRIBUTIONS = ('uniform', )


@dataclass(frozen=True)
class OptConfig:
    learning_rate: float = 0.01
    epochs: int = 1000
    batch_size: int = 16
    num_seeds: int = 3
    seeds: Tuple[int, ...] = (1, 2, 3)
    init_range: Tuple[float, float] = (-1.0, 1.0)
    init_distribution: str = 'uniform'
    aggregation: str = 'max'
    gradient_method: str = 'adjoint'
    record_history: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'seeds', tuple(int(s) for s in self.seeds))
        object.__setattr__(self, 'init_range', tuple(float(r) for r in self.init_range))
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1 or self.num_seeds < 1:
            raise ConfigException(f'Learning rate, epochs, batch size and seed count must be positive: {self}')
        if len(self.seeds) != self.num_seeds:
            raise ConfigException(f'{self.num_seeds} seeds requested but {len(self.seeds)} given')
        if len(self.init_range) != 2 or self.init_range[0] >= self.init_range[1]:
            raise ConfigException(f'Degenerate initialisation range {self.init_range}')
        if self.init_distribution not in INIT_DISTRIBUTIONS:
            raise ConfigException(f'Unsupported initialisation {self.init_distribution}')
        if self.aggregation not in AGGREGATIONS:
            raise ConfigException(f'Aggregation must be one of {AGGREGATIONS}, not {self.aggregation}')
        if GradientMethod.from_string(self.gradient_method) is None:
            raise ConfigException(f'Unknown gradient method {self.gradient_method}')

    @property
    def method(self) -> GradientMethod:
        return GradientMethod.from_string(self.gradient_method)

    def with_changes(self, **kwargs):
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d['seeds'] = list(self.seeds)
        d['init_range'] = list(self.init_range)
        return d


@dataclass(frozen=True)
class SeedResult:
    seed: int
    final_train_acc: float
    final_test_acc: float
    final_loss: float
    initial_loss: float
    trained_params: Tuple[float, ...] = field(default_factory=tuple)
    # (loss, train accuracy, test accuracy) after each epoch, empty unless recorded
    history: Tuple[Tuple[float, float, float], ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class EvalResult:
    """
    Per-seed outcomes and the aggregate used as circuit performance.
    With 'max' aggregation the aggregate values are those of the seed with
    the highest test accuracy (first such seed on ties).
    """
    per_seed: Tuple[SeedResult, ...]
    aggregate_test_acc: float
    aggregate_train_acc: float
    best_seed_index: int

    @property
    def best(self) -> SeedResult:
        return self.per_seed[self.best_seed_index]

    def to_json(self) -> str:
        """
        Canonical serialisation: sorted keys, floats in shortest round-trip form
        """
        d = {'per_seed': [asdict(s) for s in self.per_seed],
             'aggregate_test_acc': self.aggregate_test_acc,
             'aggregate_train_acc': self.aggregate_train_acc,
             'best_seed_index': self.best_seed_index}
        for s in d['per_seed']:
            s['trained_params'] = list(s['trained_params'])
            s['history'] = [list(h) for h in s['history']]
        return json.dumps(d, sort_keys=True, separators=(',', ':'))

    @staticmethod
    def from_json(s: str):
        d = json.loads(s)
        per_seed = tuple(SeedResult(seed=p['seed'], final_train_acc=p['final_train_acc'],
                                    final_test_acc=p['final_test_acc'], final_loss=p['final_loss'],
                                    initial_loss=p['initial_loss'],
                                    trained_params=tuple(p['trained_params']),
                                    history=tuple(tuple(h) for h in p.get('history', ())))
                         for p in d['per_seed'])
        return EvalResult(per_seed=per_seed, aggregate_test_acc=d['aggregate_test_acc'],
                          aggregate_train_acc=d['aggregate_train_acc'],
                          best_seed_index=d['best_seed_index'])


def _check_fit(seq, data: Dataset) -> int:
    q = data.num_qubits
    if seq.num_qubits != q:
        raise QuantumCoreException(f'Circuit has {seq.num_qubits} qubits, dataset {data.name} needs {q}')
    return q


def accuracy(seq, params, states: np.ndarray, labels: np.ndarray, num_qubits: int) -> float:
    if len(states) == 0:
        raise DatasetException('Cannot score an empty split')
    probs = class_probabilities_batch(run_batch(seq, params, states, num_qubits), num_qubits, labels.shape[1])
    return float(np.mean(predict_batch(probs) == np.argmax(labels, axis=1)))


def evaluate(seq, params, data: Dataset, split: str = 'test') -> float:
    """
    Fraction of samples in the split whose predicted class matches the label
    """
    q = _check_fit(seq, data)
    x, y = data.split(split)
    if len(x) == 0:
        raise DatasetException(f'Split {split} of {data.name} is empty')
    return accuracy(seq, params, encode_batch(x), y, q)


def _epoch_point(seq, params, train: tuple, test: tuple, q: int) -> Tuple[float, float, float]:
    return (float(cross_entropy(seq, params, train[0], train[1], q)), accuracy(seq, params, train[0], train[1], q),
            accuracy(seq, params, test[0], test[1], q))


def _train_seed(seq, data: Dataset, cfg: OptConfig, seed: int, train: tuple, test: tuple, q: int) -> SeedResult:
    rng = np.random.default_rng(seed)
    states, labels = train
    params = rng.uniform(cfg.init_range[0], cfg.init_range[1], seq.num_params)
    initial_loss = cross_entropy(seq, params, states, labels, q)
    history = list()
    if seq.num_params > 0:
        opt = AdamOptimizer(learning_rate=cfg.learning_rate)
        n = len(states)
        for _ in range(cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                _, grad = loss_and_gradient(seq, params, states[idx], labels[idx], q, method=cfg.method)
                params = opt.step(params, grad)
            if cfg.record_history:
                history.append(_epoch_point(seq, params, train, test, q))
    elif cfg.record_history:
        history = [_epoch_point(seq, params, train, test, q)] * cfg.epochs
    loss, train_acc, test_acc = history[-1] if history else _epoch_point(seq, params, train, test, q)
    return SeedResult(seed=seed, final_train_acc=train_acc, final_test_acc=test_acc, final_loss=loss,
                      initial_loss=initial_loss, trained_params=tuple(float(p) for p in params),
                      history=tuple(history))


def aggregate(per_seed: List[SeedResult], aggregation: str = 'max') -> EvalResult:
    test_accs = [s.final_test_acc for s in per_seed]
    best = int(np.argmax(test_accs))
    if aggregation == 'mean':
        test_acc = float(np.mean(test_accs))
        train_acc = float(np.mean([s.final_train_acc for s in per_seed]))
    else:
        test_acc = per_seed[best].final_test_acc
        train_acc = per_seed[best].final_train_acc
    return EvalResult(per_seed=tuple(per_seed), aggregate_test_acc=test_acc,
                      aggregate_train_acc=train_acc, best_seed_index=best)


def train_vqc(seq, data: Dataset, cfg: OptConfig) -> EvalResult:
    """
    Train the circuit once per configured seed and aggregate.
    :param seq: GateSequence
    :param data: Dataset with a qubit count matching the circuit
    :param cfg: OptConfig
    :return: EvalResult
    """
    q = _check_fit(seq, data)
    train = (encode_batch(data.x_train), data.y_train.astype(float))
    test = (encode_batch(data.x_test), data.y_test.astype(float))
    per_seed = [_train_seed(seq, data, cfg, seed, train, test, q) for seed in cfg.seeds]
    result = aggregate(per_seed, cfg.aggregation)
    get_logger('inner').debug(f'Trained {len(seq)}-gate circuit on {data.name}: '
                              f'test {result.aggregate_test_acc:.4f} train {result.aggregate_train_acc:.4f}')
    return result
