#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Complexity and accuracy of the searched circuit next to strongly
entangling layer baselines trained by the same inner loop, and the
per-epoch optimisation curves of those trainings
"""
import os
from typing import Sequence, Callable, List, Tuple

from qarch.circuits.export import load_circuit
from qarch.circuits.metrics import metrics
from qarch.circuits.sel import sel_ansatz
from qarch.circuits.sequence import GateSequence
from qarch.datasets.dataset import Dataset
from qarch.inner.trainer import OptConfig, EvalResult, train_vqc
from qarch.logging.qarch_logger import get_logger
from .reports import Report, AnalysisException

COLUMNS = ['circuit', 'gates', 'params', 'cnots', 'depth', 'train_accuracy', 'test_accuracy']
HISTORY_SERIES = ('loss', 'train_accuracy', 'test_accuracy')

Trainer = Callable[[GateSequence, Dataset, OptConfig], EvalResult]
Candidate = Tuple[str, GateSequence, EvalResult]


def _row(name: str, seq: GateSequence, result: EvalResult) -> list:
    m = metrics(seq)
    return [name, m.gates, m.params, m.cnots, m.depth, result.aggregate_train_acc, result.aggregate_test_acc]


def train_candidates(best_circuit_path: str, data: Dataset, cfg: OptConfig, layers: Sequence[int] = (1, 2),
                     *, trainer: Trainer = train_vqc) -> List[Candidate]:
    """
    Train the exported best circuit ('searched') and SEL(L) ('sel_L') for each L
    """
    if not os.path.exists(best_circuit_path):
        raise AnalysisException(f'Best circuit file {best_circuit_path} not found')
    searched = load_circuit(best_circuit_path)
    if searched.num_qubits != data.num_qubits:
        raise AnalysisException(f'Circuit in {best_circuit_path} has {searched.num_qubits} qubits, '
                                f'{data.name} needs {data.num_qubits}')
    logger = get_logger('analysis')
    candidates = [('searched', searched, trainer(searched, data, cfg))]
    for n in layers:
        seq = sel_ansatz(data.num_qubits, n)
        logger.info(f'Training SEL({n}) with {len(seq)} gates on {data.name}')
        candidates.append((f'sel_{n}', seq, trainer(seq, data, cfg)))
    return candidates


def comparison_report(candidates: List[Candidate], data: Dataset) -> Report:
    report = Report(name='comparison', columns=COLUMNS, notes=[f'task {data.name}'])
    for name, seq, result in candidates:
        report.rows.append(_row(name, seq, result))
    return report


def history_report(candidates: List[Candidate], data: Dataset) -> Report:
    """
    Per-epoch loss and accuracies of the best seed of every candidate, one
    row per epoch. Candidates trained without history are left out.
    """
    recorded = [(name, result.best.history) for name, _, result in candidates if result.best.history]
    columns = ['epoch'] + [f'{name}_{s}' for name, _ in recorded for s in HISTORY_SERIES]
    report = Report(name='optimization', columns=columns, notes=[f'task {data.name}'])
    skipped = [name for name, _, result in candidates if not result.best.history]
    if skipped:
        report.notes.append(f'no epoch history for {", ".join(skipped)}')
    if not recorded:
        return report
    epochs = len(recorded[0][1])
    if any(len(h) != epochs for _, h in recorded):
        raise AnalysisException('Candidates were trained for different numbers of epochs')
    for e in range(epochs):
        row = [e + 1]
        for _, h in recorded:
            row.extend(h[e])
        report.rows.append(row)
    return report


def compare_baselines(best_circuit_path: str, data: Dataset, cfg: OptConfig, layers: Sequence[int] = (1, 2),
                      *, trainer: Trainer = train_vqc) -> Report:
    """
    Train the exported best circuit and SEL(L) for each L, one row each
    """
    return comparison_report(train_candidates(best_circuit_path, data, cfg, layers, trainer=trainer), data)
