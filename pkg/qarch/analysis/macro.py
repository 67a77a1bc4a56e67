#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Macro analysis over the unique circuits stored in an evaluation cache.
A unique circuit is a unique canonical tensor hash. Reports:

- buckets:      unique circuits per (test accuracy bucket, depth)
- gate_usage:   gate kinds per qubit among circuits at or above the threshold
- transitions:  probability of the next gate kind given the current one,
                over consecutive gates in decode order
- depth_kinds:  gate kinds per depth level
- patterns:     recurring gate-kind sequences
- crosscheck:   unique circuits seen in a metrics log against the cache
"""
import math
from collections import Counter
from typing import Dict, Iterable, List, Tuple

import numpy as np

from qarch.circuits.sequence import decode
from qarch.circuits.tensor import CircuitTensor, hash_hex
from qarch.inner.trainer import EvalResult
from qarch.logging.metrics_log import MetricsRow
from qarch.quantum.gates import GateKind, ROTATIONS
from .reports import Report, AnalysisException

DEFAULT_THRESHOLD = 0.9
BUCKET_WIDTH = 0.1
KIND_NAMES = [k.export_name for k in GateKind]

Entry = Tuple[int, CircuitTensor, EvalResult]


def accuracy_bucket(accuracy: float) -> str:
    """
    Label of the [lo, hi) bucket, the last bucket closed at 1.0
    """
    n = int(round(1 / BUCKET_WIDTH))
    i = min(int(math.floor(accuracy * n + 1e-9)), n - 1)
    return f'{i / n:.1f}-{(i + 1) / n:.1f}'


def layer_count(num_qubits: int) -> int:
    """
    Valid assignments of one depth column: every qubit idle, carrying one of
    the rotations, or taking part in at most one CNOT as control or target
    """
    total = 0
    for k in range(num_qubits // 2 + 1):
        ordered_pairs = math.factorial(num_qubits) // (math.factorial(num_qubits - 2 * k) * math.factorial(k))
        total += ordered_pairs * (1 + len(ROTATIONS)) ** (num_qubits - 2 * k)
    return total


def search_space_size(num_qubits: int, max_depth: int) -> int:
    """
    Number of well-formed circuit tensors, layer_count(Q) ** D_max, the empty
    circuit included
    """
    return layer_count(num_qubits) ** max_depth


def search_space_formula(num_qubits: int, max_depth: int) -> str:
    return (f'sum_k Q!/((Q-2k)! k!) * 4^(Q-2k) per depth column, raised to D_max; '
            f'Q={num_qubits} D_max={max_depth} gives {search_space_size(num_qubits, max_depth)}')


def _decoded(entries: Iterable[Entry]):
    seen = set()
    for key, tensor, result in entries:
        if key in seen:
            continue
        seen.add(key)
        yield key, decode(tensor), result


def bucket_report(circuits) -> Report:
    counts = Counter((accuracy_bucket(r.aggregate_test_acc), seq.depth) for _, seq, r in circuits)
    rows = [[b, d, c] for (b, d), c in sorted(counts.items())]
    return Report(name='buckets', columns=['accuracy_bucket', 'depth', 'count'], rows=rows)


def gate_usage_report(circuits, num_qubits: int) -> Report:
    counts = np.zeros((num_qubits, len(KIND_NAMES)), dtype=int)
    for _, seq, _ in circuits:
        for g in seq:
            for q in g.qubits:
                counts[q, g.kind.value] += 1
    rows = list()
    for q in range(num_qubits):
        total = counts[q].sum()
        for k, name in enumerate(KIND_NAMES):
            rows.append([q, name, int(counts[q, k]), float(counts[q, k] / total) if total else 0.0])
    return Report(name='gate_usage', columns=['qubit', 'kind', 'count', 'frequency'], rows=rows)


def transition_matrix(circuits) -> Tuple[np.ndarray, np.ndarray]:
    """
    Row-stochastic [4 x 4] matrix of next-kind probabilities and the number
    of transitions out of each kind; rows without transitions stay zero
    """
    counts = np.zeros((len(KIND_NAMES), len(KIND_NAMES)))
    for _, seq, _ in circuits:
        kinds = [g.kind.value for g in seq]
        for a, b in zip(kinds, kinds[1:]):
            counts[a, b] += 1
    totals = counts.sum(axis=1)
    probs = np.divide(counts, totals[:, None], out=np.zeros_like(counts), where=totals[:, None] > 0)
    return probs, totals


def transition_report(circuits) -> Report:
    probs, totals = transition_matrix(circuits)
    rows = [[KIND_NAMES[a], int(totals[a])] + [float(p) for p in probs[a]] for a in range(len(KIND_NAMES))]
    return Report(name='transitions', columns=['from', 'transitions'] + KIND_NAMES, rows=rows)


def depth_kind_report(circuits, max_depth: int) -> Report:
    counts = np.zeros((max_depth, len(KIND_NAMES)), dtype=int)
    for _, seq, _ in circuits:
        for g, d in seq.placements:
            counts[d, g.kind.value] += 1
    rows = list()
    for d in range(max_depth):
        total = counts[d].sum()
        for k, name in enumerate(KIND_NAMES):
            rows.append([d, name, int(counts[d, k]), float(counts[d, k] / total) if total else 0.0])
    return Report(name='depth_kinds', columns=['depth', 'kind', 'count', 'fraction'], rows=rows)


def pattern_report(circuits, top: int = 20) -> Report:
    counts = Counter('-'.join(g.kind.export_name for g in seq) for _, seq, _ in circuits)
    best = dict()
    for _, seq, r in circuits:
        p = '-'.join(g.kind.export_name for g in seq)
        best[p] = max(best.get(p, 0.0), r.aggregate_test_acc)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    return Report(name='patterns', columns=['pattern', 'count', 'best_test_accuracy'],
                  rows=[[p, c, best[p]] for p, c in ranked])


def analyze_macro(entries: Iterable[Entry], accuracy_threshold: float = DEFAULT_THRESHOLD) -> Dict[str, Report]:
    """
    Reports over the unique circuits of a cache. Reports restricted to
    circuits at or above the threshold carry a notice when none qualify.
    """
    entries = list(entries)
    circuits = [c for c in _decoded(entries) if len(c[1]) > 0]
    if not circuits:
        raise AnalysisException('The cache holds no circuits to analyse')
    num_qubits = circuits[0][1].num_qubits
    max_depth = max(t.max_depth for _, t, _ in entries)
    good = [c for c in circuits if c[2].aggregate_test_acc >= accuracy_threshold]
    reports = {'buckets': bucket_report(circuits),
               'gate_usage': gate_usage_report(good, num_qubits),
               'transitions': transition_report(good),
               'depth_kinds': depth_kind_report(good, max_depth),
               'patterns': pattern_report(good)}
    reports['buckets'].notes.append(f'{len(circuits)} unique circuits; search space: '
                                    f'{search_space_formula(num_qubits, max_depth)}')
    for name in ('gate_usage', 'transitions', 'depth_kinds', 'patterns'):
        if good:
            reports[name].notes.append(f'{len(good)} circuits with test accuracy >= {accuracy_threshold}')
        else:
            reports[name].rows = list()
            reports[name].notes.append(f'no circuits with test accuracy >= {accuracy_threshold}')
    return reports


def unique_hashes_from_log(rows: Iterable[MetricsRow]) -> set:
    return {r.circuit_hash for r in rows if r.legal and r.gates > 0 and r.circuit_hash}


def cross_check(rows: List[MetricsRow], entries: Iterable[Entry]) -> Report:
    """
    Unique circuits replayed from a metrics log against the cache keys
    """
    log_hashes = unique_hashes_from_log(rows)
    cache_hashes = {hash_hex(key) for key, _, _ in entries}
    missing = sorted(log_hashes - cache_hashes)
    report = Report(name='crosscheck', columns=['log_unique', 'cache_unique', 'missing_from_cache', 'consistent'],
                    rows=[[len(log_hashes), len(cache_hashes), len(missing), not missing]])
    if missing:
        report.notes.append('missing: ' + ' '.join(missing[:10]))
    return report
