#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Training-set cross-entropy over a uniform grid of two rotation angles,
the other angles held at their trained values
"""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from qarch.circuits.sequence import GateSequence
from qarch.datasets.dataset import Dataset
from qarch.quantum.gradients import cross_entropy
from qarch.quantum.statevector import encode_batch
from .reports import Report, AnalysisException

INTERVALS = {'unit': (-1.0, 1.0), 'pi': (-math.pi, math.pi)}
DEFAULT_POINTS = 41


@dataclass(frozen=True)
class Landscape:
    pair: Tuple[int, int]
    xs: np.ndarray
    ys: np.ndarray
    losses: np.ndarray

    def minimum(self) -> Tuple[float, float, float]:
        i, j = np.unravel_index(np.argmin(self.losses), self.losses.shape)
        return float(self.xs[i]), float(self.ys[j]), float(self.losses[i, j])

    def to_report(self) -> Report:
        rows = [[float(x), float(y), float(self.losses[i, j])]
                for i, x in enumerate(self.xs) for j, y in enumerate(self.ys)]
        return Report(name='landscape', columns=['p' + str(self.pair[0]), 'p' + str(self.pair[1]), 'loss'],
                      rows=rows)


def grid(interval: str or Tuple[float, float], points: int) -> np.ndarray:
    lo, hi = INTERVALS[interval] if isinstance(interval, str) else interval
    if points < 2 or lo >= hi:
        raise AnalysisException(f'Grid needs at least 2 points over a non-empty interval, got {points} '
                                f'over [{lo}, {hi}]')
    return np.linspace(lo, hi, points)


def cost_landscape(seq: GateSequence, params, data: Dataset, pair: Tuple[int, int] = (0, 1),
                   interval: str or Tuple[float, float] = 'pi', points: int = DEFAULT_POINTS) -> Landscape:
    """
    :param seq: circuit
    :param params: trained angles, one per rotation
    :param pair: indices of the two angles to sweep
    :param interval: 'unit', 'pi' or an explicit (lo, hi)
    """
    if seq.num_params < 2:
        raise AnalysisException(f'A landscape needs at least 2 parameters, circuit has {seq.num_params}')
    params = np.array(params, dtype=float)
    if len(params) != seq.num_params:
        raise AnalysisException(f'{len(params)} parameters given for a circuit with {seq.num_params}')
    a, b = pair
    if a == b or not (0 <= a < seq.num_params and 0 <= b < seq.num_params):
        raise AnalysisException(f'Invalid parameter pair {pair}')
    xs = grid(interval, points)
    states = encode_batch(data.x_train)
    labels = data.y_train.astype(float)
    losses = np.zeros((len(xs), len(xs)))
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            p = params.copy()
            p[a], p[b] = x, y
            losses[i, j] = cross_entropy(seq, p, states, labels, data.num_qubits)
    return Landscape(pair=(a, b), xs=xs, ys=xs.copy(), losses=losses)
