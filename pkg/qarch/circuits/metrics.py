#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers
from dataclasses import dataclass, asdict

from qarch.quantum.gates import GateKind
from .sequence import GateSequence, count_kind


@dataclass(frozen=True)
class CircuitMetrics:
    """
    Complexity of a circuit: gates = params + cnots
    """
    gates: int
    params: int
    cnots: int
    depth: int

    def to_dict(self) -> dict:
        return asdict(self)

    def __str__(self):
        return f'G={self.gates} P={self.params} C={self.cnots} D={self.depth}'


def metrics(seq: GateSequence) -> CircuitMetrics:
    cnots = count_kind(seq, GateKind.CNOT)
    return CircuitMetrics(gates=len(seq), params=seq.num_params, cnots=cnots, depth=seq.depth)
