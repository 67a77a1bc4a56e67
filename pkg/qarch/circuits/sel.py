#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Strongly-entangling-layers benchmark ansatz: per layer, Rz Ry Rz on every
qubit followed by a ring of CNOTs i -> (i + 1) mod Q.
"""
from qarch.quantum.gates import Gate, GateKind
from .sequence import GateSequence
from .tensor import CircuitException

SEL_ROTATIONS = (GateKind.Rz, GateKind.Ry, GateKind.Rz)


def sel_ansatz(num_qubits: int, num_layers: int) -> GateSequence:
    if num_qubits < 2:
        raise CircuitException(f'Entangling layers need at least 2 qubits, got {num_qubits}')
    if num_layers < 1:
        raise CircuitException(f'Number of layers must be positive, got {num_layers}')
    seq = GateSequence(num_qubits=num_qubits)
    for _ in range(num_layers):
        for q in range(num_qubits):
            for kind in SEL_ROTATIONS:
                seq.append(Gate.rotation(kind, q))
        for q in range(num_qubits):
            seq.append(Gate.cnot(q, (q + 1) % num_qubits))
    return seq
