#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Multidiscrete action (g_idx, q_idx). g_idx selects Rx, Ry, Rz or CNOT;
q_idx indexes the Q*(Q-1) ordered qubit pairs. Rotations use q_idx mod Q
as their qubit, CNOT uses the pair as (control, target).
"""
import itertools
from typing import List, Tuple

from qarch.circuits.tensor import GATE_SET_SIZE
from qarch.quantum.gates import Gate, GateKind


class EnvironmentException(Exception):
    """
    Invalid action or misuse of an environment
    """
    def __init__(self, msg: str):
        super().__init__(f'EnvironmentException: {msg}')


class ActionSpaceSpec:

    def __init__(self, num_qubits: int):
        if num_qubits < 2:
            raise EnvironmentException(f'Action space needs at least 2 qubits, got {num_qubits}')
        self.num_qubits = num_qubits
        self.num_gate_choices = GATE_SET_SIZE
        self.qubit_permutations: List[Tuple[int, int]] = list(itertools.permutations(range(num_qubits), 2))
        self.singletons: List[Tuple[int]] = [(q,) for q in range(num_qubits)]

    @property
    def num_permutations(self) -> int:
        return len(self.qubit_permutations)

    @property
    def size(self) -> int:
        return self.num_gate_choices * self.num_permutations

    @property
    def nvec(self) -> List[int]:
        return [self.num_gate_choices, self.num_permutations]

    def __repr__(self):
        return f'ActionSpaceSpec(num_qubits={self.num_qubits}, size={self.num_gate_choices}x{self.num_permutations})'


def decode_action(action, spec: ActionSpaceSpec) -> Gate:
    """
    Unbound gate for an action pair
    """
    try:
        g_idx, q_idx = (int(a) for a in action)
    except (TypeError, ValueError):
        raise EnvironmentException(f'Action must be a pair of integers, got {action}')
    if not 0 <= g_idx < spec.num_gate_choices:
        raise EnvironmentException(f'Gate index {g_idx} out of range [0, {spec.num_gate_choices})')
    if not 0 <= q_idx < spec.num_permutations:
        raise EnvironmentException(f'Qubit index {q_idx} out of range [0, {spec.num_permutations})')
    kind = GateKind(g_idx)
    if kind.is_rotation:
        return Gate.rotation(kind, q_idx % spec.num_qubits)
    control, target = spec.qubit_permutations[q_idx]
    return Gate.cnot(control, target)
