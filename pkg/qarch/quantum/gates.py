#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Gate set {Rx, Ry, Rz, CNOT} and the 2x2 matrices of the rotations.
Qubit 0 is the most significant bit of a basis-state index.
"""
import enum
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np


class GateKind(enum.Enum):
    """
    Gate kinds in gate-axis order of the circuit tensor
    """
    Rx = 0
    Ry = 1
    Rz = 2
    CNOT = 3

    def __repr__(self):
        return self.name

    def __str__(self):
        return self.name

    @property
    def is_rotation(self) -> bool:
        return self != GateKind.CNOT

    @property
    def export_name(self) -> str:
        return self.name.upper()

    @classmethod
    def from_string(cls, s: str):
        for gk in GateKind:
            if s.upper() == gk.name.upper():
                return cls(gk)
        return None


ROTATIONS = (GateKind.Rx, GateKind.Ry, GateKind.Rz)


@dataclass(frozen=True)
class Gate:
    """
    A single gate. qubits is (qubit,) for rotations and (control, target)
    for CNOT. param_index is bound when a rotation is placed in a sequence;
    a gate decoded from an action is unbound.
    """
    kind: GateKind
    qubits: Tuple[int, ...]
    param_index: Optional[int] = None

    def __post_init__(self):
        if self.kind.is_rotation:
            if len(self.qubits) != 1:
                raise ValueError(f'{self.kind} acts on exactly one qubit, got {self.qubits}')
        else:
            if len(self.qubits) != 2:
                raise ValueError(f'CNOT needs (control, target), got {self.qubits}')
            if self.qubits[0] == self.qubits[1]:
                raise ValueError(f'CNOT control and target must differ, got {self.qubits}')
            if self.param_index is not None:
                raise ValueError('CNOT carries no parameter')
        if any(q < 0 for q in self.qubits):
            raise ValueError(f'Negative qubit index in {self.qubits}')

    @staticmethod
    def rotation(kind: GateKind, qubit: int, param_index: Optional[int] = None):
        assert kind.is_rotation
        return Gate(kind=kind, qubits=(qubit,), param_index=param_index)

    @staticmethod
    def cnot(control: int, target: int):
        return Gate(kind=GateKind.CNOT, qubits=(control, target))

    @property
    def control(self) -> int:
        assert self.kind == GateKind.CNOT
        return self.qubits[0]

    @property
    def target(self) -> int:
        assert self.kind == GateKind.CNOT
        return self.qubits[1]

    def bind(self, param_index: int):
        """
        Return a copy of a rotation with the parameter index set
        """
        assert self.kind.is_rotation
        return replace(self, param_index=param_index)

    def same_operation(self, other) -> bool:
        """
        Same kind on the same qubits in the same roles, parameters ignored
        """
        return other is not None and self.kind == other.kind and self.qubits == other.qubits

    def label(self) -> str:
        if self.kind.is_rotation:
            return f'{self.kind.export_name} q{self.qubits[0]}'
        return f'CNOT q{self.control} q{self.target}'

    def __str__(self):
        return self.label()


def rotation_matrix(kind: GateKind, theta: float) -> np.ndarray:
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    if kind == GateKind.Rx:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == GateKind.Ry:
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == GateKind.Rz:
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)
    raise ValueError(f'{kind} is not a rotation')


def rotation_derivative(kind: GateKind, theta: float) -> np.ndarray:
    """
    d/dtheta of rotation_matrix(kind, theta)
    """
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    if kind == GateKind.Rx:
        return 0.5 * np.array([[-s, -1j * c], [-1j * c, -s]], dtype=complex)
    if kind == GateKind.Ry:
        return 0.5 * np.array([[-s, -c], [c, -s]], dtype=complex)
    if kind == GateKind.Rz:
        return 0.5j * np.array([[-np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)
    raise ValueError(f'{kind} is not a rotation')
