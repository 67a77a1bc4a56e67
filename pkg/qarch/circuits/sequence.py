#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Ordered gate sequence with as-soon-as-possible depth assignment, and the
encode/decode pair between sequences and circuit tensors.

Depth of a rotation on q is the current depth counter of q; a CNOT lands on
max(counter[control], counter[target]) and advances both qubits past it.
Decoding orders gates by (depth, qubit of the tensor row) and binds
parameter indices in that order.
"""
from typing import List, Tuple, Iterator

import numpy as np

from qarch.quantum.gates import Gate, GateKind, ROTATIONS
from .tensor import CircuitTensor, CircuitException, cnot_column, CNOT_OFFSET


class GateSequence:
    """
    Gates in application order, each with the depth it landed on
    """

    def __init__(self, *, num_qubits: int, max_depth: int = None):
        assert num_qubits >= 1
        self.num_qubits = num_qubits
        self.max_depth = max_depth
        self._placements: List[Tuple[Gate, int]] = list()
        self._counters = [0] * num_qubits
        self._last_gate = [None] * num_qubits
        self._num_params = 0

    @property
    def gates(self) -> List[Gate]:
        return [g for g, _ in self._placements]

    @property
    def depths(self) -> List[int]:
        return [d for _, d in self._placements]

    @property
    def placements(self) -> List[Tuple[Gate, int]]:
        return list(self._placements)

    @property
    def num_params(self) -> int:
        return self._num_params

    @property
    def counters(self) -> Tuple[int, ...]:
        """
        Next free depth of every qubit
        """
        return tuple(self._counters)

    @property
    def depth(self) -> int:
        return max(self._counters) if self._counters else 0

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self):
        return len(self._placements)

    def landing_depth(self, gate: Gate) -> int:
        """
        Depth the gate would land on if appended now
        """
        return max(self._counters[q] for q in gate.qubits)

    def last_gate_on(self, qubit: int) -> Gate or None:
        return self._last_gate[qubit]

    def append(self, gate: Gate) -> Tuple[Gate, int]:
        """
        Append a gate at its ASAP depth. Rotations get the next parameter index.
        :return: (bound gate, depth)
        """
        for q in gate.qubits:
            if q >= self.num_qubits:
                raise CircuitException(f'Gate {gate} addresses qubit {q} of a {self.num_qubits}-qubit circuit')
        d = self.landing_depth(gate)
        if self.max_depth is not None and d >= self.max_depth:
            raise CircuitException(f'Gate {gate} would land on depth {d}, maximum is {self.max_depth}')
        if gate.kind.is_rotation:
            gate = gate.bind(self._num_params)
            self._num_params += 1
        for q in gate.qubits:
            self._counters[q] = d + 1
            self._last_gate[q] = gate
        self._placements.append((gate, d))
        return gate, d

    def copy(self):
        s = GateSequence(num_qubits=self.num_qubits, max_depth=self.max_depth)
        s._placements = list(self._placements)
        s._counters = list(self._counters)
        s._last_gate = list(self._last_gate)
        s._num_params = self._num_params
        return s

    def __eq__(self, other):
        if not isinstance(other, GateSequence):
            return False
        return self.num_qubits == other.num_qubits and self._placements == other._placements

    def __repr__(self):
        return f'GateSequence(num_qubits={self.num_qubits}, gates=[{", ".join(map(str, self.gates))}])'


def place_gate(tensor: CircuitTensor, seq: GateSequence, gate: Gate) -> Tuple[CircuitTensor, GateSequence]:
    """
    Append gate to seq and set its bit in tensor, both in place.
    Raises CircuitException when the landing depth is not below the tensor depth.
    """
    d = seq.landing_depth(gate)
    if d >= tensor.max_depth:
        raise CircuitException(f'Gate {gate} would land on depth {d}, maximum is {tensor.max_depth}')
    if gate.kind.is_rotation:
        tensor.set_bit(gate.qubits[0], gate.kind.value, d)
    else:
        tensor.set_bit(gate.control, cnot_column(gate.target), d)
    seq.append(gate)
    return tensor, seq


def encode(seq: GateSequence, max_depth: int) -> CircuitTensor:
    tensor = CircuitTensor(num_qubits=seq.num_qubits, max_depth=max_depth)
    replay = GateSequence(num_qubits=seq.num_qubits, max_depth=max_depth)
    for g in seq:
        place_gate(tensor, replay, g)
    return tensor


def decode(tensor: CircuitTensor) -> GateSequence:
    """
    Rebuild the gate sequence of a tensor. Rejects a qubit used twice at one
    depth, counting the target slot of a CNOT.
    """
    tensor.validate()
    q_count, _, d_count = tensor.shape
    seq = GateSequence(num_qubits=q_count, max_depth=d_count)
    for d in range(d_count):
        busy = set()
        layer = list()
        for q in range(q_count):
            cols = np.flatnonzero(tensor.bits[q, :, d])
            if len(cols) == 0:
                continue
            col = int(cols[0])
            if col < CNOT_OFFSET:
                g = Gate.rotation(ROTATIONS[col], q)
            else:
                g = Gate.cnot(q, col - CNOT_OFFSET)
            for used in g.qubits:
                if used in busy:
                    raise CircuitException(f'Qubit {used} is used twice at depth {d}')
                busy.add(used)
            layer.append(g)
        for g in layer:
            if seq.landing_depth(g) > d:
                raise CircuitException(f'Gate {g} at depth {d} overlaps an earlier gate')
            seq.append(g)
    return seq


def normalize(tensor: CircuitTensor) -> CircuitTensor:
    """
    Canonical tensor of the circuit: decode then encode with ASAP depths
    """
    return encode(decode(tensor), tensor.max_depth)


def count_kind(seq: GateSequence, kind: GateKind) -> int:
    return sum(1 for g in seq if g.kind == kind)
