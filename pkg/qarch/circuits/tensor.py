#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Binary 3D tensor encoding of a circuit architecture, shape
[Q x (G + Q - 1) x D]: Q qubits, G gates in the gate set, D maximum depth.

Gate axis layout for a qubit row q:
- 0, 1, 2: Rx, Ry, Rz on q
- 3 + t:   CNOT with q as control and t as target ([q, 3 + q, d] stays 0)

The canonical hash is FNV-1a (64 bit) over the bits flattened in
(qubit, gate, depth) row-major order, one byte per bit.
"""
import numpy as np

from qarch.quantum.gates import GateKind

GATE_SET_SIZE = len(GateKind)
CNOT_OFFSET = GateKind.CNOT.value

FNV_OFFSET_BASIS = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
_MASK64 = 0xffffffffffffffff


class CircuitException(Exception):
    """
    Malformed circuit tensor or illegal placement
    """
    def __init__(self, msg: str):
        super().__init__(f'CircuitException: {msg}')


def cnot_column(target: int) -> int:
    return CNOT_OFFSET + target


class CircuitTensor:
    """
    Binary circuit tensor. Mutation is confined to the owner of an
    episode; observations handed out are read-only snapshots.
    """

    def __init__(self, *, num_qubits: int, max_depth: int, bits: np.ndarray = None,
                 gate_set_size: int = GATE_SET_SIZE):
        assert num_qubits >= 1
        assert max_depth >= 1
        if gate_set_size != GATE_SET_SIZE:
            raise CircuitException(f'Gate set size must be {GATE_SET_SIZE}, not {gate_set_size}')
        self.num_qubits = num_qubits
        self.max_depth = max_depth
        self.gate_set_size = gate_set_size
        shape = (num_qubits, gate_set_size + num_qubits - 1, max_depth)
        if bits is None:
            self.bits = np.zeros(shape, dtype=np.uint8)
        else:
            arr = np.array(bits, dtype=np.uint8)
            if arr.shape != shape:
                raise CircuitException(f'Tensor shape {arr.shape} does not match {shape}')
            self.bits = arr

    @property
    def shape(self):
        return self.bits.shape

    def copy(self):
        return CircuitTensor(num_qubits=self.num_qubits, max_depth=self.max_depth,
                             bits=self.bits.copy())

    def snapshot(self) -> np.ndarray:
        """
        Read-only copy of the bits, used as the environment observation
        """
        s = self.bits.copy()
        s.flags.writeable = False
        return s

    def set_bit(self, qubit: int, column: int, depth: int) -> None:
        if depth >= self.max_depth:
            raise CircuitException(f'Depth {depth} exceeds the maximum depth {self.max_depth}')
        if column == cnot_column(qubit):
            raise CircuitException(f'CNOT on qubit {qubit} cannot target itself')
        if self.bits[qubit, :, depth].any():
            raise CircuitException(f'Qubit {qubit} already holds a gate at depth {depth}')
        self.bits[qubit, column, depth] = 1

    def num_set(self) -> int:
        return int(self.bits.sum())

    def is_empty(self) -> bool:
        return not self.bits.any()

    def validate(self) -> None:
        """
        Check the tensor invariants, raise CircuitException on violation
        """
        if np.any(self.bits > 1):
            raise CircuitException('Tensor entries must be 0 or 1')
        for q in range(self.num_qubits):
            if self.bits[q, cnot_column(q), :].any():
                raise CircuitException(f'Qubit {q} has a CNOT targeting itself')
        per_slot = self.bits.sum(axis=1)
        if np.any(per_slot > 1):
            q, d = np.argwhere(per_slot > 1)[0]
            raise CircuitException(f'More than one gate on qubit {q} at depth {d}')

    def to_hex(self) -> str:
        return np.packbits(self.bits.reshape(-1)).tobytes().hex()

    @staticmethod
    def from_hex(hex_bits: str, *, num_qubits: int, max_depth: int):
        shape = (num_qubits, GATE_SET_SIZE + num_qubits - 1, max_depth)
        count = int(np.prod(shape))
        flat = np.unpackbits(np.frombuffer(bytes.fromhex(hex_bits), dtype=np.uint8))[:count]
        return CircuitTensor(num_qubits=num_qubits, max_depth=max_depth, bits=flat.reshape(shape))

    def __eq__(self, other):
        if not isinstance(other, CircuitTensor):
            return False
        return self.shape == other.shape and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return canonical_hash(self)

    def __repr__(self):
        return f'CircuitTensor(shape={self.shape}, gates={self.num_set()})'


def empty_tensor(num_qubits: int, gate_set_size: int = GATE_SET_SIZE, max_depth: int = 1) -> CircuitTensor:
    """
    All-zero tensor of shape [Q x (G + Q - 1) x D]
    """
    return CircuitTensor(num_qubits=num_qubits, max_depth=max_depth, gate_set_size=gate_set_size)


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def canonical_hash(tensor: CircuitTensor) -> int:
    """
    Stable 64-bit key of a tensor, identical across sessions and platforms
    """
    return fnv1a_64(np.ascontiguousarray(tensor.bits, dtype=np.uint8).tobytes(order='C'))


def hash_hex(key: int) -> str:
    return f'{key:016x}'
