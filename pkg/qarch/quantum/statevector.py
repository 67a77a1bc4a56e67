#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Dense statevector simulation of circuits over {Rx, Ry, Rz, CNOT}.

Single states are wrapped in Statevector; the inner loop works on batches,
i.e. complex arrays of shape (num_samples, 2**num_qubits), through the
*_batch functions. All functions are pure.
"""
from typing import Iterable, List, Optional

import numpy as np

from .gates import Gate, GateKind, rotation_matrix

NORM_TOLERANCE = 1e-10
ENCODE_TOLERANCE = 1e-9


class QuantumCoreException(Exception):
    """
    Invalid input to the simulator
    """
    def __init__(self, msg: str):
        super().__init__(f'QuantumCoreException: {msg}')


def qubits_for_length(length: int) -> int:
    """
    Number of qubits needed to hold a vector of this length, which must
    be a power of two
    """
    if length < 2 or length & (length - 1) != 0:
        raise QuantumCoreException(f'Length {length} is not a power of two >= 2')
    return length.bit_length() - 1


class Statevector:
    """
    Unit-norm complex amplitude vector of length 2**num_qubits
    """

    def __init__(self, amplitudes, num_qubits: Optional[int] = None):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        q = qubits_for_length(len(amps))
        if num_qubits is not None and num_qubits != q:
            raise QuantumCoreException(f'{len(amps)} amplitudes do not describe {num_qubits} qubits')
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise QuantumCoreException(f'State norm {norm} deviates from 1')
        amps.flags.writeable = False
        self._amplitudes = amps
        self._num_qubits = q

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def num_qubits(self) -> int:
        return self._num_qubits

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self._amplitudes))

    def allclose(self, other, atol: float = NORM_TOLERANCE) -> bool:
        return self.num_qubits == other.num_qubits and \
            np.allclose(self._amplitudes, other.amplitudes, atol=atol, rtol=0)

    def __repr__(self):
        return f'Statevector(num_qubits={self._num_qubits}, amplitudes={self._amplitudes})'


class ClassDistribution:
    """
    Probability per class after measuring all qubits
    """

    def __init__(self, probabilities):
        p = np.array(probabilities, dtype=float).reshape(-1)
        if np.any(p < -NORM_TOLERANCE) or np.any(p > 1 + NORM_TOLERANCE):
            raise QuantumCoreException(f'Class probabilities out of [0,1]: {p}')
        if abs(p.sum() - 1.0) > NORM_TOLERANCE:
            raise QuantumCoreException(f'Class probabilities sum to {p.sum()}')
        p.flags.writeable = False
        self.probabilities = p

    @property
    def num_classes(self) -> int:
        return len(self.probabilities)

    def __repr__(self):
        return f'ClassDistribution({self.probabilities})'


def amplitude_encode(features) -> Statevector:
    """
    Load an L2-normalised real feature vector of length 2**Q as amplitudes
    """
    f = np.asarray(features, dtype=float).reshape(-1)
    qubits_for_length(len(f))
    norm = np.linalg.norm(f)
    if abs(norm - 1.0) > ENCODE_TOLERANCE:
        raise QuantumCoreException(f'Features must be L2-normalised, norm is {norm}')
    # renormalise inside the accepted tolerance so the state invariant holds
    return Statevector(f / norm)


def encode_batch(features) -> np.ndarray:
    """
    Amplitude-encode a [num_samples x 2**Q] feature matrix into a batch
    """
    f = np.atleast_2d(np.asarray(features, dtype=float))
    qubits_for_length(f.shape[1])
    norms = np.linalg.norm(f, axis=1)
    if np.any(np.abs(norms - 1.0) > ENCODE_TOLERANCE):
        raise QuantumCoreException('All feature rows must be L2-normalised')
    return (f / norms[:, None]).astype(complex)


def _apply_matrix_batch(states: np.ndarray, matrix: np.ndarray, qubit: int, num_qubits: int) -> np.ndarray:
    b = states.shape[0]
    psi = states.reshape((b, 2 ** qubit, 2, 2 ** (num_qubits - qubit - 1)))
    return np.einsum('ij,ajb->aib', matrix, psi).reshape(b, -1)


def _apply_cnot_batch(states: np.ndarray, control: int, target: int, num_qubits: int) -> np.ndarray:
    b = states.shape[0]
    psi = states.reshape((b,) + (2,) * num_qubits).copy()
    index = [slice(None)] * (num_qubits + 1)
    index[1 + control] = 1
    index = tuple(index)
    # axis of the target once the control axis is sliced away
    target_axis = 1 + (target if target < control else target - 1)
    psi[index] = np.flip(psi[index], axis=target_axis).copy()
    return psi.reshape(b, -1)


def check_gate(gate: Gate, num_qubits: int) -> None:
    for q in gate.qubits:
        if q >= num_qubits:
            raise QuantumCoreException(f'Gate {gate} addresses qubit {q} of a {num_qubits}-qubit state')


def apply_matrix_batch(states: np.ndarray, gate: Gate, matrix: np.ndarray, num_qubits: int) -> np.ndarray:
    """
    Apply an arbitrary 2x2 matrix on the qubit of a rotation gate, used for
    inverses and derivatives by the gradient code
    """
    return _apply_matrix_batch(states, matrix, gate.qubits[0], num_qubits)


def apply_gate_batch(states: np.ndarray, gate: Gate, theta: Optional[float], num_qubits: int) -> np.ndarray:
    if gate.kind == GateKind.CNOT:
        return _apply_cnot_batch(states, gate.control, gate.target, num_qubits)
    return _apply_matrix_batch(states, rotation_matrix(gate.kind, theta), gate.qubits[0], num_qubits)


def gates_of(seq) -> List[Gate]:
    """
    Gates of a GateSequence or of any iterable of gates
    """
    return list(seq)


def count_rotations(gates: Iterable[Gate]) -> int:
    return sum(1 for g in gates if g.kind.is_rotation)


def check_params(gates: List[Gate], params) -> np.ndarray:
    p = np.asarray(params, dtype=float).reshape(-1)
    n = count_rotations(gates)
    if len(p) != n:
        raise QuantumCoreException(f'Circuit has {n} rotations but {len(p)} parameters were given')
    for g in gates:
        if g.kind.is_rotation and (g.param_index is None or g.param_index >= n):
            raise QuantumCoreException(f'Rotation {g} has no valid parameter index')
    return p


def run_batch(seq, params, states: np.ndarray, num_qubits: int) -> np.ndarray:
    """
    Run the circuit on every row of a batch of states
    """
    gates = gates_of(seq)
    p = check_params(gates, params)
    for g in gates:
        check_gate(g, num_qubits)
        states = apply_gate_batch(states, g, p[g.param_index] if g.kind.is_rotation else None,
                                  num_qubits)
    return states


def apply_gate(state: Statevector, gate: Gate, theta: Optional[float] = None) -> Statevector:
    """
    Apply one gate; theta is required for rotations and refused for CNOT
    """
    check_gate(gate, state.num_qubits)
    if gate.kind.is_rotation and theta is None:
        raise QuantumCoreException(f'Rotation {gate} needs an angle')
    if not gate.kind.is_rotation and theta is not None:
        raise QuantumCoreException('CNOT takes no angle')
    out = apply_gate_batch(state.amplitudes[None, :], gate, theta, state.num_qubits)
    return Statevector(out[0])


def run_circuit(seq, params, input_state: Statevector) -> Statevector:
    """
    Apply the gates of seq in order; params[g.param_index] drives rotation g
    """
    out = run_batch(seq, params, input_state.amplitudes[None, :], input_state.num_qubits)
    return Statevector(out[0])


def class_assignment(num_qubits: int, num_classes: int) -> np.ndarray:
    """
    Class of every basis state: floor(i * num_classes / 2**Q), contiguous
    blocks whose sizes differ by at most one
    """
    dim = 2 ** num_qubits
    if num_classes < 1 or num_classes > dim:
        raise QuantumCoreException(f'{num_classes} classes cannot be read from {num_qubits} qubits')
    return (np.arange(dim) * num_classes) // dim


def class_matrix(num_qubits: int, num_classes: int) -> np.ndarray:
    """
    [2**Q x num_classes] 0/1 matrix mapping basis probabilities to class probabilities
    """
    assignment = class_assignment(num_qubits, num_classes)
    m = np.zeros((len(assignment), num_classes))
    m[np.arange(len(assignment)), assignment] = 1.0
    return m


def class_probabilities_batch(states: np.ndarray, num_qubits: int, num_classes: int) -> np.ndarray:
    probs = (np.abs(states) ** 2) @ class_matrix(num_qubits, num_classes)
    return probs / probs.sum(axis=1, keepdims=True)


def class_probabilities(state: Statevector, num_classes: int) -> ClassDistribution:
    return ClassDistribution(class_probabilities_batch(state.amplitudes[None, :],
                                                       state.num_qubits, num_classes)[0])


def predict(probs: ClassDistribution or np.ndarray) -> int:
    """
    Most probable class, lowest index on ties
    """
    p = probs.probabilities if isinstance(probs, ClassDistribution) else np.asarray(probs)
    return int(np.argmax(p))


def predict_batch(class_probs: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, which is the tie rule
    return np.argmax(class_probs, axis=1)
