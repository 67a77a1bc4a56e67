#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Mean cross-entropy of a circuit classifier and its exact gradient with
respect to the rotation angles.

Two exact methods are provided:
- adjoint: one forward pass, then a backward sweep that un-applies every gate
  to the state and to the adjoint vector (reverse-mode through the statevector)
- parameter_shift: probabilities at theta +/- pi/2 per rotation

Both are checked against central finite differences in the test suite.
"""
import enum
from typing import Tuple

import numpy as np

from .gates import GateKind, rotation_matrix, rotation_derivative
from .statevector import QuantumCoreException, apply_gate_batch, apply_matrix_batch, \
    check_gate, check_params, class_matrix, gates_of

# class probabilities are clamped to [PROB_FLOOR, 1] before the log
PROB_FLOOR = 1e-12
SHIFT = np.pi / 2
FD_STEP = 1e-5


class GradientMethod(enum.Enum):
    Adjoint = enum.auto()
    ParameterShift = enum.auto()

    def __str__(self):
        return self.name

    @classmethod
    def from_string(cls, s: str):
        for gm in GradientMethod:
            if s.replace('_', '').lower() == gm.name.lower():
                return cls(gm)
        return None


def _check_batch(states: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    states = np.atleast_2d(states)
    labels = np.atleast_2d(np.asarray(labels, dtype=float))
    if states.shape[0] == 0:
        raise QuantumCoreException('Empty batch')
    if states.shape[0] != labels.shape[0]:
        raise QuantumCoreException(f'{states.shape[0]} states but {labels.shape[0]} labels')
    return states, labels


def _forward(gates, params, states, num_qubits):
    for g in gates:
        states = apply_gate_batch(states, g, params[g.param_index] if g.kind.is_rotation else None,
                                  num_qubits)
    return states


def _loss_terms(final_states: np.ndarray, labels: np.ndarray, cmat: np.ndarray):
    """
    Loss and dL/dP for every basis probability P of every sample
    """
    n = labels.shape[0]
    class_probs = (np.abs(final_states) ** 2) @ cmat
    clamped = np.clip(class_probs, PROB_FLOOR, 1.0)
    loss = -np.sum(labels * np.log(clamped)) / n
    dclass = np.where(class_probs > PROB_FLOOR, -labels / clamped, 0.0) / n
    return float(loss), dclass @ cmat.T


def cross_entropy(seq, params, states: np.ndarray, labels: np.ndarray, num_qubits: int) -> float:
    """
    Mean cross-entropy over a batch of encoded states with one-hot labels
    """
    states, labels = _check_batch(states, labels)
    gates = gates_of(seq)
    p = check_params(gates, params)
    for g in gates:
        check_gate(g, num_qubits)
    final = _forward(gates, p, states, num_qubits)
    loss, _ = _loss_terms(final, labels, class_matrix(num_qubits, labels.shape[1]))
    return loss


def _adjoint(gates, params, states, labels, num_qubits) -> Tuple[float, np.ndarray]:
    cmat = class_matrix(num_qubits, labels.shape[1])
    psi = _forward(gates, params, states, num_qubits)
    loss, dprob = _loss_terms(psi, labels, cmat)
    lam = dprob * psi
    grad = np.zeros(len(params))
    for g in reversed(gates):
        if g.kind == GateKind.CNOT:
            psi = apply_gate_batch(psi, g, None, num_qubits)
            lam = apply_gate_batch(lam, g, None, num_qubits)
            continue
        theta = params[g.param_index]
        inverse = rotation_matrix(g.kind, -theta)
        psi = apply_matrix_batch(psi, g, inverse, num_qubits)
        dpsi = apply_matrix_batch(psi, g, rotation_derivative(g.kind, theta), num_qubits)
        grad[g.param_index] += 2.0 * np.real(np.sum(np.conj(lam) * dpsi))
        lam = apply_matrix_batch(lam, g, inverse, num_qubits)
    return loss, grad


def _parameter_shift(gates, params, states, labels, num_qubits) -> Tuple[float, np.ndarray]:
    cmat = class_matrix(num_qubits, labels.shape[1])
    loss, dprob = _loss_terms(_forward(gates, params, states, num_qubits), labels, cmat)
    grad = np.zeros(len(params))
    for i in range(len(params)):
        plus = params.copy()
        plus[i] += SHIFT
        minus = params.copy()
        minus[i] -= SHIFT
        p_plus = np.abs(_forward(gates, plus, states, num_qubits)) ** 2
        p_minus = np.abs(_forward(gates, minus, states, num_qubits)) ** 2
        grad[i] = np.sum(dprob * (p_plus - p_minus) / 2.0)
    return loss, grad


def loss_and_gradient(seq, params, states: np.ndarray, labels: np.ndarray, num_qubits: int,
                      method: GradientMethod = GradientMethod.Adjoint) -> Tuple[float, np.ndarray]:
    """
    Mean cross-entropy and its exact gradient
    :param seq: GateSequence or list of bound gates
    :param params: angle per rotation, indexed by Gate.param_index
    :param states: [num_samples x 2**Q] encoded batch
    :param labels: [num_samples x num_classes] one-hot labels
    :param num_qubits:
    :param method: GradientMethod
    :return: (loss, gradient)
    """
    states, labels = _check_batch(states, labels)
    gates = gates_of(seq)
    p = check_params(gates, params)
    for g in gates:
        check_gate(g, num_qubits)
    if method == GradientMethod.ParameterShift:
        return _parameter_shift(gates, p, states, labels, num_qubits)
    return _adjoint(gates, p, states, labels, num_qubits)


def loss_gradient(seq, params, states: np.ndarray, labels: np.ndarray, num_qubits: int,
                  method: GradientMethod = GradientMethod.Adjoint) -> np.ndarray:
    _, grad = loss_and_gradient(seq, params, states, labels, num_qubits, method=method)
    return grad


def finite_difference_gradient(seq, params, states: np.ndarray, labels: np.ndarray, num_qubits: int,
                               step: float = FD_STEP) -> np.ndarray:
    """
    Central finite differences of the mean cross-entropy
    """
    p = np.asarray(params, dtype=float).reshape(-1)
    grad = np.zeros(len(p))
    for i in range(len(p)):
        plus = p.copy()
        plus[i] += step
        minus = p.copy()
        minus[i] -= step
        grad[i] = (cross_entropy(seq, plus, states, labels, num_qubits) -
                   cross_entropy(seq, minus, states, labels, num_qubits)) / (2 * step)
    return grad
