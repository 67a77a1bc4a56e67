#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Plain-text circuit format, one gate per line:

#qubits 2
#metrics {"cnots": 1, "depth": 2, "gates": 3, "params": 2}
RY q0 p0
CNOT q0 q1
RX q1 p1

Lines starting with '#' are headers or comments; only #qubits is required.
"""
import json
from typing import List

import numpy as np

from qarch.quantum.gates import Gate, GateKind
from .metrics import metrics
from .sequence import GateSequence
from .tensor import CircuitException


def serialize_circuit(seq: GateSequence, params=None) -> str:
    lines = [f'#qubits {seq.num_qubits}',
             f'#metrics {json.dumps(metrics(seq).to_dict(), sort_keys=True)}']
    if params is not None:
        p = np.asarray(params, dtype=float).reshape(-1)
        lines.append(f'#params {json.dumps([repr(float(x)) for x in p])}')
    for g in seq:
        if g.kind.is_rotation:
            lines.append(f'{g.kind.export_name} q{g.qubits[0]} p{g.param_index}')
        else:
            lines.append(f'CNOT q{g.control} q{g.target}')
    return '\n'.join(lines) + '\n'


def _qubit(token: str, line: str) -> int:
    if not token.startswith('q'):
        raise CircuitException(f'Expected a qubit token in "{line}"')
    return int(token[1:])


def parse_circuit(text: str, *, max_depth: int = None) -> GateSequence:
    """
    Parse the plain-text format back into a sequence. Parameter indices are
    re-assigned in line order.
    """
    num_qubits = None
    gates: List[Gate] = list()
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            if line.startswith('#qubits'):
                num_qubits = int(line.split()[1])
            continue
        tokens = line.split()
        kind = GateKind.from_string(tokens[0])
        if kind is None:
            raise CircuitException(f'Unknown gate in "{line}"')
        try:
            if kind.is_rotation:
                gates.append(Gate.rotation(kind, _qubit(tokens[1], line)))
            else:
                gates.append(Gate.cnot(_qubit(tokens[1], line), _qubit(tokens[2], line)))
        except (IndexError, ValueError) as e:
            raise CircuitException(f'Malformed gate line "{line}": {e}')
    if num_qubits is None:
        raise CircuitException('Missing #qubits header')
    seq = GateSequence(num_qubits=num_qubits, max_depth=max_depth)
    for g in gates:
        seq.append(g)
    return seq


def parse_params(text: str) -> np.ndarray or None:
    for line in text.splitlines():
        if line.startswith('#params'):
            return np.array([float(x) for x in json.loads(line[len('#params'):])])
    return None


def save_circuit(path: str, seq: GateSequence, params=None) -> None:
    with open(path, 'w') as f:
        f.write(serialize_circuit(seq, params))


def load_circuit(path: str, *, max_depth: int = None) -> GateSequence:
    with open(path, 'r') as f:
        return parse_circuit(f.read(), max_depth=max_depth)
