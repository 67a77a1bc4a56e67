#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Dependency graph of a gate sequence. Nodes are positions in the sequence,
an edge joins each gate to the next gate that touches one of its qubits.
Used to cross-check ASAP depths and to find the critical path.
"""
from typing import List

import networkx as nx

from qarch.quantum.gates import Gate
from .sequence import GateSequence


def circuit_dag(seq: GateSequence) -> nx.DiGraph:
    g = nx.DiGraph()
    last_on_qubit = dict()
    for i, (gate, depth) in enumerate(seq.placements):
        g.add_node(i, gate=gate, label=gate.label(), depth=depth)
        for q in gate.qubits:
            prev = last_on_qubit.get(q)
            if prev is not None:
                g.add_edge(prev, i, qubit=q)
            last_on_qubit[q] = i
    return g


def dag_depth(seq: GateSequence) -> int:
    """
    Number of gates on the longest dependency chain, 0 for an empty circuit
    """
    g = circuit_dag(seq)
    if g.number_of_nodes() == 0:
        return 0
    return nx.dag_longest_path_length(g) + 1


def critical_path(seq: GateSequence) -> List[Gate]:
    g = circuit_dag(seq)
    return [g.nodes[n]['gate'] for n in nx.dag_longest_path(g)]
