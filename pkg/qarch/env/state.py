#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers
import enum
from dataclasses import dataclass

from qarch.circuits.sequence import GateSequence
from qarch.circuits.tensor import CircuitTensor, empty_tensor, GATE_SET_SIZE
from qarch.inner.trainer import EvalResult


class DoneReason(enum.Enum):
    ThresholdMet = 'threshold_met'
    IllegalAction = 'illegal_action'
    DepthExhausted = 'depth_exhausted'

    def __str__(self):
        return self.value

    def __repr__(self):
        return self.name

    @classmethod
    def from_string(cls, s: str):
        for dr in DoneReason:
            if s.lower() in (dr.value, dr.name.lower()):
                return cls(dr)
        return None


class Violation(enum.Enum):
    """
    Why an action is illegal
    """
    RepeatedGate = 'repeated_gate'
    DepthExceeded = 'depth_exceeded'

    def __str__(self):
        return self.value


@dataclass
class EpisodeState:
    """
    Mutable state of one episode, owned by a single environment
    """
    tensor: CircuitTensor
    seq: GateSequence
    previous_performance: float or None = None
    step_count: int = 0
    done: bool = False
    done_reason: DoneReason or None = None
    episode_reward: float = 0.0
    last_result: EvalResult or None = None
    last_violation: Violation or None = None
    last_p_delta: float = 0.0
    last_complexity_remaining: float = 1.0

    @staticmethod
    def fresh(num_qubits: int, max_depth: int):
        return EpisodeState(tensor=empty_tensor(num_qubits, GATE_SET_SIZE, max_depth),
                            seq=GateSequence(num_qubits=num_qubits, max_depth=max_depth))

    @property
    def num_qubits(self) -> int:
        return self.tensor.num_qubits

    @property
    def max_depth(self) -> int:
        return self.tensor.max_depth

    def depth_exhausted(self) -> bool:
        """
        True when every qubit sits at the maximum depth, i.e. no legal action remains
        """
        return all(c >= self.max_depth for c in self.seq.counters)
