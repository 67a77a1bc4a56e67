#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Shaped reward of one environment step:

- illegal action:              illegal_penalty
- legal, P_current < T_p:      legal_scale * (0.5 * P_delta + P_delta * (C_rem + E_H))
- legal, P_current >= T_p:     the legal reward above + success_bonus

P_delta is P_current on the first legal action of an episode and
P_current - P_previous afterwards. C_rem is the fraction of depth and gate
budget left after the action; E_H = horizon_factor * D_max.
"""
from dataclasses import dataclass, asdict

from qarch.circuits.sequence import GateSequence
from qarch.util.exceptions import ConfigException


@dataclass(frozen=True)
class RewardConfig:
    performance_threshold: float = 1.0
    max_depth: int = 4
    illegal_penalty: float = -0.01
    success_bonus: float = 100.0
    legal_scale: float = 0.1
    horizon_factor: float = 10.0
    use_extended_horizon: bool = True

    def __post_init__(self):
        if not 0.0 < self.performance_threshold <= 1.0:
            raise ConfigException(f'Performance threshold must be in (0, 1], got {self.performance_threshold}')
        if self.illegal_penalty >= 0.0:
            raise ConfigException(f'Illegal-action penalty must be negative, got {self.illegal_penalty}')
        if self.max_depth < 1:
            raise ConfigException(f'Maximum depth must be positive, got {self.max_depth}')

    @property
    def extended_horizon(self) -> float:
        return self.horizon_factor * self.max_depth if self.use_extended_horizon else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def complexity_remaining(seq: GateSequence, max_depth: int) -> float:
    """
    Mean of the remaining depth fraction and the remaining gate fraction,
    with Q * D_max gates as the gate budget
    """
    max_gates = seq.num_qubits * max_depth
    depth_frac = (max_depth - seq.depth) / max_depth
    gates_frac = (max_gates - len(seq)) / max_gates
    return min(1.0, max(0.0, (depth_frac + gates_frac) / 2))


def performance_delta(p_current: float, p_previous: float or None) -> float:
    return p_current if p_previous is None else p_current - p_previous


def legal_reward(cfg: RewardConfig, p_delta: float, c_rem: float) -> float:
    return cfg.legal_scale * (0.5 * p_delta + p_delta * (c_rem + cfg.extended_horizon))


def compute_reward(cfg: RewardConfig, *, legal: bool, p_current: float = 0.0, p_previous: float = None,
                   c_rem: float = 1.0) -> float:
    if not legal:
        return cfg.illegal_penalty
    r = legal_reward(cfg, performance_delta(p_current, p_previous), c_rem)
    if p_current >= cfg.performance_threshold:
        r += cfg.success_bonus
    return r
