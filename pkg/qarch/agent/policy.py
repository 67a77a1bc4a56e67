#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Actor-critic network for the (gate, qubit-permutation) action pair: two
independent categorical heads over a shared actor trunk and a separate
critic trunk with a scalar value head.
"""
import math
from typing import Sequence, Tuple

import numpy as np
import torch
import torch.nn as nn
from torch.distributions import Categorical

HIDDEN_SIZES = (64, 64)
HIDDEN_GAIN = math.sqrt(2)
POLICY_GAIN = 0.01
VALUE_GAIN = 1.0


def _layer(in_size: int, out_size: int, gain: float) -> nn.Linear:
    layer = nn.Linear(in_size, out_size)
    nn.init.orthogonal_(layer.weight, gain=gain)
    nn.init.zeros_(layer.bias)
    return layer


def _trunk(in_size: int, hidden: Sequence[int]) -> nn.Sequential:
    layers = list()
    for size in hidden:
        layers.extend([_layer(in_size, size, HIDDEN_GAIN), nn.Tanh()])
        in_size = size
    return nn.Sequential(*layers)


class PolicyNetwork(nn.Module):
    """
    Input is the flattened binary circuit tensor, outputs are gate logits,
    qubit-permutation logits and the state value
    """

    def __init__(self, obs_size: int, nvec: Sequence[int], hidden: Sequence[int] = HIDDEN_SIZES):
        super().__init__()
        assert len(nvec) == 2
        self.obs_size = int(obs_size)
        self.nvec = tuple(int(n) for n in nvec)
        self.hidden = tuple(hidden)
        self.actor = _trunk(self.obs_size, self.hidden)
        self.critic = _trunk(self.obs_size, self.hidden)
        self.gate_head = _layer(self.hidden[-1], self.nvec[0], POLICY_GAIN)
        self.qubit_head = _layer(self.hidden[-1], self.nvec[1], POLICY_GAIN)
        self.value_head = _layer(self.hidden[-1], 1, VALUE_GAIN)

    @property
    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def forward(self, obs: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        a = self.actor(obs)
        return self.gate_head(a), self.qubit_head(a), self.value_head(self.critic(obs)).squeeze(-1)

    def distributions(self, obs: torch.Tensor) -> Tuple[Categorical, Categorical, torch.Tensor]:
        gate_logits, qubit_logits, value = self(obs)
        return Categorical(logits=gate_logits), Categorical(logits=qubit_logits), value

    def evaluate_actions(self, obs: torch.Tensor, actions: torch.Tensor) \
            -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """
        Joint log-probability and summed entropy of both heads, and the value,
        for a batch of (gate, qubit) actions
        """
        gate_dist, qubit_dist, value = self.distributions(obs)
        log_prob = gate_dist.log_prob(actions[:, 0]) + qubit_dist.log_prob(actions[:, 1])
        entropy = gate_dist.entropy() + qubit_dist.entropy()
        return log_prob, entropy, value


def flatten_observation(observation, obs_size: int) -> torch.Tensor:
    """
    Float tensor of a single observation or a batch of observations
    """
    x = torch.as_tensor(np.asarray(observation, dtype=np.float32))
    if x.numel() == obs_size:
        return x.reshape(obs_size)
    if x.numel() % obs_size != 0:
        raise ValueError(f'Observation with {x.numel()} entries does not match input size {obs_size}')
    return x.reshape(-1, obs_size)
