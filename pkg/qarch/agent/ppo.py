#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Proximal policy optimisation with a factorised (gate, qubit-permutation)
policy on a single environment: collect n_steps transitions, estimate
advantages with GAE, then run n_epochs of clipped-surrogate updates over
shuffled minibatches.

When batch_size does not divide n_steps the final partial minibatch of
each epoch is dropped; a rollout shorter than batch_size is used as a
single minibatch.
"""
import math
import os
from dataclasses import dataclass, asdict, replace
from typing import Dict, Tuple

import numpy as np
import torch
import torch.nn as nn

from qarch.logging.qarch_logger import get_logger
from qarch.util.exceptions import ConfigException
from .buffer import PpoException, RolloutBuffer, compute_gae
from .policy import PolicyNetwork, flatten_observation
from .tracking import RunTracker

CHECKPOINT_VERSION = 1
ADVANTAGE_EPS = 1e-8


@dataclass(frozen=True)
class PpoConfig:
    learning_rate: float = 0.003
    n_steps: int = 128
    batch_size: int = 128
    n_epochs: int = 10
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_range: float = 0.2
    ent_coef: float = 0.03
    vf_coef: float = 0.5
    max_grad_norm: float = 0.5
    total_steps: int = 100000

    def __post_init__(self):
        if self.learning_rate <= 0 or self.n_steps < 1 or self.batch_size < 1 or self.n_epochs < 1 \
                or self.total_steps < 1:
            raise ConfigException(f'Learning rate, n_steps, batch size, epochs and total steps '
                                  f'must be positive: {self}')
        if not 0.0 <= self.gamma <= 1.0 or not 0.0 <= self.gae_lambda <= 1.0:
            raise ConfigException(f'gamma and gae_lambda must be in [0, 1]: {self}')
        if self.clip_range <= 0 or self.max_grad_norm <= 0:
            raise ConfigException(f'Clip range and gradient norm limit must be positive: {self}')

    def with_changes(self, **kwargs):
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return asdict(self)


def sample_action(policy: PolicyNetwork, observation, generator: torch.Generator = None, *,
                  greedy: bool = False) -> Tuple[np.ndarray, float, float]:
    """
    Draw (gate, qubit) from the two heads, or take the argmax of each when
    greedy.
    :return: action pair, joint log-probability, value estimate
    """
    if np.asarray(observation).size != policy.obs_size:
        raise PpoException(f'Observation of shape {np.shape(observation)} does not match '
                           f'policy input size {policy.obs_size}')
    obs = flatten_observation(observation, policy.obs_size).unsqueeze(0)
    with torch.no_grad():
        gate_dist, qubit_dist, value = policy.distributions(obs)
        if greedy:
            gate = gate_dist.probs.argmax(dim=-1)
            qubit = qubit_dist.probs.argmax(dim=-1)
        else:
            gate = torch.multinomial(gate_dist.probs, 1, generator=generator).squeeze(-1)
            qubit = torch.multinomial(qubit_dist.probs, 1, generator=generator).squeeze(-1)
        log_prob = gate_dist.log_prob(gate) + qubit_dist.log_prob(qubit)
    return np.array([int(gate.item()), int(qubit.item())]), float(log_prob.item()), float(value.item())


def clipped_surrogate(ratio: torch.Tensor, advantages: torch.Tensor, clip_range: float) -> torch.Tensor:
    """
    mean of min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)
    """
    clipped = torch.clamp(ratio, 1.0 - clip_range, 1.0 + clip_range)
    return torch.min(ratio * advantages, clipped * advantages).mean()


def minibatches(n: int, batch_size: int, generator: torch.Generator = None):
    order = torch.randperm(n, generator=generator)
    if n <= batch_size:
        yield order
        return
    for start in range(0, n - batch_size + 1, batch_size):
        yield order[start:start + batch_size]


def ppo_update(policy: PolicyNetwork, optimizer: torch.optim.Optimizer, buffer: RolloutBuffer, cfg: PpoConfig,
               generator: torch.Generator = None) -> Dict[str, float]:
    """
    n_epochs of clipped-surrogate updates on a buffer with computed advantages.
    Advantages are normalised over the whole rollout.
    :return: mean loss statistics over all minibatches
    """
    if buffer.advantages is None:
        raise PpoException('Advantages must be computed before an update')
    n = len(buffer)
    obs = torch.as_tensor(buffer.observations[:n])
    actions = torch.as_tensor(buffer.actions[:n])
    old_log_probs = torch.as_tensor(buffer.log_probs[:n], dtype=torch.float32)
    returns = torch.as_tensor(buffer.returns, dtype=torch.float32)
    adv = torch.as_tensor(buffer.advantages, dtype=torch.float32)
    if n > 1:
        adv = (adv - adv.mean()) / (adv.std(unbiased=False) + ADVANTAGE_EPS)

    totals = dict(policy_loss=0.0, value_loss=0.0, entropy=0.0, approx_kl=0.0, clip_fraction=0.0)
    count = 0
    for _ in range(cfg.n_epochs):
        for idx in minibatches(n, cfg.batch_size, generator):
            log_prob, entropy, value = policy.evaluate_actions(obs[idx], actions[idx])
            log_ratio = log_prob - old_log_probs[idx]
            ratio = torch.exp(log_ratio)
            policy_loss = -clipped_surrogate(ratio, adv[idx], cfg.clip_range)
            value_loss = ((value - returns[idx]) ** 2).mean()
            entropy_mean = entropy.mean()
            loss = policy_loss + cfg.vf_coef * value_loss - cfg.ent_coef * entropy_mean
            if not torch.isfinite(loss):
                raise PpoException(f'Non-finite loss {loss.item()} (policy {policy_loss.item()}, '
                                   f'value {value_loss.item()}, entropy {entropy_mean.item()}, '
                                   f'max |advantage| {adv.abs().max().item()})')
            optimizer.zero_grad()
            loss.backward()
            nn.utils.clip_grad_norm_(policy.parameters(), cfg.max_grad_norm)
            optimizer.step()
            with torch.no_grad():
                totals['policy_loss'] += policy_loss.item()
                totals['value_loss'] += value_loss.item()
                totals['entropy'] += entropy_mean.item()
                totals['approx_kl'] += ((ratio - 1.0) - log_ratio).mean().item()
                totals['clip_fraction'] += ((ratio - 1.0).abs() > cfg.clip_range).float().mean().item()
            count += 1
    stats = {k: v / count for k, v in totals.items()}
    stats['minibatches'] = count
    return stats


def make_policy(env, seed: int) -> PolicyNetwork:
    torch.manual_seed(seed)
    return PolicyNetwork(int(np.prod(env.observation_space.shape)), [int(n) for n in env.action_space.nvec])


def save_checkpoint(path: str, policy: PolicyNetwork, optimizer: torch.optim.Optimizer, *, step: int,
                    cfg: PpoConfig):
    torch.save({'format_version': CHECKPOINT_VERSION,
                'obs_size': policy.obs_size,
                'nvec': list(policy.nvec),
                'hidden': list(policy.hidden),
                'policy': policy.state_dict(),
                'optimizer': optimizer.state_dict(),
                'step': step,
                'config': cfg.to_dict()}, path)


def load_checkpoint(path: str) -> Tuple[PolicyNetwork, torch.optim.Optimizer, dict]:
    """
    Rebuild the network and its optimizer from a checkpoint file
    """
    checkpoint = torch.load(path, map_location='cpu', weights_only=False)
    version = checkpoint.get('format_version')
    if version != CHECKPOINT_VERSION:
        raise PpoException(f'Checkpoint {path} has format version {version}, expected {CHECKPOINT_VERSION}')
    policy = PolicyNetwork(checkpoint['obs_size'], checkpoint['nvec'], checkpoint['hidden'])
    policy.load_state_dict(checkpoint['policy'])
    cfg = PpoConfig(**checkpoint['config'])
    optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.learning_rate)
    optimizer.load_state_dict(checkpoint['optimizer'])
    return policy, optimizer, checkpoint


def train(env, cfg: PpoConfig, seed: int, *, tracker: RunTracker = None, checkpoint_path: str = None,
          logger=None) -> Tuple[PolicyNetwork, RunTracker]:
    """
    Alternate rollout collection and policy updates until total_steps
    environment steps have been taken. The network is checkpointed after
    every update when checkpoint_path is given.
    """
    logger = logger if logger is not None else get_logger('agent')
    tracker = tracker if tracker is not None else RunTracker(f'ppo-{seed}', logger=logger)
    policy = make_policy(env, seed)
    optimizer = torch.optim.Adam(policy.parameters(), lr=cfg.learning_rate)
    generator = torch.Generator().manual_seed(seed)
    buffer = RolloutBuffer(cfg.n_steps, policy.obs_size)
    updates = math.ceil(cfg.total_steps / cfg.n_steps)
    logger.info(f'Training PPO for {cfg.total_steps} steps ({updates} updates) with seed {seed}, '
                f'policy has {policy.num_parameters} parameters')

    obs, _ = env.reset(seed=seed)
    steps = 0
    for update in range(updates):
        buffer.reset()
        while not buffer.full and steps < cfg.total_steps:
            action, log_prob, value = sample_action(policy, obs, generator)
            next_obs, reward, terminated, truncated, info = env.step(action)
            done = terminated or truncated
            buffer.add(flatten_observation(obs, policy.obs_size).numpy(), action, log_prob, reward, done, value)
            tracker.record(next_obs, action, reward, done, info)
            steps += 1
            obs = env.reset()[0] if done else next_obs
        last_value = 0.0
        if not buffer.dones[len(buffer) - 1]:
            with torch.no_grad():
                last_value = float(policy(flatten_observation(obs, policy.obs_size).unsqueeze(0))[2].item())
        compute_gae(buffer, cfg.gamma, cfg.gae_lambda, last_value)
        stats = ppo_update(policy, optimizer, buffer, cfg, generator)
        logger.debug(f'Update {update + 1}/{updates} at step {steps}: ' +
                     ' '.join(f'{k}={v:.4g}' for k, v in stats.items()))
        if checkpoint_path is not None:
            os.makedirs(os.path.dirname(os.path.abspath(checkpoint_path)), exist_ok=True)
            save_checkpoint(checkpoint_path, policy, optimizer, step=steps, cfg=cfg)
    logger.info(f'PPO run finished after {steps} steps and {tracker.episodes} episodes, '
                f'best accuracy {tracker.best_accuracy:.4f}')
    return policy, tracker
