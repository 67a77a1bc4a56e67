import math
import os
import tempfile
import unittest

import gymnasium as gym
import numpy as np
import torch
from gymnasium import spaces

from qarch.agent.buffer import RolloutBuffer, PpoException, compute_gae, gae
from qarch.agent.policy import PolicyNetwork
from qarch.agent.ppo import PpoConfig, sample_action, clipped_surrogate, minibatches, ppo_update, train, \
    save_checkpoint, load_checkpoint
from qarch.agent.random_agent import random_agent
from qarch.agent.tracking import RunTracker
from qarch.circuits.sequence import decode
from qarch.env.environment import CircuitDesignEnv
from qarch.env.rewards import RewardConfig
from qarch.inner.trainer import SeedResult, aggregate
from qarch.logging.metrics_log import MetricsLog, read_metrics_log
from qarch.quantum.gates import GateKind
from qarch.util.exceptions import ConfigException


class TwoArmedBandit(gym.Env):
    """
    One-step episodes; gate index 1 pays 1, gate index 0 pays 0
    """
    def __init__(self):
        self.observation_space = spaces.MultiBinary([2, 2])
        self.action_space = spaces.MultiDiscrete([2, 2])

    def reset(self, *, seed=None, options=None):
        super().reset(seed=seed)
        return np.ones((2, 2), dtype=np.int8), {}

    def step(self, action):
        return np.ones((2, 2), dtype=np.int8), float(action[0] == 1), True, False, {}


def ry_scorer(tensor):
    seq = decode(tensor)
    acc = 1.0 if any(g.kind == GateKind.Ry for g in seq) else min(0.75, 0.25 * len(seq))
    return aggregate([SeedResult(seed=1, final_train_acc=acc, final_test_acc=acc, final_loss=0.0,
                                 initial_loss=1.0)])


def circuit_env():
    return CircuitDesignEnv(evaluator=ry_scorer, num_qubits=2, reward_config=RewardConfig(max_depth=3))


class PolicyTest(unittest.TestCase):

    def setUp(self):
        torch.manual_seed(0)
        self.policy = PolicyNetwork(2 * 5 * 4, [4, 2])

    def testParameterCount(self):
        obs, c = 2 * 5 * 4, 2
        trunk = obs * 64 + 64 + 64 * 64 + 64
        expected = 2 * trunk + (64 * 4 + 4) + (64 * c + c) + (64 + 1)
        self.assertEqual(self.policy.num_parameters, expected)

    def testHeadsNormalize(self):
        obs = torch.randint(0, 2, (16, 40)).float()
        gate_dist, qubit_dist, value = self.policy.distributions(obs)
        self.assertTrue(torch.allclose(gate_dist.probs.sum(-1), torch.ones(16), atol=1e-6))
        self.assertTrue(torch.allclose(qubit_dist.probs.sum(-1), torch.ones(16), atol=1e-6))
        self.assertEqual(value.shape, (16,))

    def testInitialEntropyNearUniform(self):
        gate_dist, _, _ = self.policy.distributions(torch.zeros(1, 40))
        self.assertAlmostEqual(gate_dist.entropy().item(), math.log(4), places=2)
        uniform = torch.distributions.Categorical(logits=torch.zeros(4))
        self.assertAlmostEqual(uniform.entropy().item(), math.log(4), places=6)

    def testUniformSampling(self):
        gen = torch.Generator().manual_seed(1)
        obs = np.zeros((2, 5, 4), dtype=np.uint8)
        counts = np.zeros(4)
        for _ in range(10000):
            action, _, _ = sample_action(self.policy, obs, gen)
            counts[action[0]] += 1
        self.assertTrue(np.all(np.abs(counts / 10000 - 0.25) < 0.02))

    def testJointLogProb(self):
        obs = np.zeros((2, 5, 4), dtype=np.uint8)
        obs[0, 1, 0] = 1
        action, log_prob, value = sample_action(self.policy, obs, torch.Generator().manual_seed(3))
        gate_logits, qubit_logits, v = self.policy(torch.as_tensor(obs, dtype=torch.float32).reshape(1, -1))
        expected = torch.log_softmax(gate_logits, -1)[0, action[0]] + torch.log_softmax(qubit_logits, -1)[0, action[1]]
        self.assertAlmostEqual(log_prob, expected.item(), delta=1e-6)
        self.assertAlmostEqual(value, v.item(), places=6)

    def testGreedyIsDeterministic(self):
        obs = np.ones((2, 5, 4), dtype=np.uint8)
        first = sample_action(self.policy, obs, greedy=True)
        for _ in range(5):
            again = sample_action(self.policy, obs, greedy=True)
            self.assertTrue(np.array_equal(first[0], again[0]))
            self.assertEqual(first[1], again[1])

    def testShapeMismatch(self):
        with self.assertRaises(PpoException):
            sample_action(self.policy, np.zeros((2, 5, 3)))


class GaeTest(unittest.TestCase):

    def testTerminalSingleTransition(self):
        adv, ret = gae(np.array([2.0]), np.array([0.5]), np.array([True]), 7.0, 0.99, 0.95)
        self.assertAlmostEqual(adv[0], 1.5)
        self.assertAlmostEqual(ret[0], 2.0)

    def testBootstrapWhenNotTerminal(self):
        adv, _ = gae(np.array([1.0]), np.array([0.5]), np.array([False]), 2.0, 0.5, 0.95)
        self.assertAlmostEqual(adv[0], 1.0 + 0.5 * 2.0 - 0.5)

    def testGammaZero(self):
        rewards = np.array([1.0, -1.0, 0.5])
        values = np.array([0.2, 0.3, 0.4])
        adv, _ = gae(rewards, values, np.array([False, False, False]), 9.0, 0.0, 0.95)
        np.testing.assert_allclose(adv, rewards - values)

    def testLambdaOneIsMonteCarlo(self):
        rewards = np.array([1.0, 2.0, 3.0])
        values = np.array([0.5, 0.4, 0.3])
        adv, ret = gae(rewards, values, np.array([False, False, True]), 0.0, 0.9, 1.0)
        np.testing.assert_allclose(ret, [5.23, 4.7, 3.0], atol=1e-12)
        np.testing.assert_allclose(adv, [4.73, 4.3, 2.7], atol=1e-12)

    def testResetAtEpisodeBoundary(self):
        adv, _ = gae(np.array([1.0, 1.0]), np.array([0.0, 0.0]), np.array([True, True]), 0.0, 0.99, 0.95)
        np.testing.assert_allclose(adv, [1.0, 1.0])

    def testBuffer(self):
        buffer = RolloutBuffer(2, 4)
        with self.assertRaises(PpoException):
            compute_gae(buffer, 0.99, 0.95)
        buffer.add(np.ones(4), (1, 0), -1.0, 1.0, False, 0.0)
        buffer.add(np.ones(4), (0, 1), -1.0, 1.0, True, 0.0)
        self.assertTrue(buffer.full)
        with self.assertRaises(PpoException):
            buffer.add(np.ones(4), (0, 1), -1.0, 1.0, True, 0.0)
        adv, ret = compute_gae(buffer, 1.0, 1.0)
        np.testing.assert_allclose(adv, [2.0, 1.0])
        buffer.reset()
        self.assertEqual(len(buffer), 0)
        self.assertIsNone(buffer.advantages)


class PpoUpdateTest(unittest.TestCase):

    def testSurrogateIdentityAtRatioOne(self):
        adv = torch.tensor([0.3, -1.2, 2.0, 0.1])
        self.assertAlmostEqual(clipped_surrogate(torch.ones(4), adv, 0.2).item(), adv.mean().item(), places=6)
        self.assertAlmostEqual(clipped_surrogate(torch.tensor([2.0]), torch.tensor([1.0]), 0.2).item(), 1.2,
                               places=6)
        self.assertAlmostEqual(clipped_surrogate(torch.tensor([0.5]), torch.tensor([-1.0]), 0.2).item(), -0.8,
                               places=6)

    def testMinibatches(self):
        batches = list(minibatches(300, 128, torch.Generator().manual_seed(0)))
        self.assertEqual([len(b) for b in batches], [128, 128])
        self.assertEqual(len(set(torch.cat(batches).tolist())), 256)
        self.assertEqual([len(b) for b in minibatches(100, 128)], [100])

    def _filled_buffer(self, policy, reward=1.0):
        buffer = RolloutBuffer(8, policy.obs_size)
        gen = torch.Generator().manual_seed(5)
        for t in range(8):
            obs = np.full(policy.obs_size, t % 2)
            action, log_prob, value = sample_action(policy, obs, gen)
            buffer.add(obs, action, log_prob, reward * action[0], t % 4 == 3, value)
        return buffer

    def testUpdateStatistics(self):
        torch.manual_seed(0)
        policy = PolicyNetwork(4, [4, 3])
        optimizer = torch.optim.Adam(policy.parameters(), lr=0.003)
        cfg = PpoConfig(n_steps=8, batch_size=4, n_epochs=3)
        buffer = self._filled_buffer(policy)
        with self.assertRaises(PpoException):
            ppo_update(policy, optimizer, buffer, cfg)
        compute_gae(buffer, cfg.gamma, cfg.gae_lambda)
        stats = ppo_update(policy, optimizer, buffer, cfg, torch.Generator().manual_seed(0))
        self.assertEqual(stats['minibatches'], 6)
        for key in ('policy_loss', 'value_loss', 'entropy', 'approx_kl', 'clip_fraction'):
            self.assertTrue(math.isfinite(stats[key]))
        probs = policy.distributions(torch.rand(5, 4))[0].probs.sum(-1)
        self.assertTrue(torch.allclose(probs, torch.ones(5), atol=1e-6))

    def testNonFiniteLossAborts(self):
        torch.manual_seed(0)
        policy = PolicyNetwork(4, [4, 3])
        optimizer = torch.optim.Adam(policy.parameters(), lr=0.003)
        buffer = self._filled_buffer(policy, reward=float('nan'))
        compute_gae(buffer, 0.99, 0.95)
        with self.assertRaises(PpoException):
            ppo_update(policy, optimizer, buffer, PpoConfig(n_steps=8, batch_size=8, n_epochs=1))

    def testSurrogateGradientMatchesFiniteDifferences(self):
        torch.manual_seed(2)
        policy = PolicyNetwork(2, [2, 2], hidden=(2,)).double()
        obs = torch.tensor([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], dtype=torch.float64)
        actions = torch.tensor([[0, 1], [1, 0], [1, 1]])
        adv = torch.tensor([0.7, -0.4, 1.1], dtype=torch.float64)
        returns = torch.tensor([1.0, 0.0, 0.5], dtype=torch.float64)
        with torch.no_grad():
            old = policy.evaluate_actions(obs, actions)[0] + torch.tensor([0.05, -0.03, 0.02], dtype=torch.float64)

        def loss_fn():
            log_prob, entropy, value = policy.evaluate_actions(obs, actions)
            return -clipped_surrogate(torch.exp(log_prob - old), adv, 0.2) + \
                0.5 * ((value - returns) ** 2).mean() - 0.03 * entropy.mean()

        policy.zero_grad()
        loss_fn().backward()
        h = 1e-6
        for p in policy.parameters():
            flat = p.data.view(-1)
            grad = p.grad.view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                with torch.no_grad():
                    flat[i] = orig + h
                    up = loss_fn().item()
                    flat[i] = orig - h
                    down = loss_fn().item()
                    flat[i] = orig
                fd = (up - down) / (2 * h)
                self.assertLessEqual(abs(fd - grad[i].item()), 1e-4 * max(1.0, abs(fd)))

    def testConfigValidation(self):
        with self.assertRaises(ConfigException):
            PpoConfig(clip_range=0.0)
        with self.assertRaises(ConfigException):
            PpoConfig(gamma=1.5)
        self.assertEqual(PpoConfig().with_changes(n_steps=512).n_steps, 512)


class TrainingTest(unittest.TestCase):

    def testBanditConverges(self):
        for seed in (0, 1, 2):
            env = TwoArmedBandit()
            policy, tracker = train(env, PpoConfig(n_steps=128, batch_size=64, total_steps=2000), seed)
            self.assertEqual(tracker.step, 2000)
            self.assertEqual(tracker.episodes, 2000)
            action, _, _ = sample_action(policy, np.ones((2, 2)), greedy=True)
            self.assertEqual(action[0], 1)

    def _ppo_log(self, directory, name, seed=4):
        path = os.path.join(directory, name)
        with MetricsLog(path) as log:
            tracker = RunTracker('ppo', metrics_log=log)
            train(circuit_env(), PpoConfig(n_steps=64, batch_size=32, n_epochs=2, total_steps=200), seed,
                  tracker=tracker, checkpoint_path=os.path.join(directory, 'ckpt', name + '.pt'))
        with open(path, 'rb') as f:
            return f.read(), tracker

    def testRunsAreReproducible(self):
        with tempfile.TemporaryDirectory() as d:
            first, tracker = self._ppo_log(d, 'a.csv')
            second, _ = self._ppo_log(d, 'b.csv')
            self.assertEqual(first, second)
            rows = read_metrics_log(os.path.join(d, 'a.csv'))
            self.assertEqual([r.step for r in rows], list(range(1, 201)))
            self.assertEqual(sum(r.done for r in rows), tracker.episodes)
            self.assertTrue(os.path.exists(os.path.join(d, 'ckpt', 'a.csv.pt')))

    def testCheckpointRoundTrip(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'policy.pt')
            torch.manual_seed(0)
            policy = PolicyNetwork(40, [4, 2])
            optimizer = torch.optim.Adam(policy.parameters(), lr=0.003)
            save_checkpoint(path, policy, optimizer, step=12, cfg=PpoConfig())
            restored, _, checkpoint = load_checkpoint(path)
            self.assertEqual(checkpoint['step'], 12)
            obs = torch.rand(3, 40)
            for a, b in zip(policy(obs), restored(obs)):
                self.assertTrue(torch.equal(a, b))
            bad = torch.load(path, weights_only=False)
            bad['format_version'] = 99
            torch.save(bad, path)
            with self.assertRaises(PpoException):
                load_checkpoint(path)

    def testRandomAgent(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'random.csv')
            with MetricsLog(path) as log:
                tracker = random_agent(circuit_env(), 2000, 7, tracker=RunTracker('random', metrics_log=log))
            rows = read_metrics_log(path)
        self.assertEqual(len(rows), 2000)
        gates = np.bincount([r.action_gate for r in rows], minlength=4) / 2000
        qubits = np.bincount([r.action_qubit for r in rows], minlength=2) / 2000
        self.assertTrue(np.all(np.abs(gates - 0.25) < 0.05))
        self.assertTrue(np.all(np.abs(qubits - 0.5) < 0.05))
        self.assertEqual(tracker.best_accuracy, 1.0)
        best = decode(tracker.best_tensor())
        self.assertTrue(any(g.kind == GateKind.Ry for g in best))
        self.assertTrue(tracker.summary(1.0)['converged'])


if __name__ == '__main__':
    unittest.main()
