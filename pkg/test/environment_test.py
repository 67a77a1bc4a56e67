import math
import unittest

import numpy as np

from qarch.circuits.sequence import GateSequence, decode
from qarch.env.actions import ActionSpaceSpec, EnvironmentException, decode_action
from qarch.env.environment import CircuitDesignEnv, is_illegal
from qarch.circuits.tensor import canonical_hash
from qarch.env.rewards import RewardConfig, compute_reward, complexity_remaining, legal_reward
from qarch.env.state import EpisodeState, DoneReason, Violation
from qarch.inner.trainer import SeedResult, aggregate
from qarch.quantum.gates import Gate, GateKind
from qarch.util.exceptions import ConfigException


def result_with(acc: float):
    return aggregate([SeedResult(seed=1, final_train_acc=acc, final_test_acc=acc, final_loss=0.0,
                                 initial_loss=1.0)])


class RyScorer:
    """
    Scores 1.0 once an Ry is present, otherwise 0.25 per gate capped at 0.75
    """
    def __call__(self, tensor):
        seq = decode(tensor)
        if any(g.kind == GateKind.Ry for g in seq):
            return result_with(1.0)
        return result_with(min(0.75, 0.25 * len(seq)))


def make_env(evaluator=None, num_qubits=2, max_depth=4, threshold=1.0, mode='terminate'):
    return CircuitDesignEnv(evaluator=evaluator or (lambda t: result_with(0.5)), num_qubits=num_qubits,
                            reward_config=RewardConfig(performance_threshold=threshold, max_depth=max_depth),
                            illegal_action_mode=mode)


# action indices for 2 qubits: pairs [(0, 1), (1, 0)]
RX_Q0 = (0, 0)
RY_Q0 = (1, 0)
RZ_Q0 = (2, 0)
RZ_Q1 = (2, 1)
CNOT_01 = (3, 0)
CNOT_10 = (3, 1)


class ActionSpaceTest(unittest.TestCase):

    def testPermutationCounts(self):
        for q in range(2, 7):
            spec = ActionSpaceSpec(q)
            self.assertEqual(spec.num_permutations, math.factorial(q) // math.factorial(q - 2))
        self.assertEqual(ActionSpaceSpec(5).size, 80)
        self.assertEqual(ActionSpaceSpec(6).size, 120)
        self.assertEqual(ActionSpaceSpec(2).qubit_permutations, [(0, 1), (1, 0)])

    def testDecode(self):
        spec = ActionSpaceSpec(3)
        self.assertEqual(decode_action((0, 4), spec), Gate.rotation(GateKind.Rx, 1))
        self.assertEqual(decode_action((3, 2), spec), Gate.cnot(1, 0))
        for g in range(4):
            for q in range(spec.num_permutations):
                decode_action((g, q), spec)
        with self.assertRaises(EnvironmentException):
            decode_action((4, 0), spec)
        with self.assertRaises(EnvironmentException):
            decode_action((0, 6), spec)
        with self.assertRaises(EnvironmentException):
            ActionSpaceSpec(1)


class RewardTest(unittest.TestCase):

    def testBranches(self):
        cfg = RewardConfig(max_depth=4)
        self.assertEqual(cfg.extended_horizon, 40)
        self.assertEqual(compute_reward(cfg, legal=False), -0.01)
        self.assertEqual(compute_reward(cfg, legal=True, p_current=0.0, c_rem=0.3), 0.0)
        self.assertAlmostEqual(compute_reward(cfg, legal=True, p_current=0.5, c_rem=0.9375), 2.071875, places=12)
        r_la = compute_reward(cfg, legal=True, p_current=1.0, p_previous=0.5, c_rem=0.5)
        self.assertAlmostEqual(r_la, 0.1 * (0.25 + 0.5 * 40.5) + 100.0, places=12)

    def testWithoutExtendedHorizon(self):
        cfg = RewardConfig(max_depth=4, use_extended_horizon=False)
        self.assertAlmostEqual(compute_reward(cfg, legal=True, p_current=0.5, c_rem=1.0), 0.1 * 0.75)

    def testMonotoneInComplexityRemaining(self):
        cfg = RewardConfig(max_depth=5)
        for delta, sign in ((0.2, 1), (-0.2, -1)):
            rewards = [compute_reward(cfg, legal=True, p_current=0.5 + delta, p_previous=0.5, c_rem=c)
                       for c in np.linspace(0, 1, 11)]
            diffs = np.diff(rewards) * sign
            self.assertTrue(np.all(diffs > 0))

    def testComplexityRemaining(self):
        seq = GateSequence(num_qubits=2)
        self.assertEqual(complexity_remaining(seq, 4), 1.0)
        seq.append(Gate.rotation(GateKind.Rx, 0))
        seq.append(Gate.rotation(GateKind.Ry, 0))
        seq.append(Gate.rotation(GateKind.Rx, 1))
        self.assertAlmostEqual(complexity_remaining(seq, 4), 0.5625)
        full = GateSequence(num_qubits=2)
        for d in range(4):
            full.append(Gate.rotation(GateKind.Rx if d % 2 else GateKind.Ry, 0))
            full.append(Gate.rotation(GateKind.Rx if d % 2 else GateKind.Ry, 1))
        self.assertEqual(complexity_remaining(full, 4), 0.0)

    def testConfigValidation(self):
        with self.assertRaises(ConfigException):
            RewardConfig(performance_threshold=0.0)
        with self.assertRaises(ConfigException):
            RewardConfig(illegal_penalty=0.5)


class EnvironmentTest(unittest.TestCase):

    def testReset(self):
        env = make_env()
        obs, info = env.reset(seed=3)
        self.assertEqual(obs.shape, (2, 5, 4))
        self.assertFalse(obs.any())
        self.assertEqual(info['step'], 0)
        self.assertTrue(env.observation_space.contains(obs))

    def testRepeatedRotationIsIllegal(self):
        env = make_env()
        env.reset()
        _, r, done, truncated, _ = env.step(RX_Q0)
        self.assertFalse(done)
        self.assertFalse(truncated)
        _, r, done, _, info = env.step(RX_Q0)
        self.assertTrue(done)
        self.assertEqual(r, -0.01)
        self.assertEqual(info['done_reason'], 'illegal_action')
        self.assertEqual(info['violation'], 'repeated_gate')
        self.assertEqual(info['gates'], 1)
        with self.assertRaises(EnvironmentException):
            env.step(RY_Q0)

    def testDifferentRotationIsLegal(self):
        env = make_env()
        env.reset()
        env.step(RX_Q0)
        _, _, done, _, info = env.step(RZ_Q0)
        self.assertFalse(done)
        self.assertTrue(info['legal'])

    def testCnotRepeatRules(self):
        state = EpisodeState.fresh(2, 4)
        state.seq.append(Gate.cnot(0, 1))
        self.assertEqual(is_illegal(state, Gate.cnot(0, 1)), Violation.RepeatedGate)
        self.assertIsNone(is_illegal(state, Gate.cnot(1, 0)))

    def testDepthRule(self):
        state = EpisodeState.fresh(2, 2)
        state.seq.append(Gate.rotation(GateKind.Rx, 0))
        state.seq.append(Gate.rotation(GateKind.Ry, 0))
        self.assertEqual(is_illegal(state, Gate.rotation(GateKind.Rz, 0)), Violation.DepthExceeded)
        self.assertEqual(is_illegal(state, Gate.cnot(1, 0)), Violation.DepthExceeded)
        self.assertIsNone(is_illegal(state, Gate.rotation(GateKind.Rz, 1)))

    def testThresholdMet(self):
        env = make_env(evaluator=RyScorer())
        env.reset()
        _, r, done, _, info = env.step(RY_Q0)
        self.assertTrue(done)
        self.assertEqual(info['done_reason'], 'threshold_met')
        c_rem = complexity_remaining(env.state.seq, 4)
        self.assertAlmostEqual(r, 0.1 * (0.5 + c_rem + 40) + 100, places=12)

    def testDepthExhausted(self):
        env = make_env(max_depth=2)
        env.reset()
        for a in (RX_Q0, RZ_Q0, (0, 1)):
            _, _, done, _, info = env.step(a)
        self.assertFalse(done)
        _, _, done, _, info = env.step(RZ_Q1)
        self.assertTrue(done)
        self.assertEqual(info['done_reason'], 'depth_exhausted')

    def testMaskMode(self):
        env = make_env(mode='mask')
        env.reset()
        env.step(RX_Q0)
        _, r, done, _, info = env.step(RX_Q0)
        self.assertFalse(done)
        self.assertEqual(r, -0.01)
        self.assertEqual(info['gates'], 1)
        mask = env.action_mask()
        self.assertEqual(mask.shape, (4, 2))
        self.assertFalse(mask[RX_Q0])
        self.assertTrue(mask[RY_Q0])

    def testObservationSnapshots(self):
        env = make_env()
        obs0, _ = env.reset()
        obs1, _, _, _, _ = env.step(RX_Q0)
        env.step(CNOT_01)
        self.assertFalse(obs0.any())
        self.assertEqual(int(obs1.sum()), 1)
        with self.assertRaises(ValueError):
            obs1[0, 0, 0] = 0

    def testDeltaTelescopes(self):
        env = make_env(evaluator=RyScorer(), max_depth=4)
        rng = np.random.default_rng(9)
        for _ in range(20):
            env.reset()
            total = 0.0
            done = False
            while not done:
                action = (int(rng.choice([0, 2, 3])), int(rng.integers(2)))
                _, _, done, _, info = env.step(action)
                total += info['p_delta']
            if env.state.previous_performance is not None:
                self.assertAlmostEqual(total, env.state.previous_performance, places=12)

    def testRewardBranchesOnRandomTrajectories(self):
        def scorer(tensor):
            return result_with((canonical_hash(tensor) % 17) / 16)

        for mode in ('terminate', 'mask'):
            env = make_env(evaluator=scorer, threshold=0.75, mode=mode)
            cfg = env.reward_config
            rng = np.random.default_rng(23)
            seen = set()
            for _ in range(60):
                env.reset()
                done = False
                while not done:
                    action = (int(rng.integers(4)), int(rng.integers(2)))
                    _, r, done, truncated, info = env.step(action)
                    self.assertFalse(truncated)
                    self.assertTrue(math.isfinite(r))
                    legal = legal_reward(cfg, info['p_delta'], info['complexity_remaining'])
                    branches = {'illegal': cfg.illegal_penalty, 'legal': legal,
                                'success': legal + cfg.success_bonus}
                    matching = [b for b, v in branches.items() if abs(v - r) < 1e-12]
                    self.assertEqual(len(matching), 1)
                    if not info['legal']:
                        expected = 'illegal'
                    elif info['test_accuracy'] >= cfg.performance_threshold:
                        expected = 'success'
                    else:
                        expected = 'legal'
                    self.assertEqual(matching, [expected])
                    seen.add(expected)
            self.assertEqual(seen, {'illegal', 'legal', 'success'})

    def testEpisodeRewardAccumulates(self):
        env = make_env()
        env.reset()
        _, r1, _, _, _ = env.step(RX_Q0)
        _, r2, _, _, info = env.step(CNOT_10)
        self.assertAlmostEqual(info['episode_reward'], r1 + r2)
        env.reset()
        self.assertEqual(env.episode, 1)


if __name__ == '__main__':
    unittest.main()
