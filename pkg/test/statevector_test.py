import typing
import unittest

import numpy as np

from qarch.quantum.gates import Gate, GateKind, rotation_matrix, rotation_derivative
from qarch.quantum.statevector import Statevector, ClassDistribution, QuantumCoreException, \
    amplitude_encode, encode_batch, apply_gate, run_circuit, class_assignment, \
    class_probabilities, predict, predict_batch, qubits_for_length


def basis(index: int, num_qubits: int) -> Statevector:
    amps = np.zeros(2 ** num_qubits)
    amps[index] = 1.0
    return Statevector(amps)


class StatevectorTest(unittest.TestCase):

    def testRxPiFlips(self):
        out = apply_gate(basis(0, 1), Gate.rotation(GateKind.Rx, 0), np.pi)
        self.assertAlmostEqual(abs(out.amplitudes[1]), 1.0, places=12)
        self.assertAlmostEqual(abs(out.amplitudes[0]), 0.0, places=12)

    def testQubitZeroIsMostSignificant(self):
        out = apply_gate(basis(0, 2), Gate.rotation(GateKind.Ry, 0), np.pi)
        # |00> -> |10>, index 2
        self.assertAlmostEqual(out.probabilities()[2], 1.0, places=12)

    def testCnotTruthTable(self):
        cnot = Gate.cnot(0, 1)
        expected = {0: 0, 1: 1, 2: 3, 3: 2}
        for i, j in expected.items():
            out = apply_gate(basis(i, 2), cnot)
            self.assertAlmostEqual(out.probabilities()[j], 1.0, places=12)
        reverse = Gate.cnot(1, 0)
        expected = {0: 0, 1: 3, 2: 2, 3: 1}
        for i, j in expected.items():
            out = apply_gate(basis(i, 2), reverse)
            self.assertAlmostEqual(out.probabilities()[j], 1.0, places=12)

    def testCnotNonAdjacentQubits(self):
        out = apply_gate(basis(0b101, 3), Gate.cnot(2, 0))
        self.assertAlmostEqual(out.probabilities()[0b001], 1.0, places=12)

    def testRzKeepsProbabilities(self):
        rng = np.random.default_rng(5)
        v = rng.normal(size=8)
        s = amplitude_encode(v / np.linalg.norm(v))
        for q in range(3):
            out = apply_gate(s, Gate.rotation(GateKind.Rz, q), 1.234)
            self.assertTrue(np.allclose(out.probabilities(), s.probabilities(), atol=1e-12))

    def testRotationsUnitary(self):
        for kind in (GateKind.Rx, GateKind.Ry, GateKind.Rz):
            for theta in np.linspace(-np.pi, np.pi, 7):
                m = rotation_matrix(kind, theta)
                self.assertTrue(np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12))

    def testRotationDerivative(self):
        h = 1e-6
        for kind in (GateKind.Rx, GateKind.Ry, GateKind.Rz):
            fd = (rotation_matrix(kind, 0.3 + h) - rotation_matrix(kind, 0.3 - h)) / (2 * h)
            self.assertTrue(np.allclose(rotation_derivative(kind, 0.3), fd, atol=1e-8))

    def testNormPreserved(self):
        rng = np.random.default_rng(11)
        from qarch.circuits.sequence import GateSequence
        for _ in range(20):
            seq = GateSequence(num_qubits=3)
            for _ in range(8):
                if rng.random() < 0.3:
                    c, t = rng.choice(3, size=2, replace=False)
                    seq.append(Gate.cnot(int(c), int(t)))
                else:
                    seq.append(Gate.rotation(GateKind(int(rng.integers(3))), int(rng.integers(3))))
            v = rng.normal(size=8)
            out = run_circuit(seq, rng.uniform(-np.pi, np.pi, seq.num_params),
                              amplitude_encode(v / np.linalg.norm(v)))
            self.assertAlmostEqual(out.norm(), 1.0, places=10)

    def testEncodingChecks(self):
        with self.assertRaises(QuantumCoreException):
            amplitude_encode([1.0, 0.0, 0.0])
        with self.assertRaises(QuantumCoreException):
            amplitude_encode([1.0, 1.0])
        with self.assertRaises(QuantumCoreException):
            Statevector([1.0, 1.0])
        self.assertEqual(qubits_for_length(32), 5)
        batch = encode_batch(np.eye(4))
        self.assertEqual(batch.shape, (4, 4))

    def testEncodeDoesNotFreezeCaller(self):
        v = np.array([1.0, 0.0])
        amplitude_encode(v)
        v[0] = 0.5
        self.assertEqual(v[0], 0.5)

    def testAngleRules(self):
        s = basis(0, 2)
        with self.assertRaises(QuantumCoreException):
            apply_gate(s, Gate.rotation(GateKind.Rx, 0))
        with self.assertRaises(QuantumCoreException):
            apply_gate(s, Gate.cnot(0, 1), 0.5)
        with self.assertRaises(QuantumCoreException):
            apply_gate(s, Gate.rotation(GateKind.Rx, 2), 0.5)

    def testUnboundRotation(self):
        self.assertEqual(typing.get_type_hints(Gate)['param_index'], typing.Optional[int])
        free = Gate.rotation(GateKind.Ry, 1)
        self.assertIsNone(free.param_index)
        self.assertEqual(free.bind(3).param_index, 3)
        self.assertTrue(free.same_operation(free.bind(3)))
        with self.assertRaises(ValueError):
            Gate(kind=GateKind.CNOT, qubits=(0, 1), param_index=0)

    def testClassAssignment(self):
        self.assertEqual(list(class_assignment(2, 2)), [0, 0, 1, 1])
        self.assertEqual(list(class_assignment(2, 3)), [0, 0, 1, 2])
        self.assertEqual(list(class_assignment(1, 2)), [0, 1])
        sizes = np.bincount(class_assignment(5, 3))
        self.assertLessEqual(sizes.max() - sizes.min(), 1)
        with self.assertRaises(QuantumCoreException):
            class_assignment(1, 3)

    def testClassProbabilities(self):
        s = Statevector(np.full(4, 0.5))
        dist = class_probabilities(s, 3)
        self.assertTrue(np.allclose(dist.probabilities, [0.5, 0.25, 0.25]))
        self.assertEqual(predict(dist), 0)

    def testPredictTies(self):
        self.assertEqual(predict(ClassDistribution([0.5, 0.5])), 0)
        self.assertEqual(list(predict_batch(np.array([[0.2, 0.4, 0.4], [0.6, 0.2, 0.2]]))), [1, 0])
        with self.assertRaises(QuantumCoreException):
            ClassDistribution([0.7, 0.7])


if __name__ == '__main__':
    unittest.main()
