import multiprocessing
import os
import struct
import tempfile
import unittest
import zlib

import numpy as np

from qarch.circuits.sequence import GateSequence, encode
from qarch.circuits.tensor import CircuitTensor, canonical_hash
from qarch.datasets.loaders import load_iris
from qarch.inner.cache import EvalCache, CacheException, cached_evaluate, open_cache, cache_namespace, \
    MAGIC, CACHE_PATH_ENV
from qarch.inner.trainer import OptConfig, aggregate, SeedResult
from qarch.quantum.gates import Gate, GateKind


class CountingTrainer:
    """
    Stand-in for train_vqc: accuracy derived from the gate count
    """
    def __init__(self):
        self.calls = 0

    def __call__(self, seq, data, cfg):
        self.calls += 1
        acc = min(1.0, 0.25 * len(seq))
        return aggregate([SeedResult(seed=s, final_train_acc=acc, final_test_acc=acc, final_loss=0.1 * s,
                                     initial_loss=1.0, trained_params=(0.1, 1 / 3)) for s in cfg.seeds])


def tensor_of(*gates, num_qubits=2, max_depth=4) -> CircuitTensor:
    seq = GateSequence(num_qubits=num_qubits)
    for g in gates:
        seq.append(g)
    return encode(seq, max_depth)


RY0 = Gate.rotation(GateKind.Ry, 0)
RX1 = Gate.rotation(GateKind.Rx, 1)


def result_for(key: int):
    acc = (key % 5) / 4
    return aggregate([SeedResult(seed=1, final_train_acc=acc, final_test_acc=acc, final_loss=0.5,
                                 initial_loss=1.0)])


def append_records(path: str, namespace: str, first_key: int, count: int, barrier):
    with EvalCache(path, namespace) as cache:
        barrier.wait(60)
        for key in range(first_key, first_key + count):
            cache.put(key, tensor_of(RY0), result_for(key))


def read_records(path: str) -> list:
    """
    (key, checksum matches) for every record in the file, in file order
    """
    with open(path, 'rb') as f:
        blob = f.read()
    _, _, ns_len = struct.unpack_from('<8sHH', blob, 0)
    offset = struct.calcsize('<8sHH') + ns_len
    records = list()
    while offset < len(blob):
        key, length, crc = struct.unpack_from('<QII', blob, offset)
        start = offset + struct.calcsize('<QII')
        payload = blob[start:start + length]
        records.append((key, len(payload) == length and zlib.crc32(payload) == crc))
        offset = start + length
    return records


class EvalCacheTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.data = load_iris((0, 1))
        cls.cfg = OptConfig(epochs=2)

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, 'evals.evc')

    def tearDown(self):
        self.tmp.cleanup()

    def testHitReturnsStoredResult(self):
        trainer = CountingTrainer()
        with EvalCache(self.path, 'ns') as cache:
            first = cached_evaluate(tensor_of(RY0), self.data, self.cfg, cache, trainer=trainer)
            second = cached_evaluate(tensor_of(RY0), self.data, self.cfg, cache, trainer=trainer)
            self.assertEqual(trainer.calls, 1)
            self.assertEqual(first.to_json(), second.to_json())
            self.assertEqual((cache.hits, cache.misses), (1, 1))

    def testSurvivesRestart(self):
        trainer = CountingTrainer()
        with EvalCache(self.path, 'ns') as cache:
            stored = cached_evaluate(tensor_of(RY0, RX1), self.data, self.cfg, cache, trainer=trainer)
        with EvalCache(self.path, 'ns') as cache:
            self.assertEqual(len(cache), 1)
            again = cached_evaluate(tensor_of(RY0, RX1), self.data, self.cfg, cache, trainer=trainer)
        self.assertEqual(trainer.calls, 1)
        self.assertEqual(stored.to_json(), again.to_json())
        with open(self.path, 'rb') as f:
            self.assertEqual(f.read(len(MAGIC)), MAGIC)

    def testRealTrainingRoundTrip(self):
        with EvalCache(self.path, 'ns') as cache:
            fresh = cached_evaluate(tensor_of(RY0), self.data, self.cfg, cache)
        with EvalCache(self.path, 'ns') as cache:
            reread = cached_evaluate(tensor_of(RY0), self.data, self.cfg, cache,
                                     trainer=lambda *a: self.fail('trained again'))
        self.assertEqual(fresh, reread)

    def testNormalisedTensorsShareEntry(self):
        trainer = CountingTrainer()
        shifted = np.zeros((2, 5, 4), dtype=np.uint8)
        shifted[0, 1, 2] = 1
        with EvalCache(self.path, 'ns') as cache:
            cached_evaluate(tensor_of(RY0), self.data, self.cfg, cache, trainer=trainer)
            cached_evaluate(CircuitTensor(num_qubits=2, max_depth=4, bits=shifted), self.data, self.cfg,
                            cache, trainer=trainer)
            self.assertEqual(trainer.calls, 1)
            self.assertEqual(len(cache), 1)

    def testTwoHandlesSeeEachOther(self):
        trainer = CountingTrainer()
        with EvalCache(self.path, 'ns') as a, EvalCache(self.path, 'ns') as b:
            cached_evaluate(tensor_of(RY0), self.data, self.cfg, a, trainer=trainer)
            self.assertIn(canonical_hash(tensor_of(RY0)), b)
            cached_evaluate(tensor_of(RY0), self.data, self.cfg, b, trainer=trainer)
        self.assertEqual(trainer.calls, 1)

    def testTornTailIgnoredThenTruncated(self):
        trainer = CountingTrainer()
        with EvalCache(self.path, 'ns') as cache:
            cached_evaluate(tensor_of(RY0), self.data, self.cfg, cache, trainer=trainer)
        good_size = os.path.getsize(self.path)
        with open(self.path, 'ab') as f:
            f.write(b'\x01\x02\x03\x04\x05\x06\x07\x08\xff\x00')
        with EvalCache(self.path, 'ns') as cache:
            self.assertEqual(len(cache), 1)
            cached_evaluate(tensor_of(RX1), self.data, self.cfg, cache, trainer=trainer)
            self.assertEqual(len(cache), 2)
        with EvalCache(self.path, 'ns') as cache:
            self.assertEqual(len(cache), 2)
        self.assertGreater(os.path.getsize(self.path), good_size)

    def testNamespaceMismatch(self):
        EvalCache(self.path, 'one').close()
        with self.assertRaises(CacheException):
            EvalCache(self.path, 'two')
        bad = os.path.join(self.tmp.name, 'bad.evc')
        with open(bad, 'wb') as f:
            f.write(b'not a cache file at all')
        with self.assertRaises(CacheException):
            EvalCache(bad, 'ns')

    def testConcurrentWritersFromTwoProcesses(self):
        # fcntl locks only exist on POSIX, where fork is available
        ctx = multiprocessing.get_context('fork')
        barrier = ctx.Barrier(2)
        writers = [ctx.Process(target=append_records, args=(self.path, 'ns', first, 60, barrier))
                   for first in (0, 40)]
        for w in writers:
            w.start()
        for w in writers:
            w.join(timeout=120)
            self.assertEqual(w.exitcode, 0)

        with open(self.path, 'rb') as f:
            magic, _, _ = struct.unpack_from('<8sHH', f.read(), 0)
        self.assertEqual(magic, MAGIC)
        records = read_records(self.path)
        self.assertTrue(all(ok for _, ok in records))
        keys = [key for key, _ in records]
        # overlapping keys are written once
        self.assertEqual(len(keys), 100)
        self.assertEqual(sorted(keys), list(range(100)))

        with EvalCache(self.path, 'ns') as reader:
            self.assertEqual(len(reader), 100)
            for key in range(100):
                self.assertEqual(reader.get(key, tensor_of(RY0)).aggregate_test_acc,
                                 result_for(key).aggregate_test_acc)

    def testCachingDoesNotChangeResults(self):
        trainer = CountingTrainer()
        tensors = [tensor_of(RY0), tensor_of(RY0, RX1), tensor_of(RY0)]
        with EvalCache(self.path, 'ns') as cache:
            with_cache = [cached_evaluate(t, self.data, self.cfg, cache, trainer=trainer).aggregate_test_acc
                          for t in tensors]
        without = [cached_evaluate(t, self.data, self.cfg, None, trainer=trainer).aggregate_test_acc
                   for t in tensors]
        self.assertEqual(with_cache, without)

    def testOpenCacheHonoursEnvironment(self):
        old = os.environ.get(CACHE_PATH_ENV)
        os.environ[CACHE_PATH_ENV] = self.tmp.name
        try:
            with open_cache(self.data, self.cfg) as cache:
                self.assertTrue(cache.path.startswith(self.tmp.name))
                self.assertEqual(cache.namespace, cache_namespace(self.data, self.cfg))
        finally:
            if old is None:
                del os.environ[CACHE_PATH_ENV]
            else:
                os.environ[CACHE_PATH_ENV] = old
        self.assertNotEqual(cache_namespace(self.data, self.cfg),
                            cache_namespace(self.data, OptConfig(epochs=3)))

    def testEntries(self):
        with EvalCache(self.path, 'ns') as cache:
            cached_evaluate(tensor_of(RY0), self.data, self.cfg, cache, trainer=CountingTrainer())
            entries = list(cache.entries())
        self.assertEqual(len(entries), 1)
        key, tensor, result = entries[0]
        self.assertEqual(key, canonical_hash(tensor))
        self.assertEqual(tensor, tensor_of(RY0))


if __name__ == '__main__':
    unittest.main()
