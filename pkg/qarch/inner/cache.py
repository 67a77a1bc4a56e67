#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Persistent evaluation cache: canonical circuit hash -> EvalResult.

File layout (little-endian):

  header   b'QARCHEVC' | uint16 format version | uint16 namespace length | namespace (utf-8)
  record   uint64 key | uint32 payload length | uint32 crc32(payload) | payload

The payload is canonical JSON {"max_depth", "num_qubits", "result", "tensor"}
with the EvalResult serialised by EvalResult.to_json and the normalised
circuit tensor packed as hex. Records are only ever appended. Writers hold an
exclusive flock on the file, readers a shared one; a torn record at the tail
(crash during a write) is ignored by readers and truncated by the next writer.
"""
import fcntl
import hashlib
import json
import os
import struct
import threading
import zlib
from typing import Dict, Iterator, Tuple, Callable

from qarch.circuits.sequence import decode, normalize
from qarch.circuits.tensor import CircuitTensor, canonical_hash, hash_hex
from qarch.datasets.dataset import Dataset
from qarch.logging.qarch_logger import get_logger
from .trainer import EvalResult, OptConfig, train_vqc

MAGIC = b'QARCHEVC'
FORMAT_VERSION = 1
_HEADER_FIXED = struct.Struct('<8sHH')
_RECORD = struct.Struct('<QII')

CACHE_PATH_ENV = 'QARCH_CACHE_PATH'
DEFAULT_CACHE_DIR = 'qarch_cache'


class CacheException(Exception):
    """
    Unreadable, mismatched or corrupt cache file
    """
    def __init__(self, msg: str):
        super().__init__(f'CacheException: {msg}')


def cache_namespace(data: Dataset, cfg: OptConfig) -> str:
    """
    Identity of the (dataset, inner-loop configuration) pair results depend on
    """
    cfg_digest = hashlib.sha256(json.dumps(cfg.to_dict(), sort_keys=True).encode()).hexdigest()[:16]
    return f'{data.name}:{data.fingerprint()}:{cfg_digest}'


def cache_directory(directory: str = None) -> str:
    return directory or os.environ.get(CACHE_PATH_ENV) or DEFAULT_CACHE_DIR


class EvalCache:
    """
    Append-only record log with an in-memory index. Safe for concurrent use
    by threads of one process and by several processes on one file.
    """

    def __init__(self, path: str, namespace: str, *, logger=None):
        self.path = path
        self.namespace = namespace
        self.logger = logger if logger is not None else get_logger('cache')
        self._lock = threading.Lock()
        self._index: Dict[int, Tuple[str, int, int, EvalResult]] = dict()
        self.hits = 0
        self.misses = 0
        parent = os.path.dirname(os.path.abspath(path))
        try:
            os.makedirs(parent, exist_ok=True)
            self._fd = os.open(path, os.O_RDWR | os.O_CREAT, 0o644)
        except OSError as e:
            raise CacheException(f'Unable to open cache file {path}: {e}')
        self._init_header()
        with self._lock:
            self._refresh(shared=True)
        self.logger.info(f'Opened cache {path} for {namespace} with {len(self._index)} entries')

    def _init_header(self):
        ns = self.namespace.encode('utf-8')
        header = _HEADER_FIXED.pack(MAGIC, FORMAT_VERSION, len(ns)) + ns
        fcntl.flock(self._fd, fcntl.LOCK_EX)
        try:
            size = os.fstat(self._fd).st_size
            if size == 0:
                os.write(self._fd, header)
                os.fsync(self._fd)
                self._offset = len(header)
                return
            existing = os.pread(self._fd, _HEADER_FIXED.size, 0)
            if len(existing) < _HEADER_FIXED.size:
                raise CacheException(f'{self.path} has a truncated header')
            magic, version, ns_len = _HEADER_FIXED.unpack(existing)
            if magic != MAGIC:
                raise CacheException(f'{self.path} is not an evaluation cache')
            if version != FORMAT_VERSION:
                raise CacheException(f'{self.path} has format version {version}, expected {FORMAT_VERSION}')
            stored_ns = os.pread(self._fd, ns_len, _HEADER_FIXED.size).decode('utf-8')
            if stored_ns != self.namespace:
                raise CacheException(f'{self.path} belongs to namespace {stored_ns}, not {self.namespace}')
            self._offset = _HEADER_FIXED.size + ns_len
        finally:
            fcntl.flock(self._fd, fcntl.LOCK_UN)

    def _refresh(self, *, shared: bool) -> int:
        """
        Read records appended since the last refresh. Caller holds self._lock;
        the file lock is taken here when shared is True.
        :return: offset of the end of the last complete record
        """
        if shared:
            fcntl.flock(self._fd, fcntl.LOCK_SH)
        try:
            size = os.fstat(self._fd).st_size
            while self._offset + _RECORD.size <= size:
                key, length, crc = _RECORD.unpack(os.pread(self._fd, _RECORD.size, self._offset))
                start = self._offset + _RECORD.size
                if start + length > size:
                    break
                payload = os.pread(self._fd, length, start)
                if zlib.crc32(payload) != crc:
                    self.logger.warning(f'Checksum mismatch at offset {self._offset} of {self.path}, '
                                        f'ignoring the tail')
                    break
                rec = json.loads(payload.decode('utf-8'))
                self._index[key] = (rec['tensor'], rec['num_qubits'], rec['max_depth'],
                                    EvalResult.from_json(rec['result']))
                self._offset = start + length
            return self._offset
        finally:
            if shared:
                fcntl.flock(self._fd, fcntl.LOCK_UN)

    def _lookup(self, key: int, tensor: CircuitTensor) -> EvalResult or None:
        entry = self._index.get(key)
        if entry is None:
            return None
        if tensor is not None and entry[0] != tensor.to_hex():
            raise CacheException(f'Hash collision on key {hash_hex(key)}')
        return entry[3]

    def get(self, key: int, tensor: CircuitTensor = None) -> EvalResult or None:
        with self._lock:
            found = self._lookup(key, tensor)
            if found is None:
                self._refresh(shared=True)
                found = self._lookup(key, tensor)
            return found

    def put(self, key: int, tensor: CircuitTensor, result: EvalResult) -> EvalResult:
        """
        Store a result unless another writer got there first.
        :return: the stored result for key
        """
        payload = json.dumps({'tensor': tensor.to_hex(), 'num_qubits': tensor.num_qubits,
                              'max_depth': tensor.max_depth, 'result': result.to_json()},
                             sort_keys=True).encode('utf-8')
        with self._lock:
            fcntl.flock(self._fd, fcntl.LOCK_EX)
            try:
                end = self._refresh(shared=False)
                existing = self._lookup(key, tensor)
                if existing is not None:
                    return existing
                if os.fstat(self._fd).st_size != end:
                    self.logger.warning(f'Truncating torn record at offset {end} of {self.path}')
                    os.ftruncate(self._fd, end)
                record = _RECORD.pack(key, len(payload), zlib.crc32(payload)) + payload
                written = os.pwrite(self._fd, record, end)
                if written != len(record):
                    raise CacheException(f'Short write to {self.path}')
                os.fsync(self._fd)
                self._index[key] = (tensor.to_hex(), tensor.num_qubits, tensor.max_depth, result)
                self._offset = end + len(record)
                return result
            except OSError as e:
                raise CacheException(f'Unable to write {self.path}: {e}')
            finally:
                fcntl.flock(self._fd, fcntl.LOCK_UN)

    def __len__(self):
        with self._lock:
            self._refresh(shared=True)
            return len(self._index)

    def __contains__(self, key: int):
        return self.get(key) is not None

    def entries(self) -> Iterator[Tuple[int, CircuitTensor, EvalResult]]:
        """
        All stored (key, normalised tensor, result) in file order
        """
        with self._lock:
            self._refresh(shared=True)
            items = list(self._index.items())
        for key, (hex_bits, q, d, result) in items:
            yield key, CircuitTensor.from_hex(hex_bits, num_qubits=q, max_depth=d), result

    def close(self):
        if self._fd >= 0:
            os.close(self._fd)
            self._fd = -1

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def __repr__(self):
        return f'EvalCache({self.path}, namespace={self.namespace}, entries={len(self._index)})'


def open_cache(data: Dataset, cfg: OptConfig, directory: str = None, *, logger=None) -> EvalCache:
    """
    Cache file for this dataset and inner-loop configuration under directory
    (or $QARCH_CACHE_PATH, or ./qarch_cache)
    """
    ns = cache_namespace(data, cfg)
    name = f'{data.name}-{hashlib.sha256(ns.encode()).hexdigest()[:12]}.evc'
    return EvalCache(os.path.join(cache_directory(directory), name), ns, logger=logger)


Trainer = Callable[..., EvalResult]


def cached_evaluate(tensor: CircuitTensor, data: Dataset, cfg: OptConfig, cache: EvalCache or None,
                    trainer: Trainer = train_vqc) -> EvalResult:
    """
    Result for the circuit of tensor: from the cache when present, otherwise
    trained and stored. Tensors equal after decode/encode share an entry.
    """
    norm = normalize(tensor)
    if cache is None:
        return trainer(decode(norm), data, cfg)
    key = canonical_hash(norm)
    found = cache.get(key, norm)
    if found is not None:
        cache.hits += 1
        return found
    cache.misses += 1
    return cache.put(key, norm, trainer(decode(norm), data, cfg))
