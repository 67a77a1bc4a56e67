#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Classification datasets as used by the inner loop: L2-normalised feature
rows (ready for amplitude encoding), one-hot labels and a train/test tag
per sample.
"""
import hashlib
from dataclasses import dataclass

import numpy as np

from qarch.quantum.statevector import qubits_for_length, QuantumCoreException

NORM_TOLERANCE = 1e-9


class DatasetException(Exception):
    """
    Invalid dataset request or missing data
    """
    def __init__(self, msg: str):
        super().__init__(f'DatasetException: {msg}')


@dataclass(frozen=True)
class Dataset:
    name: str
    features: np.ndarray
    labels_onehot: np.ndarray
    train_mask: np.ndarray

    def __post_init__(self):
        if self.features.shape[0] != self.labels_onehot.shape[0] or \
                self.features.shape[0] != self.train_mask.shape[0]:
            raise DatasetException(f'Dataset {self.name}: features, labels and split tags differ in length')
        norms = np.linalg.norm(self.features, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOLERANCE):
            raise DatasetException(f'Dataset {self.name}: feature rows are not L2-normalised')
        if np.any(self.labels_onehot.sum(axis=1) != 1):
            raise DatasetException(f'Dataset {self.name}: labels are not one-hot')
        for arr in (self.features, self.labels_onehot, self.train_mask):
            arr.flags.writeable = False

    @property
    def num_samples(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return self.labels_onehot.shape[1]

    @property
    def num_qubits(self) -> int:
        try:
            return qubits_for_length(self.num_features)
        except QuantumCoreException as e:
            raise DatasetException(f'Dataset {self.name} cannot be amplitude-encoded: {e}')

    @property
    def x_train(self) -> np.ndarray:
        return self.features[self.train_mask]

    @property
    def y_train(self) -> np.ndarray:
        return self.labels_onehot[self.train_mask]

    @property
    def x_test(self) -> np.ndarray:
        return self.features[~self.train_mask]

    @property
    def y_test(self) -> np.ndarray:
        return self.labels_onehot[~self.train_mask]

    def split(self, which: str):
        """
        (features, labels) of 'train' or 'test'
        """
        if which == 'train':
            return self.x_train, self.y_train
        if which == 'test':
            return self.x_test, self.y_test
        raise DatasetException(f'Unknown split {which}, use train or test')

    def fingerprint(self) -> str:
        """
        Short identity of contents and split, used to namespace cached results
        """
        h = hashlib.sha256()
        for arr in (self.features, self.labels_onehot, self.train_mask):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]

    def __repr__(self):
        return f'Dataset({self.name}, samples={self.num_samples}, train={int(self.train_mask.sum())}, ' \
               f'features={self.num_features}, classes={self.num_classes})'


def l2_normalize(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DatasetException('Cannot normalise an all-zero feature row')
    return x / norms


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    return np.eye(num_classes, dtype=np.int8)[labels]
