#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers

"""
Loaders for the Iris tasks (3-class and the three binary pairs) and for
binary MNIST (digits 0 and 1 of the 8x8 digits corpus, reduced to 32
principal components).

Data files are comma-separated, features then integer label per row,
'#' starts a comment line.
"""
import importlib.resources as pkg_resources
import io
import os
from typing import Tuple

import numpy as np
from sklearn.datasets import load_digits
from sklearn.model_selection import train_test_split

from qarch.logging.qarch_logger import get_logger
from . import data
from .dataset import Dataset, DatasetException, l2_normalize, one_hot
from .pca import PcaModel, fit_pca

IRIS_FILE = 'iris.csv'
IRIS_CLASSES = (0, 1, 2)
DEFAULT_SEED = 42
TEST_FRACTION = 0.3
MNIST_COMPONENTS = 32


def read_labelled_csv(text: str) -> Tuple[np.ndarray, np.ndarray]:
    table = np.loadtxt(io.StringIO(text), delimiter=',', comments='#', ndmin=2)
    if table.shape[1] < 2:
        raise DatasetException('Data file needs at least one feature column and a label column')
    return table[:, :-1], table[:, -1].astype(int)


def _read_file(path: str) -> str:
    if not os.path.exists(path):
        raise DatasetException(f'Data file {path} not found')
    with open(path, 'r') as f:
        return f.read()


def stratified_mask(labels: np.ndarray, seed: int) -> np.ndarray:
    """
    Boolean train mask of a stratified 70/30 split
    """
    indices = np.arange(len(labels))
    train_idx, _ = train_test_split(indices, test_size=TEST_FRACTION, stratify=labels,
                                    random_state=seed)
    mask = np.zeros(len(labels), dtype=bool)
    mask[train_idx] = True
    return mask


def load_iris(class_filter: Tuple[int, int] = None, seed: int = DEFAULT_SEED, path: str = None) -> Dataset:
    """
    Iris with 4 features. With class_filter=(a, b) only those two classes are
    kept and relabelled 0 (lower) and 1 (higher).
    """
    if class_filter is not None:
        class_filter = tuple(sorted(class_filter))
        if len(class_filter) != 2 or class_filter[0] == class_filter[1] or \
                any(c not in IRIS_CLASSES for c in class_filter):
            raise DatasetException(f'Class filter must be two distinct labels from {IRIS_CLASSES}, '
                                   f'got {class_filter}')
    text = _read_file(path) if path else pkg_resources.files(data).joinpath(IRIS_FILE).read_text()
    x, y = read_labelled_csv(text)
    if x.shape[1] != 4:
        raise DatasetException(f'Iris rows must have 4 features, found {x.shape[1]}')
    if class_filter is None:
        name = 'iris'
        classes = IRIS_CLASSES
    else:
        name = f'iris2_{class_filter[0]}{class_filter[1]}'
        classes = class_filter
        keep = np.isin(y, classes)
        x, y = x[keep], y[keep]
    labels = np.searchsorted(np.array(classes), y)
    ds = Dataset(name=name, features=l2_normalize(x), labels_onehot=one_hot(labels, len(classes)),
                 train_mask=stratified_mask(labels, seed))
    get_logger('datasets').debug(f'Loaded {ds}')
    return ds


def load_mnist2(seed: int = DEFAULT_SEED, path: str = None) -> Tuple[Dataset, PcaModel]:
    """
    Digits 0 and 1 of the 8x8 digits corpus. Pixels are standardized and
    reduced by PCA (64 -> 32), both fitted on the training split only and
    applied to both splits; rows are L2-normalised after projection.
    :param seed: split seed
    :param path: optional data file; defaults to the corpus bundled with scikit-learn
    """
    if path:
        x, y = read_labelled_csv(_read_file(path))
    else:
        try:
            digits = load_digits(n_class=2)
        except OSError as e:
            raise DatasetException(f'Bundled digits corpus unavailable: {e}')
        x, y = digits.data.astype(float), digits.target.astype(int)
    keep = np.isin(y, (0, 1))
    x, y = x[keep], y[keep]
    if x.shape[1] != 64:
        raise DatasetException(f'Digits rows must have 64 features, found {x.shape[1]}')
    mask = stratified_mask(y, seed)
    pca = fit_pca(x[mask], MNIST_COMPONENTS, standardize=True)
    ds = Dataset(name='mnist2', features=l2_normalize(pca.transform(x)), labels_onehot=one_hot(y, 2),
                 train_mask=mask)
    get_logger('datasets').info(f'Loaded {ds}, PCA keeps {pca.explained_variance_ratio:.4f} of the variance')
    return ds, pca


TASKS = {
    'iris2_01': lambda seed: load_iris((0, 1), seed=seed),
    'iris2_02': lambda seed: load_iris((0, 2), seed=seed),
    'iris2_12': lambda seed: load_iris((1, 2), seed=seed),
    'iris': lambda seed: load_iris(None, seed=seed),
    'mnist2': lambda seed: load_mnist2(seed=seed)[0],
}


def load_task(task: str, seed: int = DEFAULT_SEED, path: str = None) -> Dataset:
    """
    Dataset of one of the named tasks
    """
    if task not in TASKS:
        raise DatasetException(f'Unknown task {task}, choose from {", ".join(TASKS)}')
    if path:
        if task == 'mnist2':
            return load_mnist2(seed=seed, path=path)[0]
        pair = None if task == 'iris' else (int(task[-2]), int(task[-1]))
        return load_iris(pair, seed=seed, path=path)
    return TASKS[task](seed)


# qubits needed by the amplitude-encoded features of each task
TASK_QUBITS = {'iris2_01': 2, 'iris2_02': 2, 'iris2_12': 2, 'iris': 2, 'mnist2': 5}
