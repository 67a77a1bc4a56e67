#!/usr/bin/env python3
# MIT License
# Copyright (c) 2025 QArch developers, see LICENSE
#
# Author: QArch developers
from dataclasses import dataclass

import numpy as np
from sklearn.preprocessing import StandardScaler

from .dataset import DatasetException


@dataclass(frozen=True)
class PcaModel:
    """
    Principal components as orthonormal rows of components [k x dim].
    When scale is set, features are standardized ((x - mean) / scale)
    before projection.
    """
    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: float
    scale: np.ndarray = None

    @property
    def num_components(self) -> int:
        return self.components.shape[0]

    @property
    def standardized(self) -> bool:
        return self.scale is not None

    def _center(self, x: np.ndarray) -> np.ndarray:
        centered = np.atleast_2d(x) - self.mean
        return centered / self.scale if self.standardized else centered

    def transform(self, x: np.ndarray) -> np.ndarray:
        return self._center(x) @ self.components.T

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        centered = np.atleast_2d(z) @ self.components
        if self.standardized:
            centered = centered * self.scale
        return centered + self.mean

    def reconstruction_error(self, x: np.ndarray) -> float:
        """
        Mean squared reconstruction error over the rows of x
        """
        x = np.atleast_2d(x)
        return float(np.mean(np.sum((x - self.inverse_transform(self.transform(x))) ** 2, axis=1)))


def fit_pca(x: np.ndarray, k: int, *, standardize: bool = False) -> PcaModel:
    """
    Top-k principal components by explained variance. Each component is
    signed so that its largest-magnitude entry is positive.
    :param standardize: scale each feature to unit variance first (constant
    features are only centred); the explained variance then refers to the
    standardized features
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, dim = x.shape
    if k < 1 or k > min(dim, n):
        raise DatasetException(f'Cannot extract {k} components from {n} samples of dimension {dim}')
    scale = None
    if standardize:
        scaler = StandardScaler().fit(x)
        mean, scale = scaler.mean_, scaler.scale_
        centered = (x - mean) / scale
    else:
        mean = x.mean(axis=0)
        centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    variances = s ** 2
    total = variances.sum()
    if total <= 0.0:
        raise DatasetException('Input has zero variance')
    components = vt[:k].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    ratio = float(min(variances[:k].sum() / total, 1.0))
    return PcaModel(mean=mean, components=components, explained_variance_ratio=ratio, scale=scale)
