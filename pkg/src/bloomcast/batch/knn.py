"""k-nearest-neighbour regression over the full training partition."""

from __future__ import annotations

import numpy as np


class KnnBatchRegressor:
    """Mean target of the k Euclidean-nearest training rows.

    Distance ties are broken by earlier training-row index (stable sort), so
    predictions do not depend on floating-point ordering accidents.
    """

    def __init__(self, k: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = int(k)
        self._X = None
        self._y = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KnnBatchRegressor":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.shape[0] == 0:
            raise ValueError("empty training set")
        if self.k > X.shape[0]:
            raise ValueError(f"k={self.k} exceeds training size {X.shape[0]}")
        self._X = X
        self._y = y
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self._X is None:
            raise RuntimeError("predict before fit")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty(X.shape[0])
        # direct (a-b)^2 differences, chunked: exact arithmetic keeps distance
        # ties bit-reproducible, unlike the a^2+b^2-2ab expansion
        step = max(1, int(2**22 // max(1, self._X.size)))
        for lo in range(0, X.shape[0], step):
            chunk = X[lo : lo + step]
            d2 = ((chunk[:, None, :] - self._X[None, :, :]) ** 2).sum(axis=2)
            order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            out[lo : lo + step] = self._y[order].mean(axis=1)
        return out
