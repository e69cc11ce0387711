"""Sliding-window nearest-neighbour regression for streams."""

import numpy as np


class KnnStreamRegressor:
    """k-nearest-neighbour regressor over a FIFO buffer of labeled samples.

    ``predict_one`` averages the targets of the ``k`` buffered samples
    closest in Euclidean distance (all of them while the buffer holds
    fewer than ``k``).  ``learn_one`` appends the sample, evicting the
    oldest once ``buffer_size`` is reached.  An empty buffer predicts
    0.0 and increments ``cold_start_count``.

    ``leaf_capacity`` is the leaf size an approximate spatial index
    would use; the exact brute-force search here takes no advantage of
    it, so the value is only recorded.
    """

    def __init__(self, k: int, buffer_size: int = 1000, leaf_capacity: int = 20):
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        if buffer_size < 1:
            raise ValueError(f"buffer_size must be at least 1, got {buffer_size}")
        self.k = int(k)
        self.buffer_size = int(buffer_size)
        self.leaf_capacity = int(leaf_capacity)
        self.cold_start_count = 0
        self._X = None
        self._y = None
        self._size = 0
        self._head = 0  # next ring slot to overwrite

    @property
    def buffer_fill(self) -> int:
        return self._size

    def predict_one(self, x) -> float:
        if self._size == 0:
            self.cold_start_count += 1
            return 0.0
        x = np.asarray(x, dtype=float)
        diffs = self._X[: self._size] - x
        dist2 = np.einsum("ij,ij->i", diffs, diffs)
        if self._size <= self.k:
            return float(self._y[: self._size].mean())
        order = np.argsort(dist2, kind="stable")[: self.k]
        return float(self._y[order].mean())

    def learn_one(self, x, y: float) -> None:
        x = np.asarray(x, dtype=float)
        if self._X is None:
            self._X = np.empty((self.buffer_size, x.shape[0]), dtype=float)
            self._y = np.empty(self.buffer_size, dtype=float)
        self._X[self._head] = x
        self._y[self._head] = float(y)
        self._head = (self._head + 1) % self.buffer_size
        self._size = min(self._size + 1, self.buffer_size)
