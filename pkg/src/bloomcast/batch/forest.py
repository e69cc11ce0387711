"""Bagged regression trees with exhaustive axis-aligned split search.

Every tree trains on an n-sized bootstrap resample; every split considers all
features and all midpoint thresholds, scored by the configured criterion:

- squared_error: parent SSE minus summed child SSE
- friedman_mse:  (n_l * n_r / n) * (mean_l - mean_r)^2
- poisson:       deviance reduction, 2*[S_l*log(S_l/n_l) + S_r*log(S_r/n_r)
                 - S*log(S/n)] with S*log(S/n) taken as 0 when S = 0

Ties are broken toward the lowest feature index, then the lowest threshold.
"""

from __future__ import annotations

import numpy as np

CRITERIA = ("squared_error", "friedman_mse", "poisson")


class _Tree:
    """Flat-array binary tree: internal nodes route, leaves store means."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add_leaf(self, value: float) -> int:
        i = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return i

    def add_internal(self, feature: int, threshold: float) -> int:
        i = len(self.feature)
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return i

    def finalize(self) -> None:
        self.feature = np.asarray(self.feature, dtype=np.int32)
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.left = np.asarray(self.left, dtype=np.int32)
        self.right = np.asarray(self.right, dtype=np.int32)
        self.value = np.asarray(self.value, dtype=float)

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int32)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.value[node]

    def max_depth(self) -> int:
        depth = {0: 0}
        best = 0
        for i in range(len(self.feature)):
            d = depth[i]
            best = max(best, d)
            if self.feature[i] >= 0:
                depth[self.left[i]] = d + 1
                depth[self.right[i]] = d + 1
        return best


def best_split(X: np.ndarray, y: np.ndarray, criterion: str):
    """Best (feature, threshold, improvement) or None if no valid split.

    Vectorized over all features at once; argmax over the transposed
    improvement matrix realizes the lowest-feature-then-lowest-threshold
    tie-break since numpy takes the first maximal entry.
    """
    m, p = X.shape
    if m < 2 or np.all(y == y[0]):
        return None

    order = np.argsort(X, axis=0, kind="stable")
    Xs = np.take_along_axis(X, order, axis=0)
    ys = y[order]

    cum = np.cumsum(ys, axis=0)
    total = cum[-1]
    n_left = np.arange(1, m, dtype=float)[:, None]
    n_right = m - n_left
    sum_left = cum[:-1]
    sum_right = total[None, :] - sum_left

    if criterion == "squared_error":
        cum2 = np.cumsum(ys**2, axis=0)
        total2 = cum2[-1]
        # SSE = sum(y^2) - n*mean^2; parent SSE constant per node, so
        # improvement = (sum_l^2/n_l + sum_r^2/n_r) - total^2/m + const form
        parent = float(np.sum(y**2) - (np.sum(y) ** 2) / m)
        child = (
            (cum2[:-1] - sum_left**2 / n_left)
            + ((total2 - cum2[:-1]) - sum_right**2 / n_right)
        )
        improvement = parent - child
    elif criterion == "friedman_mse":
        diff = sum_left / n_left - sum_right / n_right
        improvement = (n_left * n_right / m) * diff**2
    elif criterion == "poisson":
        def s_log_mean(s, n):
            with np.errstate(divide="ignore", invalid="ignore"):
                out = s * np.log(s / n)
            return np.where(s > 0, out, 0.0)

        parent_term = float(s_log_mean(np.sum(y), float(m)))
        improvement = 2.0 * (
            s_log_mean(sum_left, n_left)
            + s_log_mean(sum_right, n_right)
            - parent_term
        )
    else:
        raise ValueError(f"unknown criterion {criterion!r}")

    valid = Xs[:-1] < Xs[1:]
    improvement = np.where(valid, improvement, -np.inf)
    flat = np.argmax(improvement.T)
    feature, pos = divmod(int(flat), m - 1)
    best = improvement[pos, feature]
    if not np.isfinite(best) or best <= 0.0:
        return None
    threshold = 0.5 * (Xs[pos, feature] + Xs[pos + 1, feature])
    # For adjacent floats the midpoint can round up to the right value, which
    # would route every row left; clamp so <= threshold always separates.
    if threshold >= Xs[pos + 1, feature]:
        threshold = Xs[pos, feature]
    return feature, float(threshold), float(best)


def _grow(tree: _Tree, X, y, depth, max_depth, criterion, min_samples_split):
    if (
        (max_depth is not None and depth >= max_depth)
        or X.shape[0] < min_samples_split
    ):
        return tree.add_leaf(float(y.mean()))
    found = best_split(X, y, criterion)
    if found is None:
        return tree.add_leaf(float(y.mean()))
    feature, threshold, _ = found
    node = tree.add_internal(feature, threshold)
    mask = X[:, feature] <= threshold
    left = _grow(tree, X[mask], y[mask], depth + 1, max_depth, criterion, min_samples_split)
    right = _grow(tree, X[~mask], y[~mask], depth + 1, max_depth, criterion, min_samples_split)
    tree.left[node] = left
    tree.right[node] = right
    return node


class RandomForestRegressor:
    def __init__(
        self,
        n_trees: int = 1000,
        criterion: str = "squared_error",
        max_depth: int | None = None,
        min_samples_split: int = 2,
        seed: int = 0,
    ):
        if criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if max_depth is not None and max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        self.n_trees = int(n_trees)
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_split = int(min_samples_split)
        self.seed = int(seed)
        self.trees_: list[_Tree] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForestRegressor":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n = X.shape[0]
        if n == 0:
            raise ValueError("empty training set")
        if self.criterion == "poisson" and np.any(y < 0):
            raise ValueError("poisson criterion requires non-negative targets")

        # per-tree seeds independent of evaluation order
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        self._n_fit = n
        self.trees_ = []
        for ss in seeds:
            rng = np.random.default_rng(ss)
            idx = rng.integers(0, n, size=n)
            tree = _Tree()
            _grow(
                tree, X[idx], y[idx], 0, self.max_depth,
                self.criterion, self.min_samples_split,
            )
            tree.finalize()
            self.trees_.append(tree)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.trees_:
            raise RuntimeError("predict before fit")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        acc = np.zeros(X.shape[0])
        for tree in self.trees_:
            acc += tree.predict(X)
        return acc / self.n_trees

    def bootstrap_indices(self) -> list[np.ndarray]:
        """Reproduce each tree's resample indices from the root seed."""
        if not self.trees_:
            raise RuntimeError("fit first")
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        n = self._n_fit
        return [np.random.default_rng(ss).integers(0, n, size=n) for ss in seeds]
