import numpy as np
import pytest

from bloomcast.batch import RandomForestRegressor
from bloomcast.batch.forest import best_split


def split_oracle(X, y, criterion):
    """Exhaustive scan over every (feature, midpoint threshold) pair."""
    m, p = X.shape

    def node_sse(v):
        return float(np.sum((v - v.mean()) ** 2)) if len(v) else 0.0

    def poisson_dev(v):
        s = v.sum()
        if s <= 0:
            return 0.0
        mu = s / len(v)
        terms = np.where(v > 0, v * np.log(v / mu), 0.0)
        return float(2.0 * np.sum(terms - v + mu))

    best = None
    for f in range(p):
        vals = np.unique(X[:, f])
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2
            left = y[X[:, f] <= thr]
            right = y[X[:, f] > thr]
            if criterion == "squared_error":
                imp = node_sse(y) - node_sse(left) - node_sse(right)
            elif criterion == "friedman_mse":
                imp = (len(left) * len(right) / m) * (left.mean() - right.mean()) ** 2
            else:
                imp = poisson_dev(y) - poisson_dev(left) - poisson_dev(right)
            if best is None or imp > best[2] + 1e-12:
                best = (f, thr, imp)
    if best is None or best[2] <= 0:
        return None
    return best


class TestBestSplit:
    def test_matches_oracle_tiny_dataset(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(6, 2))
        y = rng.uniform(0, 5, size=6)
        for criterion in ("squared_error", "friedman_mse", "poisson"):
            got = best_split(X, y, criterion)
            want = split_oracle(X, y, criterion)
            assert got is not None and want is not None
            assert got[0] == want[0]
            assert got[1] == pytest.approx(want[1])
            assert got[2] == pytest.approx(want[2], rel=1e-9)

    def test_matches_oracle_randomized(self):
        rng = np.random.default_rng(5)
        for trial in range(25):
            m = int(rng.integers(4, 25))
            p = int(rng.integers(1, 5))
            X = rng.normal(size=(m, p)).round(1)  # rounding forces ties
            y = rng.uniform(0, 3, size=m)
            criterion = ("squared_error", "friedman_mse", "poisson")[trial % 3]
            got = best_split(X, y, criterion)
            want = split_oracle(X, y, criterion)
            if want is None:
                assert got is None
                continue
            assert got is not None
            assert got[2] == pytest.approx(want[2], rel=1e-9)

    def test_pure_node_returns_none(self):
        X = np.random.default_rng(7).normal(size=(8, 2))
        y = np.full(8, 2.5)
        assert best_split(X, y, "squared_error") is None

    def test_constant_features_return_none(self):
        X = np.ones((6, 3))
        y = np.arange(6.0)
        assert best_split(X, y, "squared_error") is None

    def test_tie_break_lowest_feature(self):
        # duplicated feature columns: identical improvements everywhere
        rng = np.random.default_rng(9)
        x = rng.normal(size=10)
        X = np.column_stack([x, x])
        y = (x > 0).astype(float)
        got = best_split(X, y, "squared_error")
        assert got[0] == 0

    def test_unknown_criterion(self):
        with pytest.raises(ValueError, match="criterion"):
            best_split(np.ones((3, 1)), np.arange(3.0), "gini")


class TestForest:
    def test_depth_zero_is_bootstrap_mean(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(200, 3))
        y = rng.uniform(0, 10, size=200)
        m = RandomForestRegressor(n_trees=1000, max_depth=0, seed=4).fit(X, y)
        pred = m.predict(X[:1])[0]
        assert pred == pytest.approx(y.mean(), rel=0.05)

    def test_step_function_single_split(self):
        rng = np.random.default_rng(13)
        X = rng.uniform(-1, 1, size=(300, 2))
        y = np.where(X[:, 0] > 0.2, 5.0, 1.0)
        m = RandomForestRegressor(n_trees=30, max_depth=1, seed=2).fit(X, y)
        pred = m.predict(X)
        ss_r = np.sum((y - pred) ** 2)
        ss_m = np.sum((y - y.mean()) ** 2)
        assert 1 - ss_r / ss_m >= 0.99

    def test_max_depth_respected(self):
        rng = np.random.default_rng(17)
        X = rng.normal(size=(150, 4))
        y = rng.normal(size=150)
        for depth in (2, 4):
            m = RandomForestRegressor(n_trees=10, max_depth=depth, seed=0).fit(X, y)
            assert max(t.max_depth() for t in m.trees_) <= depth

    def test_poisson_negative_target_error(self):
        X = np.random.default_rng(19).normal(size=(10, 2))
        y = np.array([1.0, 2.0, -0.5] + [1.0] * 7)
        with pytest.raises(ValueError, match="non-negative"):
            RandomForestRegressor(n_trees=2, criterion="poisson").fit(X, y)

    def test_bootstrap_reproducible_from_seed(self):
        rng = np.random.default_rng(23)
        X = rng.normal(size=(40, 2))
        y = rng.normal(size=40)
        a = RandomForestRegressor(n_trees=5, seed=77).fit(X, y)
        b = RandomForestRegressor(n_trees=5, seed=77).fit(X, y)
        for ia, ib in zip(a.bootstrap_indices(), b.bootstrap_indices()):
            np.testing.assert_array_equal(ia, ib)
        np.testing.assert_array_equal(a.predict(X), b.predict(X))

    def test_different_seeds_differ(self):
        rng = np.random.default_rng(29)
        X = rng.normal(size=(60, 3))
        y = rng.normal(size=60)
        a = RandomForestRegressor(n_trees=3, seed=1).fit(X, y)
        b = RandomForestRegressor(n_trees=3, seed=2).fit(X, y)
        assert not np.array_equal(a.predict(X), b.predict(X))

    def test_smooth_function_regression(self):
        rng = np.random.default_rng(31)
        X = rng.uniform(-2, 2, size=(400, 2))
        y = X[:, 0] ** 2 + X[:, 1]
        m = RandomForestRegressor(n_trees=50, max_depth=10, seed=3).fit(X, y)
        pred = m.predict(X)
        ss_r = np.sum((y - pred) ** 2)
        ss_m = np.sum((y - y.mean()) ** 2)
        assert 1 - ss_r / ss_m >= 0.9

    def test_friedman_and_poisson_usable(self):
        rng = np.random.default_rng(37)
        X = rng.uniform(0, 1, size=(100, 2))
        y = 3 * X[:, 0] + 0.5
        for criterion in ("friedman_mse", "poisson"):
            m = RandomForestRegressor(
                n_trees=20, criterion=criterion, max_depth=4, seed=0
            ).fit(X, y)
            mse = float(np.mean((m.predict(X) - y) ** 2))
            assert mse < 0.05

    def test_adjacent_float_threshold_separates(self):
        # midpoint of two adjacent floats rounds to the larger one; the
        # returned threshold must still route the rows to different children
        a, b = 1.0, np.nextafter(1.0, 2.0)
        X = np.array([[a], [b]])
        y = np.array([0.0, 1.0])
        feature, threshold, _ = best_split(X, y, "squared_error")
        assert feature == 0
        assert a <= threshold < b

    def test_adjacent_float_values_terminate(self):
        a, b = 1.0, np.nextafter(1.0, 2.0)
        X = np.array([[a], [b], [a], [b]])
        y = np.array([0.0, 1.0, 0.0, 1.0])
        m = RandomForestRegressor(n_trees=10, max_depth=None, seed=0).fit(X, y)
        pred = m.predict(X)
        assert np.all(np.isfinite(pred))
