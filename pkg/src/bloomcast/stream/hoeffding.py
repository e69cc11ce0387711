"""Incremental regression trees with Hoeffding-bound split decisions.

``HoeffdingTreeRegressor`` grows a binary tree one sample at a time.
Leaves accumulate target statistics plus a 32-bin equal-width histogram
per feature; every ``grace_period`` samples a leaf compares the best
and second-best candidate splits by variance-reduction merit and splits
when the Hoeffding bound guarantees the ranking (or the bound drops
below the tie threshold ``tau``).  Each leaf predicts with either its
running target mean or an incremental linear model, whichever carries
the lower exponentially faded error.

``HoeffdingAdaptiveTreeRegressor`` adds a change detector per internal
node; on detected drift it grows an alternate subtree in the background
and swaps it in once its windowed error is significantly lower.
"""

import math
from dataclasses import dataclass

import numpy as np

from bloomcast.stream.adwin import AdwinDetector

N_BINS = 32
PERCEPTRON_LR = 0.01
NORM_CLIP = 10.0  # standardized values beyond 10 sd are treated as 10 sd
ERR_CLIP = 100.0


def hoeffding_bound(delta: float, n: int, value_range: float = 1.0) -> float:
    """Half-width of the Hoeffding confidence interval after n observations."""
    if n < 1:
        return math.inf
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


@dataclass(frozen=True)
class HoeffdingTreeSpec:
    grace_period: int
    delta: float
    model_selector_decay: float
    tau: float

    def __post_init__(self):
        if self.grace_period < 1:
            raise ValueError(f"grace_period must be at least 1, got {self.grace_period}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not (0.0 < self.model_selector_decay <= 1.0):
            raise ValueError(
                f"model_selector_decay must lie in (0, 1], got {self.model_selector_decay}"
            )
        if self.tau <= 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")


class _FeatureSketch:
    """Equal-width histograms (one per feature) over the running range.

    When a value lands outside the current range the histogram is
    rebuilt on the widened range, redistributing each old bin by its
    center.  Bin contents carry (count, target sum, target sum of
    squares) so candidate splits at bin boundaries yield exact child
    variances of the binned assignment.
    """

    __slots__ = ("lo", "hi", "counts", "sums", "sumsqs")

    def __init__(self, n_features: int):
        self.lo = None
        self.hi = None
        self.counts = np.zeros((n_features, N_BINS))
        self.sums = np.zeros((n_features, N_BINS))
        self.sumsqs = np.zeros((n_features, N_BINS))

    def add(self, x: np.ndarray, y: float) -> None:
        if self.lo is None:
            self.lo = x.astype(float).copy()
            self.hi = x.astype(float).copy()
        else:
            grow = (x < self.lo) | (x > self.hi)
            if grow.any():
                self._rescale(np.minimum(self.lo, x), np.maximum(self.hi, x), grow)
        width = self.hi - self.lo
        idx = np.zeros(len(x), dtype=int)
        pos = width > 0
        idx[pos] = np.clip(
            ((x[pos] - self.lo[pos]) * N_BINS / width[pos]).astype(int), 0, N_BINS - 1
        )
        rows = np.arange(len(x))
        self.counts[rows, idx] += 1.0
        self.sums[rows, idx] += y
        self.sumsqs[rows, idx] += y * y

    def _rescale(self, new_lo, new_hi, grow) -> None:
        for f in np.nonzero(grow)[0]:
            old_w = self.hi[f] - self.lo[f]
            if old_w > 0:
                centers = self.lo[f] + (np.arange(N_BINS) + 0.5) * old_w / N_BINS
            else:
                centers = np.full(N_BINS, self.lo[f])
            new_idx = np.clip(
                ((centers - new_lo[f]) * N_BINS / (new_hi[f] - new_lo[f])).astype(int),
                0,
                N_BINS - 1,
            )
            for name in ("counts", "sums", "sumsqs"):
                old = getattr(self, name)[f]
                fresh = np.zeros(N_BINS)
                np.add.at(fresh, new_idx, old)
                getattr(self, name)[f] = fresh
        self.lo = new_lo.copy()
        self.hi = new_hi.copy()

    def best_splits(self):
        """Per-feature best (merit, threshold); merit -inf where no valid cut.

        Merit is the fraction of parent target variance removed by the
        weighted child variances.
        """
        n = self.counts.sum(axis=1)
        s = self.sums.sum(axis=1)
        q = self.sumsqs.sum(axis=1)
        merits = np.full(self.counts.shape[0], -np.inf)
        thresholds = np.zeros(self.counts.shape[0])
        n_tot = n[0] if len(n) else 0.0
        if n_tot < 2:
            return merits, thresholds
        var_p = np.maximum(0.0, q / n - (s / n) ** 2)
        cn = np.cumsum(self.counts, axis=1)[:, :-1]
        cs = np.cumsum(self.sums, axis=1)[:, :-1]
        cq = np.cumsum(self.sumsqs, axis=1)[:, :-1]
        n_r = n[:, None] - cn
        valid = (cn >= 1) & (n_r >= 1) & (var_p[:, None] > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            var_l = np.maximum(0.0, cq / cn - (cs / cn) ** 2)
            var_r = np.maximum(0.0, (q[:, None] - cq) / n_r - ((s[:, None] - cs) / n_r) ** 2)
            merit = 1.0 - (cn * var_l + n_r * var_r) / (n[:, None] * var_p[:, None])
        merit = np.where(valid, merit, -np.inf)
        best_bin = np.argmax(merit, axis=1)
        rows = np.arange(merit.shape[0])
        merits = merit[rows, best_bin]
        cut_fracs = (best_bin + 1) / N_BINS
        thresholds = self.lo + cut_fracs * (self.hi - self.lo)
        return merits, thresholds


class _LeafNode:
    __slots__ = (
        "n", "s", "q", "sketch", "last_eval_n", "init_mean",
        "w", "b", "n_norm", "sx", "sxx", "sy", "syy",
        "fe_mean", "fe_perc",
    )

    def __init__(self, n_features: int, init_mean: float = 0.0):
        self.n = 0
        self.s = 0.0
        self.q = 0.0
        self.sketch = _FeatureSketch(n_features)
        self.last_eval_n = 0
        self.init_mean = init_mean
        self.w = np.zeros(n_features)
        self.b = 0.0
        self.n_norm = 0
        self.sx = np.zeros(n_features)
        self.sxx = np.zeros(n_features)
        self.sy = 0.0
        self.syy = 0.0
        self.fe_mean = 0.0
        self.fe_perc = 0.0

    def mean_prediction(self) -> float:
        return self.s / self.n if self.n else self.init_mean

    def _norm_x(self, x: np.ndarray) -> np.ndarray:
        mu = self.sx / self.n_norm
        sd = np.sqrt(np.maximum(0.0, self.sxx / self.n_norm - mu * mu))
        sd[sd == 0.0] = 1.0
        # heavy-tailed spikes standardize to ~sqrt(n) while the running sd
        # lags; unclipped they destabilize the gradient step
        return np.clip((x - mu) / sd, -NORM_CLIP, NORM_CLIP)

    def perceptron_prediction(self, x: np.ndarray) -> float:
        if self.n_norm == 0:
            return self.init_mean
        mu_y = self.sy / self.n_norm
        sd_y = math.sqrt(max(0.0, self.syy / self.n_norm - mu_y * mu_y)) or 1.0
        raw = float(self.w @ self._norm_x(x) + self.b)
        # never serve a value outside +-NORM_CLIP sd of the targets seen here
        raw = min(max(raw, -NORM_CLIP), NORM_CLIP)
        return raw * sd_y + mu_y

    def prediction(self, x: np.ndarray) -> float:
        if self.fe_perc < self.fe_mean:
            return self.perceptron_prediction(x)
        return self.mean_prediction()

    def learn(self, x: np.ndarray, y: float, decay: float) -> None:
        # score both candidate predictors on the incoming sample first
        e_mean = y - self.mean_prediction()
        e_perc = y - self.perceptron_prediction(x)
        self.fe_mean = decay * self.fe_mean + e_mean * e_mean
        self.fe_perc = decay * self.fe_perc + e_perc * e_perc
        self.n += 1
        self.s += y
        self.q += y * y
        self.sketch.add(x, y)
        # linear-model step on features and target normalized by the
        # running statistics including this sample
        self.n_norm += 1
        self.sx += x
        self.sxx += x * x
        self.sy += y
        self.syy += y * y
        xn = self._norm_x(x)
        mu_y = self.sy / self.n_norm
        sd_y = math.sqrt(max(0.0, self.syy / self.n_norm - mu_y * mu_y)) or 1.0
        yn = min(max((y - mu_y) / sd_y, -NORM_CLIP), NORM_CLIP)
        err = yn - float(self.w @ xn + self.b)
        # bound the step so a single outlier cannot launch an oscillation
        err = min(max(err, -ERR_CLIP), ERR_CLIP)
        self.w += PERCEPTRON_LR * err * xn
        self.b += PERCEPTRON_LR * err

    def spawn_child(self, n_features: int) -> "_LeafNode":
        child = _LeafNode(n_features, init_mean=self.mean_prediction())
        child.w = self.w.copy()
        child.b = self.b
        child.n_norm = self.n_norm
        child.sx = self.sx.copy()
        child.sxx = self.sxx.copy()
        child.sy = self.sy
        child.syy = self.syy
        return child


class _InternalNode:
    __slots__ = ("feature", "threshold", "left", "right", "drift_adwin", "alt", "alt_adwin")

    def __init__(self, feature: int, threshold: float, left, right):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.drift_adwin = None
        self.alt = None
        self.alt_adwin = None

    def route(self, x: np.ndarray) -> bool:
        """True when x goes left."""
        return x[self.feature] <= self.threshold


class HoeffdingTreeRegressor:
    """Streaming regression tree; supports predict_one / learn_one."""

    def __init__(
        self,
        grace_period: int = 200,
        delta: float = 1e-7,
        model_selector_decay: float = 0.95,
        tau: float = 0.05,
    ):
        self.spec = HoeffdingTreeSpec(grace_period, delta, model_selector_decay, tau)
        self._root = None
        self._n_features = None
        self.n_splits_ = 0
        self.cold_start_count = 0

    # -- structure helpers -------------------------------------------------
    def _make_internal(self, feature, threshold, left, right) -> _InternalNode:
        return _InternalNode(feature, threshold, left, right)

    def _ensure_root(self, x: np.ndarray) -> None:
        if self._root is None:
            self._n_features = len(x)
            self._root = _LeafNode(self._n_features)

    @property
    def n_nodes(self) -> int:
        def count(node):
            if node is None:
                return 0
            if isinstance(node, _LeafNode):
                return 1
            return 1 + count(node.left) + count(node.right)

        return count(self._root)

    def iter_leaves(self):
        stack = [self._root] if self._root is not None else []
        while stack:
            node = stack.pop()
            if isinstance(node, _LeafNode):
                yield node
            else:
                stack.append(node.right)
                stack.append(node.left)

    # -- prediction ---------------------------------------------------------
    def _descend(self, root, x: np.ndarray) -> _LeafNode:
        node = root
        while isinstance(node, _InternalNode):
            node = node.left if node.route(x) else node.right
        return node

    def predict_one(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self._root is None:
            self.cold_start_count += 1
            return 0.0
        leaf = self._descend(self._root, x)
        if leaf.n == 0 and leaf.n_norm == 0:
            self.cold_start_count += 1
        return leaf.prediction(x)

    # -- learning -----------------------------------------------------------
    def _maybe_split(self, leaf: _LeafNode):
        """Return an internal replacement for the leaf, or None."""
        spec = self.spec
        if leaf.n - leaf.last_eval_n < spec.grace_period:
            return None
        leaf.last_eval_n = leaf.n
        merits, thresholds = leaf.sketch.best_splits()
        best_f = int(np.argmax(merits))
        merit1 = merits[best_f]
        if not np.isfinite(merit1) or merit1 <= 0.0:
            return None
        others = np.delete(merits, best_f)
        merit2 = float(np.max(others)) if others.size else -np.inf
        merit2 = max(0.0, merit2) if np.isfinite(merit2) else 0.0
        eps = hoeffding_bound(spec.delta, leaf.n)
        if (1.0 - merit2 / merit1) > eps or eps < spec.tau:
            left = leaf.spawn_child(self._n_features)
            right = leaf.spawn_child(self._n_features)
            self.n_splits_ += 1
            return self._make_internal(best_f, float(thresholds[best_f]), left, right)
        return None

    def _train_subtree(self, root, x: np.ndarray, y: float):
        """Route x to a leaf of the given subtree, train it, handle a
        split.  Returns the (possibly replaced) subtree root."""
        node = root
        parent = None
        went_left = False
        while isinstance(node, _InternalNode):
            parent = node
            went_left = node.route(x)
            node = node.left if went_left else node.right
        node.learn(x, y, self.spec.model_selector_decay)
        replacement = self._maybe_split(node)
        if replacement is not None:
            if parent is None:
                return replacement
            if went_left:
                parent.left = replacement
            else:
                parent.right = replacement
        return root

    def learn_one(self, x, y: float) -> None:
        x = np.asarray(x, dtype=float)
        y = float(y)
        self._ensure_root(x)
        self._root = self._train_subtree(self._root, x, y)


class HoeffdingAdaptiveTreeRegressor(HoeffdingTreeRegressor):
    """Hoeffding tree that monitors each internal node for drift.

    Every internal node carries an :class:`AdwinDetector` fed with the
    absolute prediction error of samples routed through it.  When the
    detector fires, a fresh alternate subtree starts learning in the
    background on the same routed samples; it replaces the original
    subtree once its windowed mean error is lower by more than the sum
    of the two confidence radii.
    """

    def __init__(
        self,
        grace_period: int = 200,
        delta: float = 1e-7,
        model_selector_decay: float = 0.95,
        tau: float = 0.05,
        adwin_delta: float = 0.002,
    ):
        super().__init__(grace_period, delta, model_selector_decay, tau)
        if not (0.0 < adwin_delta < 1.0):
            raise ValueError(f"adwin_delta must lie in (0, 1), got {adwin_delta}")
        self.adwin_delta = float(adwin_delta)
        self.subtree_replacements_ = 0
        self.drift_events_ = 0

    def _make_internal(self, feature, threshold, left, right) -> _InternalNode:
        node = super()._make_internal(feature, threshold, left, right)
        node.drift_adwin = AdwinDetector(self.adwin_delta)
        return node

    def learn_one(self, x, y: float) -> None:
        x = np.asarray(x, dtype=float)
        y = float(y)
        self._ensure_root(x)
        # record the main routing path before any structural change
        internals = []
        node = self._root
        parent = None
        went_left = False
        while isinstance(node, _InternalNode):
            internals.append((node, parent, went_left))
            parent = node
            went_left = node.route(x)
            node = node.left if went_left else node.right
        main_pred = node.prediction(x)
        err = abs(y - main_pred)
        self._root = self._train_subtree(self._root, x, y)
        # drift bookkeeping from the root down; a replacement discards
        # everything deeper on the path
        for node, parent, went_left in internals:
            if node.drift_adwin.update(err):
                self.drift_events_ += 1
                if node.alt is None:
                    node.alt = _LeafNode(self._n_features, init_mean=main_pred)
                    node.alt_adwin = AdwinDetector(self.adwin_delta)
            if node.alt is None:
                continue
            alt_leaf = self._descend(node.alt, x)
            node.alt_adwin.update(abs(y - alt_leaf.prediction(x)))
            node.alt = self._train_subtree(node.alt, x, y)
            if self._alt_wins(node):
                promoted = node.alt
                node.alt = None
                node.alt_adwin = None
                if parent is None:
                    self._root = promoted
                else:
                    if went_left:
                        parent.left = promoted
                    else:
                        parent.right = promoted
                self.subtree_replacements_ += 1
                break

    @staticmethod
    def _alt_wins(node: _InternalNode) -> bool:
        alt, orig = node.alt_adwin, node.drift_adwin
        if alt.width == 0 or orig.width == 0:
            return False
        return alt.mean + alt.mean_radius() < orig.mean - orig.mean_radius()
