"""Adaptive-windowing change detector over a real-valued signal.

The detector keeps a variable-length window of the most recent inputs,
compressed into an exponential histogram: buckets of capacity 2^level,
at most ``max_buckets`` per level, each storing (sum, sum of squares).
After every insert it tests every bucket boundary as a candidate cut;
if the two sub-window means differ by more than a variance-aware
threshold, the older sub-window is dropped and drift is reported.
"""

import math
from collections import deque


class AdwinDetector:
    """Detects mean shifts and keeps only the post-shift window.

    ``update(value)`` inserts one observation and returns True when a
    shift was detected (the retained window then excludes the old
    regime).  Window statistics (``width``, ``mean``, ``variance``)
    are exact for the retained elements because bucket merges preserve
    counts, sums and sums of squares.
    """

    def __init__(self, delta: float = 0.002, max_buckets: int = 5):
        if not (0.0 < delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        if max_buckets < 1:
            raise ValueError("max_buckets must be at least 1")
        self.delta = float(delta)
        self.max_buckets = int(max_buckets)
        # _rows[i] holds buckets of capacity 2**i as [sum, sumsq],
        # ordered oldest to newest within the row
        self._rows: list[deque] = [deque()]
        self._width = 0
        self._sum = 0.0
        self._sumsq = 0.0
        self.n_detections = 0

    @property
    def width(self) -> int:
        return self._width

    @property
    def mean(self) -> float:
        return self._sum / self._width if self._width else 0.0

    @property
    def variance(self) -> float:
        if self._width == 0:
            return 0.0
        m = self._sum / self._width
        return max(0.0, self._sumsq / self._width - m * m)

    def mean_radius(self) -> float:
        """Bernstein-style confidence radius around ``mean``.

        Used to compare two detectors' window means; shrinks roughly as
        1/sqrt(width).  Infinite for an empty window.
        """
        n = self._width
        if n == 0:
            return math.inf
        ln_term = math.log(2.0 / self.delta)
        return math.sqrt(2.0 * self.variance * ln_term / n) + 2.0 * ln_term / (3.0 * n)

    def update(self, value: float) -> bool:
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"value must be finite, got {value}")
        self._insert(value)
        drift = False
        while True:
            cut = self._find_cut()
            if cut is None:
                break
            drift = True
            self._drop_oldest(cut)
        if drift:
            self.n_detections += 1
        return drift

    def _insert(self, value: float) -> None:
        self._rows[0].append([value, value * value])
        self._width += 1
        self._sum += value
        self._sumsq += value * value
        level = 0
        while len(self._rows[level]) > self.max_buckets:
            # merge the two oldest buckets of this level into one of
            # double capacity; it is newer than everything one level up
            a = self._rows[level].popleft()
            b = self._rows[level].popleft()
            if level + 1 == len(self._rows):
                self._rows.append(deque())
            self._rows[level + 1].append([a[0] + b[0], a[1] + b[1]])
            level += 1

    def _buckets_old_to_new(self):
        for level in range(len(self._rows) - 1, -1, -1):
            cap = 1 << level
            for s, q in self._rows[level]:
                yield cap, s, q

    def _find_cut(self):
        """Index (old-to-new) of the last bucket of the older sub-window
        at the newest boundary whose mean gap exceeds the cut threshold,
        or None."""
        n = self._width
        if n < 2:
            return None
        var = self.variance
        ln_term = math.log(2.0 * n / self.delta)
        total = self._sum
        n0 = 0
        s0 = 0.0
        best = None
        for i, (cap, s, _q) in enumerate(self._buckets_old_to_new()):
            n0 += cap
            s0 += s
            n1 = n - n0
            if n1 <= 0:
                break
            m = 1.0 / (1.0 / n0 + 1.0 / n1)
            eps = math.sqrt(2.0 * var * ln_term / m) + 2.0 * ln_term / (3.0 * m)
            if abs(s0 / n0 - (total - s0) / n1) >= eps:
                best = i
        return best

    def _drop_oldest(self, upto: int) -> None:
        """Drop buckets 0..upto in old-to-new order."""
        remaining = upto + 1
        for level in range(len(self._rows) - 1, -1, -1):
            cap = 1 << level
            row = self._rows[level]
            while row and remaining > 0:
                s, q = row.popleft()
                self._width -= cap
                self._sum -= s
                self._sumsq -= q
                remaining -= 1
            if remaining == 0:
                break
