import math

import numpy as np
import pytest

from bloomcast.stream import AdwinDetector


class TestWindowStatistics:
    def test_exact_for_small_windows(self):
        # below 2 * max_buckets inserts no size-1 buckets have merged yet
        rng = np.random.default_rng(0)
        values = rng.normal(size=10)
        det = AdwinDetector(delta=0.002, max_buckets=5)
        for v in values:
            det.update(v)
        assert det.width == 10
        assert det.mean == pytest.approx(values.mean(), abs=1e-12)
        assert det.variance == pytest.approx(values.var(), abs=1e-12)

    def test_exact_after_compression(self):
        # merges preserve count, sum and sum of squares
        rng = np.random.default_rng(1)
        values = rng.uniform(size=500)
        det = AdwinDetector(delta=1e-9)  # tiny delta: no spurious drops
        for v in values:
            det.update(v)
        assert det.width == 500
        assert det.mean == pytest.approx(values.mean(), abs=1e-10)
        assert det.variance == pytest.approx(values.var(), abs=1e-10)

    def test_bucket_compression_rule(self):
        det = AdwinDetector(delta=0.002, max_buckets=5)
        for v in np.random.default_rng(2).normal(size=1000):
            det.update(v)
        for row in det._rows:
            assert len(row) <= det.max_buckets
        total = sum((1 << lvl) * len(row) for lvl, row in enumerate(det._rows))
        assert total == det.width

    def test_mean_radius_shrinks(self):
        det = AdwinDetector(delta=0.002)
        assert det.mean_radius() == math.inf
        radii = []
        for v in np.random.default_rng(3).normal(size=200):
            det.update(v)
            radii.append(det.mean_radius())
        assert radii[-1] < radii[10]


class TestDriftDetection:
    def test_constant_stream_never_drifts(self):
        det = AdwinDetector(delta=0.002)
        assert not any(det.update(0.0) for _ in range(1000))
        assert det.n_detections == 0
        assert det.width == 1000

    def test_step_detected_within_100_samples(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            det = AdwinDetector(delta=0.002)
            for _ in range(500):
                det.update(rng.normal(0.0, 0.05))
            detected_at = None
            for t in range(500):
                if det.update(rng.normal(1.0, 0.05)):
                    detected_at = t
                    break
            assert detected_at is not None and detected_at < 100, f"seed {seed}"

    def test_step_drops_old_regime(self):
        det = AdwinDetector(delta=0.002)
        for _ in range(500):
            det.update(0.0)
        for _ in range(500):
            det.update(1.0)
        assert det.n_detections >= 1
        assert det.mean >= 0.9

    def test_downward_step_also_detected(self):
        det = AdwinDetector(delta=0.002)
        for _ in range(500):
            det.update(5.0)
        fired = any(det.update(0.0) for _ in range(200))
        assert fired


class TestValidation:
    def test_delta_range(self):
        with pytest.raises(ValueError):
            AdwinDetector(delta=0.0)
        with pytest.raises(ValueError):
            AdwinDetector(delta=1.0)

    def test_non_finite_rejected(self):
        det = AdwinDetector()
        with pytest.raises(ValueError):
            det.update(float("nan"))
        with pytest.raises(ValueError):
            det.update(float("inf"))
