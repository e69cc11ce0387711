import time

import numpy as np
import pytest

from _util import make_parts

from bloomcast.evaluation import (
    MODEL_FAMILIES,
    build_learner,
    enumerate_grid,
    grid_search,
    grid_size,
)
from bloomcast.evaluation.grids import _spec


class TestEnumeration:
    def test_counts_match_published_grids(self):
        want = {
            "knn_bl": 6,
            "knn_sl": 6,
            "htr": 600,
            "hatr": 600,
            "svr": 300,
            "mlp": 55,
            "rf": 18,
            "dome": 140,
        }
        start = time.perf_counter()
        got = {m: grid_size(m) for m in MODEL_FAMILIES}
        elapsed = time.perf_counter() - start
        assert got == want
        assert elapsed < 1.0

    def test_enumeration_is_deterministic(self):
        for model in MODEL_FAMILIES:
            assert enumerate_grid(model) == enumerate_grid(model)

    def test_all_full_specs_constructible(self):
        for model in MODEL_FAMILIES:
            for spec in enumerate_grid(model):
                build_learner(spec, seed=0)

    def test_all_reduced_specs_constructible(self):
        for model in MODEL_FAMILIES:
            specs = enumerate_grid(model, preset="reduced")
            assert 0 < len(specs) <= 6
            for spec in specs:
                build_learner(spec, seed=0)

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            enumerate_grid("gradient_boost")
        with pytest.raises(ValueError):
            enumerate_grid("knn_bl", preset="medium")

    def test_htr_grid_is_cartesian_in_table_order(self):
        specs = enumerate_grid("htr")
        first = specs[0].params_dict
        assert first == {
            "grace_period": 7, "delta": 1e-5,
            "model_selector_decay": 0.1, "tau": 0.01,
        }
        # innermost loop is tau
        second = specs[1].params_dict
        assert second["tau"] == 0.05
        assert second["grace_period"] == 7

    def test_svr_grid_splits_by_kernel(self):
        specs = enumerate_grid("svr")
        kernels = [s.params_dict["kernel"] for s in specs]
        assert kernels.count("linear") == 60
        assert kernels.count("gaussian") == 60
        assert kernels.count("polynomial") == 180


class TestGridSearch:
    def test_single_point_grid_returns_it(self):
        parts, transform = make_parts(seed=0)
        spec = _spec("knn_bl", k=3)
        res = grid_search(parts, "knn_bl", 3, transform, specs=[spec])
        assert res.best_spec == spec
        assert res.best_metrics is not None
        assert len(res.entries) == 1

    def test_equal_r2_earliest_wins(self):
        parts, transform = make_parts(seed=1)
        spec = _spec("knn_bl", k=5)
        res = grid_search(parts, "knn_bl", 3, transform, specs=[spec, spec])
        assert res.entries[0].metrics.r2 == res.entries[1].metrics.r2
        assert res.best_index == 0

    def test_crash_recorded_not_fatal(self):
        parts, transform = make_parts(seed=2)
        bad = _spec("knn_bl", k=10**6)  # k larger than the fit set
        good = _spec("knn_bl", k=3)
        res = grid_search(parts, "knn_bl", 3, transform, specs=[bad, good])
        assert res.n_failed == 1
        assert res.entries[0].error is not None
        assert res.entries[0].metrics is None
        assert res.best_spec == good

    def test_best_maximizes_test_r2(self):
        parts, transform = make_parts(seed=3)
        res = grid_search(parts, "knn_bl", 3, transform)
        r2s = [e.metrics.r2 for e in res.entries if e.metrics is not None]
        assert res.best_metrics.r2 == max(r2s)
        assert len(res.entries) == 6

    def test_stream_family_runs(self):
        parts, transform = make_parts(seed=4, horizon=2)
        res = grid_search(parts, "knn_sl", 2, transform, preset="reduced")
        assert res.best_spec is not None
        assert all(e.error is None for e in res.entries)
