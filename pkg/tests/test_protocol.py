import numpy as np
import pytest

from _util import frame_like, iid_parts, make_parts

from bloomcast.batch import KnnBatchRegressor
from bloomcast.evaluation import (
    ExperimentError,
    LearnerSpec,
    mae,
    run_batch_experiment,
    run_stream_experiment,
    state_fingerprint,
    stream_test_phase,
    stream_warmup,
    summarize,
)
from bloomcast.evaluation.grids import _spec
from bloomcast.stream import KnnStreamRegressor


class _MeanStub:
    def fit(self, X, y):
        self.value = float(np.mean(y))
        return self

    def predict(self, X):
        return np.full(len(X), self.value)


class _BoomStub:
    def fit(self, X, y):
        raise RuntimeError("boom")

    def predict(self, X):  # pragma: no cover
        return np.zeros(len(X))


class TestBatchExperiment:
    def test_mean_stub_contract(self):
        parts, transform = make_parts(seed=0)
        log = run_batch_experiment(parts, transform, None, learner=_MeanStub(),
                                   experiment_id="stub")
        fit_mean = np.concatenate([parts.pretrain.y, parts.train.y]).mean()
        want = np.abs(parts.test.y - fit_mean).mean()
        assert mae(log) == pytest.approx(want, rel=1e-12)
        assert log.experiment_id == "stub"
        assert len(log.observed) == len(parts.test.y)

    def test_shuffling_train_rows_knn_invariant(self):
        parts, transform = make_parts(seed=1)
        spec = _spec("knn_bl", k=5)
        log1 = run_batch_experiment(parts, transform, spec)
        rng = np.random.default_rng(0)
        perm = rng.permutation(len(parts.train.y))
        shuffled = type(parts)(
            pretrain=parts.pretrain,
            train=frame_like(
                [parts.train.dates[i] for i in perm],
                parts.train.X[perm],
                parts.train.y[perm],
            ),
            test=parts.test,
        )
        log2 = run_batch_experiment(shuffled, transform, spec)
        np.testing.assert_array_equal(log1.predicted, log2.predicted)

    def test_pipeline_determinism(self):
        parts, transform = make_parts(seed=2)
        spec = _spec("mlp", hidden=(4,), learning_rate=1e-2, epochs=20)
        log1 = run_batch_experiment(parts, transform, spec, seed=7)
        log2 = run_batch_experiment(parts, transform, spec, seed=7)
        np.testing.assert_array_equal(log1.predicted, log2.predicted)

    def test_learner_error_annotated(self):
        parts, transform = make_parts(seed=3)
        with pytest.raises(ExperimentError, match="myexp"):
            run_batch_experiment(parts, transform, None, learner=_BoomStub(),
                                 experiment_id="myexp")


class TestStreamExperiment:
    def test_delay_enforced_in_event_trace(self):
        parts, transform = make_parts(seed=4, horizon=3)
        events = []
        run_stream_experiment(
            parts, transform, _spec("knn_sl", k=3, buffer_size=1000, leaf_capacity=20),
            horizon=3, test_update=True, event_sink=events,
        )
        predicted_at = {}
        for pos, (kind, idx, _date) in enumerate(events):
            if kind == "predict":
                predicted_at[idx] = pos
        for pos, (kind, idx, _date) in enumerate(events):
            if kind == "learn":
                for later in (idx + 1, idx + 2, idx + 3):
                    assert later in predicted_at and predicted_at[later] < pos, (
                        f"label {idx} consumed before anchor {later} was predicted"
                    )

    def test_frozen_flag_state_hash(self):
        parts, transform = make_parts(seed=5, horizon=2)
        X_warm = transform.transform(np.vstack([parts.pretrain.X, parts.train.X]))
        y_warm = np.concatenate([parts.pretrain.y, parts.train.y])
        X_test = transform.transform(parts.test.X)

        frozen = KnnStreamRegressor(k=3)
        stream_warmup(frozen, X_warm, y_warm, horizon=2)
        before = state_fingerprint(frozen)
        stream_test_phase(frozen, X_warm, y_warm, X_test, parts.test.y,
                          horizon=2, test_update=False)
        assert state_fingerprint(frozen) == before

        updating = KnnStreamRegressor(k=3)
        stream_warmup(updating, X_warm, y_warm, horizon=2)
        before = state_fingerprint(updating)
        stream_test_phase(updating, X_warm, y_warm, X_test, parts.test.y,
                          horizon=2, test_update=True)
        assert state_fingerprint(updating) != before

    def test_stream_knn_approaches_batch_knn_on_stationary_data(self):
        parts, transform = iid_parts(seed=6)
        spec_sl = _spec("knn_sl", k=5, buffer_size=1000, leaf_capacity=20)
        log_sl = run_stream_experiment(parts, transform, spec_sl, horizon=1,
                                       test_update=True)
        mae_sl = mae(log_sl)
        X_fit = transform.transform(np.vstack([parts.pretrain.X, parts.train.X]))
        y_fit = np.concatenate([parts.pretrain.y, parts.train.y])
        batch = KnnBatchRegressor(k=5).fit(X_fit, y_fit)
        pred_bl = batch.predict(transform.transform(parts.test.X))
        mae_bl = float(np.abs(parts.test.y - pred_bl).mean())
        assert abs(mae_sl - mae_bl) <= 0.10 * mae_bl

    def test_labels_cross_boundary_only_when_updating(self):
        parts, transform = make_parts(seed=7, horizon=3)
        spec = _spec("knn_sl", k=3, buffer_size=1000, leaf_capacity=20)
        events_off = []
        run_stream_experiment(parts, transform, spec, horizon=3,
                              test_update=False, event_sink=events_off)
        n_warm = len(parts.pretrain.y) + len(parts.train.y)
        learns_off = [idx for kind, idx, _ in events_off if kind == "learn"]
        assert max(learns_off) < n_warm - 3  # tail labels never delivered
        events_on = []
        run_stream_experiment(parts, transform, spec, horizon=3,
                              test_update=True, event_sink=events_on)
        learns_on = [idx for kind, idx, _ in events_on if kind == "learn"]
        assert set(range(n_warm - 3, n_warm)) <= set(learns_on)
        assert any(idx >= n_warm for idx in learns_on)

    def test_horizon_validated(self):
        parts, transform = make_parts(seed=8)
        with pytest.raises(ValueError):
            run_stream_experiment(parts, transform,
                                  _spec("knn_sl", k=1, buffer_size=10, leaf_capacity=20),
                                  horizon=0)

    def test_log_matches_test_rows(self):
        parts, transform = make_parts(seed=9, horizon=1)
        spec = _spec("htr", grace_period=30, delta=1e-7,
                     model_selector_decay=0.9, tau=0.05)
        log = run_stream_experiment(parts, transform, spec, horizon=1)
        assert log.dates == list(parts.test.dates)
        np.testing.assert_array_equal(log.observed, parts.test.y)
        report = summarize(log)
        assert report.n == len(parts.test.y)
