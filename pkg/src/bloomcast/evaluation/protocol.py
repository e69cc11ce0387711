"""Experiment protocol: pretrain, train, hold-out test per paradigm.

Batch: the learner fits once on the transformed pretrain+train rows
and predicts every test row.  Stream: samples arrive chronologically
and the learner predicts each anchor before seeing any label; the
label of anchor ``i`` is only delivered while processing anchor
``i + horizon`` (after that anchor's own prediction), mirroring the
real delay between issuing a forecast and observing the outcome.
During the test phase a stream learner is frozen unless
``test_update`` is set, in which case test-then-train continues under
the same delay.

Feature transforms are always fitted upstream on pretrain rows only;
this module never refits them.
"""

import hashlib
import pickle

import numpy as np

from bloomcast.evaluation.grids import LearnerSpec, build_learner
from bloomcast.evaluation.metrics import PredictionLog


class ExperimentError(Exception):
    """Learner failure annotated with the experiment that raised it."""

    def __init__(self, experiment_id: str, message: str):
        super().__init__(f"{experiment_id}: {message}")
        self.experiment_id = experiment_id


def state_fingerprint(learner) -> str:
    """Digest of the learner's full mutable state."""
    return hashlib.sha256(pickle.dumps(learner)).hexdigest()


def _experiment_id(spec, learner) -> str:
    if spec is not None:
        return spec.label()
    return type(learner).__name__


def run_batch_experiment(
    parts,
    transform,
    spec: LearnerSpec | None,
    seed: int = 0,
    experiment_id: str | None = None,
    learner=None,
) -> PredictionLog:
    """Fit on pretrain+train, predict the whole test split."""
    if learner is None:
        learner = build_learner(spec, seed)
    experiment_id = experiment_id or _experiment_id(spec, learner)
    X_fit = np.vstack([parts.pretrain.X, parts.train.X])
    y_fit = np.concatenate([parts.pretrain.y, parts.train.y])
    try:
        learner.fit(transform.transform(X_fit), y_fit)
        predicted = np.asarray(
            learner.predict(transform.transform(parts.test.X)), dtype=float
        )
    except Exception as exc:
        raise ExperimentError(experiment_id, str(exc)) from exc
    return PredictionLog(
        experiment_id=experiment_id,
        dates=list(parts.test.dates),
        observed=np.asarray(parts.test.y, dtype=float),
        predicted=predicted,
        cold_start_count=0,
        guarded_division_count=int(getattr(learner, "last_guard_count", 0)),
    )


def stream_warmup(learner, X, y, horizon: int, event_sink=None, dates=None) -> None:
    """Present anchors 0..n-1 prequentially with label delay ``horizon``.

    Every anchor is predicted (prediction discarded) before any label
    is consumed; anchor i's label is consumed while processing anchor
    i+horizon.
    """
    n = len(y)
    for i in range(n):
        learner.predict_one(X[i])
        if event_sink is not None:
            event_sink.append(("predict", i, None if dates is None else dates[i]))
        j = i - horizon
        if j >= 0:
            learner.learn_one(X[j], y[j])
            if event_sink is not None:
                event_sink.append(("learn", j, None if dates is None else dates[j]))


def stream_test_phase(
    learner,
    X_warm,
    y_warm,
    X_test,
    y_test,
    horizon: int,
    test_update: bool,
    event_sink=None,
    dates=None,
) -> np.ndarray:
    """Predict every test anchor in order; learn only when ``test_update``.

    With updates on, label delivery continues across the train/test
    boundary (the last ``horizon`` warmup labels arrive here).  With
    updates off the learner state is not touched at all.
    """
    n_warm = len(y_warm)
    n_test = len(y_test)
    X_all = np.vstack([X_warm, X_test]) if n_warm else X_test
    y_all = np.concatenate([y_warm, y_test]) if n_warm else y_test
    predicted = np.empty(n_test, dtype=float)
    for t in range(n_test):
        g = n_warm + t
        predicted[t] = learner.predict_one(X_test[t])
        if event_sink is not None:
            event_sink.append(("predict", g, None if dates is None else dates[g]))
        if not test_update:
            continue
        j = g - horizon
        if j >= 0:
            learner.learn_one(X_all[j], y_all[j])
            if event_sink is not None:
                event_sink.append(("learn", j, None if dates is None else dates[j]))
    return predicted


def run_stream_experiment(
    parts,
    transform,
    spec: LearnerSpec | None,
    horizon: int,
    test_update: bool = False,
    seed: int = 0,
    experiment_id: str | None = None,
    learner=None,
    event_sink=None,
) -> PredictionLog:
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    if learner is None:
        learner = build_learner(spec, seed)
    experiment_id = experiment_id or _experiment_id(spec, learner)
    X_warm = transform.transform(np.vstack([parts.pretrain.X, parts.train.X]))
    y_warm = np.concatenate([parts.pretrain.y, parts.train.y])
    X_test = transform.transform(parts.test.X)
    y_test = np.asarray(parts.test.y, dtype=float)
    all_dates = list(parts.pretrain.dates) + list(parts.train.dates) + list(parts.test.dates)
    try:
        stream_warmup(learner, X_warm, y_warm, horizon, event_sink, all_dates)
        cold_before_test = int(getattr(learner, "cold_start_count", 0))
        predicted = stream_test_phase(
            learner, X_warm, y_warm, X_test, y_test, horizon, test_update,
            event_sink, all_dates,
        )
    except Exception as exc:
        if isinstance(exc, ExperimentError):
            raise
        raise ExperimentError(experiment_id, str(exc)) from exc
    cold_in_test = int(getattr(learner, "cold_start_count", 0)) - cold_before_test
    return PredictionLog(
        experiment_id=experiment_id,
        dates=list(parts.test.dates),
        observed=y_test,
        predicted=predicted,
        cold_start_count=cold_in_test,
        guarded_division_count=0,
    )


def run_experiment(
    parts,
    transform,
    spec: LearnerSpec,
    horizon: int,
    test_update: bool = False,
    seed: int = 0,
    experiment_id: str | None = None,
) -> PredictionLog:
    """Dispatch on the spec's paradigm."""
    if spec.paradigm == "batch":
        return run_batch_experiment(parts, transform, spec, seed, experiment_id)
    return run_stream_experiment(
        parts, transform, spec, horizon, test_update, seed, experiment_id
    )
