"""Experiment protocol, metrics, grid search, and ranking aggregation."""

from bloomcast.evaluation.grids import (
    DISPLAY_NAMES,
    GRID_BUILDERS,
    MODEL_FAMILIES,
    PARADIGM,
    LearnerSpec,
    build_learner,
    enumerate_grid,
    grid_size,
)
from bloomcast.evaluation.gridsearch import GridEntry, GridSearchResult, grid_search
from bloomcast.evaluation.metrics import (
    MetricsReport,
    PredictionLog,
    UndefinedR2Error,
    mae,
    r2,
    rmse,
    summarize,
)
from bloomcast.evaluation.protocol import (
    ExperimentError,
    run_batch_experiment,
    run_experiment,
    run_stream_experiment,
    state_fingerprint,
    stream_test_phase,
    stream_warmup,
)
from bloomcast.evaluation.ranking import RankingTable, build_ranking, competition_ranks

__all__ = [
    "DISPLAY_NAMES",
    "GRID_BUILDERS",
    "MODEL_FAMILIES",
    "PARADIGM",
    "LearnerSpec",
    "build_learner",
    "enumerate_grid",
    "grid_size",
    "GridEntry",
    "GridSearchResult",
    "grid_search",
    "MetricsReport",
    "PredictionLog",
    "UndefinedR2Error",
    "mae",
    "r2",
    "rmse",
    "summarize",
    "ExperimentError",
    "run_batch_experiment",
    "run_experiment",
    "run_stream_experiment",
    "state_fingerprint",
    "stream_test_phase",
    "stream_warmup",
    "RankingTable",
    "build_ranking",
    "competition_ranks",
]
