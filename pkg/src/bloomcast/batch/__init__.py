"""Batch-paradigm regressors: kNN, epsilon-SVR, MLP, and random forest.

All learners share the same contract: ``fit(X, y)`` consumes the full training
partition at once and returns ``self``; ``predict(X)`` is deterministic after
fitting for a fixed construction seed.
"""

from bloomcast.batch.knn import KnnBatchRegressor
from bloomcast.batch.svr import SvrConvergenceError, SvrRegressor
from bloomcast.batch.mlp import MlpDivergenceError, MlpRegressor
from bloomcast.batch.forest import RandomForestRegressor

__all__ = [
    "KnnBatchRegressor",
    "SvrRegressor",
    "SvrConvergenceError",
    "MlpRegressor",
    "MlpDivergenceError",
    "RandomForestRegressor",
]
