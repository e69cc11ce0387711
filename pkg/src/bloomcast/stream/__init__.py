"""Stream-paradigm regressors that learn one sample at a time.

Provides a windowed nearest-neighbour regressor, Hoeffding tree
regressors (plain and drift-adaptive), and the ADWIN change detector
they build on.
"""

from bloomcast.stream.adwin import AdwinDetector
from bloomcast.stream.hoeffding import (
    HoeffdingAdaptiveTreeRegressor,
    HoeffdingTreeRegressor,
    hoeffding_bound,
)
from bloomcast.stream.knn import KnnStreamRegressor

__all__ = [
    "AdwinDetector",
    "HoeffdingAdaptiveTreeRegressor",
    "HoeffdingTreeRegressor",
    "KnnStreamRegressor",
    "hoeffding_bound",
]
