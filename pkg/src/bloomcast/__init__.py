"""Toolkit for forecasting harmful-algal-bloom cell counts from daily station data.

Builds lagged supervised datasets from raw station series, trains batch and
stream regressors over hyperparameter grids, and aggregates hold-out results
into ranking reports.
"""

__version__ = "0.1.0"
