"""Station series loading, daily interpolation, and lagged supervised datasets.

A raw station series holds one value slot per date for each named column.
Observations may be sparse (weekly sampling, missing cells); interpolation
produces a gap-free daily series from which supervised rows are built by
lagging the feature columns and shifting the target ``horizon`` days ahead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import pandas as pd

MONTH_FEATURE_NAME = "month_sin"


class UnusableColumnError(ValueError):
    """A column cannot be interpolated (too few observations or edge gaps)."""


@dataclass
class RawSeries:
    """Ordered per-date values for one station.

    ``columns`` maps column name to a list of values aligned with ``dates``;
    missing observations are ``None``. ``target_name`` must be one of the
    columns and holds the cell-count series being forecast.
    """

    station_id: str
    dates: list[date]
    columns: dict[str, list[float | None]]
    target_name: str

    def __post_init__(self) -> None:
        if not self.dates:
            raise ValueError("series has no dates")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise ValueError(f"dates not strictly increasing at {a} -> {b}")
        n = len(self.dates)
        for name, values in self.columns.items():
            if len(values) != n:
                raise ValueError(
                    f"column {name!r} has {len(values)} values for {n} dates"
                )
        if self.target_name not in self.columns:
            raise ValueError(f"target column {self.target_name!r} not in columns")

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def is_daily(self) -> bool:
        return all(
            (b - a).days == 1 for a, b in zip(self.dates, self.dates[1:])
        )


def interpolate_daily(series: RawSeries) -> RawSeries:
    """Fill every column onto the full daily grid by linear interpolation.

    Observed values are kept exactly; values between two observations lie on
    the straight line joining them (in day units). No extrapolation: a column
    missing its value on the first or last day of the span is rejected, as is
    any column with fewer than two observations.
    """
    start, end = series.dates[0], series.dates[-1]
    n_days = (end - start).days + 1
    day_index = {d: (d - start).days for d in series.dates}

    out_dates = [start + timedelta(days=i) for i in range(n_days)]
    out_columns: dict[str, list[float | None]] = {}
    for name, values in series.columns.items():
        obs_x = []
        obs_y = []
        for d, v in zip(series.dates, values):
            if v is not None:
                obs_x.append(day_index[d])
                obs_y.append(float(v))
        if len(obs_x) < 2:
            raise UnusableColumnError(
                f"column {name!r} has {len(obs_x)} observations; need at least 2"
            )
        if obs_x[0] != 0 or obs_x[-1] != n_days - 1:
            raise UnusableColumnError(
                f"column {name!r} has a leading/trailing gap; refusing to extrapolate"
            )
        filled = np.interp(np.arange(n_days), obs_x, obs_y)
        # keep observed samples bit-exact
        filled[obs_x] = obs_y
        out_columns[name] = [float(v) for v in filled]

    return RawSeries(
        station_id=series.station_id,
        dates=out_dates,
        columns=out_columns,
        target_name=series.target_name,
    )


def month_feature(d: date) -> float:
    """Cyclic month encoding sin(2*pi*m/12) for month number m in 1..12."""
    return math.sin(2.0 * math.pi * d.month / 12.0)


@dataclass(frozen=True)
class SupervisedRow:
    """One training example: lagged features at an anchor date, target h days out."""

    anchor_date: date
    features: np.ndarray
    target: float


@dataclass
class SupervisedFrame:
    """Chronological supervised rows stored column-major for learner speed."""

    dates: list[date]
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]

    def __post_init__(self) -> None:
        if self.X.shape[0] != len(self.dates) or self.y.shape[0] != len(self.dates):
            raise ValueError("dates/X/y length mismatch")
        if self.X.ndim != 2 or self.X.shape[1] != len(self.feature_names):
            raise ValueError("feature_names do not match X width")

    def __len__(self) -> int:
        return len(self.dates)

    def __getitem__(self, i: int) -> SupervisedRow:
        return SupervisedRow(self.dates[i], self.X[i], float(self.y[i]))

    def __iter__(self) -> Iterator[SupervisedRow]:
        for i in range(len(self)):
            yield self[i]

    def with_features(self, X: np.ndarray, feature_names: list[str] | None = None) -> "SupervisedFrame":
        names = feature_names
        if names is None:
            names = [f"f{i}" for i in range(X.shape[1])]
        return SupervisedFrame(self.dates, X, self.y, names)


def build_supervised(
    series: RawSeries,
    horizon: int,
    lags: Sequence[int],
    feature_columns: Sequence[str] | None = None,
) -> SupervisedFrame:
    """Build lagged feature rows with the target shifted ``horizon`` days ahead.

    Feature order is column order x ascending lag, with the month encoding
    last. A row exists for anchor index i only when every lag i-l and the
    target index i+horizon fall inside the series, so no feature ever reads a
    value after its anchor date.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not series.dates:
        raise ValueError("empty series")
    if not series.is_daily():
        raise ValueError("series must be daily; run interpolate_daily first")
    lag_list = sorted(set(int(l) for l in lags))
    if not lag_list or lag_list[0] < 0:
        raise ValueError(f"lags must be non-negative, got {lags}")

    if feature_columns is None:
        feature_columns = list(series.columns.keys())
    for c in feature_columns:
        if c not in series.columns:
            raise ValueError(f"unknown feature column {c!r}")

    n = series.n_days
    max_lag = lag_list[-1]
    first = max_lag
    last = n - 1 - horizon
    if last < first:
        raise ValueError(
            f"series of {n} days too short for horizon={horizon} and max lag={max_lag}"
        )

    cols = {name: np.asarray(series.columns[name], dtype=float) for name in feature_columns}
    for name, arr in cols.items():
        if np.isnan(arr).any():
            raise ValueError(f"column {name!r} has missing values; interpolate first")
    target = np.asarray(series.columns[series.target_name], dtype=float)

    anchors = np.arange(first, last + 1)
    feats = []
    names = []
    for name in feature_columns:
        arr = cols[name]
        for lag in lag_list:
            feats.append(arr[anchors - lag])
            names.append(f"{name}_lag{lag}")
    month = np.array([month_feature(series.dates[i]) for i in anchors])
    feats.append(month)
    names.append(MONTH_FEATURE_NAME)

    X = np.column_stack(feats)
    y = target[anchors + horizon]
    dates = [series.dates[i] for i in anchors]
    return SupervisedFrame(dates=dates, X=X, y=y, feature_names=names)


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint pretrain/train/test year sets, in chronological order."""

    pretrain_years: frozenset[int]
    train_years: frozenset[int]
    test_years: frozenset[int]

    def __post_init__(self) -> None:
        sets = [self.pretrain_years, self.train_years, self.test_years]
        if not all(sets):
            raise ValueError("all three year sets must be non-empty")
        if (self.pretrain_years & self.train_years
                or self.pretrain_years & self.test_years
                or self.train_years & self.test_years):
            raise ValueError("year sets must be pairwise disjoint")
        if not (max(self.pretrain_years) < min(self.train_years)
                and max(self.train_years) < min(self.test_years)):
            raise ValueError("pretrain years must precede train years, train must precede test")

    @classmethod
    def from_years(cls, pretrain, train, test) -> "SplitPlan":
        return cls(frozenset(pretrain), frozenset(train), frozenset(test))


@dataclass
class SplitParts:
    pretrain: SupervisedFrame
    train: SupervisedFrame
    test: SupervisedFrame


def split_by_years(frame: SupervisedFrame, plan: SplitPlan) -> SplitParts:
    """Assign each row to a partition by its anchor date's year.

    Rows whose anchor year belongs to no set are dropped; chronological order
    is preserved within each partition.
    """
    idx = {"pretrain": [], "train": [], "test": []}
    for i, d in enumerate(frame.dates):
        if d.year in plan.pretrain_years:
            idx["pretrain"].append(i)
        elif d.year in plan.train_years:
            idx["train"].append(i)
        elif d.year in plan.test_years:
            idx["test"].append(i)
    if not idx["test"]:
        raise ValueError("test partition is empty")

    def take(ix: list[int]) -> SupervisedFrame:
        sel = np.asarray(ix, dtype=int)
        return SupervisedFrame(
            dates=[frame.dates[i] for i in ix],
            X=frame.X[sel] if len(ix) else frame.X[:0],
            y=frame.y[sel] if len(ix) else frame.y[:0],
            feature_names=frame.feature_names,
        )

    return SplitParts(take(idx["pretrain"]), take(idx["train"]), take(idx["test"]))


@dataclass
class StationConfig:
    """Declarative wiring for one station: CSV columns and lag set."""

    station_id: str
    features: list[str]
    target: str
    lags: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4, 5, 6])

    @classmethod
    def from_json(cls, path: str | Path) -> "StationConfig":
        with open(path) as fh:
            raw = json.load(fh)
        return cls(
            station_id=raw["station_id"],
            features=list(raw["features"]),
            target=raw["target"],
            lags=[int(l) for l in raw.get("lags", [0, 1, 2, 3, 4, 5, 6])],
        )

    def to_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(
                {
                    "station_id": self.station_id,
                    "features": self.features,
                    "target": self.target,
                    "lags": self.lags,
                },
                fh,
                indent=2,
            )
            fh.write("\n")


def load_station_csv(path: str | Path, station_id: str, target_name: str) -> RawSeries:
    """Read a station CSV (first column ISO ``date``, empty cells = missing)."""
    df = pd.read_csv(path)
    if df.columns[0] != "date":
        raise ValueError(f"first column must be 'date', got {df.columns[0]!r}")
    dates = [date.fromisoformat(str(s)) for s in df["date"]]
    columns: dict[str, list[float | None]] = {}
    for name in df.columns[1:]:
        vals = df[name].to_numpy(dtype=float)
        columns[name] = [None if np.isnan(v) else float(v) for v in vals]
    return RawSeries(station_id=station_id, dates=dates, columns=columns, target_name=target_name)
