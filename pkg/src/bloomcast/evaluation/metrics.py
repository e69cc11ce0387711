"""Regression metrics over chronological prediction logs.

R² is defined as 1 - SSr/SSm where SSr is the squared residual sum and SSm the
squared deviation of the observations about their own mean. MAE and RMSE are in
the target's units (cells/L for cell-count experiments).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np


class UndefinedR2Error(ValueError):
    """R² has no value when every observed target is identical (SSm = 0)."""


@dataclass
class PredictionLog:
    """Chronological (date, observed, predicted) triples for one experiment."""

    experiment_id: str
    dates: list[date]
    observed: np.ndarray
    predicted: np.ndarray
    cold_start_count: int = 0
    guarded_division_count: int = 0

    def __post_init__(self) -> None:
        self.observed = np.asarray(self.observed, dtype=float)
        self.predicted = np.asarray(self.predicted, dtype=float)
        n = len(self.dates)
        if self.observed.shape != (n,) or self.predicted.shape != (n,):
            raise ValueError("dates/observed/predicted length mismatch")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise ValueError(f"log dates not strictly increasing at {a} -> {b}")

    def __len__(self) -> int:
        return len(self.dates)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write("date,observed,predicted\n")
            for d, y, p in zip(self.dates, self.observed, self.predicted):
                fh.write(f"{d.isoformat()},{float(y)!r},{float(p)!r}\n")


@dataclass(frozen=True)
class MetricsReport:
    r2: float
    mae: float
    rmse: float
    n: int

    def to_dict(self) -> dict:
        return {"r2": self.r2, "mae": self.mae, "rmse": self.rmse, "n": self.n}


def _arrays(log) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(log, PredictionLog):
        return log.observed, log.predicted
    y, p = log
    return np.asarray(y, dtype=float), np.asarray(p, dtype=float)


def r2(log) -> float:
    y, p = _arrays(log)
    if y.shape[0] < 2:
        raise ValueError(f"R2 needs at least 2 samples, got {y.shape[0]}")
    ss_m = float(np.sum((y - y.mean()) ** 2))
    if ss_m == 0.0:
        raise UndefinedR2Error("all observed values identical; R2 undefined")
    ss_r = float(np.sum((y - p) ** 2))
    return 1.0 - ss_r / ss_m


def mae(log) -> float:
    y, p = _arrays(log)
    if y.shape[0] == 0:
        raise ValueError("MAE of an empty log")
    return float(np.mean(np.abs(y - p)))


def rmse(log) -> float:
    y, p = _arrays(log)
    if y.shape[0] == 0:
        raise ValueError("RMSE of an empty log")
    return float(np.sqrt(np.mean((y - p) ** 2)))


def summarize(log) -> MetricsReport:
    y, _ = _arrays(log)
    return MetricsReport(r2=r2(log), mae=mae(log), rmse=rmse(log), n=int(y.shape[0]))
