"""Deterministic synthetic station data with a forecastable bloom target.

The generator draws a latent upwelling-like driver (seasonally biased
AR(1)).  Sustained threshold exceedances of the driver trigger bloom
pulses that hit the target ``PULSE_LEAD`` days later, so the feature
columns — noisy linear transforms of the driver and of the seasonal
cycle — carry enough advance signal for horizons up to
``PULSE_LEAD - 1`` days by construction.  Everything is a pure
function of the spec: the same spec yields bitwise-identical output.
"""

import math
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from bloomcast.dataset import RawSeries

SEASON_PERIOD = 365  # days; the cycle repeats bit-exactly
PULSE_LEAD = 8       # days between trigger and bloom onset
PULSE_DURATION = 12  # days of pulse support
RUN_LENGTH = 3       # consecutive exceedance days that trigger a bloom
AR_COEF = 0.9


@dataclass(frozen=True)
class DriftSpec:
    """Optional non-stationarity: nothing, a shifted season, or a flipped
    feature-driver relation."""

    kind: str = "none"
    shift_days: int = 0
    start_year: int | None = None
    flip_date: date | None = None

    def __post_init__(self):
        if self.kind not in ("none", "season_shift", "relation_flip"):
            raise ValueError(f"unknown drift kind {self.kind!r}")
        if self.kind == "season_shift" and (self.start_year is None or self.shift_days == 0):
            raise ValueError("season_shift needs start_year and a non-zero shift_days")
        if self.kind == "relation_flip" and self.flip_date is None:
            raise ValueError("relation_flip needs flip_date")


@dataclass(frozen=True)
class SynthSpec:
    station_id: str = "SYN1"
    seed: int = 0
    start_year: int = 2013
    n_years: int = 7
    n_station_features: int = 3
    n_section_features: int = 2
    baseline: float = 50.0
    seasonal_amplitude: float = 40.0
    bloom_rate: float = 4.0       # target bloom events per year
    bloom_magnitude_mu: float = 5.0
    bloom_magnitude_sigma: float = 0.6
    feature_noise: float = 0.1
    target_noise: float = 5.0
    sampling: str = "daily"
    drift: DriftSpec = field(default_factory=DriftSpec)

    def __post_init__(self):
        if self.n_years < 1:
            raise ValueError(f"span must cover at least one year, got {self.n_years}")
        if self.n_station_features < 1:
            raise ValueError("need at least one station feature")
        if self.n_section_features < 0:
            raise ValueError("section feature count cannot be negative")
        if self.sampling not in ("daily", "weekly"):
            raise ValueError(f"sampling must be 'daily' or 'weekly', got {self.sampling!r}")
        if self.feature_noise < 0 or self.target_noise < 0:
            raise ValueError("noise levels cannot be negative")
        if self.bloom_rate < 0:
            raise ValueError("bloom_rate cannot be negative")


def _dates(spec: SynthSpec) -> list:
    start = date(spec.start_year, 1, 1)
    end = date(spec.start_year + spec.n_years - 1, 12, 31)
    n = (end - start).days + 1
    return [start + timedelta(days=i) for i in range(n)]


def _seasonal(spec: SynthSpec, dates) -> np.ndarray:
    """Sinusoid of bit-exact 365-day period, peaking mid-summer.

    Under season_shift drift the phase moves by ``shift_days`` from
    ``start_year`` onward.
    """
    t = np.arange(len(dates))
    shift = np.zeros(len(dates), dtype=int)
    if spec.drift.kind == "season_shift":
        years = np.array([d.year for d in dates])
        shift[years >= spec.drift.start_year] = spec.drift.shift_days
    # peak near day 196 (mid July)
    phase = (t - shift - 105) % SEASON_PERIOD
    return np.sin(2.0 * math.pi * phase / SEASON_PERIOD)


def _count_and_mark_triggers(exceed: np.ndarray) -> list:
    """Indices where an exceedance run reaches RUN_LENGTH days."""
    triggers = []
    run = 0
    for i, flag in enumerate(exceed):
        run = run + 1 if flag else 0
        if run == RUN_LENGTH:
            triggers.append(i)
    return triggers


def _bloom_threshold(driver: np.ndarray, target_events: int) -> float:
    """Threshold giving roughly the requested number of trigger events.

    The count is not monotone in the threshold (lowering it eventually merges
    exceedance runs), so scan candidate quantiles and keep the threshold whose
    count lands closest to the target, preferring the higher threshold on
    ties. Rates beyond what the driver supports degrade to the maximum.
    """
    candidates = np.unique(np.quantile(driver, np.linspace(0.0, 1.0, 512)))
    best_thr = float(driver.max()) + 1.0
    best_gap = target_events  # count 0
    for thr in candidates[::-1]:
        gap = abs(len(_count_and_mark_triggers(driver > thr)) - target_events)
        if gap < best_gap:
            best_gap, best_thr = gap, float(thr)
    return best_thr


def generate_with_truth(spec: SynthSpec):
    """Return (series, truth, latent): the station data, the pre-noise
    target function, and the latent driver used to seed diagnostics."""
    dates = _dates(spec)
    n = len(dates)
    rng = np.random.default_rng(spec.seed)
    seasonal = _seasonal(spec, dates)

    innovations = rng.normal(0.0, 1.0, size=n)
    latent = np.empty(n)
    latent[0] = innovations[0]
    for i in range(1, n):
        latent[i] = AR_COEF * latent[i - 1] + innovations[i]
    driver = latent + 1.5 * seasonal  # exceedances cluster in summer

    pulses = np.zeros(n)
    if spec.bloom_rate > 0:
        target_events = max(1, round(spec.bloom_rate * spec.n_years))
        threshold = _bloom_threshold(driver, target_events)
        triggers = _count_and_mark_triggers(driver > threshold)
        window = np.sin(math.pi * (np.arange(PULSE_DURATION) + 0.5) / PULSE_DURATION) ** 2
        for t0 in triggers:
            magnitude = float(rng.lognormal(spec.bloom_magnitude_mu, spec.bloom_magnitude_sigma))
            start = t0 + PULSE_LEAD
            stop = min(n, start + PULSE_DURATION)
            if start < n:
                pulses[start:stop] += magnitude * window[: stop - start]

    signal = spec.baseline + spec.seasonal_amplitude * seasonal + pulses
    truth = np.maximum(0.0, signal)
    target = np.maximum(0.0, signal + rng.normal(0.0, spec.target_noise, size=n))

    coupling = np.ones(n)
    if spec.drift.kind == "relation_flip":
        flip_from = (spec.drift.flip_date - dates[0]).days
        coupling[max(0, flip_from):] = -1.0

    smoothed = np.convolve(latent, np.ones(3) / 3.0, mode="same")
    columns: dict = {}
    for j in range(spec.n_station_features):
        a = 1.0 - 0.2 * j
        b = 2.0 + 0.5 * j
        base = 10.0 + 3.0 * j
        noise = rng.normal(0.0, spec.feature_noise, size=n)
        values = base + a * coupling * latent + b * seasonal + noise
        columns[f"station_var{j}"] = [float(v) for v in values]
    for j in range(spec.n_section_features):
        a = 0.8 - 0.1 * j
        b = 1.0 + 0.3 * j
        noise = rng.normal(0.0, spec.feature_noise, size=n)
        values = 5.0 + a * coupling * smoothed + b * seasonal + noise
        columns[f"section_var{j}"] = [float(v) for v in values]
    columns["target"] = [float(v) for v in target]

    if spec.sampling == "weekly":
        for name, values in columns.items():
            kept = [
                v if (i % 7 == 0 or i == n - 1) else None
                for i, v in enumerate(values)
            ]
            columns[name] = kept

    series = RawSeries(
        station_id=spec.station_id,
        dates=dates,
        columns=columns,
        target_name="target",
    )
    return series, truth, latent


def generate(spec: SynthSpec) -> RawSeries:
    return generate_with_truth(spec)[0]


def series_to_csv(series: RawSeries) -> str:
    names = list(series.columns.keys())
    lines = [",".join(["date"] + names)]
    for i, d in enumerate(series.dates):
        cells = [d.isoformat()]
        for name in names:
            v = series.columns[name][i]
            cells.append("" if v is None else repr(float(v)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def truth_to_csv(dates, truth) -> str:
    lines = ["date,truth"]
    for d, v in zip(dates, truth):
        lines.append(f"{d.isoformat()},{float(v)!r}")
    return "\n".join(lines) + "\n"
