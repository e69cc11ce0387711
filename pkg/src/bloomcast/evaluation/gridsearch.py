"""Exhaustive hyperparameter search for one model family.

Every grid point runs as an independent experiment; crashes are
recorded per config and never abort the sweep.  The winner maximizes
test-split R2, ties broken by earliest enumeration index.  Selecting
on the test split reproduces the comparative methodology this toolkit
exists to study — it compares models, it does not tune a deployable
one; reports carry the same caveat.
"""

from dataclasses import dataclass, field

from bloomcast.evaluation.grids import LearnerSpec, enumerate_grid
from bloomcast.evaluation.metrics import MetricsReport, PredictionLog, summarize
from bloomcast.evaluation.protocol import run_experiment


@dataclass
class GridEntry:
    index: int
    spec: LearnerSpec
    metrics: MetricsReport | None
    error: str | None = None


@dataclass
class GridSearchResult:
    model: str
    horizon: int
    entries: list = field(default_factory=list)
    best_index: int | None = None
    best_log: PredictionLog | None = None

    @property
    def best_spec(self):
        return None if self.best_index is None else self.entries[self.best_index].spec

    @property
    def best_metrics(self):
        return None if self.best_index is None else self.entries[self.best_index].metrics

    @property
    def n_failed(self) -> int:
        return sum(1 for e in self.entries if e.error is not None)


def grid_search(
    parts,
    model: str,
    horizon: int,
    transform,
    preset: str = "full",
    test_update: bool = False,
    seed: int = 0,
    specs=None,
) -> GridSearchResult:
    """Run every config of the family's grid and pick the best by test R2.

    ``specs`` overrides the enumerated grid (same ordering semantics)
    when a caller wants a custom subset.
    """
    if specs is None:
        specs = enumerate_grid(model, preset)
    result = GridSearchResult(model=model, horizon=horizon)
    best_r2 = None
    for idx, spec in enumerate(specs):
        try:
            log = run_experiment(
                parts, transform, spec, horizon, test_update=test_update, seed=seed,
                experiment_id=f"{model}[{idx}] {spec.label()}",
            )
            metrics = summarize(log)
        except Exception as exc:
            result.entries.append(GridEntry(idx, spec, None, error=str(exc)))
            continue
        result.entries.append(GridEntry(idx, spec, metrics))
        # strict > keeps the earliest enumerated config on ties
        if best_r2 is None or metrics.r2 > best_r2:
            best_r2 = metrics.r2
            result.best_index = idx
            result.best_log = log
    return result
