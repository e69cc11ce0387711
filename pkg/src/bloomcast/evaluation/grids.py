"""Hyperparameter grids for the eight model families.

``enumerate_grid`` expands a family name into an ordered list of
:class:`LearnerSpec`; the enumeration order is part of the contract
because grid search breaks ties by earliest index.  The ``reduced``
preset is a documented subset (plus smaller forests and MLP budgets)
for CI-scale sweeps; counts below refer to the ``full`` preset.

Families and full-grid sizes:

=========  ========  =====
family     paradigm  specs
=========  ========  =====
knn_bl     batch         6
knn_sl     stream        6
htr        stream      600
hatr       stream      600
svr        batch       300
mlp        batch        55
rf         batch        18
dome       batch       140
=========  ========  =====
"""

from dataclasses import dataclass

from bloomcast.batch import (
    KnnBatchRegressor,
    MlpRegressor,
    RandomForestRegressor,
    SvrRegressor,
)
from bloomcast.dome import DomeRegressor
from bloomcast.stream import (
    HoeffdingAdaptiveTreeRegressor,
    HoeffdingTreeRegressor,
    KnnStreamRegressor,
)

MODEL_FAMILIES = ("knn_bl", "knn_sl", "htr", "hatr", "svr", "mlp", "rf", "dome")

PARADIGM = {
    "knn_bl": "batch",
    "knn_sl": "stream",
    "htr": "stream",
    "hatr": "stream",
    "svr": "batch",
    "mlp": "batch",
    "rf": "batch",
    "dome": "batch",
}

DISPLAY_NAMES = {
    "knn_bl": "kNN-BL",
    "knn_sl": "kNN-SL",
    "htr": "HTR",
    "hatr": "HATR",
    "svr": "SVR",
    "mlp": "MLP",
    "rf": "RF",
    "dome": "DoME",
}

_K_VALUES = (1, 3, 5, 7, 9, 11)
_GRACE = (7, 14, 30, 180, 365)
_DELTA = (1e-5, 1e-6, 1e-7, 1e-8)
_DECAY = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
_TAU = (0.01, 0.05, 0.1)
_SVR_KERNELS = ("linear", "gaussian", "polynomial")
_SVR_C = (0.001, 0.01, 0.05, 0.1, 1.0, 10.0)
_SVR_EPS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
_SVR_DEGREES = (1, 2, 3)
_MLP_ARCHS = (
    (2,), (4,), (8,), (10,),
    (2, 2), (4, 2), (10, 2), (10, 10), (16, 8), (32, 8), (32, 16),
)
_MLP_LR = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
_RF_CRITERIA = ("squared_error", "friedman_mse", "poisson")
_RF_DEPTHS = (2, 4, 10, 20, 50, None)
_DOME_REDUCTIONS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
_DOME_NODES = tuple(range(5, 101, 5))

HATR_ADWIN_DELTA = 0.002


@dataclass(frozen=True)
class LearnerSpec:
    """One grid point: a model family plus its hyperparameters."""

    model: str
    params: tuple

    def __post_init__(self):
        if self.model not in MODEL_FAMILIES:
            raise ValueError(f"unknown model family {self.model!r}")

    @property
    def paradigm(self) -> str:
        return PARADIGM[self.model]

    @property
    def params_dict(self) -> dict:
        return dict(self.params)

    def label(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.model}({inner})"


def _spec(model, **params) -> LearnerSpec:
    return LearnerSpec(model, tuple(params.items()))


def _knn_bl_grid(reduced):
    ks = (1, 5, 11) if reduced else _K_VALUES
    return [_spec("knn_bl", k=k) for k in ks]


def _knn_sl_grid(reduced):
    ks = (1, 5, 11) if reduced else _K_VALUES
    return [
        _spec("knn_sl", k=k, buffer_size=1000, leaf_capacity=20) for k in ks
    ]


def _htree_grid(model, reduced):
    graces = (30, 180) if reduced else _GRACE
    deltas = (1e-7,) if reduced else _DELTA
    decays = (0.9, 1.0) if reduced else _DECAY
    taus = (0.05,) if reduced else _TAU
    return [
        _spec(
            model,
            grace_period=g,
            delta=d,
            model_selector_decay=m,
            tau=t,
        )
        for g in graces
        for d in deltas
        for m in decays
        for t in taus
    ]


def _svr_grid(reduced):
    if reduced:
        return [
            _spec("svr", kernel=k, C=c, epsilon=0.1, degree=1)
            for k in ("linear", "gaussian")
            for c in (0.1, 1.0)
        ]
    specs = []
    for kernel in _SVR_KERNELS:
        degrees = _SVR_DEGREES if kernel == "polynomial" else (1,)
        for c in _SVR_C:
            for eps in _SVR_EPS:
                for degree in degrees:
                    specs.append(
                        _spec("svr", kernel=kernel, C=c, epsilon=eps, degree=degree)
                    )
    return specs


def _mlp_grid(reduced):
    if reduced:
        return [
            _spec("mlp", hidden=h, learning_rate=lr, epochs=100)
            for h in ((4,), (10, 10))
            for lr in (1e-2, 1e-3)
        ]
    return [
        _spec("mlp", hidden=h, learning_rate=lr, epochs=500)
        for h in _MLP_ARCHS
        for lr in _MLP_LR
    ]


def _rf_grid(reduced):
    if reduced:
        # 50 trees keep the bagging signal while fitting the preset's
        # walltime budget on multi-year training sets
        return [
            _spec("rf", criterion="squared_error", max_depth=d, n_trees=50)
            for d in (10, None)
        ]
    return [
        _spec("rf", criterion=c, max_depth=d, n_trees=1000)
        for c in _RF_CRITERIA
        for d in _RF_DEPTHS
    ]


def _dome_grid(reduced):
    if reduced:
        return [
            _spec("dome", min_reduction_mse=1e-4, max_num_nodes=nodes)
            for nodes in (15, 25)
        ]
    return [
        _spec("dome", min_reduction_mse=r, max_num_nodes=n)
        for r in _DOME_REDUCTIONS
        for n in _DOME_NODES
    ]


GRID_BUILDERS = {
    "knn_bl": _knn_bl_grid,
    "knn_sl": _knn_sl_grid,
    "htr": lambda reduced: _htree_grid("htr", reduced),
    "hatr": lambda reduced: _htree_grid("hatr", reduced),
    "svr": _svr_grid,
    "mlp": _mlp_grid,
    "rf": _rf_grid,
    "dome": _dome_grid,
}


def enumerate_grid(model: str, preset: str = "full") -> list:
    """Ordered hyperparameter grid for one model family."""
    if model not in GRID_BUILDERS:
        raise ValueError(f"unknown model family {model!r}")
    if preset not in ("full", "reduced"):
        raise ValueError(f"preset must be 'full' or 'reduced', got {preset!r}")
    return GRID_BUILDERS[model](preset == "reduced")


def grid_size(model: str, preset: str = "full") -> int:
    return len(enumerate_grid(model, preset))


def build_learner(spec: LearnerSpec, seed: int = 0):
    """Instantiate the learner for one grid point.

    ``seed`` feeds the stochastic learners (MLP init/shuffling, forest
    bootstraps); deterministic families ignore it.
    """
    p = spec.params_dict
    if spec.model == "knn_bl":
        return KnnBatchRegressor(k=p["k"])
    if spec.model == "knn_sl":
        return KnnStreamRegressor(
            k=p["k"],
            buffer_size=p.get("buffer_size", 1000),
            leaf_capacity=p.get("leaf_capacity", 20),
        )
    if spec.model == "htr":
        return HoeffdingTreeRegressor(
            grace_period=p["grace_period"],
            delta=p["delta"],
            model_selector_decay=p["model_selector_decay"],
            tau=p["tau"],
        )
    if spec.model == "hatr":
        return HoeffdingAdaptiveTreeRegressor(
            grace_period=p["grace_period"],
            delta=p["delta"],
            model_selector_decay=p["model_selector_decay"],
            tau=p["tau"],
            adwin_delta=p.get("adwin_delta", HATR_ADWIN_DELTA),
        )
    if spec.model == "svr":
        return SvrRegressor(
            kernel=p["kernel"], C=p["C"], epsilon=p["epsilon"], degree=p["degree"]
        )
    if spec.model == "mlp":
        return MlpRegressor(
            hidden=tuple(p["hidden"]),
            learning_rate=p["learning_rate"],
            epochs=p.get("epochs", 500),
            seed=seed,
        )
    if spec.model == "rf":
        return RandomForestRegressor(
            n_trees=p.get("n_trees", 1000),
            criterion=p["criterion"],
            max_depth=p["max_depth"],
            seed=seed,
        )
    if spec.model == "dome":
        return DomeRegressor(
            min_reduction_mse=p["min_reduction_mse"],
            max_num_nodes=p["max_num_nodes"],
        )
    raise ValueError(f"unknown model family {spec.model!r}")
