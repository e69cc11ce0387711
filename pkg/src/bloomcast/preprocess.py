"""Feature standardization and PCA, fitted on the pretrain partition only.

Both transforms are frozen after fitting: they are pure functions of the
pretrain rows and are never updated from train or test data. PCA operates on
standardized features (raw units span orders of magnitude, which would let a
single column dominate the covariance).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self) -> None:
        if self.mean.shape != self.scale.shape or self.mean.ndim != 1:
            raise ValueError("mean/scale must be 1-D vectors of equal length")
        if np.any(self.scale <= 0):
            raise ValueError("scale must be positive elementwise")

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.mean.shape[0]:
            raise ValueError(
                f"expected {self.mean.shape[0]} features, got {X.shape[1]}"
            )
        return (X - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["scale"], dtype=float))


def fit_standardizer(X: np.ndarray) -> Standardizer:
    """Per-feature mean and population standard deviation (zero sd kept as 1)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a non-empty 2-D array of pretrain rows")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    return Standardizer(mean=mean, scale=scale)


@dataclass(frozen=True)
class PcaTransform:
    """Orthonormal projection onto the leading eigencomponents.

    ``components`` is k x p with orthonormal rows; ``explained_variance_ratio``
    holds the ratio of every input component (length p, non-increasing), of
    which the first k are retained.
    """

    components: np.ndarray
    explained_variance_ratio: np.ndarray

    def __post_init__(self) -> None:
        if self.components.ndim != 2:
            raise ValueError("components must be a k x p matrix")
        k = self.components.shape[0]
        gram = self.components @ self.components.T
        if not np.allclose(gram, np.eye(k), atol=1e-8):
            raise ValueError("component rows are not orthonormal within 1e-8")

    @property
    def k(self) -> int:
        return self.components.shape[0]

    def transform(self, Z: np.ndarray) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != self.components.shape[1]:
            raise ValueError(
                f"expected {self.components.shape[1]} features, got {Z.shape[1]}"
            )
        return Z @ self.components.T

    def inverse_transform(self, Y: np.ndarray) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return Y @ self.components

    def to_dict(self) -> dict:
        return {
            "components": self.components.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaTransform":
        return cls(
            np.asarray(d["components"], dtype=float),
            np.asarray(d["explained_variance_ratio"], dtype=float),
        )


def fit_pca(Z: np.ndarray, variance_threshold: float = 0.999) -> PcaTransform:
    """Eigendecomposition of the covariance of standardized pretrain rows.

    Keeps the smallest k leading components whose cumulative explained-variance
    ratio reaches the threshold. Components are signed so the
    largest-magnitude loading of each is positive, making the fit
    deterministic across runs and BLAS builds.
    """
    if not (0.0 < variance_threshold <= 1.0):
        raise ValueError(f"variance_threshold must be in (0, 1], got {variance_threshold}")
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] < 2:
        raise ValueError("need at least 2 rows to fit PCA")

    n = Z.shape[0]
    cov = (Z.T @ Z) / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]

    total = eigvals.sum()
    if total <= 0:
        # all-constant input: single trivial component
        ratios = np.zeros(len(eigvals))
        ratios[0] = 1.0
    else:
        ratios = eigvals / total
    cumulative = np.cumsum(ratios)
    # 1e-12 slack so thresholds like 0.999 accept a cumsum of 0.999 - eps_fp
    k = int(np.searchsorted(cumulative, variance_threshold - 1e-12) + 1)
    k = min(k, len(eigvals))

    components = eigvecs[:, :k].T.copy()
    for row in components:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return PcaTransform(components=components, explained_variance_ratio=ratios)


@dataclass(frozen=True)
class FeatureTransform:
    """Standardization optionally followed by PCA projection."""

    standardizer: Standardizer
    pca: PcaTransform | None = None

    @property
    def output_dim(self) -> int:
        if self.pca is not None:
            return self.pca.k
        return self.standardizer.mean.shape[0]

    def transform(self, X: np.ndarray) -> np.ndarray:
        Z = self.standardizer.transform(X)
        if self.pca is None:
            return Z
        return self.pca.transform(Z)

    def to_dict(self) -> dict:
        return {
            "standardizer": self.standardizer.to_dict(),
            "pca": self.pca.to_dict() if self.pca is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureTransform":
        pca = d.get("pca")
        return cls(
            standardizer=Standardizer.from_dict(d["standardizer"]),
            pca=PcaTransform.from_dict(pca) if pca is not None else None,
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureTransform":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def fit_feature_transform(
    X_pretrain: np.ndarray,
    use_pca: bool,
    variance_threshold: float = 0.999,
) -> FeatureTransform:
    """Fit the frozen feature pipeline from pretrain rows alone."""
    standardizer = fit_standardizer(X_pretrain)
    if not use_pca:
        return FeatureTransform(standardizer=standardizer)
    Z = standardizer.transform(X_pretrain)
    return FeatureTransform(standardizer=standardizer, pca=fit_pca(Z, variance_threshold))
