"""Fully-connected regressor: ReLU hidden layers, sigmoid output head.

Targets are min-max scaled to [0, 1] so the sigmoid output can cover them;
predictions are inverse-scaled back to target units. Training is mini-batch
RMSprop on the mean-squared error of the scaled targets.
"""

from __future__ import annotations

import numpy as np


class MlpDivergenceError(RuntimeError):
    def __init__(self, learning_rate: float, epoch: int):
        self.learning_rate = learning_rate
        super().__init__(
            f"training loss became non-finite at epoch {epoch} "
            f"(learning rate {learning_rate:g} diverges on this data)"
        )


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class MlpRegressor:
    def __init__(
        self,
        hidden: tuple[int, ...],
        learning_rate: float,
        epochs: int = 500,
        batch_size: int = 32,
        seed: int = 0,
        rho: float = 0.9,
        rms_eps: float = 1e-8,
    ):
        if not hidden or any(h < 1 for h in hidden):
            raise ValueError(f"hidden sizes must be positive, got {hidden}")
        self.hidden = tuple(int(h) for h in hidden)
        self.learning_rate = float(learning_rate)
        self.epochs = int(epochs)
        self.batch_size = int(batch_size)
        self.seed = int(seed)
        self.rho = rho
        self.rms_eps = rms_eps
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        self._y_min = 0.0
        self._y_range = 1.0

    # -- network plumbing ---------------------------------------------------

    def _init_params(self, n_features: int, rng: np.random.Generator) -> None:
        sizes = [n_features, *self.hidden, 1]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def _forward(self, X: np.ndarray) -> list[np.ndarray]:
        """Activations per layer; last entry is the sigmoid output in (0,1)."""
        acts = [X]
        a = X
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            t = a @ W + b
            a = _sigmoid(t) if i == last else np.maximum(t, 0.0)
            acts.append(a)
        return acts

    def loss_and_grads(self, X: np.ndarray, y_scaled: np.ndarray):
        """MSE on scaled targets plus gradients; exposed for gradient checks."""
        n = X.shape[0]
        acts = self._forward(X)
        out = acts[-1][:, 0]
        err = out - y_scaled
        loss = float(np.mean(err**2))

        gW = [None] * len(self.weights)
        gb = [None] * len(self.biases)
        # d(loss)/d(out) = 2 err / n; sigmoid' = s(1-s)
        delta = (2.0 * err / n * out * (1.0 - out))[:, None]
        for i in range(len(self.weights) - 1, -1, -1):
            gW[i] = acts[i].T @ delta
            gb[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0)
        return loss, gW, gb

    # -- training -----------------------------------------------------------

    def fit(self, X: np.ndarray, y: np.ndarray) -> "MlpRegressor":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n = X.shape[0]
        if n == 0:
            raise ValueError("empty training set")
        if not np.isfinite(y).all():
            raise ValueError("targets must be finite")

        self._y_min = float(y.min())
        rng_span = float(y.max()) - self._y_min
        if rng_span > 0:
            self._y_range = rng_span
        else:
            # constant target: aim at the sigmoid midpoint, not its asymptote
            self._y_range = 1.0
            self._y_min -= 0.5
        y_scaled = (y - self._y_min) / self._y_range

        rng = np.random.default_rng(self.seed)
        self._init_params(X.shape[1], rng)
        sq_W = [np.zeros_like(W) for W in self.weights]
        sq_b = [np.zeros_like(b) for b in self.biases]

        for epoch in range(self.epochs):
            order = rng.permutation(n)
            for lo in range(0, n, self.batch_size):
                sel = order[lo : lo + self.batch_size]
                loss, gW, gb = self.loss_and_grads(X[sel], y_scaled[sel])
                if not np.isfinite(loss):
                    raise MlpDivergenceError(self.learning_rate, epoch)
                for i in range(len(self.weights)):
                    sq_W[i] = self.rho * sq_W[i] + (1 - self.rho) * gW[i] ** 2
                    sq_b[i] = self.rho * sq_b[i] + (1 - self.rho) * gb[i] ** 2
                    self.weights[i] -= (
                        self.learning_rate * gW[i] / (np.sqrt(sq_W[i]) + self.rms_eps)
                    )
                    self.biases[i] -= (
                        self.learning_rate * gb[i] / (np.sqrt(sq_b[i]) + self.rms_eps)
                    )
                if not all(np.isfinite(W).all() for W in self.weights):
                    raise MlpDivergenceError(self.learning_rate, epoch)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.weights:
            raise RuntimeError("predict before fit")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = self._forward(X)[-1][:, 0]
        return out * self._y_range + self._y_min

    def raw_output(self, X: np.ndarray) -> np.ndarray:
        """Sigmoid head output before inverse target scaling (always in (0,1))."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._forward(X)[-1][:, 0]
