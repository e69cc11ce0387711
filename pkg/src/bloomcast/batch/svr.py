"""Epsilon-insensitive support vector regression via SMO on the dual.

The dual is posed over 2n box-constrained variables z = [alpha; alpha*] with
signs u = [+1...; -1...]: minimize (1/2) z'Qz + p'z subject to u'z = 0 and
0 <= z <= C, where Q[a,b] = u_a u_b K(x_a, x_b) and p_a = eps - u_a y_a.
Optimization picks the maximal violating pair each step and solves the
two-variable subproblem analytically with box clipping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TAU = 1e-12


class SvrConvergenceError(RuntimeError):
    def __init__(self, residual: float, max_iter: int):
        self.residual = residual
        super().__init__(
            f"SMO did not converge in {max_iter} iterations; KKT residual {residual:.3e}"
        )


@dataclass(frozen=True)
class SvrSpec:
    kernel: str  # linear | gaussian | polynomial
    C: float
    epsilon: float
    degree: int | None = None

    def __post_init__(self) -> None:
        if self.kernel not in ("linear", "gaussian", "polynomial"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "polynomial" and self.degree is None:
            raise ValueError("polynomial kernel needs a degree")
        if self.C <= 0 or self.epsilon < 0:
            raise ValueError("C must be > 0 and epsilon >= 0")


def _kernel_fn(spec: SvrSpec, gamma: float):
    if spec.kernel == "linear":
        return lambda A, B: A @ B.T
    if spec.kernel == "gaussian":
        def k(A, B):
            d2 = (
                np.sum(A * A, axis=1)[:, None]
                + np.sum(B * B, axis=1)[None, :]
                - 2.0 * (A @ B.T)
            )
            return np.exp(-gamma * np.maximum(d2, 0.0))
        return k
    degree = spec.degree
    return lambda A, B: (A @ B.T + 1.0) ** degree


class SvrRegressor:
    """f(x) = sum_i beta_i K(x_i, x) + b with |beta_i| <= C."""

    def __init__(
        self,
        kernel: str = "linear",
        C: float = 1.0,
        epsilon: float = 0.1,
        degree: int | None = None,
        tol: float = 1e-3,
        max_iter: int = 100_000,
    ):
        self.spec = SvrSpec(kernel=kernel, C=C, epsilon=epsilon, degree=degree)
        self.tol = tol
        self.max_iter = max_iter
        self.support_vectors_ = None
        self.dual_coef_ = None
        self.bias_ = 0.0
        self.n_iter_ = 0

    def _gamma(self, X: np.ndarray) -> float:
        var = X.var()
        if var <= 0:
            var = 1.0
        return 1.0 / (X.shape[1] * var)

    def fit(self, X: np.ndarray, y: np.ndarray) -> "SvrRegressor":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n = X.shape[0]
        if n == 0:
            raise ValueError("empty training set")
        C, eps = self.spec.C, self.spec.epsilon
        gamma = self._gamma(X)
        kfn = _kernel_fn(self.spec, gamma)
        K = kfn(X, X)
        Kd = np.diag(K).copy()

        u = np.concatenate([np.ones(n), -np.ones(n)])
        idx = np.concatenate([np.arange(n), np.arange(n)])
        z = np.zeros(2 * n)
        G = eps - u * y[idx]  # gradient at z = 0 equals the linear term p

        m_val = np.inf
        for it in range(self.max_iter):
            neg_uG = -u * G
            up = (u > 0) & (z < C) | (u < 0) & (z > 0)
            low = (u > 0) & (z > 0) | (u < 0) & (z < C)
            if not up.any() or not low.any():
                m_val = M_val = 0.0
                break
            up_scores = np.where(up, neg_uG, -np.inf)
            low_scores = np.where(low, neg_uG, np.inf)
            a = int(np.argmax(up_scores))
            b = int(np.argmin(low_scores))
            m_val = neg_uG[a]
            M_val = neg_uG[b]
            if m_val - M_val <= self.tol:
                break

            Ka = K[idx[a]]
            Kb = K[idx[b]]
            Qa = u[a] * (u * Ka[idx])
            Qb = u[b] * (u * Kb[idx])
            za_old, zb_old = z[a], z[b]

            if u[a] != u[b]:
                # Q_ab = -K_ab here, so the curvature is K_aa + K_bb - 2K_ab
                quad = max(Kd[idx[a]] + Kd[idx[b]] - 2.0 * K[idx[a], idx[b]], _TAU)
                delta = (-G[a] - G[b]) / quad
                diff = z[a] - z[b]
                z[a] += delta
                z[b] += delta
                if diff > 0:
                    if z[b] < 0:
                        z[b] = 0.0
                        z[a] = diff
                    if z[a] > C:
                        z[a] = C
                        z[b] = C - diff
                else:
                    if z[a] < 0:
                        z[a] = 0.0
                        z[b] = -diff
                    if z[b] > C:
                        z[b] = C
                        z[a] = C + diff
            else:
                quad = max(Kd[idx[a]] + Kd[idx[b]] - 2.0 * K[idx[a], idx[b]], _TAU)
                delta = (G[a] - G[b]) / quad
                s = z[a] + z[b]
                z[a] -= delta
                z[b] += delta
                if s > C:
                    if z[a] > C:
                        z[a] = C
                        z[b] = s - C
                    if z[b] > C:
                        z[b] = C
                        z[a] = s - C
                else:
                    if z[b] < 0:
                        z[b] = 0.0
                        z[a] = s
                    if z[a] < 0:
                        z[a] = 0.0
                        z[b] = s

            G += Qa * (z[a] - za_old) + Qb * (z[b] - zb_old)
        else:
            raise SvrConvergenceError(residual=float(m_val - M_val), max_iter=self.max_iter)

        self.n_iter_ = it + 1
        self.bias_ = float((m_val + M_val) / 2.0)
        beta = z[:n] - z[n:]
        sv = np.abs(beta) > 0
        self.support_vectors_ = X[sv]
        self.dual_coef_ = beta[sv]
        self._beta_full = beta
        self._kfn = kfn
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.support_vectors_ is None:
            raise RuntimeError("predict before fit")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.support_vectors_.shape[0] == 0:
            return np.full(X.shape[0], self.bias_)
        K = self._kfn(X, self.support_vectors_)
        return K @ self.dual_coef_ + self.bias_

    def kkt_violation(self, X: np.ndarray, y: np.ndarray) -> float:
        """Largest violation of the epsilon-tube KKT conditions on (X, y).

        beta=0 points must lie inside the tube, free points on its boundary,
        and bound points on or outside it. Returns the max distance by which
        any point breaks its case.
        """
        f = self.predict(X)
        r = np.abs(f - np.asarray(y, dtype=float))
        eps, C = self.spec.epsilon, self.spec.C
        worst = 0.0
        for ri, bi in zip(r, self._beta_full):
            if bi == 0.0:
                worst = max(worst, ri - eps)
            elif abs(bi) < C:
                worst = max(worst, abs(ri - eps))
            else:
                worst = max(worst, eps - ri)
        return worst
