"""Soft-margin SVM trained by sequential minimal optimization, one-vs-one for multiclass.

The binary solver follows the working-set selection of Fan, Chen and Lin
(2005): the first index maximally violates the KKT conditions, the second is
chosen by the second-order gain. Training stops when the maximal violation
drops below ``tol``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.spatial.distance import cdist

from labelguard.classifiers.base import AlgorithmKind, Classifier

TAU = 1e-12


class ConvergenceWarning(UserWarning):
    pass


def kernel_matrix(A: np.ndarray, B: np.ndarray, kind: str, gamma: float) -> np.ndarray:
    if kind == "linear":
        return A @ B.T
    return np.exp(-gamma * cdist(A, B, "sqeuclidean"))


@dataclass
class BinarySolution:
    alpha: np.ndarray
    y: np.ndarray
    bias: float
    iterations: int
    converged: bool


@njit(cache=True)
def _smo_loop(K, y, C, tol, max_iter):  # pragma: no cover - compiled
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 1/2 a'Qa - e'a
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal violator in I_up
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        if i < 0:
            converged = True
            break
        # j: best second-order gain in I_low; track the minimal violation
        vmin = np.inf
        best = np.inf
        j = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                v = -y[t] * G[t]
                if v < vmin:
                    vmin = v
                grad_diff = gmax - v
                if grad_diff > 0:
                    quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if quad <= 0:
                        quad = TAU
                    gain = -(grad_diff * grad_diff) / quad
                    if gain < best:
                        best = gain
                        j = t
        if gmax - vmin < tol or j < 0:
            converged = True
            break

        ai = alpha[i]
        aj = alpha[j]
        Qij = y[i] * y[j] * K[i, j]
        if y[i] != y[j]:
            q = K[i, i] + K[j, j] + 2.0 * Qij
            if q <= 0:
                q = TAU
            delta = (-G[i] - G[j]) / q
            diff = ai - aj
            ni = ai + delta
            nj = aj + delta
            if diff > 0:
                if nj < 0:
                    nj = 0.0
                    ni = diff
            elif ni < 0:
                ni = 0.0
                nj = -diff
            if diff > 0:
                if ni > C:
                    ni = C
                    nj = C - diff
            elif nj > C:
                nj = C
                ni = C + diff
        else:
            q = K[i, i] + K[j, j] - 2.0 * Qij
            if q <= 0:
                q = TAU
            delta = (G[i] - G[j]) / q
            total = ai + aj
            ni = ai - delta
            nj = aj + delta
            if total > C:
                if ni > C:
                    ni = C
                    nj = total - C
            elif nj < 0:
                nj = 0.0
                ni = total
            if total > C:
                if nj > C:
                    nj = C
                    ni = total - C
            elif ni < 0:
                ni = 0.0
                nj = total
        alpha[i] = ni
        alpha[j] = nj
        dai = (ni - ai) * y[i]
        daj = (nj - aj) * y[j]
        for t in range(n):
            G[t] += y[t] * (K[i, t] * dai + K[j, t] * daj)
        it += 1
    return alpha, G, it, converged


def smo(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
        max_iter: int = 1_000_000) -> BinarySolution:
    """Solve the SVM dual for labels ``y`` in {-1, +1} given the kernel matrix ``K``."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    K = np.ascontiguousarray(K, dtype=np.float64)
    alpha, G, it, converged = _smo_loop(K, y, float(C), float(tol), int(max_iter))
    if not converged:
        warnings.warn(f"SMO stopped after {max_iter} iterations without reaching tol={tol}",
                      ConvergenceWarning, stacklevel=2)
    np.clip(alpha, 0.0, C, out=alpha)
    pos = y > 0
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        at_upper = alpha >= C
        ub_mask = (at_upper & ~pos) | (~at_upper & pos)
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[~ub_mask].max() if (~ub_mask).any() else -np.inf
        if np.isfinite(ub) and np.isfinite(lb):
            rho = float((ub + lb) / 2)
        else:
            rho = float(ub if np.isfinite(ub) else lb)
    return BinarySolution(alpha, y, -rho, int(it), bool(converged))


@dataclass
class PairModel:
    positive: int  # class code predicted when the decision value is > 0
    negative: int
    rows: np.ndarray  # training rows used by this pair
    solution: BinarySolution


class SVMClassifier(Classifier):
    kind = AlgorithmKind.SVM

    def __init__(self, C: float = 10.0, kernel: str = "rbf", gamma: float | None = None,
                 tol: float = 1e-3, max_iter: int = 1_000_000):
        super().__init__()
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def _fit(self, X, y):
        self.gamma_ = self.gamma if self.gamma is not None else 1.0 / X.shape[1]
        self.pairs_: list[PairModel] = []
        for a, b in itertools.combinations(self.classes_.tolist(), 2):
            rows = np.flatnonzero((y == a) | (y == b))
            yy = np.where(y[rows] == a, 1.0, -1.0)
            K = kernel_matrix(X[rows], X[rows], self.kernel, self.gamma_)
            sol = smo(K, yy, self.C, self.tol, self.max_iter)
            self.pairs_.append(PairModel(a, b, rows, sol))
        support = sorted({int(r) for p in self.pairs_ for r in p.rows[p.solution.alpha > 0]})
        self.support_ = np.asarray(support, dtype=np.int64)
        self.support_vectors_ = X[self.support_]
        position = {r: k for k, r in enumerate(support)}
        self.dual_coef_ = np.zeros((len(self.pairs_), len(support)))
        self.intercept_ = np.zeros(len(self.pairs_))
        for p_idx, p in enumerate(self.pairs_):
            sol = p.solution
            for r, a_, y_ in zip(p.rows, sol.alpha, sol.y):
                if a_ > 0:
                    self.dual_coef_[p_idx, position[int(r)]] = a_ * y_
            self.intercept_[p_idx] = sol.bias

    def decision_function(self, X) -> np.ndarray:
        """Pairwise decision values, shape (n_samples, n_pairs)."""
        X = np.asarray(X, dtype=np.float64)
        if len(self.support_) == 0:
            return np.tile(self.intercept_, (len(X), 1))
        out = np.empty((len(X), len(self.pairs_)))
        for start in range(0, len(X), 2048):
            K = kernel_matrix(X[start:start + 2048], self.support_vectors_, self.kernel, self.gamma_)
            out[start:start + 2048] = K @ self.dual_coef_.T + self.intercept_
        return out

    def _predict(self, X):
        dec = self.decision_function(X)
        n_codes = int(self.classes_.max()) + 1
        votes = np.zeros((len(X), n_codes))
        strength = np.zeros((len(X), n_codes))
        rows = np.arange(len(X))
        for p_idx, p in enumerate(self.pairs_):
            d = dec[:, p_idx]
            winner = np.where(d >= 0, p.positive, p.negative)
            votes[rows, winner] += 1
            strength[rows, winner] += np.abs(d)
        # most votes, then largest summed |decision|, then label order
        top = votes == votes.max(axis=1, keepdims=True)
        masked = np.where(top, strength, -np.inf)
        return np.argmax(masked, axis=1).astype(np.int64)

    def summary(self) -> dict:
        out = super().summary()
        if self.constant_ is None:
            out["support_vectors"] = int(len(self.support_))
            out["iterations"] = [p.solution.iterations for p in self.pairs_]
        return out
