"""Minimal evaluation classifiers: k-nearest-neighbors and logistic
regression trained by full-batch gradient descent.

Both score toward the positive (minority) class so AUC can be computed, and
when standardization is enabled its statistics come from the classifier's
own training split, never from evaluation data.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .seeding import SeedSpec


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "knn"  # "knn" | "logistic"
    k: int = 5  # odd by default so votes cannot tie
    learning_rate: float = 0.1
    epochs: int = 200
    l2: float = 1e-4
    standardize: bool = True
    init_scale: float = 0.0  # logistic weight init; 0 = zeros (deterministic)

    def __post_init__(self):
        if self.kind not in ("knn", "logistic"):
            raise InvalidInputError(f"unknown classifier kind {self.kind!r}")
        if self.k < 1:
            raise InvalidInputError("k must be at least 1")
        if self.learning_rate <= 0 or self.epochs < 1 or self.l2 < 0:
            raise InvalidInputError("bad logistic hyperparameters")


class _Standardizer:
    def __init__(self, X: np.ndarray, enabled: bool):
        self.enabled = enabled
        self.mean = X.mean(axis=0) if enabled else None
        std = X.std(axis=0) if enabled else None
        if enabled:
            std = np.where(std > 0, std, 1.0)
        self.std = std

    def __call__(self, X: np.ndarray) -> np.ndarray:
        if not self.enabled:
            return X
        return (X - self.mean) / self.std


class KnnClassifier:
    """Majority vote over the k nearest rows (squared Euclidean distance,
    ties broken by lower training-row index). The score is the fraction of
    positive votes; the label is positive only on a strict majority."""

    def __init__(self, X: np.ndarray, y: np.ndarray, spec: ClassifierSpec):
        if X.shape[0] == 0:
            raise InvalidInputError("training set is empty")
        self.flags: tuple[str, ...] = ()
        k = spec.k
        if k > X.shape[0]:
            k = X.shape[0]
            self.flags = ("k_clamped",)
        self.k = k
        self._scale = _Standardizer(X, spec.standardize)
        self._X = self._scale(X)
        self._y = np.asarray(y, dtype=int)

    def scores(self, X: np.ndarray) -> np.ndarray:
        Q = self._scale(np.atleast_2d(X))
        d2 = ((Q[:, None, :] - self._X[None, :, :]) ** 2).sum(axis=2)
        out = np.empty(Q.shape[0])
        for i in range(Q.shape[0]):
            order = np.argsort(d2[i], kind="stable")[: self.k]
            out[i] = self._y[order].sum() / self.k
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.scores(X) > 0.5).astype(int)


def knn_predict(
    train_X: np.ndarray, train_y: np.ndarray, x: np.ndarray, k: int
) -> tuple[int, float]:
    """Single-point convenience wrapper; returns (label, positive-vote share)."""
    spec = ClassifierSpec(kind="knn", k=k, standardize=False)
    model = KnnClassifier(np.asarray(train_X, float), np.asarray(train_y), spec)
    score = float(model.scores(np.atleast_2d(x))[0])
    return int(score > 0.5), score


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticClassifier:
    """L2-regularized logistic regression, full-batch gradient descent.

    Loss: mean log-loss + (l2/2)*||w||^2 (bias unregularized). One gradient
    step per epoch for `epochs` epochs. Weights start at zero unless
    init_scale > 0, in which case they are drawn from the seeded stream, so
    training is deterministic under the seed either way.
    """

    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        spec: ClassifierSpec,
        seed: Optional[SeedSpec] = None,
    ):
        y = np.asarray(y, dtype=int)
        if len(np.unique(y)) < 2:
            raise InvalidInputError("logistic training needs both classes")
        self.flags: tuple[str, ...] = ()
        self._scale = _Standardizer(X, spec.standardize)
        Xs = self._scale(X)
        n, f = Xs.shape
        if spec.init_scale > 0:
            gen = (seed or SeedSpec(0)).generator()
            w = gen.normal(0.0, spec.init_scale, size=f)
            b = float(gen.normal(0.0, spec.init_scale))
        else:
            w = np.zeros(f)
            b = 0.0
        sign = np.where(y == 1, 1.0, -1.0)
        for _ in range(spec.epochs):
            z = Xs @ w + b
            residual = _sigmoid(-sign * z) * sign  # d(log-loss)/dz has sign -residual
            grad_w = -(Xs.T @ residual) / n + spec.l2 * w
            grad_b = -float(residual.sum()) / n
            w -= spec.learning_rate * grad_w
            b -= spec.learning_rate * grad_b
        self.weights = w
        self.bias = b

    def scores(self, X: np.ndarray) -> np.ndarray:
        Xs = self._scale(np.atleast_2d(X))
        return _sigmoid(Xs @ self.weights + self.bias)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.scores(X) >= 0.5).astype(int)


def logistic_fit(
    train_X: np.ndarray, train_y: np.ndarray, spec: ClassifierSpec, seed: SeedSpec
) -> LogisticClassifier:
    return LogisticClassifier(np.asarray(train_X, float), train_y, spec, seed)


def logistic_score(model: LogisticClassifier, x: np.ndarray) -> float:
    return float(model.scores(np.atleast_2d(x))[0])


def fit_classifier(X: np.ndarray, y: np.ndarray, spec: ClassifierSpec, seed: SeedSpec):
    if spec.kind == "knn":
        return KnnClassifier(np.asarray(X, float), y, spec)
    return LogisticClassifier(np.asarray(X, float), y, spec, seed)
