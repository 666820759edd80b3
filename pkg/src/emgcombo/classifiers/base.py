from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """Non-finite or mis-shaped input."""


class DegenerateFitError(ValueError):
    """Training labels contain fewer than two classes."""


class DivergenceError(RuntimeError):
    """Gradient descent could not make progress (non-finite loss or vanishing step)."""


class Standardizer:
    """Per-column z-scoring; constant columns are left unscaled."""

    def __init__(self, mean: np.ndarray, scale: np.ndarray):
        self.mean = np.asarray(mean, dtype=float)
        self.scale = np.asarray(scale, dtype=float)

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std[~(std > 1e-12 * np.maximum(1.0, np.abs(mean)))] = 1.0
        return cls(mean, std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def inverse(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.scale + self.mean


def check_X(X, n_features: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValidationError("features must be a 2-D array")
    if n_features is not None and X.shape[1] != n_features:
        raise ValidationError(f"expected {n_features} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("features contain NaN or inf")
    return X


def check_Xy(X, y, n_classes: int | None):
    X = check_X(X)
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (X.shape[0],):
        raise ValidationError("y must be 1-D with one label per row")
    if len(y) == 0:
        raise DegenerateFitError("no training rows")
    if y.min() < 0:
        raise ValidationError("labels must be non-negative class indices")
    k = int(n_classes) if n_classes is not None else int(y.max()) + 1
    if y.max() >= k:
        raise ValidationError(f"label {y.max()} outside {k} classes")
    if len(np.unique(y)) < 2:
        raise DegenerateFitError(f"only one class present ({int(y[0])})")
    return X, y, k


def canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row permutation that sorts by (features..., label); makes fits order-independent."""
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def argmax_lowest(P: np.ndarray) -> np.ndarray:
    # np.argmax already returns the first (lowest-index) maximum
    return np.argmax(P, axis=1)


class ProbabilisticClassifier:
    """fit(X, y, seed) then predict_proba(X) -> rows on the K-simplex."""

    n_classes: int
    n_features: int

    def fit(self, X, y, seed: int = 0, n_classes: int | None = None):
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return argmax_lowest(self.predict_proba(X))


def gradient_descent(loss_grad, theta: np.ndarray, lr: float, n_iter: int, min_lr: float = 1e-10):
    """Full-batch gradient descent with step halving.

    A step that would raise the loss is rejected and the step size halved, so
    the recorded loss trace is non-increasing. Returns ``(theta, losses)``.
    """
    loss, grad = loss_grad(theta)
    if not np.isfinite(loss):
        raise DivergenceError("initial loss is not finite")
    losses = [loss]
    step = lr
    it = 0
    while it < n_iter:
        cand = theta - step * grad
        c_loss, c_grad = loss_grad(cand)
        if np.isfinite(c_loss) and c_loss <= loss:
            theta, loss, grad = cand, c_loss, c_grad
            losses.append(loss)
            it += 1
            continue
        step *= 0.5
        if step < min_lr * lr:
            if not np.all(np.isfinite(grad)):
                raise DivergenceError("gradient is not finite")
            # stationary to machine precision
            break
    return theta, np.asarray(losses)
