from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ProbabilisticClassifier, Standardizer, canonical_order, check_X, check_Xy, gradient_descent, softmax


@dataclass(frozen=True)
class LogRParams:
    l2: float = 1e-4
    lr: float = 0.1
    n_iter: int = 500


def logr_loss_grad(theta: np.ndarray, X: np.ndarray, Y: np.ndarray, l2: float):
    """Mean softmax cross-entropy plus ``l2/2 * ||W||^2`` and its gradient.

    ``theta`` packs ``W`` (d x K, row-major) followed by the bias (K,).
    ``Y`` is one-hot (n x K).
    """
    n, d = X.shape
    k = Y.shape[1]
    W = theta[: d * k].reshape(d, k)
    b = theta[d * k :]
    logits = X @ W + b
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(lse - (z * Y).sum(axis=1)) + 0.5 * l2 * np.sum(W * W))
    G = (softmax(logits) - Y) / n
    gW = X.T @ G + l2 * W
    gb = G.sum(axis=0)
    return loss, np.concatenate([gW.ravel(), gb])


class LogisticRegression(ProbabilisticClassifier):
    def __init__(self, params: LogRParams = LogRParams()):
        self.params = params

    def fit(self, X, y, seed: int = 0, n_classes: int | None = None):
        X, y, k = check_Xy(X, y, n_classes)
        order = canonical_order(X, y)
        X, y = X[order], y[order]
        self.scaler = Standardizer.fit(X)
        Z = self.scaler.transform(X)
        Y = np.eye(k)[y]
        d = Z.shape[1]
        # convex objective: zero start is as good as any and is seed-free
        theta0 = np.zeros(d * k + k)
        p = self.params
        theta, self.loss_trace = gradient_descent(lambda t: logr_loss_grad(t, Z, Y, p.l2), theta0, p.lr, p.n_iter)
        self.W = theta[: d * k].reshape(d, k)
        self.b = theta[d * k :]
        self.n_classes, self.n_features = k, d
        return self

    def predict_proba(self, X) -> np.ndarray:
        Z = self.scaler.transform(check_X(X, self.n_features))
        return softmax(Z @ self.W + self.b)
