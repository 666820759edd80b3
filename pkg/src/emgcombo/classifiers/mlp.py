from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from .base import ProbabilisticClassifier, Standardizer, canonical_order, check_X, check_Xy, gradient_descent, softmax


@dataclass(frozen=True)
class MlpParams:
    hidden: tuple = (64,)
    activation: str = "leaky_relu"
    lr: float = 0.05
    n_iter: int = 800
    init_scale: float = 1.0
    l2: float = 1e-4


_LEAK = {"relu": 0.0, "leaky_relu": 0.01}


def layer_shapes(n_in: int, hidden, n_out: int) -> list[tuple[int, int]]:
    sizes = [n_in, *hidden, n_out]
    return [(sizes[i], sizes[i + 1]) for i in range(len(sizes) - 1)]


def unpack(theta: np.ndarray, shapes):
    out, pos = [], 0
    for fan_in, fan_out in shapes:
        W = theta[pos : pos + fan_in * fan_out].reshape(fan_in, fan_out)
        pos += fan_in * fan_out
        b = theta[pos : pos + fan_out]
        pos += fan_out
        out.append((W, b))
    return out


def mlp_forward(theta, shapes, X, activation):
    layers = unpack(theta, shapes)
    h = X
    pre = []
    for W, b in layers[:-1]:
        a = h @ W
        a += b
        h_next, slope = _kernels.leaky_relu(a, _LEAK[activation])
        pre.append((h, slope))
        h = h_next
    W, b = layers[-1]
    return h @ W + b, pre, h, layers


def mlp_loss_grad(theta, shapes, X, Y, l2, activation):
    """Mean cross-entropy + ``l2/2`` times the squared weight norm (biases excluded)."""
    n = X.shape[0]
    logits, pre, h_last, layers = mlp_forward(theta, shapes, X, activation)
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    reg = sum(np.sum(W * W) for W, _ in layers)
    loss = float(np.mean(lse - (z * Y).sum(axis=1)) + 0.5 * l2 * reg)

    grads = [None] * len(layers)
    delta = (softmax(logits) - Y) / n
    W, _ = layers[-1]
    grads[-1] = (h_last.T @ delta + l2 * W, delta.sum(axis=0))
    for i in range(len(layers) - 2, -1, -1):
        h_in, slope = pre[i]
        delta = delta @ layers[i + 1][0].T
        delta *= slope
        grads[i] = (h_in.T @ delta + l2 * layers[i][0], delta.sum(axis=0))
    return loss, np.concatenate([np.concatenate([gW.ravel(), gb]) for gW, gb in grads])


def init_params(shapes, rng: np.random.Generator, scale: float) -> np.ndarray:
    parts = []
    for fan_in, fan_out in shapes:
        parts.append(rng.normal(0.0, scale * np.sqrt(2.0 / fan_in), size=fan_in * fan_out))
        parts.append(np.zeros(fan_out))
    return np.concatenate(parts)


class MLPClassifier(ProbabilisticClassifier):
    def __init__(self, params: MlpParams = MlpParams()):
        self.params = params

    def fit(self, X, y, seed: int = 0, n_classes: int | None = None):
        X, y, k = check_Xy(X, y, n_classes)
        order = canonical_order(X, y)
        X, y = X[order], y[order]
        p = self.params
        if p.activation not in _LEAK:
            raise ValueError(f"unknown activation {p.activation!r}")
        self.scaler = Standardizer.fit(X)
        Z = self.scaler.transform(X)
        Y = np.eye(k)[y]
        self.shapes = layer_shapes(Z.shape[1], tuple(p.hidden), k)
        theta0 = init_params(self.shapes, np.random.default_rng(seed), p.init_scale)
        self.theta, self.loss_trace = gradient_descent(
            lambda t: mlp_loss_grad(t, self.shapes, Z, Y, p.l2, p.activation), theta0, p.lr, p.n_iter
        )
        self.n_classes, self.n_features = k, Z.shape[1]
        return self

    def predict_proba(self, X) -> np.ndarray:
        Z = self.scaler.transform(check_X(X, self.n_features))
        logits, *_ = mlp_forward(self.theta, self.shapes, Z, self.params.activation)
        return softmax(logits)
