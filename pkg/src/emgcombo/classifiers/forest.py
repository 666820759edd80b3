from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import _kernels
from .base import ProbabilisticClassifier, check_X, check_Xy


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: Optional[int] = None
    max_features: Optional[int] = 4  # None -> floor(sqrt(n_features))
    bootstrap: bool = True
    min_samples_split: int = 2


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_proba: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        return _kernels.apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.leaf_proba[self.apply(X)]


def fit_tree(X, y, n_classes, max_features, max_depth, min_samples_split, seed) -> Tree:
    f, t, l, r, counts = _kernels.build_tree(
        X, y, n_classes, max_features, -1 if max_depth is None else max_depth, min_samples_split, seed
    )
    proba = counts / counts.sum(axis=1, keepdims=True)
    return Tree(f, t, l, r, proba)


class RandomForest(ProbabilisticClassifier):
    """Bagged CART trees with Gini splits and per-split feature subsampling."""

    def __init__(self, params: ForestParams = ForestParams()):
        self.params = params

    def fit(self, X, y, seed: int = 0, n_classes: int | None = None):
        X, y, k = check_Xy(X, y, n_classes)
        p = self.params
        n, d = X.shape
        mf = p.max_features if p.max_features is not None else max(1, int(np.sqrt(d)))
        mf = min(max(1, mf), d)
        seeds = np.random.SeedSequence(int(seed)).generate_state(p.n_trees, dtype=np.uint64)
        self.trees = []
        for s in seeds:
            rng = np.random.default_rng(int(s))
            rows = rng.integers(0, n, size=n) if p.bootstrap else np.arange(n)
            self.trees.append(fit_tree(X[rows], y[rows], k, mf, p.max_depth, p.min_samples_split, int(s >> np.uint64(1))))
        self.n_classes, self.n_features = k, d
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = check_X(X, self.n_features)
        P = np.zeros((X.shape[0], self.n_classes))
        for t in self.trees:
            P += t.predict_proba(X)
        P /= len(self.trees)
        # the per-tree rows are exact frequencies; renormalise away accumulated rounding
        return P / P.sum(axis=1, keepdims=True)
