"""From-scratch probabilistic classifiers sharing one fit / predict_proba contract."""
from __future__ import annotations

from .base import (
    DegenerateFitError,
    DivergenceError,
    ProbabilisticClassifier,
    Standardizer,
    ValidationError,
)
from .forest import ForestParams, RandomForest
from .logistic import LogisticRegression, LogRParams
from .mlp import MLPClassifier, MlpParams

ALGORITHMS = ("LogR", "MLP", "RF")


def make_classifier(algo: str, params=None) -> ProbabilisticClassifier:
    if algo == "LogR":
        return LogisticRegression(params or LogRParams())
    if algo == "MLP":
        return MLPClassifier(params or MlpParams())
    if algo == "RF":
        return RandomForest(params or ForestParams())
    raise ValueError(f"unknown classifier {algo!r}; choose from {ALGORITHMS}")


def fit_logistic_regression(X, y, params: LogRParams = LogRParams(), seed: int = 0, n_classes=None):
    return LogisticRegression(params).fit(X, y, seed, n_classes)


def fit_mlp(X, y, params: MlpParams = MlpParams(), seed: int = 0, n_classes=None):
    return MLPClassifier(params).fit(X, y, seed, n_classes)


def fit_random_forest(X, y, params: ForestParams = ForestParams(), seed: int = 0, n_classes=None):
    return RandomForest(params).fit(X, y, seed, n_classes)


__all__ = [
    "ALGORITHMS",
    "DegenerateFitError",
    "DivergenceError",
    "ForestParams",
    "LogRParams",
    "LogisticRegression",
    "MLPClassifier",
    "MlpParams",
    "ProbabilisticClassifier",
    "RandomForest",
    "Standardizer",
    "ValidationError",
    "fit_logistic_regression",
    "fit_mlp",
    "fit_random_forest",
    "make_classifier",
]
