"""Parallel and Hierarchical compositions of per-component classifiers.

Both map a feature vector to a posterior over the 5 directions and a
posterior over the 3 modifiers; the predicted label pairs the two argmaxes,
so every prediction is one of the 15 structured classes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers import ProbabilisticClassifier, make_classifier
from .classifiers.base import check_X
from .dataset import ExampleSet
from .labels import (
    N_DIRECTIONS,
    N_MODIFIERS,
    Direction,
    GestureLabel,
    Modifier,
    compose,
    direction_of,
    modifier_of,
)
from .simgen import derive_seed

NO_DIR = int(Direction.NoDir)
NO_MOD = int(Modifier.NoMod)


class CoverageError(ValueError):
    """Training data lacks classes a head has to predict."""


@dataclass(frozen=True)
class Prediction:
    dir_posterior: np.ndarray
    mod_posterior: np.ndarray
    label: GestureLabel


@dataclass(frozen=True)
class BatchPrediction:
    dir_posterior: np.ndarray  # n x 5
    mod_posterior: np.ndarray  # n x 3
    labels: np.ndarray  # class indices

    def __getitem__(self, i) -> Prediction:
        return Prediction(self.dir_posterior[i], self.mod_posterior[i], GestureLabel.from_index(int(self.labels[i])))


def _xy(train):
    if isinstance(train, ExampleSet):
        return train.X, train.y
    X, y = train
    return np.asarray(X, dtype=float), np.asarray(y, dtype=np.int64)


def _require(values: np.ndarray, needed, enum_cls, what: str) -> None:
    missing = sorted(set(int(v) for v in needed) - set(np.unique(values).tolist()))
    if missing:
        names = ", ".join(enum_cls(m).name for m in missing)
        raise CoverageError(f"{what}: training data has no rows for {names}")


@dataclass
class ParallelModel:
    dir_head: ProbabilisticClassifier
    mod_head: ProbabilisticClassifier

    def posteriors(self, X):
        return self.dir_head.predict_proba(X), self.mod_head.predict_proba(X)


@dataclass
class HierarchicalModel:
    dir_detect: ProbabilisticClassifier
    dir_classify: ProbabilisticClassifier
    mod_detect: ProbabilisticClassifier
    mod_classify: ProbabilisticClassifier

    def posteriors(self, X):
        return (
            compose_hierarchical(self.dir_detect.predict_proba(X), self.dir_classify.predict_proba(X)),
            compose_hierarchical(self.mod_detect.predict_proba(X), self.mod_classify.predict_proba(X)),
        )


def compose_hierarchical(detect: np.ndarray, classify: np.ndarray) -> np.ndarray:
    """[p(present) * p(c | present) ..., p(absent)]; absent is the last class."""
    absent = detect[:, 0:1]
    present = detect[:, 1:2]
    return np.concatenate([present * classify, absent], axis=1)


def train_parallel(train, algo: str = "MLP", params=None, seed: int = 0) -> ParallelModel:
    X, y = _xy(train)
    d, m = direction_of(y), modifier_of(y)
    _require(d, range(N_DIRECTIONS), Direction, "direction head")
    _require(m, range(N_MODIFIERS), Modifier, "modifier head")
    dir_head = make_classifier(algo, params).fit(X, d, derive_seed(seed, 0), N_DIRECTIONS)
    mod_head = make_classifier(algo, params).fit(X, m, derive_seed(seed, 1), N_MODIFIERS)
    return ParallelModel(dir_head, mod_head)


def train_hierarchical(train, algo: str = "MLP", params=None, seed: int = 0) -> HierarchicalModel:
    X, y = _xy(train)
    d, m = direction_of(y), modifier_of(y)
    _require(d, range(N_DIRECTIONS), Direction, "direction path")
    _require(m, range(N_MODIFIERS), Modifier, "modifier path")
    heads = []
    for k, (comp, absent, n_active) in enumerate(((d, NO_DIR, N_DIRECTIONS - 1), (m, NO_MOD, N_MODIFIERS - 1))):
        present = comp != absent
        detect = make_classifier(algo, params).fit(X, present.astype(np.int64), derive_seed(seed, 2 * k), 2)
        classify = make_classifier(algo, params).fit(X[present], comp[present], derive_seed(seed, 2 * k + 1), n_active)
        heads += [detect, classify]
    return HierarchicalModel(*heads)


def train_model(arch: str, train, algo: str = "MLP", params=None, seed: int = 0):
    if arch == "Parallel":
        return train_parallel(train, algo, params, seed)
    if arch == "Hierarchical":
        return train_hierarchical(train, algo, params, seed)
    raise ValueError(f"unknown architecture {arch!r}")


def predict_batch(model, X) -> BatchPrediction:
    X = check_X(X)
    pd, pm = model.posteriors(X)
    return BatchPrediction(pd, pm, compose(np.argmax(pd, axis=1), np.argmax(pm, axis=1)).astype(np.int64))


def predict(model, features) -> Prediction:
    return predict_batch(model, np.asarray(features, dtype=float)[None, :])[0]


ARCHITECTURES = ("Parallel", "Hierarchical")
