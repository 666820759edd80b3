"""Synthetic combination gestures by feature averaging, and subset selection.

A synthetic ``(D, M)`` feature vector is the elementwise mean of a real
``(D, NoMod)`` vector and a real ``(NoDir, M)`` vector.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .architectures import CoverageError
from .classifiers.base import Standardizer
from .dataset import ExampleSet, Provenance
from .labels import (
    ACTIVE_DIRECTIONS,
    ACTIVE_MODIFIERS,
    Direction,
    GestureLabel,
    LabelError,
    LabelKind,
    Modifier,
    label_kind,
)
from .simgen import derive_seed


class Stage(enum.Enum):
    SubsetInput = "subsetInput"
    SubsetAfter = "subset"


class Mode(enum.Enum):
    Uniform = "uniform"
    NearMean = "near_mean"
    SpacedQuantiles = "spaced_quantiles"


@dataclass(frozen=True)
class SubsetStrategy:
    stage: Stage
    mode: Mode
    fraction: float

    def __post_init__(self):
        object.__setattr__(self, "stage", Stage(self.stage))
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError(f"fraction must lie in (0, 1], got {self.fraction}")

    @property
    def name(self) -> str:
        return f"{self.stage.value}_{self.mode.value}"


@dataclass
class SyntheticDoubleSet:
    examples: ExampleSet
    sources: np.ndarray  # n x 2 row indices into the singles set (direction row, modifier row)


def blend(z_d, z_m, dir_label: GestureLabel | None = None, mod_label: GestureLabel | None = None):
    """Average two feature vectors. With labels given, also return the combined label."""
    z_d = np.asarray(z_d, dtype=float)
    z_m = np.asarray(z_m, dtype=float)
    if z_d.shape != z_m.shape:
        raise ValueError("feature vectors differ in length")
    z = (z_d + z_m) / 2.0
    if dir_label is None and mod_label is None:
        return z
    if dir_label is None or label_kind(dir_label) is not LabelKind.SingleDirection:
        raise LabelError(f"first input must be a direction-only gesture, got {dir_label}")
    if mod_label is None or label_kind(mod_label) is not LabelKind.SingleModifier:
        raise LabelError(f"second input must be a modifier-only gesture, got {mod_label}")
    return z, GestureLabel(dir_label.direction, mod_label.modifier)


def subset_size(n: int, fraction: float) -> int:
    """max(1, round-half-away-from-zero(fraction * n)), capped at n."""
    return min(n, max(1, int(math.floor(fraction * n + 0.5))))


def select_subset(items, mode, fraction: float, seed: int = 0, scaler: Standardizer | None = None) -> np.ndarray:
    """Indices (ascending) of the selected rows of ``items``.

    Distances for NearMean / SpacedQuantiles are Euclidean to the item mean in
    the space given by ``scaler`` (raw space if None).
    """
    mode = Mode(mode)
    X = np.asarray(items, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n == 0:
        raise ValueError("cannot subset an empty item set")
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    k = subset_size(n, fraction)
    if k == n:
        return np.arange(n)
    if mode is Mode.Uniform:
        return np.sort(np.random.default_rng(seed).choice(n, size=k, replace=False))
    Z = scaler.transform(X) if scaler is not None else X
    dist = np.sqrt(((Z - Z.mean(axis=0)) ** 2).sum(axis=1))
    order = np.argsort(dist, kind="stable")
    if mode is Mode.NearMean:
        return np.sort(order[:k])
    if k == 1:
        pos = np.array([(n - 1) // 2])
    else:
        pos = np.floor(np.linspace(0.0, n - 1, k) + 0.5).astype(np.int64)
    return np.sort(order[pos])


def _class_rows(singles: ExampleSet, label: GestureLabel) -> np.ndarray:
    return np.nonzero(singles.y == label.index)[0]


def _pairs_for(singles, d, m, rows_d=None, rows_m=None):
    rd = _class_rows(singles, GestureLabel(d, Modifier.NoMod)) if rows_d is None else rows_d
    rm = _class_rows(singles, GestureLabel(Direction.NoDir, m)) if rows_m is None else rows_m
    X = (singles.X[rd][:, None, :] + singles.X[rm][None, :, :]) / 2.0
    src = np.stack(np.meshgrid(rd, rm, indexing="ij"), axis=-1).reshape(-1, 2)
    return X.reshape(-1, singles.X.shape[1]), src


def _check_coverage(singles: ExampleSet) -> None:
    missing = [str(GestureLabel(d, Modifier.NoMod)) for d in ACTIVE_DIRECTIONS if not np.any(singles.y == GestureLabel(d, Modifier.NoMod).index)]
    missing += [str(GestureLabel(Direction.NoDir, m)) for m in ACTIVE_MODIFIERS if not np.any(singles.y == GestureLabel(Direction.NoDir, m).index)]
    if missing:
        raise CoverageError(f"no single-gesture examples for {missing}")


def _assemble(singles: ExampleSet, chunks) -> SyntheticDoubleSet:
    Xs, ys, srcs = [], [], []
    for lab, X, src in chunks:
        Xs.append(X)
        ys.append(np.full(len(X), lab.index, dtype=np.int64))
        srcs.append(src)
    X = np.concatenate(Xs)
    n = len(X)
    ex = ExampleSet(
        X,
        np.concatenate(ys),
        np.full(n, int(Provenance.SyntheticDouble)),
        np.full(n, "synthetic", dtype=object),
        singles.subject_id,
    )
    return SyntheticDoubleSet(ex, np.concatenate(srcs))


def generate_all_pairs(singles: ExampleSet) -> SyntheticDoubleSet:
    """Every (direction item, modifier item) blend for each of the 8 double classes."""
    _check_coverage(singles)
    chunks = []
    for d in ACTIVE_DIRECTIONS:
        for m in ACTIVE_MODIFIERS:
            X, src = _pairs_for(singles, d, m)
            chunks.append((GestureLabel(d, m), X, src))
    return _assemble(singles, chunks)


def synthesize(singles: ExampleSet, strategy: SubsetStrategy | None, seed: int = 0) -> SyntheticDoubleSet:
    """Synthetic doubles under a subset strategy; ``None`` means all pairs."""
    if strategy is None:
        return generate_all_pairs(singles)
    _check_coverage(singles)
    scaler = Standardizer.fit(singles.X)
    chunks = []
    for d in ACTIVE_DIRECTIONS:
        for m in ACTIVE_MODIFIERS:
            lab = GestureLabel(d, m)
            s = derive_seed(seed, lab.index)
            if strategy.stage is Stage.SubsetInput:
                side = math.sqrt(strategy.fraction)
                rd = _class_rows(singles, GestureLabel(d, Modifier.NoMod))
                rm = _class_rows(singles, GestureLabel(Direction.NoDir, m))
                rd = rd[select_subset(singles.X[rd], strategy.mode, side, derive_seed(s, 0), scaler)]
                rm = rm[select_subset(singles.X[rm], strategy.mode, side, derive_seed(s, 1), scaler)]
                X, src = _pairs_for(singles, d, m, rd, rm)
            else:
                X, src = _pairs_for(singles, d, m)
                keep = select_subset(X, strategy.mode, strategy.fraction, s, scaler)
                X, src = X[keep], src[keep]
            chunks.append((lab, X, src))
    return _assemble(singles, chunks)
