"""Class-similarity heatmaps from a mean RBF kernel over class members.

The class axis holds the 15 real classes (structured order) followed by the
8 synthetic double classes.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .classifiers.base import Standardizer
from .dataset import Provenance, split_session
from .labels import DOUBLE_CLASSES, GestureLabel, enumerate_classes
from .synthesis import SubsetStrategy, synthesize


class DegenerateDataError(ValueError):
    """All items coincide, so the median heuristic has no scale."""


def heatmap_axis() -> list[str]:
    real = [str(c) for c in enumerate_classes()]
    return real + [f"{GestureLabel.from_index(int(c))} (synthetic)" for c in DOUBLE_CLASSES]


N_AXIS = 23


@dataclass(frozen=True)
class SimilarityHeatmap:
    matrix: np.ndarray
    classes: tuple
    gamma: float  # NaN for an average of several subjects
    subject_id: str
    seed: int | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (len(self.classes), len(self.classes)):
            raise ValueError("matrix shape does not match the class axis")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise ValueError("heatmap must be symmetric")
        if m.min() < 0.0 or m.max() > 1.0:
            raise ValueError("heatmap entries must lie in [0, 1]")


def median_heuristic(features) -> float:
    """gamma = 1 / median squared distance over unordered distinct pairs."""
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("median heuristic needs at least 2 items")
    h = float(np.median(_kernels.pairwise_sq_dists(X)))
    if h == 0.0:
        raise DegenerateDataError("median squared distance is 0; items are (mostly) identical")
    return 1.0 / h


def rbf_kernel(z1, z2, gamma: float) -> float:
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if z1.shape != z2.shape:
        raise ValueError("vectors differ in length")
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    d = z1 - z2
    return float(np.exp(-gamma * np.dot(d, d)))


def class_similarity(c1, c2, gamma: float) -> float:
    """Mean RBF kernel over all ordered pairs of ``c1 x c2``."""
    A = np.atleast_2d(np.asarray(c1, dtype=float))
    B = np.atleast_2d(np.asarray(c2, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("class_similarity of an empty class")
    if A.shape[1] != B.shape[1]:
        raise ValueError("classes have different feature lengths")
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    return float(_kernels.mean_rbf(A, B, gamma))


def heatmap_from_groups(groups, classes, subject_id: str = "", seed=None, standardize: bool = True) -> SimilarityHeatmap:
    """Heatmap over pre-grouped items; gamma from the pooled items.

    With ``standardize`` the pooled items are z-scored per feature first, so
    Hz-valued MPF features do not swamp the RMS features in the distances.
    """
    for name, g in zip(classes, groups):
        if len(g) == 0:
            raise ValueError(f"no items for class {name}")
    if standardize:
        sc = Standardizer.fit(np.concatenate(groups))
        groups = [sc.transform(g) for g in groups]
    gamma = median_heuristic(np.concatenate(groups))
    k = len(groups)
    M = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            M[i, j] = M[j, i] = class_similarity(groups[i], groups[j], gamma)
    return SimilarityHeatmap(np.clip(M, 0.0, 1.0), tuple(classes), gamma, subject_id, seed)


def build_heatmap(session, synth_fraction: float = 0.005, seed: int = 0, standardize: bool = True) -> SimilarityHeatmap:
    """Per-subject heatmap: every real window of the session plus a uniform
    subset of synthetic doubles built from its Calibration singles."""
    sp = split_session(session)
    real = sp.train.concat(sp.special, sp.test)
    syn = synthesize(sp.train, SubsetStrategy("subset", "uniform", synth_fraction), seed).examples
    groups = []
    missing = []
    for c in enumerate_classes():
        g = real.of_class(c.index)
        if len(g) == 0:
            missing.append(str(c))
        groups.append(g)
    if missing:
        raise ValueError(f"session {session.subject_id} has no windows for {', '.join(missing)}")
    for c in DOUBLE_CLASSES:
        groups.append(syn.X[(syn.y == int(c)) & (syn.provenance == int(Provenance.SyntheticDouble))])
    return heatmap_from_groups(groups, heatmap_axis(), session.subject_id, seed, standardize)


def average_heatmaps(heatmaps) -> SimilarityHeatmap:
    heatmaps = list(heatmaps)
    if not heatmaps:
        raise ValueError("nothing to average")
    axis = heatmaps[0].classes
    if any(h.classes != axis for h in heatmaps):
        raise ValueError("heatmaps use different class axes")
    if len(heatmaps) == 1:
        return heatmaps[0]
    M = np.mean([h.matrix for h in heatmaps], axis=0)
    return SimilarityHeatmap((M + M.T) / 2.0, axis, float("nan"), "averaged", heatmaps[0].seed)


def heatmap_csv(h: SimilarityHeatmap) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(h.classes)
    for row in h.matrix:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def save_heatmap(h: SimilarityHeatmap, path) -> tuple[Path, Path]:
    """Write ``<path>`` (CSV) and ``<path>.json`` (gamma, subject, seed)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(heatmap_csv(h), encoding="utf-8")
    side = path.with_suffix(path.suffix + ".json")
    gamma = None if np.isnan(h.gamma) else h.gamma
    side.write_text(json.dumps({"gamma": gamma, "subject": h.subject_id, "seed": h.seed}, sort_keys=True, indent=2) + "\n")
    return path, side


def load_heatmap(path) -> SimilarityHeatmap:
    path = Path(path)
    rows = list(csv.reader(path.read_text(encoding="utf-8").splitlines()))
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    M = np.array([[float(v) for v in r] for r in rows[1:]])
    gamma = float("nan") if meta["gamma"] is None else meta["gamma"]
    return SimilarityHeatmap(M, tuple(rows[0]), gamma, meta["subject"], meta["seed"])
