"""Augmented single-gesture features: Gaussian jitter, diagonal GMM, KDE.

Noise scales (``sigma``, KDE lengthscale) are in standardized feature units;
samples are mapped back to raw feature space before they are returned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifiers.base import Standardizer
from .dataset import ExampleSet, Provenance
from .labels import SINGLE_CLASSES
from .simgen import derive_seed

VAR_FLOOR = 1e-6


@dataclass(frozen=True)
class AugmentMethod:
    kind: str  # "add_gaussian" | "fit_gmm" | "fit_kde"
    sigma: float = 0.3
    n_components: int = 1
    lengthscale: float = 0.01

    def __post_init__(self):
        if self.kind not in ("add_gaussian", "fit_gmm", "fit_kde"):
            raise ValueError(f"unknown augmentation {self.kind!r}")
        if self.kind == "add_gaussian" and not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.kind == "fit_gmm" and self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        if self.kind == "fit_kde" and not self.lengthscale > 0:
            raise ValueError("lengthscale must be > 0")

    @property
    def name(self) -> str:
        if self.kind == "add_gaussian":
            return f"add-gaussian-{self.sigma:g}"
        if self.kind == "fit_gmm":
            return f"fit-gmm-{self.n_components}"
        return "fit-kde"

    @classmethod
    def parse(cls, name: str) -> "AugmentMethod":
        if name.startswith("add-gaussian-"):
            return cls("add_gaussian", sigma=float(name.rsplit("-", 1)[1]))
        if name.startswith("fit-gmm-"):
            return cls("fit_gmm", n_components=int(name.rsplit("-", 1)[1]))
        if name == "fit-kde":
            return cls("fit_kde")
        raise ValueError(f"unknown augmentation {name!r}")


DEFAULT_METHODS = (
    "add-gaussian-0.3",
    "add-gaussian-0.4",
    "add-gaussian-0.5",
    "fit-gmm-1",
    "fit-gmm-5",
    "fit-gmm-10",
    "fit-kde",
)


@dataclass
class GmmModel:
    weights: np.ndarray  # k
    means: np.ndarray  # k x d
    variances: np.ndarray  # k x d, diagonal
    log_likelihood: np.ndarray = field(default_factory=lambda: np.zeros(0))  # trace, mean per item

    @property
    def n_components(self) -> int:
        return len(self.weights)


def _scaler_for(items: np.ndarray, scaler: Optional[Standardizer]) -> Standardizer:
    return scaler if scaler is not None else Standardizer.fit(items)


def augment_gaussian(items, sigma: float, count: int, seed: int = 0, scaler: Standardizer | None = None) -> np.ndarray:
    """``count`` draws of (random real item + N(0, sigma^2 I)) in standardized space."""
    X = np.asarray(items, dtype=float)
    if len(X) == 0:
        raise ValueError("cannot augment an empty class")
    if count < 1:
        raise ValueError("count must be >= 1")
    sc = _scaler_for(X, scaler)
    rng = np.random.default_rng(seed)
    src = rng.integers(0, len(X), size=count)
    Z = sc.transform(X[src]) + rng.normal(0.0, sigma, size=(count, X.shape[1]))
    return sc.inverse(Z)


def _log_gauss_diag(X, means, variances):
    # log N(x | mu_j, diag(var_j)) for all rows and components -> n x k
    d = X.shape[1]
    diff2 = ((X[:, None, :] - means[None, :, :]) ** 2 / variances[None, :, :]).sum(axis=2)
    return -0.5 * (diff2 + np.log(variances).sum(axis=1)[None, :] + d * math.log(2 * math.pi))


def _logsumexp(a, axis):
    m = a.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def fit_gmm(items, k: int, seed: int = 0, tol: float = 1e-6, max_iter: int = 200, var_floor: float = VAR_FLOOR) -> GmmModel:
    """Diagonal-covariance GMM by EM.

    Means start at ``k`` distinct data points chosen with ``seed``; variances
    start at the pooled per-dimension variance. Iteration stops when the mean
    log-likelihood improves by less than ``tol`` or after ``max_iter`` steps.
    Variances are floored at ``var_floor`` (the floored M-step is still the
    constrained maximiser, so the likelihood stays monotone).
    """
    X = np.asarray(items, dtype=float)
    n, d = X.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"need at least k={k} items, got {n}")
    rng = np.random.default_rng(seed)
    uniq = np.unique(X, axis=0, return_index=True)[1]
    pool = np.sort(uniq) if len(uniq) >= k else np.arange(n)
    means = X[rng.choice(pool, size=k, replace=False)].copy()
    variances = np.tile(np.maximum(X.var(axis=0), var_floor), (k, 1))
    weights = np.full(k, 1.0 / k)

    trace = []
    for _ in range(max_iter):
        logp = _log_gauss_diag(X, means, variances) + np.log(np.maximum(weights, 1e-300))[None, :]
        norm = _logsumexp(logp, axis=1)
        ll = float(norm.mean())
        if trace and ll - trace[-1] < tol:
            trace.append(ll)
            break
        trace.append(ll)
        resp = np.exp(logp - norm[:, None])
        nk = resp.sum(axis=0)
        alive = nk > 1e-12
        weights = nk / n
        new_means = (resp.T @ X) / np.where(alive, nk, 1.0)[:, None]
        means = np.where(alive[:, None], new_means, means)
        ex2 = (resp.T @ (X * X)) / np.where(alive, nk, 1.0)[:, None]
        new_var = np.maximum(ex2 - means**2, var_floor)
        variances = np.where(alive[:, None], new_var, variances)
    else:
        logp = _log_gauss_diag(X, means, variances) + np.log(np.maximum(weights, 1e-300))[None, :]
        trace.append(float(_logsumexp(logp, axis=1).mean()))
    return GmmModel(weights, means, variances, np.asarray(trace))


def sample_gmm(model: GmmModel, count: int, seed: int = 0) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    comp = rng.choice(model.n_components, size=count, p=model.weights / model.weights.sum())
    return model.means[comp] + rng.standard_normal((count, model.means.shape[1])) * np.sqrt(model.variances[comp])


def sample_kde(items, lengthscale: float, count: int, seed: int = 0, scaler: Standardizer | None = None) -> np.ndarray:
    """Draws from a Gaussian-kernel KDE with bandwidth ``lengthscale`` in standardized space."""
    X = np.asarray(items, dtype=float)
    if len(X) == 0:
        raise ValueError("cannot sample a KDE of no items")
    if count < 1:
        raise ValueError("count must be >= 1")
    sc = _scaler_for(X, scaler)
    rng = np.random.default_rng(seed)
    src = rng.integers(0, len(X), size=count)
    return sc.inverse(sc.transform(X[src]) + rng.normal(0.0, lengthscale, size=(count, X.shape[1])))


def per_class_count(fraction: float, n_synthetic: int, n_classes: int = len(SINGLE_CLASSES)) -> int:
    """Augmented items per single class: fraction of the synthetic-double total, split evenly."""
    return max(1, int(math.floor(fraction * n_synthetic / n_classes + 0.5)))


def augment_singles(singles: ExampleSet, method: AugmentMethod, count: int, seed: int = 0) -> ExampleSet:
    """``count`` augmented items for every single class present in ``singles``.

    Standardization is fitted on the pooled singles; GMMs are fitted per class
    in that standardized space.
    """
    scaler = Standardizer.fit(singles.X)
    Xs, ys = [], []
    for c in SINGLE_CLASSES:
        items = singles.of_class(int(c))
        if len(items) == 0:
            continue
        s = derive_seed(seed, int(c))
        if method.kind == "add_gaussian":
            out = augment_gaussian(items, method.sigma, count, s, scaler)
        elif method.kind == "fit_kde":
            out = sample_kde(items, method.lengthscale, count, s, scaler)
        else:
            Z = scaler.transform(items)
            k = min(method.n_components, len(Z))
            gmm = fit_gmm(Z, k, derive_seed(s, 0))
            out = scaler.inverse(sample_gmm(gmm, count, derive_seed(s, 1)))
        Xs.append(out)
        ys.append(np.full(count, int(c)))
    n = sum(len(x) for x in Xs)
    return ExampleSet(
        np.concatenate(Xs),
        np.concatenate(ys),
        np.full(n, int(Provenance.AugmentedSingle)),
        np.full(n, "augmented", dtype=object),
        singles.subject_id,
    )
