"""Balanced accuracy, single-condition runs, and the three experiment sweeps."""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .architectures import ARCHITECTURES, predict_batch, train_model
from .augmentation import DEFAULT_METHODS, AugmentMethod, augment_singles, per_class_count
from .classifiers import ALGORITHMS
from .dataset import ExampleSet, SplitSpec, split_session
from .labels import DOUBLE_CLASSES, N_CLASSES, SINGLE_CLASSES, to_indices
from .simgen import derive_seed
from .synthesis import Mode, Stage, SubsetStrategy, synthesize

FRACTIONS = (0.001, 0.005, 0.01, 0.05, 0.1, 0.25, 0.5)
RESULT_COLUMNS = (
    "subject",
    "seed",
    "experiment",
    "arch",
    "algo",
    "condition",
    "strategy",
    "fraction",
    "augment_method",
    "singles_acc",
    "doubles_acc",
    "overall_acc",
    "error",
)


class MetricError(ValueError):
    pass


class ConditionError(RuntimeError):
    """A condition failed; the message names the condition."""


# ---------------------------------------------------------------- metrics

def balanced_accuracy(predictions, truths, classes=None) -> float:
    """Mean over ``classes`` of the per-class joint-label hit rate."""
    p = to_indices(predictions)
    t = to_indices(truths)
    if p.shape != t.shape:
        raise MetricError("predictions and truths differ in length")
    classes = np.arange(N_CLASSES) if classes is None else to_indices(classes)
    accs = []
    for c in classes:
        mask = t == c
        if not mask.any():
            raise MetricError(f"class {int(c)} is absent from the truths")
        accs.append(np.count_nonzero(p[mask] == c) / np.count_nonzero(mask))
    return float(np.mean(accs))


@dataclass
class EvalReport:
    singles_acc: float
    doubles_acc: float
    overall_acc: float
    per_class: np.ndarray  # 15 accuracies
    confusion: np.ndarray  # 15 x 15, rows = truth
    condition: str
    subject_id: str
    seed: int


def evaluate_predictions(pred, truth, condition: str = "", subject_id: str = "", seed: int = 0) -> EvalReport:
    pred = to_indices(pred)
    truth = to_indices(truth)
    conf = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(conf, (truth, pred), 1)
    sizes = conf.sum(axis=1)
    if np.any(sizes == 0):
        missing = np.nonzero(sizes == 0)[0].tolist()
        raise MetricError(f"test set lacks classes {missing}")
    per_class = np.diag(conf) / sizes
    singles = float(per_class[np.asarray(SINGLE_CLASSES, dtype=int)].mean())
    doubles = float(per_class[np.asarray(DOUBLE_CLASSES, dtype=int)].mean())
    return EvalReport(singles, doubles, float(per_class.mean()), per_class, conf, condition, subject_id, seed)


# ---------------------------------------------------------------- conditions

@dataclass(frozen=True)
class Condition:
    """lower / upper, or augmented with a synthesis strategy (None = all pairs)
    and an optional single-gesture augmentation at ``augment_fraction``."""

    kind: str
    strategy: Optional[SubsetStrategy] = None
    augment: Optional[AugmentMethod] = None
    augment_fraction: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("lower", "augmented", "upper"):
            raise ValueError(f"unknown condition {self.kind!r}")
        if self.kind != "augmented" and (self.strategy or self.augment):
            raise ValueError("only the augmented condition takes a strategy or augmentation")
        if (self.augment is None) != (self.augment_fraction is None):
            raise ValueError("augmentation needs both a method and a fraction")

    @property
    def strategy_name(self) -> str:
        if self.kind != "augmented":
            return ""
        return "all_pairs" if self.strategy is None else self.strategy.name

    @property
    def fraction(self) -> Optional[float]:
        if self.augment_fraction is not None:
            return self.augment_fraction
        return None if self.strategy is None else self.strategy.fraction

    @property
    def tag(self) -> str:
        parts = [self.kind]
        if self.kind == "augmented":
            parts.append(self.strategy_name)
            if self.strategy is not None:
                parts.append(repr(self.strategy.fraction))
            if self.augment is not None:
                parts += [self.augment.name, repr(self.augment_fraction)]
        return ":".join(parts)


LOWER = Condition("lower")
UPPER = Condition("upper")
ALL_PAIRS = Condition("augmented")


def training_set(split: SplitSpec, condition: Condition, seed: int) -> ExampleSet:
    if condition.kind == "lower":
        return split.train
    if condition.kind == "upper":
        return split.train.concat(split.special)
    syn = synthesize(split.train, condition.strategy, derive_seed(seed, 1)).examples
    parts = [syn]
    if condition.augment is not None:
        count = per_class_count(condition.augment_fraction, len(syn))
        parts.append(augment_singles(split.train, condition.augment, count, derive_seed(seed, 2)))
    return split.train.concat(*parts)


def run_condition(session_or_split, condition: Condition, arch: str = "Parallel", algo: str = "MLP", seed: int = 0, params=None) -> EvalReport:
    """Train under ``condition`` and score on HP3+SP3.

    ``params`` is either one parameter object or a mapping algo -> params.
    """
    split = session_or_split if isinstance(session_or_split, SplitSpec) else split_session(session_or_split)
    if isinstance(params, dict):
        params = params.get(algo)
    try:
        train = training_set(split, condition, seed)
        model = train_model(arch, train, algo, params, derive_seed(seed, 3))
        pred = predict_batch(model, split.test.X)
        return evaluate_predictions(pred.labels, split.test.y, condition.tag, split.test.subject_id, seed)
    except Exception as exc:
        raise ConditionError(f"{condition.tag} [{arch}/{algo}] on {split.test.subject_id}: {exc}") from exc


# ---------------------------------------------------------------- grids

@dataclass(frozen=True)
class Cell:
    experiment: str
    arch: str
    algo: str
    condition: Condition


def experiment_1_cells(archs=ARCHITECTURES, algos=ALGORITHMS) -> list[Cell]:
    return [Cell("exp1", a, g, c) for a in archs for g in algos for c in (LOWER, ALL_PAIRS, UPPER)]


STRATEGIES = tuple((s, m) for s in (Stage.SubsetInput, Stage.SubsetAfter) for m in Mode)


def experiment_2_cells(fractions=FRACTIONS) -> list[Cell]:
    cells = [Cell("exp2", "Parallel", "MLP", c) for c in (LOWER, UPPER, ALL_PAIRS)]
    for stage, mode in STRATEGIES:
        for f in fractions:
            cells.append(Cell("exp2", "Parallel", "MLP", Condition("augmented", SubsetStrategy(stage, mode, f))))
    return cells


BASELINE_3 = SubsetStrategy(Stage.SubsetAfter, Mode.Uniform, 0.1)


def experiment_3_cells(methods=DEFAULT_METHODS, fractions=FRACTIONS) -> list[Cell]:
    cells = [Cell("exp3", "Parallel", "MLP", Condition("augmented", BASELINE_3))]
    for name in methods:
        for f in fractions:
            cells.append(Cell("exp3", "Parallel", "MLP", Condition("augmented", BASELINE_3, AugmentMethod.parse(name), f)))
    return cells


@dataclass
class ExperimentGrid:
    cells: list
    n_seeds: int = 3


def rep_seed(master_seed: int, subject_index: int, rep: int) -> int:
    """Seed shared by every cell of one subject and repetition."""
    return derive_seed(master_seed, subject_index, rep)


# ---------------------------------------------------------------- sweeps

@dataclass
class ResultRow:
    subject: str
    seed: int
    cell: Cell
    report: Optional[EvalReport] = None
    error: str = ""
    elapsed: float = 0.0  # wall seconds; informational, not written to CSV

    def as_record(self) -> dict:
        c = self.cell.condition
        f = c.fraction
        r = self.report
        nan = float("nan")
        return {
            "subject": self.subject,
            "seed": self.seed,
            "experiment": self.cell.experiment,
            "arch": self.cell.arch,
            "algo": self.cell.algo,
            "condition": c.kind,
            "strategy": c.strategy_name,
            "fraction": "" if f is None else repr(float(f)),
            "augment_method": "" if c.augment is None else c.augment.name,
            "singles_acc": repr(r.singles_acc if r else nan),
            "doubles_acc": repr(r.doubles_acc if r else nan),
            "overall_acc": repr(r.overall_acc if r else nan),
            "error": self.error,
        }


_WORKER: dict = {}


def _init_worker(cohort, params):
    _WORKER["cohort"] = cohort
    _WORKER["params"] = params
    _WORKER["splits"] = {}


def _run_job(job):
    si, seed, cell = job
    cohort = _WORKER["cohort"]
    splits = _WORKER["splits"]
    if si not in splits:
        splits[si] = split_session(cohort[si])
    sid = cohort[si].subject_id
    t0 = time.perf_counter()
    try:
        rep = run_condition(splits[si], cell.condition, cell.arch, cell.algo, seed, _WORKER["params"])
        return ResultRow(sid, seed, cell, rep, elapsed=time.perf_counter() - t0)
    except Exception as exc:  # recorded, never aborts the sweep
        return ResultRow(sid, seed, cell, None, f"{type(exc.__cause__ or exc).__name__}: {exc}", time.perf_counter() - t0)


def run_grid(cohort: Sequence, grid: ExperimentGrid, master_seed: int = 0, params=None, jobs: int = 1) -> list[ResultRow]:
    """Every (subject, repetition, cell); rows come back in that nested order
    whatever ``jobs`` is."""
    work = [
        (si, rep_seed(master_seed, si, r), cell)
        for si in range(len(cohort))
        for r in range(grid.n_seeds)
        for cell in grid.cells
    ]
    jobs = max(1, int(jobs or 1))
    if jobs == 1:
        _init_worker(list(cohort), params)
        try:
            return [_run_job(w) for w in work]
        finally:
            _WORKER.clear()
    with ProcessPoolExecutor(max_workers=min(jobs, os.cpu_count() or 1, len(work)) or 1, initializer=_init_worker, initargs=(list(cohort), params)) as ex:
        return list(ex.map(_run_job, work, chunksize=max(1, len(work) // (8 * jobs))))


def run_experiment_1(cohort, master_seed: int = 0, n_seeds: int = 3, params=None, jobs: int = 1, archs=ARCHITECTURES, algos=ALGORITHMS):
    return run_grid(cohort, ExperimentGrid(experiment_1_cells(archs, algos), n_seeds), master_seed, params, jobs)


def run_experiment_2(cohort, master_seed: int = 0, n_seeds: int = 3, params=None, jobs: int = 1, fractions=FRACTIONS):
    return run_grid(cohort, ExperimentGrid(experiment_2_cells(fractions), n_seeds), master_seed, params, jobs)


def run_experiment_3(cohort, master_seed: int = 0, n_seeds: int = 3, params=None, jobs: int = 1, methods=DEFAULT_METHODS, fractions=FRACTIONS):
    return run_grid(cohort, ExperimentGrid(experiment_3_cells(methods, fractions), n_seeds), master_seed, params, jobs)


def results_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_record())
    return buf.getvalue()


def summarize(rows, key=lambda r: r.cell.condition.tag) -> dict:
    """Mean (singles, doubles, overall) per key over successful rows."""
    acc: dict = {}
    for r in rows:
        if r.report is None:
            continue
        acc.setdefault(key(r), []).append((r.report.singles_acc, r.report.doubles_acc, r.report.overall_acc))
    return {k: tuple(float(x) for x in np.mean(v, axis=0)) for k, v in acc.items()}
