import csv
import io

import numpy as np
import pytest

from emgcombo.classifiers import ForestParams, LogRParams, MlpParams
from emgcombo.dataset import Provenance
from emgcombo.evaluation import (
    ALL_PAIRS,
    FRACTIONS,
    LOWER,
    RESULT_COLUMNS,
    UPPER,
    Condition,
    ConditionError,
    MetricError,
    balanced_accuracy,
    evaluate_predictions,
    experiment_1_cells,
    experiment_2_cells,
    experiment_3_cells,
    results_csv,
    run_condition,
    run_experiment_1,
    training_set,
)
from emgcombo.labels import is_double
from emgcombo.simgen import SimulatorConfig, generate_cohort

FAST = {"LogR": LogRParams(n_iter=30), "MLP": MlpParams(n_iter=20), "RF": ForestParams(n_trees=5)}


def brute_balanced(p, t, classes):
    accs = []
    for c in classes:
        idx = [i for i in range(len(t)) if t[i] == c]
        accs.append(sum(p[i] == c for i in idx) / len(idx))
    return sum(accs) / len(accs)


def test_balanced_accuracy_examples():
    assert balanced_accuracy([0, 1, 2], [0, 1, 2], [0, 1, 2]) == 1.0
    assert balanced_accuracy([0, 0, 0, 0], [0, 0, 1, 1], [0, 1]) == 0.5
    with pytest.raises(MetricError):
        balanced_accuracy([0], [0], [0, 1])


def test_balanced_accuracy_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(15, 60))
        t = rng.integers(0, 15, size=n)
        t[:15] = np.arange(15)
        p = rng.integers(0, 15, size=n)
        assert balanced_accuracy(p, t) == pytest.approx(brute_balanced(p, t, range(15)), abs=1e-12)


def test_chance_level():
    rng = np.random.default_rng(1)
    t = np.repeat(np.arange(15), 100_000 // 15 + 1)[:100_000]
    p = rng.integers(0, 15, size=t.size)
    assert abs(balanced_accuracy(p, t) - 1 / 15) < 0.01


def test_report_decomposition():
    rng = np.random.default_rng(2)
    t = np.concatenate([np.arange(15)] * 4)
    p = rng.integers(0, 15, size=t.size)
    r = evaluate_predictions(p, t)
    assert r.overall_acc == pytest.approx((7 * r.singles_acc + 8 * r.doubles_acc) / 15, abs=1e-12)
    assert r.confusion.sum() == t.size


def test_condition_training_sets(split):
    assert not is_double(training_set(split, LOWER, 0).y).any()
    up = training_set(split, UPPER, 0)
    assert set(up.block_tag[is_double(up.y)]) == {"HP1", "HP2", "SP1", "SP2"}
    aug = training_set(split, ALL_PAIRS, 0)
    assert np.all(aug.provenance[is_double(aug.y)] == int(Provenance.SyntheticDouble))


def test_run_condition_reports_in_range(split):
    r = run_condition(split, LOWER, "Parallel", "LogR", 0, FAST)
    assert 0 <= r.doubles_acc <= 1 and r.condition == "lower"


def test_condition_errors_carry_context(split):
    bad = split.train.subset(split.train.y != 12)  # drop NoDir,Pinch
    from emgcombo.dataset import SplitSpec

    with pytest.raises(ConditionError, match="augmented"):
        run_condition(SplitSpec(bad, split.special, split.test), ALL_PAIRS, "Parallel", "LogR", 0, FAST)


def test_grid_sizes():
    assert len(experiment_1_cells()) == 18
    assert len(FRACTIONS) == 7
    assert len(experiment_2_cells()) == 3 + 6 * 7
    cells = experiment_3_cells()
    assert cells[0].condition.augment is None and cells[0].condition.strategy.fraction == 0.1
    assert len(cells) == 1 + 7 * 7


def test_condition_validation():
    with pytest.raises(ValueError):
        Condition("lower", augment_fraction=0.1)
    with pytest.raises(ValueError):
        Condition("bogus")


@pytest.fixture(scope="module")
def tiny_cohort():
    cfg = SimulatorConfig(seed=3, calibration_s=0.25, held_s=0.25, pulsed_s=0.25, rest_s=0.25)
    return generate_cohort(cfg, 2)


def test_experiment_rows_and_determinism(tiny_cohort):
    kw = dict(master_seed=5, n_seeds=2, params=FAST, archs=("Parallel",), algos=("LogR", "RF"))
    rows = run_experiment_1(tiny_cohort, **kw)
    assert len(rows) == 2 * 2 * 6
    text = results_csv(rows)
    assert text == results_csv(run_experiment_1(tiny_cohort, **kw))
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert tuple(parsed[0]) == RESULT_COLUMNS
    assert all(r["error"] == "" for r in parsed)


def test_parallel_jobs_do_not_change_results(tiny_cohort):
    kw = dict(master_seed=1, n_seeds=1, params=FAST, archs=("Hierarchical",), algos=("LogR",))
    assert results_csv(run_experiment_1(tiny_cohort, jobs=1, **kw)) == results_csv(run_experiment_1(tiny_cohort, jobs=2, **kw))


def test_failures_are_recorded_not_raised(tiny_cohort):
    from copy import deepcopy

    broken = deepcopy(tiny_cohort[:1])
    for t in broken[0].blocks[0].trials:
        if str(t.label) == "NoDir,Thumb":
            t.window_labels[:] = 14
    rows = run_experiment_1(broken, n_seeds=1, params=FAST, archs=("Parallel",), algos=("LogR",))
    errs = [r.error for r in rows]
    # lower and augmented lack Thumb rows; upper gets them from the special blocks
    assert all(e.startswith("CoverageError") and "Thumb" in e for e in errs[:2])
    assert errs[2] == ""
    assert "nan" in results_csv(rows)


def test_test_set_constant_across_cells(split):
    a = run_condition(split, LOWER, "Parallel", "LogR", 0, FAST)
    b = run_condition(split, UPPER, "Parallel", "LogR", 0, FAST)
    np.testing.assert_array_equal(a.confusion.sum(axis=1), b.confusion.sum(axis=1))
