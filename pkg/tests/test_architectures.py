import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emgcombo.architectures import (
    CoverageError,
    compose_hierarchical,
    predict,
    predict_batch,
    train_hierarchical,
    train_model,
    train_parallel,
)
from emgcombo.classifiers import LogRParams
from emgcombo.labels import Direction, GestureLabel, Modifier, direction_of, enumerate_classes, modifier_of
from emgcombo.synthesis import synthesize

FAST = LogRParams(n_iter=40)


def test_parallel_head_class_counts(split):
    m = train_parallel(split.train, "LogR", FAST, 0)
    assert m.dir_head.n_classes == 5 and m.mod_head.n_classes == 3


def test_hierarchical_classify_heads_see_active_classes(split):
    m = train_hierarchical(split.train, "LogR", FAST, 0)
    assert m.dir_classify.n_classes == 4
    assert m.mod_classify.n_classes == 2
    assert m.dir_detect.n_classes == 2


def test_synthetic_row_projects_onto_both_heads(split):
    syn = synthesize(split.train, None).examples
    up_pinch = GestureLabel(Direction.Up, Modifier.Pinch).index
    y = syn.y[syn.y == up_pinch]
    assert set(direction_of(y)) == {int(Direction.Up)}
    assert set(modifier_of(y)) == {int(Modifier.Pinch)}


def test_missing_modifier_rows_is_a_coverage_error(split):
    keep = modifier_of(split.train.y) == int(Modifier.NoMod)
    with pytest.raises(CoverageError):
        train_parallel(split.train.subset(keep), "LogR", FAST)
    with pytest.raises(CoverageError):
        train_hierarchical(split.train.subset(keep), "LogR", FAST)


def test_same_seed_same_model(split):
    a = train_model("Parallel", split.train, "MLP", None, 3)
    b = train_model("Parallel", split.train, "MLP", None, 3)
    np.testing.assert_array_equal(a.dir_head.theta, b.dir_head.theta)


def test_head_independence(split):
    # changing only modifier labels leaves the direction head untouched
    tr = split.train
    y2 = tr.y.copy()
    pinch = tr.y == GestureLabel(Direction.NoDir, Modifier.Pinch).index
    y2[pinch] = GestureLabel(Direction.NoDir, Modifier.Thumb).index
    y2[np.nonzero(pinch)[0][:3]] = GestureLabel(Direction.NoDir, Modifier.Pinch).index
    a = train_parallel(tr, "LogR", FAST, 1)
    b = train_parallel((tr.X, y2), "LogR", FAST, 1)
    np.testing.assert_array_equal(a.dir_head.W, b.dir_head.W)


def test_composition_example():
    detect = np.array([[0.2, 0.8]])
    classify = np.full((1, 4), 0.25)
    np.testing.assert_allclose(compose_hierarchical(detect, classify), [[0.2, 0.2, 0.2, 0.2, 0.2]])


@given(st.integers(0, 10_000), st.integers(2, 5))
@settings(max_examples=50, deadline=None)
def test_composition_stays_on_simplex(seed, k):
    rng = np.random.default_rng(seed)
    d = rng.dirichlet(np.ones(2), size=20)
    c = rng.dirichlet(np.ones(k), size=20)
    P = compose_hierarchical(d, c)
    assert np.all(P >= 0)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("arch", ["Parallel", "Hierarchical"])
def test_predictions_always_in_vocabulary(split, arch):
    m = train_model(arch, split.train, "LogR", FAST, 0)
    X = np.random.default_rng(0).normal(0, 200, size=(2000, 16))
    pred = predict_batch(m, X)
    assert set(pred.labels.tolist()) <= set(range(15))
    np.testing.assert_allclose(pred.dir_posterior.sum(axis=1), 1.0, atol=1e-9)
    single = predict(m, X[0])
    assert single.label in enumerate_classes()
