import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emgcombo.augmentation import (
    AugmentMethod,
    augment_gaussian,
    augment_singles,
    fit_gmm,
    per_class_count,
    sample_gmm,
    sample_kde,
)
from emgcombo.classifiers.base import Standardizer
from emgcombo.dataset import Provenance
from emgcombo.labels import SINGLE_CLASSES, is_double


def test_gaussian_count_and_shape():
    X = np.random.default_rng(0).normal(size=(6, 16))
    assert augment_gaussian(X, 0.3, 5, 1).shape == (5, 16)


def test_gaussian_tiny_sigma_returns_sources():
    X = np.random.default_rng(0).normal(size=(6, 4))
    out = augment_gaussian(X, 1e-300, 20, 2)
    assert all(any(np.allclose(o, x, atol=1e-12) for x in X) for o in out)


def test_gaussian_noise_is_unbiased():
    X = np.zeros((1, 3))
    sc = Standardizer(np.zeros(3), np.ones(3))
    out = augment_gaussian(X, 0.4, 100_000, 3, sc)
    assert np.all(np.abs(out.mean(axis=0)) < 3 * 0.4 / np.sqrt(100_000))


def test_zero_noise_round_trip():
    X = np.random.default_rng(1).normal(3, 5, size=(20, 16))
    sc = Standardizer.fit(X)
    np.testing.assert_allclose(sc.inverse(sc.transform(X)), X, atol=1e-12)


def test_empty_and_bad_counts():
    with pytest.raises(ValueError):
        augment_gaussian(np.zeros((0, 3)), 0.3, 5)
    with pytest.raises(ValueError):
        sample_kde(np.ones((3, 3)), 0.01, 0)
    with pytest.raises(ValueError):
        fit_gmm(np.ones((3, 2)), 5)


def test_gmm_single_component_is_closed_form():
    X = np.random.default_rng(2).normal(size=(50, 4))
    m = fit_gmm(X, 1, 0)
    np.testing.assert_allclose(m.means[0], X.mean(axis=0), atol=1e-9)
    np.testing.assert_allclose(m.variances[0], X.var(axis=0), atol=1e-9)


@given(st.integers(0, 10_000), st.sampled_from([1, 5, 10]))
@settings(max_examples=30, deadline=None)
def test_em_is_monotone(seed, k):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(c, 1, size=(15, 3)) for c in rng.normal(0, 4, size=(3, 3))])
    m = fit_gmm(X, k, seed)
    assert np.all(np.diff(m.log_likelihood) >= -1e-9)
    assert m.log_likelihood[-1] >= m.log_likelihood[0]


def test_gmm_duplicate_points_hit_the_floor_not_an_error():
    X = np.repeat(np.random.default_rng(3).normal(size=(2, 3)), 10, axis=0)
    m = fit_gmm(X, 2, 0)
    assert np.all(m.variances >= 1e-6)
    assert np.all(np.isfinite(m.log_likelihood))


def test_gmm_same_seed_same_model():
    X = np.random.default_rng(4).normal(size=(30, 3))
    a, b = fit_gmm(X, 3, 7), fit_gmm(X, 3, 7)
    np.testing.assert_array_equal(a.means, b.means)
    np.testing.assert_array_equal(sample_gmm(a, 10, 1), sample_gmm(b, 10, 1))


def test_kde_tiny_lengthscale_reproduces_data():
    X = np.random.default_rng(5).normal(size=(4, 3))
    out = sample_kde(X, 1e-300, 12, 0)
    assert all(any(np.allclose(o, x, atol=1e-12) for x in X) for o in out)


def test_per_class_count():
    assert per_class_count(0.1, 4608) == 66
    assert per_class_count(0.001, 100) == 1


@pytest.mark.parametrize("name", ["add-gaussian-0.3", "fit-gmm-5", "fit-kde"])
def test_augmented_singles_never_double(split, name):
    out = augment_singles(split.train, AugmentMethod.parse(name), 4, 0)
    assert len(out) == 4 * len(SINGLE_CLASSES)
    assert not is_double(out.y).any()
    assert np.all(out.provenance == int(Provenance.AugmentedSingle))


def test_method_names_round_trip():
    for n in ("add-gaussian-0.4", "fit-gmm-10", "fit-kde"):
        assert AugmentMethod.parse(n).name == n
    with pytest.raises(ValueError):
        AugmentMethod.parse("mixup")
