import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from emgcombo.signal import (
    EmgWindow,
    SignalTooShortError,
    featurize_window,
    featurize_windows,
    median_power_frequency,
    periodogram,
    rms,
    window_array,
    window_samples,
    window_starts,
)

FS = 1926.0


def brute_power(x):
    """Direct DFT, one-sided, scaled to total energy."""
    n = len(x)
    t = np.arange(n)
    out = []
    for k in range(n // 2 + 1):
        re = sum(x[j] * np.cos(2 * np.pi * k * j / n) for j in t)
        im = -sum(x[j] * np.sin(2 * np.pi * k * j / n) for j in t)
        p = (re * re + im * im) / n
        if k != 0 and not (n % 2 == 0 and k == n // 2):
            p *= 2
        out.append(p)
    return np.array(out)


def brute_mpf(x, fs):
    p = brute_power(np.asarray(x, float))
    total = p.sum()
    if total == 0:
        return 0.0
    acc = 0.0
    for k, v in enumerate(p):
        acc += v
        if acc >= 0.5 * total:
            return k * fs / len(x)


def test_window_geometry_at_default_rate():
    assert window_samples(250, FS) == 481
    assert window_samples(50, FS) == 96


def test_hand_enumerated_window_starts():
    assert window_starts(10, 4, 2).tolist() == [0, 2, 4, 6]
    assert len(window_starts(4, 4, 2)) == 1


@given(n=st.integers(481, 3000))
@settings(max_examples=40, deadline=None)
def test_window_count_formula(n):
    sig = np.zeros((2, n))
    w = window_array(sig, FS)
    assert w.shape == ((n - 481) // 96 + 1, 2, 481)


def test_windows_are_slices_of_the_signal():
    rng = np.random.default_rng(0)
    sig = rng.normal(size=(3, 1000))
    w = window_array(sig, FS)
    for i, s in enumerate(range(0, 1000 - 481 + 1, 96)):
        np.testing.assert_array_equal(w[i], sig[:, s : s + 481])


def test_too_short_signal():
    with pytest.raises(SignalTooShortError):
        window_array(np.zeros((8, 480)), FS)


def test_rms_examples():
    assert rms([3.0, 4.0]) == pytest.approx(np.sqrt(12.5), abs=1e-12)
    assert rms(np.full(7, -2.5)) == pytest.approx(2.5)
    assert rms(np.zeros(5)) == 0.0


@given(arrays(np.float64, st.integers(2, 50), elements=st.floats(-1e3, 1e3)), st.floats(-1e3, 1e3))
@settings(max_examples=80, deadline=None)
def test_rms_homogeneity(x, a):
    assert rms(a * x) == pytest.approx(abs(a) * rms(x), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("n", [8, 9, 31, 64])
def test_periodogram_matches_direct_dft(n):
    x = np.random.default_rng(n).normal(size=n)
    _, p = periodogram(x, FS)
    np.testing.assert_allclose(p, brute_power(x), rtol=1e-9, atol=1e-12)


@given(arrays(np.float64, st.integers(2, 200), elements=st.floats(-100, 100)))
@settings(max_examples=60, deadline=None)
def test_parseval(x):
    _, p = periodogram(x, FS)
    e = float(np.sum(x * x))
    assert p.sum() == pytest.approx(e, rel=1e-6, abs=1e-9)


def test_mpf_pure_tone_within_one_bin():
    t = np.arange(481) / FS
    x = np.sin(2 * np.pi * 100.0 * t)
    assert abs(median_power_frequency(x, FS) - 100.0) <= FS / 481


def test_mpf_two_tones_agrees_with_oracle():
    # 50 Hz is off the bin grid; leakage from its lobe carries the cumulative
    # sum past half before the 150 Hz tone, so the oracle lands at bin 15.
    t = np.arange(481) / FS
    x = np.sin(2 * np.pi * 50.0 * t) + np.sin(2 * np.pi * 150.0 * t)
    got = median_power_frequency(x, FS)
    assert got == pytest.approx(brute_mpf(x, FS), abs=1e-9)
    assert got == pytest.approx(15 * FS / 481, abs=1e-9)


def test_mpf_zero_signal():
    assert median_power_frequency(np.zeros(481), FS) == 0.0


@given(st.integers(0, 10_000), st.floats(0.01, 100.0), st.booleans())
@settings(max_examples=40, deadline=None)
def test_mpf_scale_invariant(seed, a, neg):
    x = np.random.default_rng(seed).normal(size=97)
    a = -a if neg else a
    assert median_power_frequency(a * x, FS) == median_power_frequency(x, FS)


def test_mpf_matches_brute_force_on_random_signals():
    rng = np.random.default_rng(3)
    for _ in range(30):
        x = rng.normal(size=int(rng.integers(4, 40)))
        assert median_power_frequency(x, FS) == pytest.approx(brute_mpf(x, FS), abs=1e-9)


def test_feature_vector_layout():
    w = EmgWindow(np.full((8, 481), 2.0), FS)
    f = featurize_window(w)
    assert f.shape == (16,)
    np.testing.assert_allclose(f[:8], 2.0)
    np.testing.assert_array_equal(f[8:], 0.0)


def test_batched_features_equal_per_channel_calls():
    rng = np.random.default_rng(1)
    w = rng.normal(size=(3, 8, 481))
    f = featurize_windows(w, FS)
    for i in range(3):
        for c in range(8):
            assert f[i, c] == pytest.approx(rms(w[i, c]), abs=1e-12)
            assert f[i, 8 + c] == median_power_frequency(w[i, c], FS)
