"""Sliding-window segmentation and per-window RMS / median power frequency."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

N_FEATURES_PER_CHANNEL = 2


class SignalTooShortError(ValueError):
    """Signal holds fewer samples than one analysis window."""


@dataclass(frozen=True)
class EmgWindow:
    samples: np.ndarray  # channels x T
    sample_rate: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] < 2:
            raise ValueError("window samples must be channels x T with T >= 2")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]


def window_samples(duration_ms: float, sample_rate: float) -> int:
    """Number of whole samples in ``duration_ms`` (floored)."""
    return int(math.floor(duration_ms * sample_rate / 1000.0 + 1e-9))


def window_starts(n_samples: int, width: int, step: int) -> np.ndarray:
    if n_samples < width:
        return np.empty(0, dtype=np.int64)
    return np.arange(0, n_samples - width + 1, step, dtype=np.int64)


def window_array(signal, sample_rate: float, window_ms: float = 250.0, step_ms: float = 50.0) -> np.ndarray:
    """Stack of complete windows, shape (n_windows, channels, W).

    Raises SignalTooShortError when not even one window fits; ValueError for
    malformed arguments.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError("signal must be channels x N")
    if not sample_rate > 0:
        raise ValueError("sample_rate must be positive")
    if not (window_ms >= step_ms > 0):
        raise ValueError("need window_ms >= step_ms > 0")
    width = window_samples(window_ms, sample_rate)
    step = window_samples(step_ms, sample_rate)
    if width < 2 or step < 1:
        raise ValueError("window or step shorter than one sample at this rate")
    if x.shape[1] < width:
        raise SignalTooShortError(f"signal has {x.shape[1]} samples, window needs {width}")
    starts = window_starts(x.shape[1], width, step)
    view = np.lib.stride_tricks.sliding_window_view(x, width, axis=1)  # C x (N-W+1) x W
    return np.ascontiguousarray(view[:, starts, :].transpose(1, 0, 2))


def sliding_windows(signal, sample_rate: float, window_ms: float = 250.0, step_ms: float = 50.0) -> list[EmgWindow]:
    return [EmgWindow(w, sample_rate) for w in window_array(signal, sample_rate, window_ms, step_ms)]


def rms(channel_samples) -> float:
    x = np.asarray(channel_samples, dtype=float)
    if x.size == 0:
        raise ValueError("rms of empty input")
    return float(np.sqrt(np.mean(x * x)))


def periodogram(x, sample_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided rectangular-window periodogram along the last axis.

    Scaled so that the bins sum to the signal energy ``sum(x**2)``.
    Returns ``(freqs, power)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    spec = np.fft.rfft(x, axis=-1)
    power = (spec.real**2 + spec.imag**2) / n
    if n % 2 == 0:
        power[..., 1:-1] *= 2.0
    else:
        power[..., 1:] *= 2.0
    freqs = np.arange(power.shape[-1]) * (sample_rate / n)
    return freqs, power


def _mpf_from_power(freqs: np.ndarray, power: np.ndarray) -> np.ndarray:
    cum = np.cumsum(power, axis=-1)
    total = cum[..., -1:]
    # first bin whose cumulative power reaches half the total; lowest bin on ties
    idx = np.argmax(cum >= 0.5 * total, axis=-1)
    out = freqs[idx]
    return np.where(total[..., 0] > 0, out, 0.0)


def median_power_frequency(channel_samples, sample_rate: float) -> float:
    x = np.asarray(channel_samples, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a 1-D signal with at least 2 samples")
    freqs, power = periodogram(x, sample_rate)
    return float(_mpf_from_power(freqs, power))


def featurize_windows(windows: np.ndarray, sample_rate: float) -> np.ndarray:
    """Vectorised features for a stack of windows (n, C, T) -> (n, 2C).

    Layout per row: RMS of every channel, then MPF of every channel.
    """
    w = np.asarray(windows, dtype=float)
    if w.ndim != 3 or w.shape[2] < 2:
        raise ValueError("windows must be (n, channels, T>=2)")
    r = np.sqrt(np.mean(w * w, axis=2))
    freqs, power = periodogram(w, sample_rate)
    m = _mpf_from_power(freqs, power)
    return np.concatenate([r, m], axis=1)


def featurize_window(window: EmgWindow) -> np.ndarray:
    return featurize_windows(window.samples[None], window.sample_rate)[0]
