"""Parametric sEMG session simulator.

Each trial's raw signal is ``gain * profile[c] * carrier_c(t) + noise`` per
channel, where the carrier is unit-variance band-limited (20-450 Hz) Gaussian
noise and the profile is the class activation pattern over the 8 electrodes.
A double gesture's profile is ``(1 - a) * mean(component profiles) + a *
distortion`` where ``a`` is ``double_interaction`` and the distortion is a
seeded per-class random pattern.

The block layout is Calibration(56), then HP(28)/SP(8) three times.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .labels import (
    ACTIVE_DIRECTIONS,
    ACTIVE_MODIFIERS,
    REST,
    Direction,
    GestureLabel,
    LabelKind,
    Modifier,
    label_kind,
)
from .signal import featurize_windows, window_array, window_samples

BLOCK_LAYOUT = (("Calibration", 56), ("HP", 28), ("SP", 8), ("HP", 28), ("SP", 8), ("HP", 28), ("SP", 8))
N_FEATURES = 16

# Activation per electrode (dorsal midline first, continuing toward the thumb).
# Wrist directions recruit large forearm muscles; finger modifiers are weaker.
DEFAULT_PROFILES = {
    "Up,NoMod": (0.30, 0.40, 1.00, 1.20, 0.80, 0.30, 0.20, 0.20),
    "Down,NoMod": (0.80, 0.30, 0.20, 0.20, 0.30, 0.60, 1.10, 1.00),
    "Left,NoMod": (0.20, 0.20, 0.30, 0.60, 1.20, 1.30, 0.70, 0.30),
    "Right,NoMod": (1.30, 1.10, 0.60, 0.30, 0.20, 0.20, 0.30, 0.70),
    "NoDir,Pinch": (0.20, 0.30, 0.30, 0.30, 0.60, 0.70, 0.30, 0.20),
    "NoDir,Thumb": (0.30, 0.60, 0.70, 0.40, 0.20, 0.20, 0.20, 0.20),
    "NoDir,NoMod": (0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05),
}


class ConfigError(ValueError):
    """Invalid simulator configuration; ``fields`` lists the offending names."""

    def __init__(self, problems: dict[str, str]):
        self.fields = sorted(problems)
        super().__init__("; ".join(f"{k}: {v}" for k, v in sorted(problems.items())))


@dataclass(frozen=True)
class SimulatorConfig:
    sample_rate: float = 1926.0
    channels: int = 8
    profiles: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_PROFILES.items()})
    noise_std: float = 0.05
    double_interaction: float = 0.35
    seed: int = 0
    window_ms: float = 250.0
    step_ms: float = 50.0
    calibration_s: float = 0.35
    held_s: float = 0.75
    pulsed_s: float = 0.5
    rest_s: float = 0.35
    band_hz: tuple = (20.0, 450.0)
    trial_gain_sd: float = 0.10
    trial_profile_sd: float = 0.08
    subject_jitter_sd: float = 0.15
    distortion_sd: float = 0.8
    keep_raw: bool = False

    def validate(self) -> "SimulatorConfig":
        bad: dict[str, str] = {}
        if not self.sample_rate > 0:
            bad["sample_rate"] = "must be > 0"
        if self.channels < 1:
            bad["channels"] = "must be >= 1"
        if not self.noise_std > 0:
            bad["noise_std"] = "must be > 0"
        if not 0.0 <= self.double_interaction <= 1.0:
            bad["double_interaction"] = "must lie in [0, 1]"
        if not (self.window_ms >= self.step_ms > 0):
            bad["window_ms"] = "need window_ms >= step_ms > 0"
        expected = {str(GestureLabel(d, Modifier.NoMod)) for d in ACTIVE_DIRECTIONS}
        expected |= {str(GestureLabel(Direction.NoDir, m)) for m in ACTIVE_MODIFIERS} | {str(REST)}
        missing = expected - set(self.profiles)
        if missing:
            bad["profiles"] = f"missing classes {sorted(missing)}"
        else:
            for name in expected:
                p = np.asarray(self.profiles[name], dtype=float)
                if p.shape != (self.channels,) or np.any(p < 0) or not np.all(np.isfinite(p)):
                    bad["profiles"] = f"{name}: need {self.channels} non-negative finite values"
        width = window_samples(self.window_ms, self.sample_rate)
        for name in ("calibration_s", "held_s", "pulsed_s", "rest_s"):
            if window_samples(1000.0 * getattr(self, name), self.sample_rate) < width:
                bad[name] = "shorter than one analysis window"
        lo, hi = self.band_hz
        if not 0 <= lo < hi <= self.sample_rate / 2:
            bad["band_hz"] = "need 0 <= low < high <= Nyquist"
        for name in ("trial_gain_sd", "trial_profile_sd", "subject_jitter_sd", "distortion_sd"):
            if getattr(self, name) < 0:
                bad[name] = "must be >= 0"
        if bad:
            raise ConfigError(bad)
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["band_hz"] = list(self.band_hz)
        d["profiles"] = {k: [float(x) for x in v] for k, v in self.profiles.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimulatorConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError({k: "unknown field" for k in unknown})
        d = dict(d)
        if "band_hz" in d:
            d["band_hz"] = tuple(d["band_hz"])
        return cls(**d)


@dataclass
class Trial:
    label: GestureLabel
    features: np.ndarray  # n_windows x 16
    window_labels: np.ndarray  # class index per window
    raw: Optional[np.ndarray] = None  # n_windows x channels x W

    @property
    def n_windows(self) -> int:
        return self.features.shape[0]


@dataclass
class Block:
    block_type: str
    trials: list


@dataclass
class Session:
    subject_id: str
    blocks: list
    config: SimulatorConfig

    @property
    def seed(self) -> int:
        return self.config.seed

    def block_counts(self) -> list[tuple[str, int]]:
        return [(b.block_type, len(b.trials)) for b in self.blocks]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Session):
            return NotImplemented
        if self.subject_id != other.subject_id or self.config != other.config:
            return False
        if self.block_counts() != other.block_counts():
            return False
        for b1, b2 in zip(self.blocks, other.blocks):
            for t1, t2 in zip(b1.trials, b2.trials):
                if t1.label != t2.label or not np.array_equal(t1.features, t2.features):
                    return False
                if not np.array_equal(t1.window_labels, t2.window_labels):
                    return False
                if (t1.raw is None) != (t2.raw is None):
                    return False
                if t1.raw is not None and not np.array_equal(t1.raw, t2.raw):
                    return False
        return True


def derive_seed(master: int, *keys: int) -> int:
    """Stable 63-bit child seed from a master seed and integer keys."""
    ss = np.random.SeedSequence([int(master) & (2**64 - 1), *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _double_labels() -> list[GestureLabel]:
    return [GestureLabel(d, m) for d in ACTIVE_DIRECTIONS for m in ACTIVE_MODIFIERS]


def _hp_block_plan() -> list[tuple[GestureLabel, str]]:
    plan = []
    plan += [(lab, "pulsed") for lab in _double_labels()]  # held direction, pulsed modifier
    plan += [(lab, "pulsed") for lab in _double_labels()]  # held modifier, pulsed direction
    plan += [(GestureLabel(d, Modifier.NoMod), "held") for d in ACTIVE_DIRECTIONS]
    plan += [(GestureLabel(Direction.NoDir, m), "held") for m in ACTIVE_MODIFIERS]
    plan += [(GestureLabel(d, Modifier.NoMod), "pulsed") for d in ACTIVE_DIRECTIONS]
    plan += [(GestureLabel(Direction.NoDir, m), "pulsed") for m in ACTIVE_MODIFIERS]
    return plan


class _SubjectModel:
    """Per-subject activation profiles, after inter-subject jitter."""

    def __init__(self, config: SimulatorConfig, rng: np.random.Generator):
        self.config = config
        self.profiles: dict[int, np.ndarray] = {}
        for name, base in sorted(config.profiles.items()):
            lab = GestureLabel.parse(name)
            jitter = np.exp(rng.normal(0.0, config.subject_jitter_sd, size=config.channels))
            self.profiles[lab.index] = np.asarray(base, dtype=float) * jitter
        a = config.double_interaction
        for lab in _double_labels():
            comp = 0.5 * (
                self.profiles[GestureLabel(lab.direction, Modifier.NoMod).index]
                + self.profiles[GestureLabel(Direction.NoDir, lab.modifier).index]
            )
            distortion = comp * np.exp(rng.normal(0.0, config.distortion_sd, size=config.channels))
            distortion *= comp.sum() / distortion.sum()
            self.profiles[lab.index] = (1.0 - a) * comp + a * distortion

    def expected_profile(self, label: GestureLabel) -> np.ndarray:
        return self.profiles[label.index]


class _SignalSynth:
    def __init__(self, config: SimulatorConfig):
        self.config = config
        self.width = window_samples(config.window_ms, config.sample_rate)

    def carrier(self, rng: np.random.Generator, n: int) -> np.ndarray:
        c = self.config
        white = rng.standard_normal((c.channels, n))
        spec = np.fft.rfft(white, axis=1)
        freqs = np.fft.rfftfreq(n, d=1.0 / c.sample_rate)
        keep = (freqs >= c.band_hz[0]) & (freqs <= c.band_hz[1])
        spec[:, ~keep] = 0.0
        out = np.fft.irfft(spec, n=n, axis=1)
        # white noise of unit variance keeps ~keep.mean() of its power after masking
        return out / np.sqrt(max(keep.sum(), 1) / len(freqs))

    def segment(self, rng: np.random.Generator, profile: np.ndarray, seconds: float) -> np.ndarray:
        c = self.config
        n = window_samples(1000.0 * seconds, c.sample_rate)
        gain = np.exp(rng.normal(0.0, c.trial_gain_sd))
        prof = profile * np.exp(rng.normal(0.0, c.trial_profile_sd, size=c.channels))
        t = np.arange(n) / c.sample_rate
        drift = 1.0 + 0.1 * np.sin(2 * np.pi * rng.uniform(0.5, 2.0) * t + rng.uniform(0, 2 * np.pi))
        sig = (gain * prof)[:, None] * drift[None, :] * self.carrier(rng, n)
        return sig + rng.normal(0.0, c.noise_std, size=sig.shape)

    def windows(self, sig: np.ndarray) -> np.ndarray:
        return window_array(sig, self.config.sample_rate, self.config.window_ms, self.config.step_ms)


def _make_trial(synth, subject, rng, label, seconds, with_rest, keep_raw) -> Trial:
    parts, labs = [], []
    if with_rest:
        w = synth.windows(synth.segment(rng, subject.expected_profile(REST), synth.config.rest_s))
        parts.append(w)
        labs.append(np.full(len(w), REST.index))
    w = synth.windows(synth.segment(rng, subject.expected_profile(label), seconds))
    parts.append(w)
    labs.append(np.full(len(w), label.index))
    raw = np.concatenate(parts)
    feats = featurize_windows(raw, synth.config.sample_rate)
    return Trial(label, feats, np.concatenate(labs).astype(np.int64), raw if keep_raw else None)


def generate_session(config: SimulatorConfig, subject_id: str = "S00") -> Session:
    """Simulate one subject; fully determined by ``config.seed``."""
    config.validate()
    rng = np.random.default_rng(derive_seed(config.seed, 0))
    subject = _SubjectModel(config, rng)
    synth = _SignalSynth(config)
    singles = [GestureLabel(d, Modifier.NoMod) for d in ACTIVE_DIRECTIONS]
    singles += [GestureLabel(Direction.NoDir, m) for m in ACTIVE_MODIFIERS] + [REST]
    durations = {"held": config.held_s, "pulsed": config.pulsed_s}

    blocks = []
    for b, (btype, n_trials) in enumerate(BLOCK_LAYOUT):
        brng = np.random.default_rng(derive_seed(config.seed, 1, b))
        if btype == "Calibration":
            plan = [(lab, None) for lab in singles for _ in range(8)]
        elif btype == "HP":
            plan = _hp_block_plan()
        else:
            plan = [(lab, "pulsed") for lab in _double_labels()]
        assert len(plan) == n_trials
        plan = [plan[i] for i in brng.permutation(len(plan))]
        trials = []
        for lab, mode in plan:
            if mode is None:
                trials.append(_make_trial(synth, subject, brng, lab, config.calibration_s, False, config.keep_raw))
            else:
                trials.append(_make_trial(synth, subject, brng, lab, durations[mode], True, config.keep_raw))
        blocks.append(Block(btype, trials))
    return Session(subject_id, blocks, config)


def subject_config(config: SimulatorConfig, index: int) -> SimulatorConfig:
    return dataclasses.replace(config, seed=derive_seed(config.seed, 1000, index))


def generate_cohort(config: SimulatorConfig, n_subjects: int = 11) -> list[Session]:
    if n_subjects < 1:
        raise ValueError("n_subjects must be >= 1")
    config.validate()
    return [generate_session(subject_config(config, i), f"S{i:02d}") for i in range(n_subjects)]


def expected_features(config: SimulatorConfig, label: GestureLabel, n_windows: int = 400) -> np.ndarray:
    """Monte-Carlo mean feature vector of ``label`` for the subject seeded by ``config``."""
    rng = np.random.default_rng(derive_seed(config.seed, 0))
    subject = _SubjectModel(config, rng)
    synth = _SignalSynth(config)
    mrng = np.random.default_rng(derive_seed(config.seed, 2, label.index))
    feats = []
    while sum(len(f) for f in feats) < n_windows:
        w = synth.windows(synth.segment(mrng, subject.expected_profile(label), config.held_s))
        feats.append(featurize_windows(w, config.sample_rate))
    return np.concatenate(feats)[:n_windows].mean(axis=0)


__all__ = [
    "BLOCK_LAYOUT",
    "Block",
    "ConfigError",
    "LabelKind",
    "Session",
    "SimulatorConfig",
    "Trial",
    "derive_seed",
    "expected_features",
    "generate_cohort",
    "generate_session",
    "label_kind",
]
