"""Run configuration: one YAML file holding every knob with its default."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .augmentation import DEFAULT_METHODS, AugmentMethod
from .classifiers import ALGORITHMS, ForestParams, LogRParams, MlpParams
from .architectures import ARCHITECTURES
from .evaluation import FRACTIONS
from .simgen import ConfigError, SimulatorConfig


@dataclass(frozen=True)
class GridConfig:
    n_subjects: int = 11
    n_seeds: int = 3
    archs: tuple = ARCHITECTURES
    algos: tuple = ALGORITHMS
    fractions: tuple = FRACTIONS
    augment_methods: tuple = DEFAULT_METHODS
    heatmap_fraction: float = 0.005


@dataclass(frozen=True)
class RunConfig:
    simulator: SimulatorConfig = field(default_factory=SimulatorConfig)
    logr: LogRParams = field(default_factory=LogRParams)
    mlp: MlpParams = field(default_factory=MlpParams)
    rf: ForestParams = field(default_factory=ForestParams)
    grid: GridConfig = field(default_factory=GridConfig)
    out: str = "runs"
    seed: int = 0
    jobs: int = 1

    @property
    def params(self) -> dict:
        return {"LogR": self.logr, "MLP": self.mlp, "RF": self.rf}

    def validate(self) -> "RunConfig":
        self.simulator.validate()
        bad = {}
        g = self.grid
        if g.n_subjects < 1:
            bad["grid.n_subjects"] = "must be >= 1"
        if g.n_seeds < 1:
            bad["grid.n_seeds"] = "must be >= 1"
        if set(g.archs) - set(ARCHITECTURES):
            bad["grid.archs"] = f"choose from {list(ARCHITECTURES)}"
        if set(g.algos) - set(ALGORITHMS):
            bad["grid.algos"] = f"choose from {list(ALGORITHMS)}"
        if any(not 0 < f <= 1 for f in g.fractions):
            bad["grid.fractions"] = "each fraction must lie in (0, 1]"
        if not 0 < g.heatmap_fraction <= 1:
            bad["grid.heatmap_fraction"] = "must lie in (0, 1]"
        for m in g.augment_methods:
            try:
                AugmentMethod.parse(m)
            except ValueError as exc:
                bad["grid.augment_methods"] = str(exc)
        if self.jobs < 1:
            bad["jobs"] = "must be >= 1"
        if not 0 <= self.seed < 2**64:
            bad["seed"] = "must be an unsigned 64-bit integer"
        if self.mlp.activation not in ("relu", "leaky_relu"):
            bad["mlp.activation"] = "relu or leaky_relu"
        for name, p in (("logr", self.logr), ("mlp", self.mlp)):
            if not p.lr > 0 or p.n_iter < 1:
                bad[f"{name}.lr"] = "lr must be > 0 and n_iter >= 1"
        if self.rf.n_trees < 1:
            bad["rf.n_trees"] = "must be >= 1"
        if bad:
            raise ConfigError(bad)
        return self

    def to_dict(self) -> dict:
        def plain(obj):
            d = dataclasses.asdict(obj)
            return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

        return {
            "simulator": self.simulator.to_dict(),
            "logr": plain(self.logr),
            "mlp": plain(self.mlp),
            "rf": plain(self.rf),
            "grid": plain(self.grid),
            "out": self.out,
            "seed": self.seed,
            "jobs": self.jobs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError({"<root>": "config must be a mapping"})
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError({k: "unknown field" for k in sorted(unknown)})
        kw = {}
        if "simulator" in d:
            kw["simulator"] = SimulatorConfig.from_dict(d["simulator"] or {})
        for key, typ in (("logr", LogRParams), ("mlp", MlpParams), ("rf", ForestParams), ("grid", GridConfig)):
            if key in d:
                kw[key] = _build(typ, d[key] or {}, key)
        for key in ("out", "seed", "jobs"):
            if key in d:
                kw[key] = d[key]
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError({"<root>": str(exc)}) from exc


def _build(typ, d: dict, prefix: str):
    names = {f.name: f for f in dataclasses.fields(typ)}
    unknown = set(d) - set(names)
    if unknown:
        raise ConfigError({f"{prefix}.{k}": "unknown field" for k in sorted(unknown)})
    vals = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
    return typ(**vals)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def load_config(path) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError({"<file>": f"not valid YAML: {exc}"}) from exc
    return RunConfig.from_dict(data or {}).validate()
