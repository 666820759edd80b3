"""Labeled example sets, the train/special/test split and session files.

A session on disk is two files sharing a stem: ``<stem>.session.json``
(header: schema version, simulator config, seed, class order, block and
trial structure) and ``<stem>.features.csv`` (one row per window). When raw
windows were kept they go to ``<stem>.raw.npz``.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .labels import GestureLabel, LabelKind, class_names, is_double, label_kind, to_indices
from .simgen import BLOCK_LAYOUT, N_FEATURES, Block, ConfigError, Session, SimulatorConfig, Trial

SCHEMA_VERSION = 1
FORMAT_NAME = "emgcombo-session"
CSV_COLUMNS = ["subject_id", "block_index", "block_type", "trial_index", "label"] + [f"f{i}" for i in range(N_FEATURES)]


class Provenance(enum.IntEnum):
    Real = 0
    SyntheticDouble = 1
    AugmentedSingle = 2


class SessionFileError(Exception):
    """Base class for session persistence failures."""


class SessionVersionError(SessionFileError):
    pass


class CorruptSessionError(SessionFileError):
    pass


class MissingFieldError(SessionFileError):
    pass


class StructureError(ValueError):
    """Session does not have the canonical block layout."""


@dataclass(frozen=True)
class LabeledExample:
    features: np.ndarray
    label: GestureLabel
    provenance: Provenance
    subject_id: str
    block_tag: str


@dataclass
class ExampleSet:
    """Column-oriented collection of labeled feature vectors."""

    X: np.ndarray
    y: np.ndarray
    provenance: np.ndarray
    block_tag: np.ndarray
    subject_id: str = ""

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).reshape(-1, N_FEATURES)
        self.y = np.asarray(self.y, dtype=np.int64)
        self.provenance = np.asarray(self.provenance, dtype=np.int64)
        self.block_tag = np.asarray(self.block_tag, dtype=object)
        n = len(self.X)
        if not (len(self.y) == len(self.provenance) == len(self.block_tag) == n):
            raise ValueError("column lengths differ")
        dbl = is_double(self.y) if n else np.zeros(0, bool)
        if np.any(dbl[self.provenance == Provenance.AugmentedSingle]):
            raise ValueError("augmented examples must not carry double labels")
        if np.any(~dbl[self.provenance == Provenance.SyntheticDouble]):
            raise ValueError("synthetic doubles must carry double labels")

    def __len__(self) -> int:
        return len(self.y)

    def __iter__(self) -> Iterator[LabeledExample]:
        for i in range(len(self)):
            yield LabeledExample(
                self.X[i].copy(),
                GestureLabel.from_index(int(self.y[i])),
                Provenance(int(self.provenance[i])),
                self.subject_id,
                str(self.block_tag[i]),
            )

    @classmethod
    def empty(cls, subject_id: str = "") -> "ExampleSet":
        return cls(np.zeros((0, N_FEATURES)), [], [], [], subject_id)

    @classmethod
    def from_examples(cls, examples) -> "ExampleSet":
        ex = list(examples)
        if not ex:
            return cls.empty()
        return cls(
            np.stack([e.features for e in ex]),
            [e.label.index for e in ex],
            [int(e.provenance) for e in ex],
            [e.block_tag for e in ex],
            ex[0].subject_id,
        )

    def subset(self, mask) -> "ExampleSet":
        return ExampleSet(self.X[mask], self.y[mask], self.provenance[mask], self.block_tag[mask], self.subject_id)

    def of_class(self, cls_index: int) -> np.ndarray:
        return self.X[self.y == cls_index]

    def concat(self, *others: "ExampleSet") -> "ExampleSet":
        parts = [self, *others]
        return ExampleSet(
            np.concatenate([p.X for p in parts]),
            np.concatenate([p.y for p in parts]),
            np.concatenate([p.provenance for p in parts]),
            np.concatenate([p.block_tag for p in parts]),
            self.subject_id,
        )

    def kinds(self) -> set:
        return {label_kind(GestureLabel.from_index(int(c))) for c in np.unique(self.y)}


@dataclass
class SplitSpec:
    train: ExampleSet
    special: ExampleSet
    test: ExampleSet
    test_blocks: tuple = field(default=())


def block_tags(session: Session) -> list[str]:
    counters: dict[str, int] = {}
    tags = []
    for b in session.blocks:
        counters[b.block_type] = counters.get(b.block_type, 0) + 1
        tags.append(b.block_type if b.block_type == "Calibration" else f"{b.block_type}{counters[b.block_type]}")
    return tags


def check_structure(session: Session) -> None:
    got = session.block_counts()
    if [t for t, _ in got] != [t for t, _ in BLOCK_LAYOUT]:
        raise StructureError(f"block sequence {[t for t, _ in got]} is not the canonical layout")


def block_examples(session: Session, block_index: int, tag: str) -> ExampleSet:
    trials = session.blocks[block_index].trials
    if not trials:
        return ExampleSet.empty(session.subject_id)
    X = np.concatenate([t.features for t in trials])
    y = np.concatenate([t.window_labels for t in trials])
    return ExampleSet(X, y, np.zeros(len(y), np.int64), np.full(len(y), tag, dtype=object), session.subject_id)


def split_session(session: Session) -> SplitSpec:
    """Calibration singles / HP1+HP2+SP1+SP2 / HP3+SP3."""
    check_structure(session)
    tags = block_tags(session)
    parts = {tag: block_examples(session, i, tag) for i, tag in enumerate(tags)}
    calib = parts["Calibration"]
    train = calib.subset(~is_double(calib.y))  # accidental combination gestures are excluded
    special = parts["HP1"].concat(parts["HP2"], parts["SP1"], parts["SP2"])
    test = parts["HP3"].concat(parts["SP3"])
    return SplitSpec(train, special, test, ("HP3", "SP3"))


# ------------------------------------------------------------------ persistence

def _stem(path) -> Path:
    p = Path(path)
    name = p.name
    for suffix in (".session.json", ".features.csv", ".raw.npz"):
        if name.endswith(suffix):
            return p.with_name(name[: -len(suffix)])
    return p


def session_paths(path) -> tuple[Path, Path, Path]:
    s = _stem(path)
    return (s.with_name(s.name + ".session.json"), s.with_name(s.name + ".features.csv"), s.with_name(s.name + ".raw.npz"))


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return repr(float(x))


def features_csv_bytes(session: Session) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    names = class_names()
    for bi, b in enumerate(session.blocks):
        for ti, t in enumerate(b.trials):
            for row, lab in zip(t.features, t.window_labels):
                w.writerow([session.subject_id, bi, b.block_type, ti, names[lab]] + [_fmt(v) for v in row])
    return buf.getvalue().encode("utf-8")


def save_session(session: Session, path) -> Path:
    """Write the session; returns the header path."""
    header_path, csv_path, raw_path = session_paths(path)
    body = features_csv_bytes(session)
    header = {
        "format": FORMAT_NAME,
        "schema_version": SCHEMA_VERSION,
        "subject_id": session.subject_id,
        "seed": session.seed,
        "config": session.config.to_dict(),
        "class_order": class_names(),
        "feature_layout": [f"rms_ch{c}" for c in range(8)] + [f"mpf_ch{c}" for c in range(8)],
        "features_file": csv_path.name,
        "features_sha256": hashlib.sha256(body).hexdigest(),
        "n_rows": sum(t.n_windows for b in session.blocks for t in b.trials),
        "has_raw": any(t.raw is not None for b in session.blocks for t in b.trials),
        "blocks": [
            {
                "index": bi,
                "block_type": b.block_type,
                "trials": [{"index": ti, "label": str(t.label), "n_windows": t.n_windows} for ti, t in enumerate(b.trials)],
            }
            for bi, b in enumerate(session.blocks)
        ],
    }
    if header["has_raw"]:
        arrays = {f"b{bi}_t{ti}": t.raw for bi, b in enumerate(session.blocks) for ti, t in enumerate(b.trials)}
        buf = io.BytesIO()
        np.savez_compressed(buf, **arrays)
        _atomic_write_bytes(raw_path, buf.getvalue())
    _atomic_write_bytes(csv_path, body)
    _atomic_write_bytes(header_path, (json.dumps(header, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return header_path


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise MissingFieldError(f"{where}: missing field {key!r}")
    return d[key]


def load_session(path) -> Session:
    header_path, csv_path, raw_path = session_paths(path)
    try:
        text = header_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    try:
        header = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptSessionError(f"{header_path}: unreadable header ({exc})") from exc
    if not isinstance(header, dict):
        raise CorruptSessionError(f"{header_path}: header is not an object")
    if header.get("format", FORMAT_NAME) != FORMAT_NAME:
        raise CorruptSessionError(f"{header_path}: not a session file")
    version = _require(header, "schema_version", str(header_path))
    if version != SCHEMA_VERSION:
        raise SessionVersionError(f"{header_path}: schema version {version}, reader supports {SCHEMA_VERSION}")
    for key in ("subject_id", "config", "blocks", "class_order", "n_rows", "features_sha256"):
        _require(header, key, str(header_path))
    if header["class_order"] != class_names():
        raise CorruptSessionError("class order differs from this reader's canonical order")
    try:
        config = SimulatorConfig.from_dict(header["config"])
    except (ConfigError, TypeError) as exc:
        raise CorruptSessionError(f"{header_path}: bad config ({exc})") from exc

    body = csv_path.read_bytes()
    if hashlib.sha256(body).hexdigest() != header["features_sha256"]:
        raise CorruptSessionError(f"{csv_path}: checksum mismatch (truncated or edited)")
    rows = list(csv.reader(io.StringIO(body.decode("utf-8"))))
    if not rows or rows[0] != CSV_COLUMNS:
        raise CorruptSessionError(f"{csv_path}: bad header row")
    rows = rows[1:]
    if len(rows) != header["n_rows"]:
        raise CorruptSessionError(f"{csv_path}: expected {header['n_rows']} rows, found {len(rows)}")

    raw = None
    if header.get("has_raw"):
        with np.load(raw_path) as z:
            raw = {k: z[k] for k in z.files}

    blocks = []
    pos = 0
    for bdesc in header["blocks"]:
        bi = _require(bdesc, "index", "block")
        trials = []
        for tdesc in _require(bdesc, "trials", "block"):
            n = _require(tdesc, "n_windows", "trial")
            chunk = rows[pos : pos + n]
            pos += n
            try:
                feats = np.array([[float(v) for v in r[5:]] for r in chunk], dtype=float).reshape(n, N_FEATURES)
                wl = to_indices([r[4] for r in chunk])
            except (ValueError, IndexError) as exc:
                raise CorruptSessionError(f"{csv_path}: malformed row ({exc})") from exc
            if any(int(r[1]) != bi or int(r[3]) != tdesc["index"] for r in chunk):
                raise CorruptSessionError(f"{csv_path}: rows out of order for block {bi}")
            r_arr = raw[f"b{bi}_t{tdesc['index']}"] if raw is not None else None
            trials.append(Trial(GestureLabel.parse(_require(tdesc, "label", "trial")), feats, wl, r_arr))
        blocks.append(Block(_require(bdesc, "block_type", "block"), trials))
    return Session(header["subject_id"], blocks, config)


def load_sessions(directory) -> list[Session]:
    paths = sorted(Path(directory).glob("*.session.json"))
    return [load_session(p) for p in paths]
