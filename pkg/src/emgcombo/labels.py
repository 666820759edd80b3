"""Structured direction x modifier gesture labels.

Class indices are direction-major: ``index = 3 * direction + modifier``
with directions ordered Up, Down, Left, Right, NoDir and modifiers
Pinch, Thumb, NoMod. Rest, ``(NoDir, NoMod)``, is therefore index 14.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np


class Direction(enum.IntEnum):
    Up = 0
    Down = 1
    Left = 2
    Right = 3
    NoDir = 4


class Modifier(enum.IntEnum):
    Pinch = 0
    Thumb = 1
    NoMod = 2


class LabelKind(enum.Enum):
    SingleDirection = "single_direction"
    SingleModifier = "single_modifier"
    Double = "double"
    Rest = "rest"


N_DIRECTIONS = len(Direction)
N_MODIFIERS = len(Modifier)
N_CLASSES = N_DIRECTIONS * N_MODIFIERS
ACTIVE_DIRECTIONS = tuple(d for d in Direction if d is not Direction.NoDir)
ACTIVE_MODIFIERS = tuple(m for m in Modifier if m is not Modifier.NoMod)


class LabelError(ValueError):
    """Label string or label kind is not what an operation requires."""


@dataclass(frozen=True, order=True)
class GestureLabel:
    direction: Direction
    modifier: Modifier

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "modifier", Modifier(self.modifier))

    @property
    def index(self) -> int:
        return int(self.direction) * N_MODIFIERS + int(self.modifier)

    @property
    def kind(self) -> LabelKind:
        return label_kind(self)

    def __str__(self) -> str:
        return f"{self.direction.name},{self.modifier.name}"

    @classmethod
    def parse(cls, text: str) -> "GestureLabel":
        try:
            d, m = (part.strip() for part in text.split(","))
            return cls(Direction[d], Modifier[m])
        except (ValueError, KeyError) as exc:
            raise LabelError(f"not a gesture label: {text!r}") from exc

    @classmethod
    def from_index(cls, index: int) -> "GestureLabel":
        if not 0 <= int(index) < N_CLASSES:
            raise LabelError(f"class index {index} outside 0..{N_CLASSES - 1}")
        return enumerate_classes()[int(index)]


REST = GestureLabel(Direction.NoDir, Modifier.NoMod)


@lru_cache(maxsize=None)
def enumerate_classes() -> tuple[GestureLabel, ...]:
    """All 15 labels in canonical (direction-major) order."""
    return tuple(GestureLabel(d, m) for d in Direction for m in Modifier)


def label_kind(label: GestureLabel) -> LabelKind:
    has_dir = label.direction is not Direction.NoDir
    has_mod = label.modifier is not Modifier.NoMod
    if has_dir and has_mod:
        return LabelKind.Double
    if has_dir:
        return LabelKind.SingleDirection
    if has_mod:
        return LabelKind.SingleModifier
    return LabelKind.Rest


def class_names() -> list[str]:
    return [str(c) for c in enumerate_classes()]


def indices_of_kind(*kinds: LabelKind) -> np.ndarray:
    return np.array([c.index for c in enumerate_classes() if label_kind(c) in kinds], dtype=np.int64)


SINGLE_CLASSES = indices_of_kind(LabelKind.SingleDirection, LabelKind.SingleModifier, LabelKind.Rest)
DOUBLE_CLASSES = indices_of_kind(LabelKind.Double)

_KIND_CODE = np.array(
    [
        {LabelKind.SingleDirection: 0, LabelKind.SingleModifier: 1, LabelKind.Double: 2, LabelKind.Rest: 3}[
            label_kind(c)
        ]
        for c in enumerate_classes()
    ],
    dtype=np.int64,
)


def direction_of(idx) -> np.ndarray:
    """Direction index for class index array ``idx``."""
    return np.asarray(idx) // N_MODIFIERS


def modifier_of(idx) -> np.ndarray:
    return np.asarray(idx) % N_MODIFIERS


def compose(direction, modifier) -> np.ndarray:
    return np.asarray(direction) * N_MODIFIERS + np.asarray(modifier)


def is_double(idx) -> np.ndarray:
    return _KIND_CODE[np.asarray(idx)] == 2


def to_indices(labels: Iterable[GestureLabel] | Sequence[int] | np.ndarray) -> np.ndarray:
    """Accept GestureLabels, label strings or raw indices; return int64 class indices."""
    if isinstance(labels, np.ndarray) and labels.dtype.kind in "iu":
        out = labels.astype(np.int64)
    else:
        out = []
        for lab in labels:
            if isinstance(lab, GestureLabel):
                out.append(lab.index)
            elif isinstance(lab, str):
                out.append(GestureLabel.parse(lab).index)
            else:
                out.append(int(lab))
        out = np.asarray(out, dtype=np.int64)
    if out.size and (out.min() < 0 or out.max() >= N_CLASSES):
        raise LabelError("class index out of range")
    return out
