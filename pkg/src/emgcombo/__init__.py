"""Simulated EMG combination-gesture recognition with synthetic training data.

Numba-compiled kernels are used when numba imports; set
``EMGCOMBO_DISABLE_NUMBA=1`` to force the pure-numpy path.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .labels import Direction, GestureLabel, Modifier, REST, enumerate_classes  # noqa: E402
from .simgen import SimulatorConfig, generate_cohort, generate_session  # noqa: E402
from .dataset import ExampleSet, split_session, load_session, save_session  # noqa: E402
from .architectures import predict, predict_batch, train_model  # noqa: E402
from .synthesis import SubsetStrategy, synthesize  # noqa: E402
from .evaluation import Condition, balanced_accuracy, run_condition  # noqa: E402

__all__ = [
    "Condition",
    "Direction",
    "ExampleSet",
    "GestureLabel",
    "Modifier",
    "REST",
    "SimulatorConfig",
    "SubsetStrategy",
    "balanced_accuracy",
    "enumerate_classes",
    "generate_cohort",
    "generate_session",
    "load_session",
    "predict",
    "predict_batch",
    "run_condition",
    "save_session",
    "split_session",
    "synthesize",
    "train_model",
]
