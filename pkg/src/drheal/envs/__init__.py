"""Parameterized classic-control environments with drift injection."""

from .classic import Environment, StepResult, make_env
from .evaluate import evaluate, is_solved
from .params import (
    DEFAULT_DRIFT_RANGES,
    DEFAULT_PARAMS,
    EPISODE_DEFAULTS,
    INTENSITIES,
    KINDS,
    N_ACTIONS,
    OBS_DIMS,
    PARAM_SCHEMAS,
    DriftSpec,
    EnvParams,
    EnvSpec,
    load_drifts,
    sample_drifts,
    save_drifts,
)

__all__ = [
    "DEFAULT_DRIFT_RANGES",
    "DEFAULT_PARAMS",
    "EPISODE_DEFAULTS",
    "INTENSITIES",
    "KINDS",
    "N_ACTIONS",
    "OBS_DIMS",
    "PARAM_SCHEMAS",
    "DriftSpec",
    "EnvParams",
    "EnvSpec",
    "Environment",
    "StepResult",
    "evaluate",
    "is_solved",
    "load_drifts",
    "make_env",
    "sample_drifts",
    "save_drifts",
]
