"""YAML run configuration.

Every training, healing, drift, and experiment hyperparameter is a key
here; CLI flags override file values, which override the defaults below.
``python -m drheal.config [env_kind]`` prints a fully-populated default
file to copy and edit.

Top-level sections:

``env``
    kind, params (per-kind parameter overrides), max_steps_per_episode,
    solve_threshold, eval_window, tolerance_ratio.
``dqn`` / ``ppo``
    every field of DqnHyperparams / PpoHyperparams.
``healing``
    every field of HealingConfig (forget_rate, scale_rate,
    max_heal_episodes, dqn_epsilon_start/end/anneal_fraction,
    ppo_entropy_coef, reload_replay, eval_window, use_tolerance,
    eval_every_episodes, reset_outgoing).
``drift``
    intensity, count, seed, ranges ({param: [lo, hi]}).
``experiment``
    seeds, drifts_per_cell, trace_samples, master_seed, workers.
"""

import sys
from dataclasses import asdict, fields

import yaml

from .agents import DqnHyperparams, PpoHyperparams
from .envs import DEFAULT_DRIFT_RANGES, EPISODE_DEFAULTS, KINDS, EnvSpec
from .harness.experiment import default_healing_config
from .healing import HealingConfig


def _hyperparams_dict(hp):
    data = asdict(hp)
    data["hidden"] = list(data["hidden"])  # YAML-native form
    return data


def default_config(env_kind: str = "cartpole") -> dict:
    max_steps, threshold, window, tolerance = EPISODE_DEFAULTS[env_kind]
    return {
        "env": {
            "kind": env_kind,
            "params": {},
            "max_steps_per_episode": max_steps,
            "solve_threshold": threshold,
            "eval_window": window,
            "tolerance_ratio": tolerance,
        },
        "dqn": _hyperparams_dict(DqnHyperparams()),
        "ppo": _hyperparams_dict(PpoHyperparams()),
        "healing": asdict(default_healing_config(env_kind)),
        "drift": {
            "intensity": "moderate",
            "count": 6,
            "seed": 0,
            "ranges": {name: list(bounds) for name, bounds
                       in DEFAULT_DRIFT_RANGES[env_kind].items()},
        },
        "experiment": {
            "seeds": 10,
            "drifts_per_cell": 6,
            "trace_samples": 2000,
            "master_seed": 0,
            "workers": 1,
        },
    }


def _merge(base: dict, override: dict, path=""):
    for key, value in override.items():
        if key not in base:
            raise KeyError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict) \
                and key not in ("params", "ranges"):
            _merge(base[key], value, path + key + ".")
        else:
            base[key] = value
    return base


def load_config(path=None, env_kind=None) -> dict:
    """Defaults for the (possibly file-specified) env kind, overlaid with
    the file's values."""
    data = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    kind = env_kind or data.get("env", {}).get("kind", "cartpole")
    if kind not in KINDS:
        raise ValueError(f"unknown env kind {kind!r}")
    config = default_config(kind)
    _merge(config, data)
    config["env"]["kind"] = kind if env_kind else config["env"]["kind"]
    return config


def build_env_spec(config: dict) -> EnvSpec:
    env = config["env"]
    return EnvSpec.defaults(
        env["kind"], params=env.get("params") or None,
        max_steps_per_episode=env["max_steps_per_episode"],
        solve_threshold=env["solve_threshold"],
        eval_window=env["eval_window"],
        tolerance_ratio=env["tolerance_ratio"])


def _build_dataclass(cls, section: dict):
    names = {f.name for f in fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise KeyError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = dict(section)
    if "hidden" in kwargs:
        kwargs["hidden"] = tuple(kwargs["hidden"])
    return cls(**kwargs)


def build_dqn_hyperparams(config: dict) -> DqnHyperparams:
    return _build_dataclass(DqnHyperparams, config["dqn"])


def build_ppo_hyperparams(config: dict) -> PpoHyperparams:
    return _build_dataclass(PpoHyperparams, config["ppo"])


def build_healing_config(config: dict, **overrides) -> HealingConfig:
    section = dict(config["healing"])
    section.update({k: v for k, v in overrides.items() if v is not None})
    return _build_dataclass(HealingConfig, section)


def drift_ranges(config: dict) -> dict:
    return {name: tuple(bounds)
            for name, bounds in config["drift"]["ranges"].items()}


def dump_default(env_kind: str = "cartpole") -> str:
    return yaml.safe_dump(default_config(env_kind), sort_keys=False)


if __name__ == "__main__":
    kind = sys.argv[1] if len(sys.argv) > 1 else "cartpole"
    sys.stdout.write(dump_default(kind))
