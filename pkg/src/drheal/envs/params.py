"""Environment parameter schemas, specs, and drift sampling.

Each environment kind declares an ordered parameter schema. Drifts are
pairs (base params, shifted params) sampled at a named intensity, where
intensity bounds the displacement as a fraction of each parameter's
half-range: mild <= 25%, moderate <= 50%, severe <= 100%.

Drift files are JSON (format id ``drheal-drifts-v1``)::

    {"format": "drheal-drifts-v1",
     "drifts": [{"kind": "mountaincar",
                 "base": {"force": 0.001, ...},
                 "shifted": {"force": 0.0012, ...},
                 "intensity": "moderate",
                 "seed": 7}, ...]}
"""

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from ..errors import SchemaError

KINDS = ("cartpole", "mountaincar", "acrobot")
INTENSITIES = ("mild", "moderate", "severe")

PARAM_SCHEMAS = {
    "cartpole": ("masspole", "lengthpole", "masscart", "friction"),
    "mountaincar": ("force", "gravity", "goal_velocity"),
    "acrobot": ("link_length_1", "link_com_pos_1", "link_mass_1",
                "link_mass_2"),
}

# Parameters allowed to be exactly zero; everything else must be > 0.
ZERO_OK = frozenset({"goal_velocity", "friction"})

DEFAULT_PARAMS = {
    "cartpole": {"masspole": 0.1, "lengthpole": 0.5, "masscart": 1.0,
                 "friction": 0.0},
    "mountaincar": {"force": 1e-3, "gravity": 2.5e-3, "goal_velocity": 0.0},
    "acrobot": {"link_length_1": 1.0, "link_com_pos_1": 0.5,
                "link_mass_1": 1.0, "link_mass_2": 1.0},
}

# kind -> (max_steps, solve_threshold, eval_window, tolerance_ratio)
EPISODE_DEFAULTS = {
    "cartpole": (200, 195.0, 100, 0.0),
    "mountaincar": (200, -110.0, 100, 0.20),
    "acrobot": (500, -100.0, 100, 0.20),
}

OBS_DIMS = {"cartpole": 4, "mountaincar": 2, "acrobot": 6}
N_ACTIONS = {"cartpole": 2, "mountaincar": 3, "acrobot": 3}

# Shipped drift-sampling ranges. These are editable conventions exposed in
# the config file, not fixed physics; every range contains the default
# parameter value.
DEFAULT_DRIFT_RANGES = {
    "cartpole": {
        "masspole": (0.05, 0.5),
        "lengthpole": (0.25, 1.0),
        "masscart": (0.5, 2.0),
        "friction": (0.0, 0.5),
    },
    "mountaincar": {
        "force": (0.0005, 0.002),
        "gravity": (0.001, 0.005),
        "goal_velocity": (0.0, 0.02),
    },
    "acrobot": {
        "link_length_1": (0.5, 1.5),
        "link_com_pos_1": (0.25, 0.75),
        "link_mass_1": (0.5, 1.5),
        "link_mass_2": (0.5, 1.5),
    },
}

_INTENSITY_BANDS = {
    "mild": (0.0, 0.25),
    "moderate": (0.25, 0.50),
    "severe": (0.50, 1.0),
}


def _check_kind(kind):
    if kind not in KINDS:
        raise SchemaError(f"unknown environment kind {kind!r}; "
                          f"expected one of {KINDS}")


@dataclass
class EnvParams:
    """Ordered name -> value parameter map for one environment kind."""

    entries: dict

    @classmethod
    def defaults(cls, kind, **overrides):
        _check_kind(kind)
        values = dict(DEFAULT_PARAMS[kind])
        for name, value in overrides.items():
            if name not in values:
                raise SchemaError(f"{name!r} is not a {kind} parameter")
            values[name] = float(value)
        return cls(values)

    def validate(self, kind):
        _check_kind(kind)
        schema = PARAM_SCHEMAS[kind]
        if tuple(self.entries.keys()) != schema:
            if set(self.entries.keys()) == set(schema):
                # Accept any insertion order but store canonically.
                self.entries = {name: self.entries[name] for name in schema}
            else:
                raise SchemaError(
                    f"{kind} parameters must be exactly {schema}, "
                    f"got {tuple(self.entries.keys())}")
        for name, value in self.entries.items():
            value = float(value)
            if not math.isfinite(value):
                raise SchemaError(f"parameter {name} is not finite")
            if value < 0.0 or (value == 0.0 and name not in ZERO_OK):
                raise SchemaError(
                    f"parameter {name} must be strictly positive, got {value}")
            self.entries[name] = value
        return self

    def __getitem__(self, name):
        return self.entries[name]

    def as_dict(self):
        return dict(self.entries)

    def __eq__(self, other):
        if not isinstance(other, EnvParams):
            return NotImplemented
        return self.entries == other.entries

    def copy(self):
        return EnvParams(dict(self.entries))


@dataclass
class EnvSpec:
    """Full description of a (possibly drifted) environment instance."""

    kind: str
    params: EnvParams
    max_steps_per_episode: int
    solve_threshold: float
    eval_window: int
    tolerance_ratio: float

    def __post_init__(self):
        _check_kind(self.kind)
        self.params.validate(self.kind)
        if self.max_steps_per_episode < 1:
            raise SchemaError("max_steps_per_episode must be >= 1")
        if self.eval_window < 1:
            raise SchemaError("eval_window must be >= 1")
        if not (0.0 <= self.tolerance_ratio < 1.0):
            raise SchemaError("tolerance_ratio must be in [0, 1)")
        if not math.isfinite(self.solve_threshold):
            raise SchemaError("solve_threshold must be finite")

    @classmethod
    def defaults(cls, kind, params=None, **overrides):
        """Spec with the kind's standard episode settings.

        `params` may be an EnvParams, a plain dict of overrides, or None.
        Keyword overrides replace the episode settings (max_steps_per_episode,
        solve_threshold, eval_window, tolerance_ratio).
        """
        _check_kind(kind)
        if params is None:
            params = EnvParams.defaults(kind)
        elif isinstance(params, dict):
            params = EnvParams.defaults(kind, **params)
        else:
            params = params.copy()
        max_steps, threshold, window, tolerance = EPISODE_DEFAULTS[kind]
        fields = {
            "max_steps_per_episode": max_steps,
            "solve_threshold": threshold,
            "eval_window": window,
            "tolerance_ratio": tolerance,
        }
        for name, value in overrides.items():
            if name not in fields:
                raise SchemaError(f"unknown EnvSpec override {name!r}")
            fields[name] = value
        return cls(kind=kind, params=params, **fields)

    @property
    def obs_dim(self):
        return OBS_DIMS[self.kind]

    @property
    def n_actions(self):
        return N_ACTIONS[self.kind]

    def effective_threshold(self, use_tolerance):
        """Solve bar, optionally relaxed by the tolerance ratio.

        The relaxed bar is threshold - tolerance*|threshold| so that a
        negative threshold moves down (e.g. -110 -> -132 at 20%).
        """
        if not use_tolerance or self.tolerance_ratio == 0.0:
            return self.solve_threshold
        return self.solve_threshold - self.tolerance_ratio * abs(self.solve_threshold)

    def with_params(self, params):
        return EnvSpec(
            kind=self.kind,
            params=params.copy() if isinstance(params, EnvParams)
            else EnvParams(dict(params)),
            max_steps_per_episode=self.max_steps_per_episode,
            solve_threshold=self.solve_threshold,
            eval_window=self.eval_window,
            tolerance_ratio=self.tolerance_ratio,
        )

    def to_json_dict(self):
        return {
            "kind": self.kind,
            "params": self.params.as_dict(),
            "max_steps_per_episode": self.max_steps_per_episode,
            "solve_threshold": self.solve_threshold,
            "eval_window": self.eval_window,
            "tolerance_ratio": self.tolerance_ratio,
        }

    @classmethod
    def from_json_dict(cls, data):
        return cls(
            kind=data["kind"],
            params=EnvParams(dict(data["params"])),
            max_steps_per_episode=int(data["max_steps_per_episode"]),
            solve_threshold=float(data["solve_threshold"]),
            eval_window=int(data["eval_window"]),
            tolerance_ratio=float(data["tolerance_ratio"]),
        )

    def spec_hash(self):
        payload = json.dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class DriftSpec:
    """A base -> shifted parameter change of a named intensity."""

    kind: str
    base: EnvParams
    shifted: EnvParams
    intensity: str
    seed: int

    def __post_init__(self):
        _check_kind(self.kind)
        if self.intensity not in INTENSITIES:
            raise SchemaError(f"unknown intensity {self.intensity!r}")
        self.base.validate(self.kind)
        self.shifted.validate(self.kind)
        if self.base == self.shifted:
            raise SchemaError("drift must change at least one parameter")

    @property
    def drift_id(self):
        payload = json.dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:10]

    def to_json_dict(self):
        return {
            "kind": self.kind,
            "base": self.base.as_dict(),
            "shifted": self.shifted.as_dict(),
            "intensity": self.intensity,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, data):
        return cls(
            kind=data["kind"],
            base=EnvParams(dict(data["base"])),
            shifted=EnvParams(dict(data["shifted"])),
            intensity=data["intensity"],
            seed=int(data["seed"]),
        )

    def drifted_spec(self, template=None):
        """EnvSpec for the shifted environment (episode settings from
        `template` or the kind's defaults)."""
        template = template or EnvSpec.defaults(self.kind)
        return template.with_params(self.shifted)


def sample_drifts(kind, ranges, intensity, count, seed, base=None):
    """Draw `count` reproducible DriftSpecs at the given intensity.

    Every parameter is displaced from its base value by a magnitude drawn
    uniformly from the intensity band (as a fraction of half-range) in a
    random direction, then clamped into its range.
    """
    _check_kind(kind)
    if intensity not in _INTENSITY_BANDS:
        raise SchemaError(f"unknown intensity {intensity!r}")
    if count < 1:
        raise SchemaError("count must be >= 1")
    base = base.copy() if base is not None else EnvParams.defaults(kind)
    base.validate(kind)

    schema = PARAM_SCHEMAS[kind]
    if set(ranges.keys()) != set(schema):
        raise SchemaError(f"ranges must cover exactly {schema}")
    for name in schema:
        lo, hi = ranges[name]
        if not (lo < hi):
            raise SchemaError(f"range for {name} is empty or degenerate")
        if not (lo <= base[name] <= hi):
            raise SchemaError(f"range for {name} does not contain the base value")
        if lo < 0.0 or (lo == 0.0 and name not in ZERO_OK):
            raise SchemaError(f"range for {name} allows non-positive values")

    band_lo, band_hi = _INTENSITY_BANDS[intensity]
    rng = np.random.Generator(np.random.PCG64(seed))
    drifts = []
    for _ in range(count):
        for _attempt in range(100):
            shifted = {}
            for name in schema:
                lo, hi = ranges[name]
                half = (hi - lo) / 2.0
                frac = rng.uniform(band_lo, band_hi)
                direction = 1.0 if rng.random() < 0.5 else -1.0
                value = base[name] + direction * frac * half
                shifted[name] = min(max(value, lo), hi)
            if EnvParams(shifted) != base:
                break
        else:
            raise SchemaError(
                "could not sample a drift distinct from the base parameters")
        drift_seed = int(rng.integers(0, 2**31 - 1))
        drifts.append(DriftSpec(kind=kind, base=base.copy(),
                                shifted=EnvParams(shifted),
                                intensity=intensity, seed=drift_seed))
    return drifts


DRIFT_FORMAT = "drheal-drifts-v1"


def save_drifts(path, drifts):
    payload = {
        "format": DRIFT_FORMAT,
        "drifts": [d.to_json_dict() for d in drifts],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_drifts(path):
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != DRIFT_FORMAT:
        raise SchemaError(
            f"unsupported drift file format: {payload.get('format')!r}")
    return [DriftSpec.from_json_dict(d) for d in payload["drifts"]]
