"""Scenario configuration: defaults, TOML loading and validation."""

from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SCENARIOS = ("brown-flinn", "level-set", "conjecture-sweep", "slit-extremal", "reflection-check", "hayman-wu")

DEFAULTS = {
    "seed": 20160503,
    "tolerances": {
        "curve_length": 1e-7,
        "roundtrip": 1e-11,
        "corrector": 1e-10,
        "equality": 1e-6,
    },
    "brown-flinn": {
        "polygons": 1000,
        "points": 12,
        "per_edge": 128,
    },
    "level-set": {
        "x0": 2.0,
        "heights": [2.0, 1.0, 0.5, 0.25, 0.1, 0.05],
    },
    "conjecture-sweep": {
        "alphas": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
        "members": 20,
    },
    "slit-extremal": {
        "intervals": [[-1.0, 1.0], [0.0, 1.0], [-2.0, 3.0]],
        "perturbations": [0.05, 0.2, 0.5],
    },
    "reflection-check": {
        "members": [[2.0, 0.5], [2.0, 1.0], [-1.5, 0.3], [3.0, 2.0]],
        "samples": 2000,
        "pairs": 100,
    },
    "hayman-wu": {
        "automorphisms": 10,
        "resolution": 200,
        "omega_resolution": 120,
    },
}

# the key inside each scenario table that --instances overrides
INSTANCE_KEYS = {
    "brown-flinn": "polygons",
    "conjecture-sweep": "members",
    "hayman-wu": "automorphisms",
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        where = f"{path}{k}"
        if k not in base:
            raise ConfigError(f"unknown key '{where}'")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"'{where}' must be a table")
            out[k] = _merge(base[k], v, where + ".")
        else:
            out[k] = _coerce(base[k], v, where)
    return out


def _coerce(default, v, where):
    if isinstance(default, bool) or isinstance(v, bool):
        raise ConfigError(f"'{where}' has an unsupported boolean value")
    if isinstance(default, int):
        if not isinstance(v, int):
            raise ConfigError(f"'{where}' must be an integer")
        return v
    if isinstance(default, float):
        if not isinstance(v, (int, float)):
            raise ConfigError(f"'{where}' must be a number")
        return float(v)
    if isinstance(default, list):
        if not isinstance(v, list):
            raise ConfigError(f"'{where}' must be a list")
        return v
    return v


@dataclass
class ScenarioConfig:
    seed: int
    tolerances: dict
    params: dict = field(default_factory=dict)

    def scenario(self, name: str) -> dict:
        return self.params[name]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "tolerances": self.tolerances, **self.params}

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def _validate(cfg: dict) -> None:
    seed = cfg["seed"]
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    for k, v in cfg["tolerances"].items():
        if not v > 0:
            raise ConfigError(f"tolerance '{k}' must be positive")
    bf = cfg["brown-flinn"]
    if bf["polygons"] < 1:
        raise ConfigError("brown-flinn.polygons must be at least 1")
    if bf["points"] < 3:
        raise ConfigError("brown-flinn.points must be at least 3")
    ls = cfg["level-set"]
    if abs(ls["x0"]) <= 1:
        raise ConfigError("level-set.x0 must lie outside [-1, 1]")
    if any(h <= 0 for h in ls["heights"]):
        raise ConfigError("level-set.heights must be positive")
    cs = cfg["conjecture-sweep"]
    if not cs["alphas"] or any(not 0 < a < 1 for a in cs["alphas"]):
        raise ConfigError("conjecture-sweep.alphas must lie in (0, 1)")
    if cs["members"] < 1:
        raise ConfigError("conjecture-sweep.members must be at least 1")
    for pair in cfg["slit-extremal"]["intervals"]:
        if len(pair) != 2 or not pair[0] < pair[1]:
            raise ConfigError(f"slit-extremal interval {pair} needs a < b")
    for k in cfg["slit-extremal"]["perturbations"]:
        if not 0 < k < 1:
            raise ConfigError("slit-extremal.perturbations must lie in (0, 1)")
    for pair in cfg["reflection-check"]["members"]:
        if len(pair) != 2 or abs(pair[0]) <= 1 or pair[1] <= 0:
            raise ConfigError(f"reflection-check member {pair} needs |x0| > 1 and h > 0")
    if cfg["hayman-wu"]["automorphisms"] < 0:
        raise ConfigError("hayman-wu.automorphisms must be nonnegative")


def load_config(path=None, seed: int | None = None, instances: int | None = None) -> ScenarioConfig:
    """Defaults, overlaid by the TOML file at ``path``, then by command-line overrides."""
    over = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                over = tomllib.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"malformed config: {e}") from e
    cfg = _merge(DEFAULTS, over)
    if seed is not None:
        cfg["seed"] = seed
    if instances is not None:
        if instances < 1:
            raise ConfigError("--instances must be at least 1")
        for name, key in INSTANCE_KEYS.items():
            cfg[name][key] = instances
    _validate(cfg)
    params = {k: v for k, v in cfg.items() if k in SCENARIOS}
    return ScenarioConfig(cfg["seed"], cfg["tolerances"], params)
