"""Run configuration: TOML schema, unit parsing and application presets.

Physical quantities are strings with a unit suffix (``"580 ns"``,
``"0.25 dB/km"``). Numbers are parsed as decimals and scaled exactly, so
``"580 ns"``, ``"0.58 us"`` and ``"5.8e-7 s"`` give the same float.
"""

from __future__ import annotations

import copy
import re
import sys
from decimal import Decimal, InvalidOperation

from lctc.errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

UNITS = {
    "time": {"ns": "1e-9", "us": "1e-6", "µs": "1e-6", "ms": "1e-3", "s": "1", "min": "60"},
    "length": {"m": "1", "km": "1e3"},
    "frequency": {"Hz": "1", "kHz": "1e3", "MHz": "1e6", "1/s": "1"},
    "attenuation": {"dB/km": "1"},
    "velocity": {"m/s": "1", "km/s": "1e3"},
}
CANONICAL = {"time": "s", "length": "m", "frequency": "Hz", "attenuation": "dB/km", "velocity": "m/s"}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)\s*$")

# section -> key -> (kind, default). None defaults mean "not set".
SCHEMA = {
    "game": {
        "distribution": ("str", "uniform"),  # uniform | bernoulli | correlated | explicit
        "p": ("float", 0.5),
        "probs": ("floats", None),  # p00, p01, p10, p11
        "beta1": ("float", 0.0),
        "beta2": ("float", 0.0),
        "utility": ("floats", None),  # u[o][x][y] flattened, 8 entries
    },
    "noise": {
        "eps_s": ("float", 0.04),
        "eps_meas": ("float", 0.002),
        "eps": ("float", None),  # overrides the combined value
    },
    "hardware": {
        "tau_p": ("time", 240e-9),
        "tau_swap": ("time", 100e-9),
        "tau_rot": ("time", 100e-9),
        "tau_meas": ("time", 870e-9),
        "tau_res": ("time", 1e-6),
        "tau_mem": ("time", 7.9),
        "n_a": ("int", 250),
        "p_e": ("float", 0.70),
    },
    "link": {
        "length": ("length", 50e3),
        "alpha_att": ("attenuation", 0.25),
        "v_g": ("velocity", 2.1e8),
        "eta_det": ("float", 0.9),
        "eta_misc": ("float", 0.8),
        "transmission": ("float", None),  # None: derived from attenuation
        "dark_rate": ("frequency", 10.0),
        "n_ch": ("int", 1),
    },
    "certification": {
        "alpha": ("float", 0.05),
        "t_env": ("time", 0.1),
        "t_loc": ("time", 2e-6),
        "t_comm": ("time", None),
        "u_min": ("float", None),
        "u_max": ("float", None),
        "cap": ("int", 1_000_000_000),
    },
    "simulation": {
        "mode": ("str", "rounds"),  # rounds | pipeline
        "strategy": ("str", "quantum"),  # quantum | classical
        "seed": ("int", 0),
        "rounds": ("int", 1_000_000),
        "duration": ("time", 10.0),
        "trigger": ("str", "unlimited"),
        "trigger_rate": ("frequency", None),
        "p_ent": ("float", None),
    },
    "sweep": {
        "param": ("str", "noise.eps"),
        "start": ("float", 0.0),
        "stop": ("float", 0.29),
        "steps": ("int", 30),
        "scale": ("str", "linear"),
        "grid": ("int", 51),
        "t_envs": ("times", [0.01, 0.1, 1.0]),
        "alphas": ("floats", [0.05, 1e-3]),
    },
    "multiparty": {
        "distribution": ("str", "uniform"),  # uniform | bernoulli | explicit
        "p": ("float", 0.5),
        "probs": ("floats", None),
        "beta": ("float", 0.0),
        "eps_ghz": ("float", 0.05),
        "eps_meas": ("float", 0.01),
        "grid": ("int", 50),
        "rounds": ("int", 0),
    },
    "cqed": {
        "c_in": ("float", 20.0),
        "target": ("float", 0.002),
        "eta_det": ("float", 0.9),
        "detuning_ratio": ("float", 100.0),
        "t_life": ("time", 1.6e-3),
        "sigma_t_gamma": ("float", 0.34),
        "k_window": ("float", 10.0),
        "p_e_src": ("float", 1.0),
        "tpi_purity": ("float", 0.98),
        "c_min": ("float", 1.0),
        "c_max": ("float", 100.0),
        "steps": ("int", 25),
    },
}

# Table I ranges, log-midpoints; open-ended ranges use their stated bound.
PRESETS = {
    "hft": {
        "game": {"distribution": "uniform", "beta1": 0.0, "beta2": 0.0},
        "certification": {"t_loc": 10**-5.5, "t_comm": 100e-6, "t_env": 10**0.5},
    },
    "grid": {
        "game": {"distribution": "uniform", "beta1": 0.0, "beta2": 0.0},
        "certification": {"t_loc": 10**-2.5, "t_comm": 10**-0.5, "t_env": 60.0},
    },
    "loadbalance": {
        "game": {"distribution": "uniform", "beta1": 0.2, "beta2": 0.1},
        "certification": {"t_loc": 10**-5.5, "t_comm": 10**-3.5, "t_env": 10**-0.5},
    },
}


def parse_quantity(text, kind: str) -> float:
    if isinstance(text, bool) or not isinstance(text, str):
        raise ConfigError(f"expected a string with a {kind} unit, got {text!r}")
    match = _QUANTITY.match(text)
    if not match:
        raise ConfigError(f"cannot parse {kind} quantity {text!r}")
    number, unit = match.groups()
    scales = UNITS[kind]
    if unit not in scales:
        raise ConfigError(f"unknown {kind} unit {unit!r} in {text!r}; use one of {sorted(scales)}")
    try:
        return float(Decimal(number) * Decimal(scales[unit]))
    except InvalidOperation as exc:  # pragma: no cover - regex already filters
        raise ConfigError(f"bad number in {text!r}") from exc


def format_quantity(value: float, kind: str) -> str:
    return f"{value:.12g} {CANONICAL[kind]}"


def _coerce(section: str, key: str, kind: str, value):
    where = f"{section}.{key}"
    try:
        if kind in UNITS:
            return parse_quantity(value, kind)
        if kind == "times":
            return [parse_quantity(v, "time") for v in _as_list(value, where)]
        if kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"must be a number, got {value!r}")
            return float(value)
        if kind == "int":
            if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
                raise ConfigError(f"must be an integer, got {value!r}")
            return int(value)
        if kind == "str":
            if not isinstance(value, str):
                raise ConfigError(f"must be a string, got {value!r}")
            return value
        if kind == "floats":
            return [_coerce(section, key, "float", v) for v in _flatten(_as_list(value, where))]
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise AssertionError(kind)


def _as_list(value, where):
    if not isinstance(value, list):
        raise ConfigError(f"must be a list, got {value!r}")
    return value


def _flatten(items):
    for v in items:
        if isinstance(v, list):
            yield from _flatten(v)
        else:
            yield v


def defaults() -> dict:
    return {s: {k: copy.deepcopy(d) for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}


def resolve(raw: dict, preset: str | None = None) -> dict:
    """Merge defaults, an optional preset and raw TOML data into SI values."""
    cfg = defaults()
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        for section, values in PRESETS[preset].items():
            cfg[section].update(values)
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a table")
    for section, values in raw.items():
        if section == "preset":
            continue
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in values.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            cfg[section][key] = _coerce(section, key, SCHEMA[section][key][0], value)
    return cfg


def load(path: str | None, preset: str | None = None) -> dict:
    raw = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path!r}: {exc}") from None
        file_preset = raw.get("preset")
        if file_preset is not None:
            if preset is None:
                preset = file_preset
            elif preset != file_preset:
                raise ConfigError(f"--preset {preset!r} conflicts with file preset {file_preset!r}")
    return resolve(raw, preset)


def echo(cfg: dict, sections) -> dict:
    """Config subset in input form (unit strings), suitable for re-parsing."""
    out = {}
    for section in sections:
        block = {}
        for key, value in cfg[section].items():
            if value is None:
                continue
            kind = SCHEMA[section][key][0]
            if kind in UNITS:
                block[key] = format_quantity(value, kind)
            elif kind == "times":
                block[key] = [format_quantity(v, "time") for v in value]
            else:
                block[key] = value
        out[section] = block
    return out
