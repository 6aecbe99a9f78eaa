"""Declarative scenario configurations and the in-repo presets.

Configs are JSON objects with a ``kind``, kind-specific ``params``, a
``grid`` spec, and optional ``normalize``/``seed``/``label`` keys.
Physical configs use SI values with explicit unit suffixes in the key names
(mass_kg, sigma_m, ...); a config may instead set ``"dimensionless": true``
and use bare keys, which is how the natural-unit figure presets are
written.  Unknown keys anywhere are rejected, and validation reports every
violated constraint at once.
"""

import copy
import json

from .errors import ConfigError

KINDS = ("backflow", "superposition", "gaussian-freefall-position",
         "gaussian-freefall-momentum", "sample")

_TOP_KEYS = {"kind", "dimensionless", "params", "grid", "normalize", "seed",
             "label"}
_GRID_KEYS = {"min", "max", "count", "spacing"}

# parameter keys per kind: bare names; SI configs append the unit suffix
_PARAM_SUFFIXES = {
    "hbar": "_js",
    "mass": "_kg",
    "sigma": "_m",
    "g": "_m_per_s2",
    "x0": "_m",
    "v0": "_m_per_s",
    "detector_x": "_m",
    "detector_p": "_kg_m_per_s",
    "alpha": "_kg_m_per_s",
    "center": "_m",
    "width": "_m",
    "wave_number": "_per_m",
}

_KIND_PARAMS = {
    "backflow": {"required": set(), "optional": {"alpha", "mass", "hbar",
                                                 "rb87", "table", "bracket"}},
    "superposition": {"required": {"hbar", "mass", "packets", "detector_x"},
                      "optional": set()},
    "gaussian-freefall-position": {
        "required": {"hbar", "mass", "sigma", "detector_x"},
        "optional": {"g", "x0", "v0"}},
    "gaussian-freefall-momentum": {
        "required": {"hbar", "mass", "sigma", "g", "detector_p"},
        "optional": {"v0"}},
    "sample": {"required": {"hbar", "mass", "sigma", "g", "detector_p",
                            "trials_per_time"},
               "optional": {"v0", "delta_a"}},
}

_PACKET_KEYS = {"center", "wave_number", "width"}
_UNSUFFIXED = {"rb87", "table", "bracket", "packets", "trials_per_time",
               "delta_a"}


def _suffixed(key, dimensionless):
    if dimensionless or key in _UNSUFFIXED:
        return key
    return key + _PARAM_SUFFIXES.get(key, "")


def validate_config(cfg):
    """Return a normalized copy (bare parameter keys) or raise ConfigError
    listing every violation."""
    problems = []
    if not isinstance(cfg, dict):
        raise ConfigError(["config must be a JSON object"])
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        problems.append(f"unknown top-level keys: {sorted(unknown)}")
    kind = cfg.get("kind")
    if kind not in KINDS:
        problems.append(f"kind must be one of {KINDS}, got {kind!r}")
        raise ConfigError(problems)
    dimensionless = bool(cfg.get("dimensionless", False))

    spec = _KIND_PARAMS[kind]
    params_in = cfg.get("params", {})
    if not isinstance(params_in, dict):
        problems.append("params must be an object")
        params_in = {}
    expected = {_suffixed(k, dimensionless): k
                for k in spec["required"] | spec["optional"]}
    params = {}
    for key, value in params_in.items():
        if key in expected:
            params[expected[key]] = value
        else:
            problems.append(f"unknown parameter key {key!r} for kind {kind!r}"
                            + ("" if dimensionless else
                               " (SI configs need unit-suffixed keys)"))
    missing = spec["required"] - set(params) - ({"rb87"} if params.get("rb87")
                                                else set())
    if kind == "backflow":
        missing = set()
        if params.get("rb87") and ("alpha" in params or "mass" in params):
            problems.append("backflow: rb87 and an explicit frame are exclusive")
        if not dimensionless and not params.get("rb87") \
                and not {"alpha", "mass", "hbar"} <= set(params):
            problems.append("backflow SI config needs rb87:true or all of "
                            "alpha/mass/hbar")
    for name in sorted(missing):
        problems.append(f"missing required parameter "
                        f"{_suffixed(name, dimensionless)!r}")

    for name in ("hbar", "mass", "sigma", "width", "alpha"):
        if name in params and not (isinstance(params[name], (int, float))
                                   and params[name] > 0):
            problems.append(f"{_suffixed(name, dimensionless)} must be > 0")
    if "g" in params and (not isinstance(params["g"], (int, float))
                          or params["g"] < 0):
        problems.append(f"{_suffixed('g', dimensionless)} must be >= 0")
    if "trials_per_time" in params and (not isinstance(params["trials_per_time"], int)
                                        or params["trials_per_time"] < 1):
        problems.append("trials_per_time must be a positive integer")

    if kind == "superposition":
        packets = params.get("packets")
        if not (isinstance(packets, list) and len(packets) == 2):
            problems.append("superposition needs exactly 2 packets")
        else:
            norm_packets = []
            for i, pk in enumerate(packets):
                if not isinstance(pk, dict):
                    problems.append(f"packet {i} must be an object")
                    continue
                want = {_suffixed(k, dimensionless): k for k in _PACKET_KEYS}
                got = {}
                for key, value in pk.items():
                    if key in want:
                        got[want[key]] = value
                    else:
                        problems.append(f"packet {i}: unknown key {key!r}")
                for k in sorted(_PACKET_KEYS - set(got)):
                    problems.append(f"packet {i}: missing "
                                    f"{_suffixed(k, dimensionless)!r}")
                if "width" in got and not (isinstance(got["width"], (int, float))
                                           and got["width"] > 0):
                    problems.append(f"packet {i}: width must be > 0")
                norm_packets.append(got)
            params["packets"] = norm_packets

    grid = cfg.get("grid")
    if kind != "sample" or grid is not None:
        if not isinstance(grid, dict):
            problems.append("grid spec required: "
                            "{min, max, count, spacing}")
            grid = {}
        unknown_g = set(grid) - _GRID_KEYS
        if unknown_g:
            problems.append(f"unknown grid keys: {sorted(unknown_g)}")
        gmin, gmax = grid.get("min"), grid.get("max")
        count = grid.get("count")
        spacing = grid.get("spacing", "uniform")
        if not isinstance(gmin, (int, float)) or not isinstance(gmax, (int, float)) \
                or not gmin < gmax:
            problems.append("grid needs numeric min < max")
        if not isinstance(count, int) or count < 2:
            problems.append("grid count must be an integer >= 2")
        if spacing not in ("uniform", "log"):
            problems.append("grid spacing must be 'uniform' or 'log'")
        elif spacing == "log" and isinstance(gmin, (int, float)) and gmin <= 0:
            problems.append("log-spaced grid needs min > 0")

    seed = cfg.get("seed")
    if seed is not None and (not isinstance(seed, int) or seed < 0
                             or seed >= 2**64):
        problems.append("seed must be an unsigned 64-bit integer")

    if problems:
        raise ConfigError(problems)

    out = {
        "kind": kind,
        "dimensionless": dimensionless,
        "params": params,
        "grid": dict(grid) if isinstance(grid, dict) and grid else None,
        "normalize": bool(cfg.get("normalize", False)),
        "seed": seed if seed is not None else 0,
        "label": cfg.get("label", kind.replace("gaussian-freefall-", "")),
    }
    if out["grid"] is not None:
        out["grid"].setdefault("spacing", "uniform")
    return out


def to_config_dict(normalized):
    """Serialize a normalized config back to its declarative form; the
    result re-validates to an equivalent object (round-trip invariant)."""
    dimensionless = normalized["dimensionless"]
    params = {}
    for key, value in normalized["params"].items():
        if key == "packets":
            params["packets"] = [
                {_suffixed(k, dimensionless): v for k, v in pk.items()}
                for pk in value]
        else:
            params[_suffixed(key, dimensionless)] = value
    out = {
        "kind": normalized["kind"],
        "dimensionless": dimensionless,
        "params": params,
        "normalize": normalized["normalize"],
        "seed": normalized["seed"],
        "label": normalized["label"],
    }
    if normalized["grid"] is not None:
        out["grid"] = dict(normalized["grid"])
    return out


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    return validate_config(raw)


# In-repo presets.  The figure presets use natural units (hbar = m = 1).
# The two-packet figure parameters quote widths of 0.05 in the
# exp(-x^2/sigma^2) amplitude convention; the packet evaluators take the
# density std, so the presets pass width = 0.025.
_FIG2_COMMON = {
    "kind": "superposition",
    "dimensionless": True,
    "normalize": True,
    "params": {
        "hbar": 1.0,
        "mass": 1.0,
        "detector_x": 0.0,
    },
}

PRESETS = {
    "fig1": {
        "kind": "backflow",
        "dimensionless": True,
        "params": {},
        "grid": {"min": 1e-4, "max": 50.0, "count": 1200, "spacing": "log"},
        "normalize": True,
        "label": "fig1",
    },
    "rb87-table": {
        "kind": "backflow",
        "params": {"rb87": True, "table": True},
        "grid": {"min": 1e-4, "max": 50.0, "count": 1200, "spacing": "log"},
        "normalize": True,
        "label": "fig1",
    },
    "fig2-left": {
        **copy.deepcopy(_FIG2_COMMON),
        "label": "fig2_left",
        "grid": {"min": 0.002, "max": 0.009, "count": 1401,
                 "spacing": "uniform"},
    },
    "fig2-right": {
        **copy.deepcopy(_FIG2_COMMON),
        "label": "fig2_right",
        "grid": {"min": 0.002, "max": 0.12, "count": 2361,
                 "spacing": "uniform"},
    },
    "momentum-demo": {
        "kind": "gaussian-freefall-momentum",
        "dimensionless": True,
        "params": {"hbar": 1.0, "mass": 1.0, "sigma": 0.5, "g": 1.0,
                   "detector_p": 2.0},
        "grid": {"min": 0.0, "max": 6.0, "count": 601, "spacing": "uniform"},
        "normalize": True,
        "label": "momentum",
    },
    "position-demo": {
        "kind": "gaussian-freefall-position",
        "dimensionless": True,
        "params": {"hbar": 1.0, "mass": 1.0, "sigma": 0.4, "g": 9.8,
                   "detector_x": 1.0},
        "grid": {"min": 0.0, "max": 3.0, "count": 601, "spacing": "uniform"},
        "normalize": True,
        "label": "position",
    },
    "sample-demo": {
        "kind": "sample",
        "dimensionless": True,
        "params": {"hbar": 1.0, "mass": 1.0, "sigma": 0.5, "g": 1.0,
                   "detector_p": 2.0, "trials_per_time": 20000},
        "grid": {"min": 0.25, "max": 4.0, "count": 16, "spacing": "uniform"},
        "seed": 1234,
        "label": "sample",
    },
}

PRESETS["fig2-left"]["params"]["packets"] = [
    {"center": -1.0, "wave_number": 200.0, "width": 0.025},
    {"center": -0.5, "wave_number": 100.0, "width": 0.025},
]
PRESETS["fig2-right"]["params"]["packets"] = [
    {"center": -1.0, "wave_number": 5.0, "width": 0.025},
    {"center": -0.5, "wave_number": 1.5, "width": 0.025},
]


def load_preset(name):
    if name not in PRESETS:
        raise ConfigError([f"unknown preset {name!r}; available: "
                           f"{sorted(PRESETS)}"])
    return validate_config(copy.deepcopy(PRESETS[name]))
