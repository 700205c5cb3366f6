"""Strict JSON experiment configurations.

One file describes one experiment: a grid block, a constants block, an
action block, a command-specific run block, and an optional output block.
The schema is closed: unknown keys anywhere are errors, so typos never run
silently with defaults.
"""

import json

from .action import (
    GaugedAction,
    PhysicalConstants,
    QuarticAction,
    SineAction,
    StandardAction,
    VectorPotentialAction2D,
)
from .grid import SpatialGrid, make_grid
from .potentials import (
    bilinear_field,
    cosine_well_potential,
    harmonic_potential,
    linear_phase,
    quadratic_phase,
    quartic_potential,
    sine_field,
    zero_field,
    zero_phase,
    zero_potential,
)
from .propagator import magic_time_step

__all__ = ["ConfigError", "load_config", "build_grid", "build_constants", "build_action"]


class ConfigError(Exception):
    """Invalid or malformed experiment configuration."""


_NUMBER = (int, float)


def _require_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"block '{where}' must be an object")
    return value


def _check(block: dict, where: str, required: dict, optional: dict) -> dict:
    """Validate key set and value types; fill defaults for optional keys."""
    allowed = set(required) | set(optional)
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in block '{where}'")
    out = {}
    for key, types in required.items():
        if key not in block:
            raise ConfigError(f"missing required key '{key}' in block '{where}'")
        out[key] = _typed(block[key], types, f"{where}.{key}")
    for key, (types, default) in optional.items():
        if key in block:
            out[key] = _typed(block[key], types, f"{where}.{key}")
        else:
            out[key] = default
    return out


def _typed(value, types, where: str):
    if types is None:  # validated by the caller
        return value
    if types is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"'{where}' must be a boolean")
        return value
    if types is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{where}' must be an integer")
        return value
    if types is float:
        if isinstance(value, bool) or not isinstance(value, _NUMBER):
            raise ConfigError(f"'{where}' must be a number")
        return float(value)
    if types is str:
        if not isinstance(value, str):
            raise ConfigError(f"'{where}' must be a string")
        return value
    if types is list:
        if not isinstance(value, list):
            raise ConfigError(f"'{where}' must be a list")
        return value
    if types is dict:
        return _require_mapping(value, where)
    raise AssertionError(f"unhandled schema type {types}")


_POTENTIAL_PARAMS = {
    "zero": {},
    "harmonic": {"omega": (float, 1.0)},
    "quartic": {"strength": (float, 1.0)},
    "cosine_well": {"depth": (float, 1.0), "wavenumber": (float, 1.0)},
}

_PHASE_PARAMS = {
    "zero": {},
    "linear": {"slope": (float, 1.0)},
    "quadratic": {"curvature": (float, 1.0)},
}

_FIELD_PARAMS = {
    "zero": {},
    "bilinear": {"strength": (float, 1.0)},
    "sine": {"strength": (float, 1.0)},
}


def _named_block(block, where: str, registry: dict) -> dict:
    block = _require_mapping(block, where)
    name = block.get("name")
    if name not in registry:
        raise ConfigError(f"'{where}.name' must be one of {sorted(registry)}, got {name!r}")
    schema = dict(registry[name])
    checked = _check(block, where, {"name": str}, schema)
    return checked


def _validate_action(block, where: str) -> dict:
    block = _require_mapping(block, where)
    kind = block.get("kind")
    if kind == "standard":
        return _check(block, where, {"kind": str, "potential": dict}, {}) | {
            "potential": _named_block(block["potential"], f"{where}.potential", _POTENTIAL_PARAMS)
        }
    if kind == "gauged":
        out = _check(block, where, {"kind": str, "potential": dict, "phase": dict}, {})
        out["potential"] = _named_block(block["potential"], f"{where}.potential", _POTENTIAL_PARAMS)
        out["phase"] = _named_block(block["phase"], f"{where}.phase", _PHASE_PARAMS)
        return out
    if kind == "quartic":
        out = _check(block, where, {"kind": str, "potential": dict, "epsilon": float}, {})
        out["potential"] = _named_block(block["potential"], f"{where}.potential", _POTENTIAL_PARAMS)
        return out
    if kind == "sine":
        return _check(block, where, {"kind": str, "strength": float}, {})
    if kind == "vector_potential_2d":
        out = _check(block, where, {"kind": str, "potential": dict, "a1": dict, "a2": dict}, {})
        out["potential"] = _named_block(block["potential"], f"{where}.potential", _POTENTIAL_PARAMS)
        out["a1"] = _named_block(block["a1"], f"{where}.a1", _FIELD_PARAMS)
        out["a2"] = _named_block(block["a2"], f"{where}.a2", _FIELD_PARAMS)
        return out
    raise ConfigError(
        f"'{where}.kind' must be one of ['standard', 'gauged', 'quartic', 'sine', "
        f"'vector_potential_2d'], got {kind!r}"
    )


def _validate_constants(block) -> dict:
    block = _require_mapping(block, "constants")
    out = _check(block, "constants", {"mass": float, "hbar": float}, {"tau": (None, None)})
    if out["mass"] <= 0:
        raise ConfigError(f"'constants.mass' must be positive, got {out['mass']}")
    if out["hbar"] <= 0:
        raise ConfigError(f"'constants.hbar' must be positive, got {out['hbar']}")
    tau = block.get("tau")
    if tau is None:
        raise ConfigError("missing required key 'tau' in block 'constants'")
    if isinstance(tau, str):
        if tau != "magic":
            raise ConfigError(f"'constants.tau' must be a positive number or 'magic', got {tau!r}")
        out["tau"] = "magic"
    elif isinstance(tau, bool) or not isinstance(tau, _NUMBER):
        raise ConfigError("'constants.tau' must be a positive number or 'magic'")
    else:
        if tau <= 0:
            raise ConfigError(f"'constants.tau' must be positive, got {tau}")
        out["tau"] = float(tau)
    return out


_RUN_SCHEMAS = {
    "check-action": (
        {"domain": list, "expect": str},
        {
            "n_samples": (int, 1024),
            "tolerance": (float, 1e-8),
        },
    ),
    "evolve": (
        {"x0": float, "p0": float, "n_steps": int},
        {
            "alpha": (float, 1.0),
            "amplitude_mode": (str, "analytic"),
            "tracking_tolerance": (float, None),
            "norm_tolerance": (float, None),
        },
    ),
    "classical": (
        {"x0": float, "n_steps": int},
        {
            "x_minus1": (float, None),
            "p0": (float, None),
            "expect_status": (str, "complete"),
        },
    ),
    "sweep": (
        {"x0": float, "p0": float, "n_steps": int, "hbar_list": list},
        {"alpha": (float, 1.0)},
    ),
    "build": (
        {},
        {
            "amplitude_mode": (str, "analytic"),
            "max_unitarity_deviation": (float, None),
        },
    ),
}

# Which top-level blocks each command accepts; 'run' / 'constants' / 'action'
# are always required, 'output' always optional.
_GRID_USAGE = {
    "check-action": "forbidden",
    "evolve": "full",
    "classical": "forbidden",
    "sweep": "n_points_only",
    "build": "full",
}


def _validate_grid(block, usage: str):
    if usage == "full":
        out = _check(_require_mapping(block, "grid"), "grid", {"n_points": int, "x_min": float, "spacing": float}, {})
        if out["spacing"] <= 0:
            raise ConfigError(f"'grid.spacing' must be positive, got {out['spacing']}")
    elif usage == "n_points_only":
        out = _check(_require_mapping(block, "grid"), "grid", {"n_points": int}, {})
    else:
        raise AssertionError(usage)
    if out["n_points"] < 4:
        raise ConfigError(f"'grid.n_points' must be at least 4, got {out['n_points']}")
    return out


def _validate_run(block, command: str) -> dict:
    required, optional = _RUN_SCHEMAS[command]
    out = _check(_require_mapping(block, "run"), "run", required, optional)
    if command == "check-action":
        domain = out["domain"]
        if len(domain) != 2 or not all(isinstance(v, _NUMBER) and not isinstance(v, bool) for v in domain):
            raise ConfigError("'run.domain' must be a [lo, hi] pair of numbers")
        if not domain[1] > domain[0]:
            raise ConfigError(f"'run.domain' must satisfy lo < hi, got {domain}")
        out["domain"] = [float(domain[0]), float(domain[1])]
        if out["expect"] not in ("admissible", "inadmissible"):
            raise ConfigError(f"'run.expect' must be 'admissible' or 'inadmissible', got {out['expect']!r}")
        if out["n_samples"] < 16:
            raise ConfigError(f"'run.n_samples' must be at least 16, got {out['n_samples']}")
    if command == "evolve":
        if out["n_steps"] < 0:
            raise ConfigError(f"'run.n_steps' must be non-negative, got {out['n_steps']}")
        if out["amplitude_mode"] not in ("analytic", "calibrated"):
            raise ConfigError(f"'run.amplitude_mode' must be 'analytic' or 'calibrated', got {out['amplitude_mode']!r}")
        if out["alpha"] <= 0:
            raise ConfigError(f"'run.alpha' must be positive, got {out['alpha']}")
    if command == "classical":
        if out["n_steps"] < 1:
            raise ConfigError(f"'run.n_steps' must be at least 1, got {out['n_steps']}")
        have = [k for k in ("x_minus1", "p0") if out[k] is not None]
        if len(have) != 1:
            raise ConfigError("'run' must set exactly one of 'x_minus1' or 'p0'")
        if out["expect_status"] not in ("complete", "no_solution", "non_unique"):
            raise ConfigError(
                f"'run.expect_status' must be 'complete', 'no_solution', or 'non_unique', got {out['expect_status']!r}"
            )
    if command == "sweep":
        hl = out["hbar_list"]
        if len(hl) < 3:
            raise ConfigError(f"'run.hbar_list' needs at least 3 values, got {len(hl)}")
        if not all(isinstance(v, _NUMBER) and not isinstance(v, bool) and v > 0 for v in hl):
            raise ConfigError("'run.hbar_list' must contain positive numbers")
        if not all(b < a for a, b in zip(hl, hl[1:])):
            raise ConfigError("'run.hbar_list' must be strictly descending")
        out["hbar_list"] = [float(v) for v in hl]
        if out["n_steps"] < 1:
            raise ConfigError(f"'run.n_steps' must be at least 1, got {out['n_steps']}")
        if out["alpha"] <= 0:
            raise ConfigError(f"'run.alpha' must be positive, got {out['alpha']}")
    if command == "build":
        if out["amplitude_mode"] not in ("analytic", "calibrated"):
            raise ConfigError(f"'run.amplitude_mode' must be 'analytic' or 'calibrated', got {out['amplitude_mode']!r}")
    return out


def load_config(path: str, command: str) -> dict:
    """Read, parse, and validate one experiment configuration for a command."""
    if command not in _RUN_SCHEMAS:
        raise ConfigError(f"unknown command '{command}'")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level of a config must be an object")

    grid_usage = _GRID_USAGE[command]
    expected = {"constants", "action", "run", "output"}
    if grid_usage != "forbidden":
        expected.add("grid")
    for key in raw:
        if key not in expected:
            if key == "grid":
                raise ConfigError(f"block 'grid' is not used by command '{command}'")
            raise ConfigError(f"unknown key '{key}' at top level")

    cfg: dict = {"command": command, "raw": raw}
    if grid_usage != "forbidden":
        if "grid" not in raw:
            raise ConfigError("missing required block 'grid'")
        cfg["grid"] = _validate_grid(raw["grid"], grid_usage)
    for block in ("constants", "action", "run"):
        if block not in raw:
            raise ConfigError(f"missing required block '{block}'")
    cfg["constants"] = _validate_constants(raw["constants"])
    cfg["action"] = _validate_action(raw["action"], "action")
    cfg["run"] = _validate_run(raw["run"], command)
    cfg["output"] = _check(
        _require_mapping(raw.get("output", {}), "output"),
        "output",
        {},
        {"directory": (str, "dtqm-out"), "formats": (list, ["csv", "json"])},
    )
    for fmt in cfg["output"]["formats"]:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"'output.formats' entries must be 'csv' or 'json', got {fmt!r}")

    if command == "sweep" and cfg["constants"]["tau"] == "magic":
        raise ConfigError("command 'sweep' needs a numeric 'constants.tau' (the grid is retuned per hbar)")
    if command == "classical" and cfg["action"]["kind"] == "vector_potential_2d":
        raise ConfigError("command 'classical' drives 1D actions only")
    if command in ("evolve", "build") and cfg["action"]["kind"] == "vector_potential_2d":
        raise ConfigError(f"command '{command}' drives 1D actions only")
    return cfg


def build_grid(cfg: dict) -> SpatialGrid:
    g = cfg["grid"]
    return make_grid(g["n_points"], g["x_min"], g["spacing"])


def build_constants(cfg: dict, grid: SpatialGrid | None, hbar_override: float | None = None) -> PhysicalConstants:
    c = cfg["constants"]
    hbar = c["hbar"] if hbar_override is None else hbar_override
    tau = c["tau"]
    if tau == "magic":
        if grid is None:
            raise ConfigError("'constants.tau' = 'magic' needs a grid block")
        tau = magic_time_step(grid, c["mass"], hbar)
    return PhysicalConstants(c["mass"], tau, hbar)


def _build_potential(params: dict, mass: float):
    name = params["name"]
    if name == "zero":
        return zero_potential()
    if name == "harmonic":
        return harmonic_potential(mass, params["omega"])
    if name == "quartic":
        return quartic_potential(params["strength"])
    if name == "cosine_well":
        return cosine_well_potential(params["depth"], params["wavenumber"])
    raise AssertionError(name)


def _build_phase(params: dict):
    name = params["name"]
    if name == "zero":
        return zero_phase()
    if name == "linear":
        return linear_phase(params["slope"])
    if name == "quadratic":
        return quadratic_phase(params["curvature"])
    raise AssertionError(name)


def _build_field(params: dict):
    name = params["name"]
    if name == "zero":
        return zero_field()
    if name == "bilinear":
        return bilinear_field(params["strength"])
    if name == "sine":
        return sine_field(params["strength"])
    raise AssertionError(name)


def build_action(cfg: dict, constants: PhysicalConstants):
    a = cfg["action"]
    kind = a["kind"]
    if kind == "standard":
        return StandardAction(constants, _build_potential(a["potential"], constants.mass))
    if kind == "gauged":
        return GaugedAction(
            constants, _build_potential(a["potential"], constants.mass), _build_phase(a["phase"])
        )
    if kind == "quartic":
        return QuarticAction(constants, _build_potential(a["potential"], constants.mass), a["epsilon"])
    if kind == "sine":
        return SineAction(constants, a["strength"])
    if kind == "vector_potential_2d":
        return VectorPotentialAction2D(
            constants,
            _build_potential(a["potential"], constants.mass),
            _build_field(a["a1"]),
            _build_field(a["a2"]),
        )
    raise AssertionError(kind)
