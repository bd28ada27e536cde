"""Plain-text run configuration: [section] key = value format with a fixed
schema, strict validation, and deterministic round-trip serialization."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

import numpy as np


class ConfigError(ValueError):
    """Validation failure; .errors lists messages naming section.key."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_floats(s: str) -> tuple[float, ...]:
    return tuple(float(p) for p in s.split(",") if p.strip())


def _parse_vec3(s: str) -> tuple[float, float, float]:
    v = _parse_floats(s)
    if len(v) != 3:
        raise ValueError("expected three comma-separated numbers")
    return v


def _parse_knots(s: str) -> tuple[tuple[float, float], ...]:
    """Knot list "t0:v0, t1:v1, ..."."""
    knots = []
    for part in s.split(","):
        part = part.strip()
        if not part:
            continue
        t, _, v = part.partition(":")
        knots.append((float(t), float(v)))
    if not knots:
        raise ValueError("empty knot list")
    return tuple(knots)


_PARSERS = {
    "int": int,
    "float": float,
    "str": str,
    "bool": _parse_bool,
    "floats": _parse_floats,
    "vec3": _parse_vec3,
    "knots": _parse_knots,
}

# section -> key -> (type name, default). None default means "unset".
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "grid": {
        "nx": ("int", 1), "ny": ("int", 1), "nz": ("int", 1),
        "hx": ("float", 1.0), "hy": ("float", 1.0), "hz": ("float", 1.0),
    },
    "domain": {
        "shape": ("str", "box"),            # box | ellipsoid
        "a": ("float", None), "b": ("float", None), "c": ("float", None),
    },
    "material": {
        "alpha": ("float", 1.0),
        "epsilon": ("float", 0.1),
        "epsilon_ladder": ("floats", None),
    },
    "field": {
        "knots": ("knots", ((0.0, 1.0), (1.0e9, 1.0))),
        "direction": ("vec3", (0.0, 0.0, 1.0)),
        "rotate_to": ("vec3", None),
        "omega": ("float", 0.0),
        "envelope": ("str", "constant"),    # constant | bump
        "bump_radius": ("float", None),
        "bump_center": ("vec3", None),
    },
    "solver": {
        "integrator": ("str", "semi-implicit-spectral"),
        "dt": ("float", None),
        "t_final": ("float", 1.0),
        "sample_every": ("int", 1),
        "renormalize": ("bool", True),
    },
    "experiment": {
        "threshold_factor": ("float", 2.0),
        "perturbation": ("float", 0.2),
        "n_samples": ("int", 200),
        "s": ("float", 0.01),
        "lambda_grid": ("floats", (0.0, 5.0, 10.0, 20.0, 40.0)),
        "lam_max": ("float", 0.6),
        "period": ("float", 20.0),
        "field_tilt": ("float", 3e-4),
        "tensor_resolution": ("int", 32),
        "warmup_periods": ("int", 1),
        "relax_tol": ("float", 1e-8),
        "relax_max_t": ("float", 50.0),
        "resolution": ("int", 32),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully defaulted configuration (values are primitives and
    tuples so equality and round-tripping are exact)."""

    values: tuple[tuple[str, tuple[tuple[str, object], ...]], ...]

    def get(self, section: str, key: str):
        d = dict(dict(self.values)[section])
        return d[key]

    @staticmethod
    def from_dict(d: dict[str, dict[str, object]]) -> "RunConfig":
        return RunConfig(tuple(
            (sec, tuple(sorted(d[sec].items()))) for sec in sorted(d)))

    def to_dict(self) -> dict[str, dict[str, object]]:
        return {sec: dict(kv) for sec, kv in self.values}


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError listing every problem found."""
    cp = configparser.ConfigParser(strict=True, interpolation=None)
    errors: list[str] = []
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as e:
        raise ConfigError([f"duplicate key {e.section}.{e.option}"]) from None
    except configparser.DuplicateSectionError as e:
        raise ConfigError([f"duplicate section {e.section}"]) from None
    except configparser.Error as e:
        raise ConfigError([f"syntax error: {e}"]) from None

    out: dict[str, dict[str, object]] = {
        sec: {k: dflt for k, (_, dflt) in keys.items()}
        for sec, keys in SCHEMA.items()}

    for sec in cp.sections():
        if sec not in SCHEMA:
            errors.append(f"unknown section {sec}")
            continue
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                errors.append(f"unknown key {sec}.{key}")
                continue
            tname, _ = SCHEMA[sec][key]
            try:
                out[sec][key] = _PARSERS[tname](raw)
            except ValueError as e:
                errors.append(f"invalid value for {sec}.{key}: {e}")

    if errors:
        raise ConfigError(errors)
    _validate(out, errors)
    if errors:
        raise ConfigError(errors)
    return RunConfig.from_dict(out)


def _validate(v: dict[str, dict[str, object]], errors: list[str]) -> None:
    if v["material"]["epsilon"] <= 0:
        errors.append("material.epsilon must be > 0")
    if v["material"]["alpha"] <= 0:
        errors.append("material.alpha must be > 0")
    ladder = v["material"]["epsilon_ladder"]
    if ladder is not None and (any(e <= 0 for e in ladder)
                               or any(np.diff(ladder) >= 0)):
        errors.append("material.epsilon_ladder must be positive, decreasing")
    for key in ("nx", "ny", "nz"):
        if v["grid"][key] < 1:
            errors.append(f"grid.{key} must be >= 1")
    for key in ("hx", "hy", "hz"):
        if v["grid"][key] <= 0:
            errors.append(f"grid.{key} must be > 0")
    knots = v["field"]["knots"]
    ts = [t for t, _ in knots]
    if len(ts) > 1 and any(np.diff(ts) <= 0):
        errors.append("field.knots times must be strictly increasing")
    if v["domain"]["shape"] not in ("box", "ellipsoid"):
        errors.append("domain.shape must be box or ellipsoid")
    if v["domain"]["shape"] == "ellipsoid":
        abc = [v["domain"][k] for k in ("a", "b", "c")]
        if any(x is None for x in abc):
            errors.append("domain.a, domain.b, domain.c required for "
                          "shape = ellipsoid")
        elif not (abc[0] >= abc[1] >= abc[2] > 0):
            errors.append("domain semi-axes must satisfy a >= b >= c > 0")
    if v["solver"]["dt"] is not None and v["solver"]["dt"] <= 0:
        errors.append("solver.dt must be > 0")
    if v["solver"]["t_final"] < 0:
        errors.append("solver.t_final must be >= 0")
    if v["solver"]["integrator"] not in ("projected-explicit",
                                         "semi-implicit-spectral"):
        errors.append("solver.integrator must be projected-explicit or "
                      "semi-implicit-spectral")
    if v["field"]["envelope"] not in ("constant", "bump"):
        errors.append("field.envelope must be constant or bump")
    if v["field"]["envelope"] == "bump" and v["field"]["bump_radius"] is None:
        errors.append("field.bump_radius required for envelope = bump")


def _serialize_value(tname: str, value) -> str:
    if tname == "knots":
        return ", ".join(f"{repr(float(t))}:{repr(float(x))}"
                         for t, x in value)
    if tname in ("floats", "vec3"):
        return ", ".join(repr(float(x)) for x in value)
    if tname == "bool":
        return "true" if value else "false"
    if tname == "float":
        return repr(float(value))
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    """Inverse of parse_config (round-trips exactly)."""
    buf = io.StringIO()
    d = cfg.to_dict()
    for sec in SCHEMA:
        buf.write(f"[{sec}]\n")
        for key, (tname, _) in SCHEMA[sec].items():
            value = d[sec][key]
            if value is None:
                continue
            buf.write(f"{key} = {_serialize_value(tname, value)}\n")
        buf.write("\n")
    return buf.getvalue()
