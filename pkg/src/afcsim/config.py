"""Config parsing, validation, and construction of run objects.

The config format is a sectioned key-value text file.  Frequencies are
ordinary frequencies (Hz, with kHz/MHz/GHz/THz suffixes) and become
angular internally; times/lengths take the usual suffixes.  `auto`
requests the documented default policy.  A manifest JSON produced by a
run can be fed back as the config and reproduces the run: it stores the
fully resolved values in the same base units.

See docs/config.md for the full schema.
"""

from __future__ import annotations

import json
import math
from copy import deepcopy
from dataclasses import dataclass

from .constants import TWO_PI, C_LIGHT
from .errors import ConfigError
from .model import AtomicSystem, GasParameters, VelocityGrid
from .pulses import PulseTrain
from .bloch import default_velocity_grid, predicted_tooth_width_velocity
from .memory import StorageConfig, coupling_constant, effective_detunings

_UNIT_TABLES = {
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "mass": {"kg": 1.0, "u": 1.66053906660e-27},
    "temperature": {"k": 1.0},
    "velocity": {"m/s": 1.0},
}


@dataclass(frozen=True)
class Key:
    kind: str
    required: bool = False
    default: object = None
    allow_auto: bool = False


SCHEMA: dict[str, dict[str, Key]] = {
    "atom": {
        "omega12": Key("frequency", required=True),
        "omega32": Key("frequency", required=True),
        "omega42": Key("frequency", default=0.0),
        "gamma21": Key("float", required=True),
        "gamma23": Key("float", required=True),
        "gamma_coherence": Key("float", allow_auto=True),
        "dipole23": Key("float", allow_auto=True),
    },
    "gas": {
        "density": Key("float", required=True),
        "temperature": Key("temperature", allow_auto=True),
        "mass": Key("mass", allow_auto=True),
        "eta": Key("velocity", allow_auto=True),
    },
    "pap": {
        "n_pulses": Key("int", required=True),
        "t_int": Key("time", required=True),
        "sigma": Key("time", required=True),
        "sigma_e": Key("time", allow_auto=True),
        "omega0": Key("frequency", required=True),
        "delta0": Key("frequency", required=True),
    },
    "grid": {
        "v_min": Key("velocity", allow_auto=True),
        "v_max": Key("velocity", allow_auto=True),
        "n_points": Key("int", allow_auto=True),
        "points_per_width": Key("float", default=12.0),
        "max_points": Key("int", default=20001),
        "span": Key("velocity", allow_auto=True),
    },
    "comb": {
        "omega_map": Key("frequency", allow_auto=True),
        "min_prominence": Key("float", default=0.1),
    },
    "storage": {
        "delta_s": Key("frequency", required=True),
        "omega_c": Key("frequency", required=True),
        "delta_c": Key("frequency", allow_auto=True),
        "tau_p": Key("time", required=True),
        "t_c": Key("time", allow_auto=True),
        "t_f": Key("time", allow_auto=True),
        "dt": Key("time", allow_auto=True),
        "length": Key("length", required=True),
        "z_points": Key("int", default=200),
        "coupling_g": Key("float", allow_auto=True),
        "coupling_scale": Key("float", default=2.0),
        "retrieval": Key("str", default="backward"),
        "variant": Key("str", default="mirror_compensated"),
        "extra_variants": Key("bool", default=True),
        "gate": Key("gate", default=((0.0, math.inf),)),
        "section_halfwidth": Key("frequency", allow_auto=True),
        "section_points_per_width": Key("float", default=12.0),
    },
    "sweep": {
        "outputs": Key("str_list", default=("eta_s", "eta_r")),
        "cap": Key("int", default=512),
        "keep_cells": Key("bool", default=False),
    },
    "ozmap": {
        "ratio_min": Key("float", default=0.0),
        "ratio_max": Key("float", default=3.0),
        "n_ratio": Key("int", default=61),
        "n_v": Key("int", default=61),
        "gamma_mode": Key("str", default="paper"),
        "v_halfspan": Key("velocity", allow_auto=True),
        "check_resolution": Key("bool", default=False),
    },
    "ofc": {
        "which": Key("str", default="dump"),
        "bins_per_tooth": Key("int", default=32),
        "halfspan": Key("frequency", allow_auto=True),
    },
}

_SWEEPABLE = ("atom", "gas", "pap", "grid", "comb", "storage")


def _parse_quantity(text: str, kind: str, path: str):
    text = text.strip()
    if text.lower() == "auto":
        return None
    if kind == "bool":
        if text.lower() in ("true", "yes", "on", "1"):
            return True
        if text.lower() in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{path}: expected a boolean, got {text!r}")
    if kind == "str":
        return text
    if kind == "str_list":
        return tuple(tok.strip() for tok in text.split(",") if tok.strip())
    if kind == "gate":
        intervals = []
        for tok in text.split(","):
            parts = tok.split(":")
            if len(parts) != 2:
                raise ConfigError(f"{path}: gate intervals are 'on:off', got {tok!r}")
            vals = []
            for p in parts:
                p = p.strip()
                vals.append(math.inf if p.lower() == "inf" else _parse_quantity(p, "time", path))
            intervals.append(tuple(vals))
        return tuple(intervals)
    if kind == "int":
        try:
            val = int(text)
        except ValueError as exc:
            raise ConfigError(f"{path}: expected an integer, got {text!r}") from exc
        return val
    # numeric with optional unit
    parts = text.split()
    try:
        number = float(parts[0])
    except ValueError as exc:
        raise ConfigError(f"{path}: expected a number, got {text!r}") from exc
    if len(parts) == 1:
        return number
    if len(parts) > 2:
        raise ConfigError(f"{path}: too many tokens in {text!r}")
    table = _UNIT_TABLES.get(kind)
    if not table:
        raise ConfigError(f"{path}: value {text!r} must be a plain number")
    factor = table.get(parts[1].lower())
    if factor is None:
        raise ConfigError(f"{path}: unknown unit {parts[1]!r} for {kind}")
    return number * factor


def _parse_text(text: str) -> dict:
    sections: dict[str, dict] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in sections[current]:
            raise ConfigError(f"{current}.{key}: duplicate key")
        sections[current][key] = value
    return sections


def _axis_target(path: str):
    parts = path.split(".")
    if len(parts) != 2 or parts[0] not in _SWEEPABLE or parts[1] not in SCHEMA[parts[0]]:
        raise ConfigError(f"sweep.axis.{path}: unknown parameter path")
    return parts[0], parts[1], SCHEMA[parts[0]][parts[1]]


def validate(sections: dict, raw: bool = True) -> dict:
    """Check sections/keys against the schema and normalize values.

    raw=True parses string values (text config); raw=False accepts
    already-numeric values (manifest round-trip).
    """
    out: dict[str, dict] = {}
    for sec, entries in sections.items():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        out[sec] = {}
        for key, value in entries.items():
            if sec == "sweep" and key.startswith("axis."):
                path = key[len("axis."):]
                tsec, tkey, tspec = _axis_target(path)
                if raw:
                    vals = tuple(_parse_quantity(tok, tspec.kind, f"sweep.{key}")
                                 for tok in str(value).split(","))
                else:
                    vals = tuple(value)
                out[sec][key] = vals
                continue
            spec = SCHEMA[sec].get(key)
            if spec is None:
                raise ConfigError(f"unknown key {sec}.{key}")
            if raw:
                out[sec][key] = _parse_quantity(str(value), spec.kind, f"{sec}.{key}")
            else:
                if spec.kind == "gate" and value is not None:
                    value = tuple(tuple(iv) for iv in value)
                if spec.kind == "str_list" and value is not None:
                    value = tuple(value)
                out[sec][key] = value
    for sec, keys in SCHEMA.items():
        if sec not in out:
            continue
        for key, spec in keys.items():
            if key not in out[sec]:
                if spec.required:
                    raise ConfigError(f"missing required key {sec}.{key}")
                out[sec][key] = spec.default
            elif out[sec][key] is None and spec.required:
                raise ConfigError(f"{sec}.{key} is required and cannot be auto")
    return out


def require_sections(cfg: dict, names) -> None:
    for name in names:
        if name not in cfg:
            raise ConfigError(f"missing required section [{name}]")
        for key, spec in SCHEMA[name].items():
            if spec.required and cfg[name].get(key) is None:
                raise ConfigError(f"missing required key {name}.{key}")


def load(path: str) -> dict:
    """Load a text config or a manifest JSON (round-trip)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        sections = doc.get("config", doc)
        return validate(sections, raw=False)
    return validate(_parse_text(text), raw=True)


# ---------------------------------------------------------------------------
# builders: config (base units) -> run objects (angular frequencies)


def build_system(cfg: dict) -> AtomicSystem:
    a = cfg["atom"]
    return AtomicSystem(
        omega12=TWO_PI * a["omega12"],
        omega32=TWO_PI * a["omega32"],
        omega42=TWO_PI * (a["omega42"] or 0.0),
        gamma21=a["gamma21"],
        gamma23=a["gamma23"],
        gamma_coherence=a["gamma_coherence"],
        dipole23=a["dipole23"],
    )


def build_gas(cfg: dict) -> GasParameters:
    g = cfg["gas"]
    return GasParameters(
        density=g["density"],
        temperature=g["temperature"],
        atomic_mass=g["mass"],
        eta_override=g["eta"],
    )


def build_train(cfg: dict) -> PulseTrain:
    p = cfg["pap"]
    omega0 = TWO_PI * p["omega0"]
    return PulseTrain(
        omega_p0=omega0,
        omega_d0=omega0,
        n_pulses=p["n_pulses"],
        t_int=p["t_int"],
        sigma=p["sigma"],
        sigma_e=p["sigma_e"],
    )


def delta0_of(cfg: dict) -> float:
    return TWO_PI * cfg["pap"]["delta0"]


def build_grid(cfg: dict, system: AtomicSystem, train: PulseTrain,
               gas: GasParameters) -> VelocityGrid:
    g = cfg.get("grid") or {k: spec.default for k, spec in SCHEMA["grid"].items()}
    if g.get("v_min") is not None and g.get("v_max") is not None and g.get("n_points"):
        return VelocityGrid(v_min=g["v_min"], v_max=g["v_max"], n_points=g["n_points"])
    return default_velocity_grid(
        system, train, delta0_of(cfg), gas,
        points_per_width=g.get("points_per_width") or 12.0,
        max_points=g.get("max_points") or 20001,
        span_override=g.get("span"),
    )


def omega_map_of(cfg: dict, system: AtomicSystem):
    m = cfg.get("comb", {})
    if m.get("omega_map") is not None:
        return TWO_PI * m["omega_map"]
    if system.omega42:
        return system.omega34
    return None


def section_grid(cfg: dict, system: AtomicSystem, train: PulseTrain) -> VelocityGrid:
    """Velocity grid for the comb section used by storage runs."""
    s = cfg["storage"]
    half = s.get("section_halfwidth")
    if half is None:
        # cover the photon bandwidth with margin, and at least four teeth
        delta_sep = system.xi * TWO_PI / train.t_int
        half_rad = max(5.0 / s["tau_p"], 4.0 * delta_sep)
    else:
        half_rad = TWO_PI * half
    vmax = half_rad * C_LIGHT / system.omega34
    width = predicted_tooth_width_velocity(train, delta0_of(cfg), system)
    ppw = s.get("section_points_per_width") or 12.0
    n = int(math.ceil(2.0 * vmax / (width / ppw))) + 1
    if n % 2 == 0:
        n += 1
    return VelocityGrid(v_min=-vmax, v_max=vmax, n_points=n)


def build_storage(cfg: dict) -> StorageConfig:
    s = cfg["storage"]
    return StorageConfig(
        delta_s0=TWO_PI * s["delta_s"],
        omega_c=TWO_PI * s["omega_c"],
        delta_c0=None if s["delta_c"] is None else TWO_PI * s["delta_c"],
        tau_p=s["tau_p"],
        t_c=s["t_c"],
        t_f=s["t_f"],
        dt=s["dt"],
        length=s["length"],
        z_points=s["z_points"],
        coupling_g=s["coupling_g"],
        coupling_scale=s["coupling_scale"],
        retrieval_mode=s["retrieval"],
        retrieval_variant=s["variant"],
        extra_variants=s["extra_variants"],
        control_gate=tuple(tuple(iv) for iv in s["gate"]),
    )


def resolve(cfg: dict) -> dict:
    """Materialize auto values so manifests reproduce the run exactly."""
    out = deepcopy(cfg)
    system = build_system(cfg) if "atom" in cfg else None
    if "pap" in cfg:
        train = build_train(cfg)
        out["pap"]["sigma_e"] = train.envelope_width
        if system is not None and "gas" in cfg:
            grid = build_grid(cfg, system, train, build_gas(cfg))
            out.setdefault("grid", {k: spec.default for k, spec in SCHEMA["grid"].items()})
            out["grid"]["v_min"] = grid.v_min
            out["grid"]["v_max"] = grid.v_max
            out["grid"]["n_points"] = grid.n_points
        if "storage" in cfg:
            s = out["storage"]
            sc = build_storage(cfg)
            det = effective_detunings(0.0, sc.delta_s0, sc.delta_c0, sc.omega_c, system)
            s["delta_c"] = det["delta_c0"] / TWO_PI
            s["t_c"] = sc.t_center
            if s["t_f"] is None:
                s["t_f"] = 2.0 * sc.t_center + train.t_int / system.xi
            if s["coupling_g"] is None:
                s["coupling_g"] = coupling_constant(system, sc.coupling_scale)
            if s["section_halfwidth"] is None:
                sec = section_grid(cfg, system, train)
                s["section_halfwidth"] = sec.v_max * system.omega34 / C_LIGHT / TWO_PI
            s["gate"] = [list(iv) for iv in sc.control_gate]
    if system is not None and "comb" in out:
        om = omega_map_of(cfg, system)
        if om is not None:
            out["comb"]["omega_map"] = om / TWO_PI
    return out
