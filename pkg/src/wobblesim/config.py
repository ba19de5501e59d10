"""YAML experiment configuration with line-numbered validation errors.

Angles are given in degrees (``*_deg`` keys) and converted to radians when the
model objects are built.  Every key has a default; unknown or duplicated keys
and values of the wrong type are rejected with the offending line.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .acf_montecarlo import EnsembleConfig
from .spectrum import AngleLaw, ChannelSpec, default_num_mpc
from .wobble import FrequencyLaw, PitchProcessSpec, ProcessKind

JOBS = ("acf", "coherence", "figure2", "figure3", "figure4", "mc-validate", "mus")
QUICK_REALIZATIONS = 10_000
QUICK_T_GRID_POINTS = 8

# leaf types: float, int, str, bool, "floats" (list of numbers), "optional_*" (may be null)
SCHEMA = {
    "job": "optional_str",
    "gamma": "float",
    "output_dir": "str",
    "master_seed": "int",
    "channel": {
        "carrier_hz": "float",
        "antenna_offset_m": "float",
        "uav_height_m": "float",
        "rician_k": "float",
        "laplace_scale": "float",
        "los_aod_deg": "float",
        "num_mpc": "optional_int",
        "angle_law": {"kind": "str", "low_deg": "float", "high_deg": "float"},
    },
    "process": {
        "kind": "str",
        "wiener_rate_b": "float",
        "max_pitch_deg": "float",
        "freq_law": {"kind": "str", "low_hz": "float", "high_hz": "float"},
    },
    "ensemble": {
        "num_realizations": "int",
        "chunk_size": "int",
        "workers": "int",
        "uav_count": "int",
        "los_aods_deg": "floats",
        "shared_scatterers": "bool",
        "exact_geometry": "bool",
        "ue_azimuth_deg": "float",
    },
    "grid": {
        "tau_max": "float",
        "num_taus": "int",
        "anchor_t": "float",
        "t_values": "floats",
        "t_grid_points": "int",
        "t_grid_max": "float",
        "mc_num_taus": "int",
        "mc_tau_max": "optional_float",
    },
}

DEFAULTS = {
    "job": None,
    "gamma": 0.5,
    "output_dir": "wobblesim-out",
    "master_seed": 1,
    "channel": {
        "carrier_hz": 6.0e9,
        "antenna_offset_m": 0.4,
        "uav_height_m": 100.0,
        "rician_k": 11.5,
        "laplace_scale": 1.0,
        "los_aod_deg": 20.0,
        "num_mpc": None,  # 20 up to 6 GHz, 10 above
        "angle_law": {"kind": "uniform", "low_deg": 0.0, "high_deg": 85.0},
    },
    "process": {
        "kind": "sinusoid",
        "wiener_rate_b": 1.0,
        "max_pitch_deg": 5.0,
        "freq_law": {"kind": "uniform", "low_hz": 5.0, "high_hz": 25.0},
    },
    "ensemble": {
        "num_realizations": 100_000,
        "chunk_size": 2000,
        "workers": 1,
        "uav_count": 3,
        "los_aods_deg": [20.0, 40.0, 60.0],
        "shared_scatterers": True,
        "exact_geometry": False,
        "ue_azimuth_deg": 0.0,
    },
    "grid": {
        "tau_max": 1.0,
        "num_taus": 256,
        "anchor_t": 0.0,
        "t_values": [0.0, 0.0125, 0.025, 0.0375],
        "t_grid_points": 64,
        "t_grid_max": 0.2,
        "mc_num_taus": 128,
        "mc_tau_max": None,  # chosen from the process when null
    },
}


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a sign, like ``6e9``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


class ConfigError(ValueError):
    """Invalid configuration; the message carries ``file:line`` when known."""


def _where(source: str, node) -> str:
    return f"{source}:{node.start_mark.line + 1}" if node is not None else source


def _check_leaf(kind: str, value, path: str, loc: str):
    optional = kind.startswith("optional_")
    base = kind.removeprefix("optional_")
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{loc}: '{path}' must not be null")
    is_num = isinstance(value, (int, float)) and not isinstance(value, bool)
    if base == "float" and is_num:
        return float(value)
    if base == "int" and isinstance(value, int) and not isinstance(value, bool):
        return value
    if base == "str" and isinstance(value, str):
        return value
    if base == "bool" and isinstance(value, bool):
        return value
    if base == "floats" and isinstance(value, list):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return [float(v) for v in value]
    raise ConfigError(f"{loc}: '{path}' expects {base}, got {type(value).__name__} {value!r}")


def _merge(schema: dict, defaults: dict, node, data, source: str, prefix: str, lines: dict) -> dict:
    """Validate a mapping node against ``schema`` and overlay it on ``defaults``."""
    out = copy.deepcopy(defaults)
    if node is None:
        return out
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{_where(source, node)}: '{prefix or 'top level'}' must be a mapping")
    seen = set()
    for key_node, val_node in node.value:
        key = key_node.value
        path = f"{prefix}.{key}" if prefix else key
        loc = _where(source, key_node)
        if key in seen:
            raise ConfigError(f"{loc}: duplicate key '{path}'")
        seen.add(key)
        if key not in schema:
            allowed = ", ".join(sorted(schema))
            raise ConfigError(f"{loc}: unknown key '{path}' (allowed: {allowed})")
        lines[path] = key_node.start_mark.line + 1
        sub = schema[key]
        if isinstance(sub, dict):
            out[key] = _merge(sub, defaults[key], val_node, data.get(key), source, path, lines)
        else:
            out[key] = _check_leaf(sub, data[key], path, loc)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved configuration; ``resolved`` is what gets embedded in outputs."""

    resolved: dict
    source: str = "<config>"
    lines: tuple = ()

    def line_of(self, path: str) -> str:
        for p, n in self.lines:
            if p == path:
                return f"{self.source}:{n}"
        return self.source

    def __getitem__(self, key):
        return self.resolved[key]

    @property
    def gamma(self) -> float:
        return self.resolved["gamma"]

    def channel(self, **overrides) -> ChannelSpec:
        c = dict(self.resolved["channel"], **overrides)
        law = c["angle_law"]
        num_mpc = c["num_mpc"] if c["num_mpc"] is not None else default_num_mpc(c["carrier_hz"])
        try:
            return ChannelSpec(
                carrier_hz=c["carrier_hz"],
                antenna_offset_m=c["antenna_offset_m"],
                uav_height_m=c["uav_height_m"],
                rician_k=c["rician_k"],
                laplace_scale=c["laplace_scale"],
                los_aod=float(np.deg2rad(c["los_aod_deg"])),
                num_mpc=num_mpc,
                angle_law=AngleLaw(law["kind"], float(np.deg2rad(law["low_deg"])), float(np.deg2rad(law["high_deg"]))),
            )
        except ValueError as exc:
            raise ConfigError(f"{self.line_of('channel')}: {exc}") from exc

    def process(self, kind: str | None = None, **overrides) -> PitchProcessSpec:
        p = dict(self.resolved["process"], **overrides)
        kind = kind or p["kind"]
        try:
            kind = ProcessKind(kind)
            if kind is ProcessKind.WIENER:
                return PitchProcessSpec.wiener(p["wiener_rate_b"])
            if kind is ProcessKind.NONE:
                return PitchProcessSpec.none()
            fl = p["freq_law"]
            law = FrequencyLaw.point(fl["low_hz"]) if fl["kind"] == "point" else FrequencyLaw(fl["kind"], fl["low_hz"], fl["high_hz"])
            return PitchProcessSpec.sinusoid(float(np.deg2rad(p["max_pitch_deg"])), law)
        except ValueError as exc:
            raise ConfigError(f"{self.line_of('process')}: {exc}") from exc

    def ensemble(self, **overrides) -> EnsembleConfig:
        e = self.resolved["ensemble"]
        params = dict(
            num_realizations=e["num_realizations"],
            master_seed=self.resolved["master_seed"],
            uav_count=e["uav_count"],
            chunk_size=e["chunk_size"],
            workers=e["workers"],
        )
        params.update(overrides)
        try:
            return EnsembleConfig(**params)
        except ValueError as exc:
            raise ConfigError(f"{self.line_of('ensemble')}: {exc}") from exc

    def with_overrides(self, *, seed=None, output_dir=None, quick=False) -> "ExperimentConfig":
        r = copy.deepcopy(self.resolved)
        if seed is not None:
            r["master_seed"] = int(seed)
        if output_dir is not None:
            r["output_dir"] = str(output_dir)
        if quick:
            r["ensemble"]["num_realizations"] = min(r["ensemble"]["num_realizations"], QUICK_REALIZATIONS)
            r["grid"]["t_grid_points"] = min(r["grid"]["t_grid_points"], QUICK_T_GRID_POINTS)
        r["quick"] = bool(quick or self.resolved.get("quick", False))
        return ExperimentConfig(r, self.source, self.lines)


def _semantic_checks(r: dict, source: str, lines: dict):
    def fail(path, msg):
        loc = f"{source}:{lines[path]}" if path in lines else source
        raise ConfigError(f"{loc}: {msg}")

    if r["job"] is not None and r["job"] not in JOBS:
        fail("job", f"unknown job {r['job']!r} (choose from {', '.join(JOBS)})")
    if not 0.0 < r["gamma"] <= 1.0:
        fail("gamma", "gamma must lie in (0, 1]")
    if r["process"]["kind"] not in [k.value for k in ProcessKind]:
        fail("process.kind", f"unknown process kind {r['process']['kind']!r}")
    g = r["grid"]
    if g["num_taus"] < 3 or g["mc_num_taus"] < 2 or g["t_grid_points"] < 1:
        fail("grid", "grid sizes too small")
    if not g["tau_max"] > 0.1:
        fail("grid.tau_max", "tau_max must exceed the 0.1 s log head of the lag grid")
    if any(t < 0 for t in g["t_values"]) or g["anchor_t"] < 0 or g["t_grid_max"] < 0:
        fail("grid", "anchor times must be non-negative")
    e = r["ensemble"]
    if len(e["los_aods_deg"]) != e["uav_count"]:
        where = "ensemble.los_aods_deg" if "ensemble.los_aods_deg" in lines else "ensemble.uav_count"
        fail(where, f"ensemble.los_aods_deg needs {e['uav_count']} LoS angles (one per UAV), got {len(e['los_aods_deg'])}")


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        node = yaml.compose(text, Loader=_Loader)
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"{loc}: YAML syntax error: {getattr(exc, 'problem', exc)}") from exc
    lines: dict = {}
    resolved = _merge(SCHEMA, DEFAULTS, node, data or {}, source, "", lines)
    resolved["quick"] = False
    _semantic_checks(resolved, source, lines)
    cfg = ExperimentConfig(resolved, source, tuple(sorted(lines.items())))
    # surface model-level validation errors at load time
    cfg.channel()
    cfg.process()
    cfg.ensemble()
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    return parse_config(text, str(path))
