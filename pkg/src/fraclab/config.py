"""Plain-text scenario configuration.

One ``key = value`` pair per line, ``#`` comments, dotted keys grouped by
block.  The geometry and grid keys are fixed for reproducibility:

    geometry.omega = -1, 1
    geometry.w = 2, 3
    geometry.omega_prime = -0.75, 0.75
    geometry.s = 0.5
    grid.L = 32
    grid.n_super = 4096

Potentials and the exterior data are parametric bumps (center, width,
amplitude, smoothness); experiment blocks add noise, reconstruction,
scan, sweep and certificate parameters.  Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .fracop import assemble_dense
from .geometry import (Geometry, GridSpec, build_geometry, bump_profile,
                       make_grid_function, sample_profile)
from .spaces import make_potential

_FLOAT_KEYS = {
    "geometry.s", "grid.L",
    "f.center", "f.width", "f.amplitude", "f.smoothness",
    "q1.center", "q1.width", "q1.amplitude", "q1.smoothness",
    "q2.center", "q2.width", "q2.amplitude", "q2.smoothness",
    "noise.epsilon",
    "recon.theta", "recon.lambda",
    "scan.x0", "scan.r_min", "scan.r_max",
    "cert.E", "cert.alpha", "cert.beta", "cert.c_low", "cert.c_stab",
    "cert.mu", "cert.e_tilde", "cert.epsilon", "cert.r0",
    "sweep.t_min", "sweep.t_max",
}
_INT_KEYS = {"grid.n_super", "seed", "noise.seed", "scan.n_radii",
             "sweep.n_points", "extension.n_levels"}
_PAIR_KEYS = {"geometry.omega", "geometry.w", "geometry.omega_prime"}
_LIST_KEYS = {"sweep.epsilons", "sweep.t_values"}
_STR_KEYS = {"recon.strategy", "sweep.mode", "output.dir"}

_KNOWN = _FLOAT_KEYS | _INT_KEYS | _PAIR_KEYS | _LIST_KEYS | _STR_KEYS

_DEFAULTS = {
    "geometry.omega_prime": None,
    "grid.L": 32.0,
    "grid.n_super": 4096,
    "f.amplitude": 1.0,
    "f.smoothness": 1.0,
    "q1.amplitude": 0.0,
    "q1.smoothness": 1.0,
    "q2.amplitude": 0.0,
    "q2.smoothness": 1.0,
    "noise.epsilon": 0.0,
    "noise.seed": 0,
    "recon.theta": 1e-6,
    "recon.strategy": "discrepancy",
    "recon.lambda": 1e-14,
    "scan.n_radii": 8,
    "extension.n_levels": 64,
    "seed": 0,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Typed view of one parsed configuration file."""

    entries: dict
    text: str

    def __getitem__(self, key):
        return self.entries[key]

    def get(self, key, default=None):
        return self.entries.get(key, default)

    @property
    def content_hash(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()[:16]


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _PAIR_KEYS:
            parts = [float(p) for p in raw.split(",")]
            if len(parts) != 2:
                raise ValueError("expected two comma-separated numbers")
            return (parts[0], parts[1])
        if key in _LIST_KEYS:
            return tuple(float(p) for p in raw.split(","))
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc


def parse_config_text(text: str) -> ScenarioConfig:
    entries = dict(_DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (p.strip() for p in body.split("=", 1))
        if key not in _KNOWN:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        entries[key] = _parse_value(key, raw)
    for required in ("geometry.omega", "geometry.w", "geometry.s"):
        if required not in entries:
            raise ConfigError(f"missing required key {required!r}")
    return ScenarioConfig(entries=entries, text=text)


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything a driver needs: geometry, grid, operator, data, potentials."""

    config: ScenarioConfig
    geom: Geometry
    spec: GridSpec
    op: object                  # FracLapDense
    f: object                   # GridFunction on w
    q1: object                  # Potential
    q2: object                  # Potential


_SUPPORT_INTERVAL = {"w": "w", "omega_prime": "omega_prime"}


def _bump_from_block(cfg: ScenarioConfig, block: str, geom, spec, support):
    amp = cfg.get(f"{block}.amplitude", 0.0)
    if amp == 0.0:
        zeros = np.zeros(spec.n_super)
        return make_grid_function(geom, spec, zeros, support)
    center = cfg.get(f"{block}.center")
    width = cfg.get(f"{block}.width")
    if center is None or width is None:
        raise ConfigError(f"block {block!r} needs center and width")
    lo, hi = getattr(geom, _SUPPORT_INTERVAL[support])
    if center - width < lo or center + width > hi:
        raise ConfigError(
            f"{block} bump support [{center - width}, {center + width}] "
            f"leaves its interval [{lo}, {hi}]")
    prof = bump_profile(center, width, amp, cfg.get(f"{block}.smoothness", 1.0))
    return sample_profile(geom, spec, prof, support, mode="average")


def build_scenario(cfg: ScenarioConfig, resolution_multiplier: int = 1) -> Scenario:
    """Instantiate geometry, operator and data from a parsed config.

    The resolution multiplier scales n_super (for refinement studies)
    without touching the configured physical parameters.
    """
    try:
        n_super = int(cfg["grid.n_super"]) * int(resolution_multiplier)
        geom, spec = build_geometry(
            omega=cfg["geometry.omega"], w=cfg["geometry.w"],
            s=cfg["geometry.s"], box_halfwidth=cfg["grid.L"],
            n_super=n_super, omega_prime=cfg.get("geometry.omega_prime"))
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc}") from exc
    if cfg.get("f.center") is None:
        raise ConfigError("missing required block 'f' (exterior data bump)")
    f = _bump_from_block(cfg, "f", geom, spec, "w")
    if not np.any(f.values):
        raise ConfigError("exterior data f must be nonzero")
    q1 = make_potential(geom, _bump_from_block(cfg, "q1", geom, spec,
                                               "omega_prime"))
    q2 = make_potential(geom, _bump_from_block(cfg, "q2", geom, spec,
                                               "omega_prime"))
    op = assemble_dense(geom, spec)
    return Scenario(config=cfg, geom=geom, spec=spec, op=op, f=f, q1=q1, q2=q2)
