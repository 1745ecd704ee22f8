"""JSON scene configuration.

A scene names the kind of front, its curve, frame and density data, the
sampling grid, tolerance overrides and output options. Unknown keys are
rejected at every level. Example::

    {"kind": "flat", "n": 3,
     "curve": {"preset": "small_circle", "polar_angle": 0.7853981633974483},
     "density": "sin(2*t)",
     "grid": {"t": 32, "w": 5, "w_range": 2.0}}
"""

from dataclasses import dataclass, field, replace
import hashlib
import json

import numpy as np

from .bishop import integrate_bishop_frame
from .density import Density, ExpressionError
from .errors import ConfigError, FlatFrontError
from .fronts import (FlatFrontSpec, GeneralRuledSpec, MUFrontSpec, build_flat_front,
                     build_general_front, build_mu_front, normal_form_reduction)
from .sphere_curves import arc_length_reparametrize, preset_curve

KINDS = ("flat", "general", "mu")

DEFAULT_TOLERANCES = {
    "rank": 1e-6,
    "singular": 1e-8,
    "representation": 1e-7,
    "frontal": 1e-8,
    "lift_immersion": 1e-6,
    "lift_metric": 1e-7,
    "geodesic": 1e-6,
    "codazzi": 5e-5,
    "bundle": 5e-5,
    "principal": 1e-6,
    "reduction": 1e-8,
    "closure": 1e-10,
    "metric_connection": 1e-5,
}

DEFAULT_GRIDS = {"flat": (32, 5), "general": (32, 5), "mu": (256, 64)}

_TOP = {"kind", "n", "curve", "frame", "density", "densities", "grid", "tolerances", "output",
        "strict_inflection", "waive_closure", "delta", "seed", "samples"}
_GRID = {"t", "w", "w_range"}
_OUTPUT = {"mesh_format", "binary", "projection"}
_FRAME = {"initial"}


@dataclass(frozen=True)
class SceneConfig:
    kind: str
    n: int
    curve: dict
    density: str = None
    densities: tuple = None
    frame: object = "default"
    grid_t: int = None
    grid_w: int = None
    w_range: float = 1.0
    tolerances: dict = field(default_factory=dict)
    mesh_format: str = "ply"
    binary: bool = False
    projection: tuple = None
    strict_inflection: bool = False
    waive_closure: bool = False
    delta: float = 0.1
    seed: int = 0
    samples: int = 48
    sha256: str = ""

    def tol(self, name):
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])

    def with_overrides(self, grid=None, tol_rank=None, strict_inflection=None, seed=None):
        kw = {}
        if grid is not None:
            kw["grid_t"], kw["grid_w"] = grid
        if tol_rank is not None:
            tols = dict(self.tolerances)
            tols["rank"] = float(tol_rank)
            kw["tolerances"] = tols
        if strict_inflection:
            kw["strict_inflection"] = True
        if seed is not None:
            kw["seed"] = int(seed)
        return replace(self, **kw)


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError(f"unknown keys in {where}: {', '.join(extra)}")


def _expr(text, where):
    if not isinstance(text, str):
        raise ConfigError(f"{where} must be an expression string")
    try:
        Density.from_expression(text)
    except ExpressionError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    return text


def parse_config(data, sha256=""):
    """Validate a decoded JSON object and return a SceneConfig."""
    _check_keys(data, _TOP, "config")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}")
    n = data.get("n", 2)
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ConfigError("n must be an integer >= 2")
    if kind == "mu" and n != 2:
        raise ConfigError("Murata-Umehara scenes have n = 2")
    curve = data.get("curve")
    if not isinstance(curve, dict) or "preset" not in curve:
        raise ConfigError("curve must be an object with a 'preset' key")
    kw = dict(kind=kind, n=n, curve=dict(curve), sha256=sha256)
    if kind in ("flat", "mu"):
        if "density" not in data:
            raise ConfigError(f"{kind} scenes need 'density'")
        if "densities" in data:
            raise ConfigError(f"'densities' belongs to general scenes")
        kw["density"] = _expr(data["density"], "density")
    else:
        dens = data.get("densities")
        if not isinstance(dens, list) or len(dens) != n:
            raise ConfigError(f"general scenes need 'densities' with {n} expressions")
        if "density" in data:
            raise ConfigError("'density' belongs to flat and mu scenes")
        kw["densities"] = tuple(_expr(d, f"densities[{i}]") for i, d in enumerate(dens))
    frame = data.get("frame", "default")
    if frame != "default":
        _check_keys(frame, _FRAME, "frame")
        try:
            kw["frame"] = tuple(tuple(float(x) for x in row) for row in frame["initial"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("frame.initial must be a list of vectors") from None
    grid = data.get("grid", {})
    _check_keys(grid, _GRID, "grid")
    for key in ("t", "w"):
        if key in grid:
            if not isinstance(grid[key], int) or grid[key] < 2:
                raise ConfigError(f"grid.{key} must be an integer >= 2")
            kw["grid_" + key] = grid[key]
    if "w_range" in grid:
        kw["w_range"] = _positive(grid["w_range"], "grid.w_range")
    tols = data.get("tolerances", {})
    _check_keys(tols, DEFAULT_TOLERANCES, "tolerances")
    kw["tolerances"] = {k: _positive(v, f"tolerances.{k}") for k, v in tols.items()}
    out = data.get("output", {})
    _check_keys(out, _OUTPUT, "output")
    if "mesh_format" in out:
        if out["mesh_format"] not in ("ply", "obj"):
            raise ConfigError("output.mesh_format must be 'ply' or 'obj'")
        kw["mesh_format"] = out["mesh_format"]
    if "binary" in out:
        kw["binary"] = _flag(out["binary"], "output.binary")
    if "projection" in out:
        try:
            P = np.asarray(out["projection"], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("output.projection must be a numeric matrix") from None
        if P.shape != (3, n + 1):
            raise ConfigError(f"output.projection must be 3 x {n + 1}")
        kw["projection"] = tuple(map(tuple, P.tolist()))
    for key in ("strict_inflection", "waive_closure"):
        if key in data:
            kw[key] = _flag(data[key], key)
    if "delta" in data:
        kw["delta"] = _positive(data["delta"], "delta")
    for key in ("seed", "samples"):
        if key in data:
            if not isinstance(data[key], int) or isinstance(data[key], bool) or data[key] < 0:
                raise ConfigError(f"{key} must be a non-negative integer")
            kw[key] = data[key]
    cfg = SceneConfig(**kw)
    t_default, w_default = DEFAULT_GRIDS[kind]
    return replace(cfg, grid_t=cfg.grid_t or t_default, grid_w=cfg.grid_w or w_default)


def _positive(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ConfigError(f"{where} must be a positive number")
    return float(v)


def _flag(v, where):
    if not isinstance(v, bool):
        raise ConfigError(f"{where} must be true or false")
    return v


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    return parse_config(data, hashlib.sha256(raw).hexdigest())


# ---------------------------------------------------------------------------
# Scene construction


@dataclass
class Scene:
    config: SceneConfig
    front: object
    spec: object
    general: object = None


def _curve(cfg):
    params = dict(cfg.curve)
    tag = params.pop("preset")
    if tag == "fourier":
        params.setdefault("c0", [0.0] * (cfg.n + 1))
    try:
        return preset_curve(tag, cfg.n, **params)
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad curve specification: {exc}") from None


def build_scene(cfg):
    """Curves, frames and fronts for a config. Geometry errors propagate."""
    curve = _curve(cfg)
    if cfg.kind == "mu":
        spec = MUFrontSpec(curve, Density.from_expression(cfg.density),
                           strict=cfg.strict_inflection)
        return Scene(cfg, build_mu_front(spec), spec)
    unit = arc_length_reparametrize(curve)
    initial = None if cfg.frame == "default" else np.asarray(cfg.frame, dtype=float)
    frame = integrate_bishop_frame(unit, initial_frame=initial)
    if cfg.kind == "flat":
        spec = FlatFrontSpec(unit, frame, Density.from_expression(cfg.density))
        return Scene(cfg, build_flat_front(spec), spec)
    gspec = GeneralRuledSpec(unit, frame, [Density.from_expression(d) for d in cfg.densities])
    general = build_general_front(gspec)
    reduced = normal_form_reduction(gspec)
    return Scene(cfg, build_flat_front(reduced), reduced, general)


__all__ = ["SceneConfig", "Scene", "parse_config", "load_config", "build_scene",
           "DEFAULT_TOLERANCES", "ConfigError", "FlatFrontError"]
