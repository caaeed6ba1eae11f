"""Flat ``section.key = value`` configuration files and the objects they describe.

Example::

    potential.name = quartic
    weight.kind = linear
    weight.slope = 1
    problem.mass = 1
    sweep.eps = 0.1, 0.05, 0.02, 0.01, 0.005

A ``[section]`` line prefixes the keys that follow it. ``#`` starts a comment.
"""
from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .isoperimetry import (CanonicalSet, build_modified_profile, constant_weight,
                           levelset_weight, linear_weight, load_iso_profile, load_weight,
                           rearranged_weight, solve_volume_function, square_iso_profile)
from .potential import Potential, potential_from_config

_MISSING = object()


def parse_config(text: str) -> dict:
    cfg: dict[str, str] = {}
    prefix = ""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            prefix = line[1:-1].strip()
            prefix = prefix + "." if prefix else ""
            continue
        if "=" in line:
            key, val = line.split("=", 1)
        elif ":" in line:
            key, val = line.split(":", 1)
        else:
            raise ConfigError(f"cannot parse config line: {raw!r}")
        cfg[prefix + key.strip()] = val.strip()
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cfg = parse_config(path.read_text())
    cfg.setdefault("_dir", str(path.parent))
    return cfg


def scenario_names() -> list[str]:
    root = resources.files("gamma2") / "data" / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_scenario(name: str) -> dict:
    root = resources.files("gamma2") / "data" / "scenarios"
    f = root / f"{name}.cfg"
    if not f.is_file():
        raise ConfigError(f"unknown scenario '{name}' (known: {', '.join(scenario_names())})")
    cfg = parse_config(f.read_text())
    cfg["_scenario"] = name
    return cfg


def get(cfg: dict, key: str, kind=str, default=_MISSING):
    if key not in cfg:
        if default is _MISSING:
            raise ConfigError(f"missing key '{key}'")
        return default
    raw = cfg[key]
    try:
        if kind is bool:
            return str(raw).lower() in ("1", "true", "yes", "on")
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for '{key}': {raw!r}") from exc


def section(cfg: dict, name: str) -> dict:
    pre = name + "."
    return {k[len(pre):]: v for k, v in cfg.items() if k.startswith(pre)}


def resolve_path(cfg: dict, value: str) -> Path:
    p = Path(value)
    if not p.is_absolute() and "_dir" in cfg:
        p = Path(cfg["_dir"]) / p
    if not p.exists():
        raise ConfigError(f"referenced file does not exist: {p}")
    return p


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list: {text!r}") from exc


def build_potential(cfg: dict) -> Potential:
    sec = section(cfg, "potential")
    if "file" in sec:
        sec["file"] = str(resolve_path(cfg, sec["file"]))
    return potential_from_config(sec)


def build_iso(cfg: dict):
    """Base profile (``iso.profile`` = square or a CSV path) and I* pinned at ``iso.v_m``."""
    kind = get(cfg, "iso.profile", str, "square")
    base = square_iso_profile() if kind == "square" else load_iso_profile(
        resolve_path(cfg, kind), n=get(cfg, "iso.n", int, 2))
    v_m = get(cfg, "iso.v_m", float, 0.4)
    beta = get(cfg, "iso.beta", float, 1.0)
    c0 = get(cfg, "iso.C0", float, None)
    delta = get(cfg, "iso.delta_tail", float, None)
    istar = build_modified_profile(base, v_m, beta=beta, C0=c0, delta_tail=delta)
    return base, istar


def build_weight(cfg: dict):
    """Weight and, for level-set weights, the canonical set (else ``None``)."""
    kind = get(cfg, "weight.kind", str, "linear")
    lo = get(cfg, "weight.lo", float, -1.0)
    hi = get(cfg, "weight.hi", float, 1.0)
    if kind == "linear":
        return linear_weight(get(cfg, "weight.intercept", float, 1.0),
                             get(cfg, "weight.slope", float, 1.0), lo, hi), None
    if kind == "constant":
        return constant_weight(get(cfg, "weight.value", float, 1.0), lo, hi), None
    if kind == "levelset":
        cset = CanonicalSet(get(cfg, "weight.set"), get(cfg, "weight.size", float),
                            get(cfg, "weight.n", int, 2))
        return levelset_weight(cset), cset
    if kind == "rearranged":
        _, istar = build_iso(cfg)
        dom = solve_volume_function(istar)
        return rearranged_weight(dom, istar), None
    if kind == "table":
        return load_weight(resolve_path(cfg, get(cfg, "weight.file"))), None
    raise ConfigError(f"unknown weight.kind '{kind}'")


def eps_sweep(cfg: dict) -> list[float]:
    if "sweep.eps" in cfg:
        eps = float_list(cfg["sweep.eps"])
    else:
        eps = list(np.geomspace(get(cfg, "sweep.eps_max", float, 1e-1),
                                get(cfg, "sweep.eps_min", float, 1e-3),
                                get(cfg, "sweep.count", int, 7)))
    if any(e <= 0 or not math.isfinite(e) for e in eps):
        raise ConfigError("eps values must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps values must be strictly decreasing")
    return [float(e) for e in eps]
