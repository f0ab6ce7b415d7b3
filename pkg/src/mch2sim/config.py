"""Flat dotted-key configuration format.

One `key = value` pair per line, `#` starts a comment, unknown keys are
rejected with the offending line number.  The schema below documents every
key, its type, and its default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, State, from_physical
from .operators import RegularizationParams
from .stochastics import NoiseModel
from .dynamics import SCHEMES, SimConfig


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (type constructor, default or REQUIRED, help)
REQUIRED = object()
SCHEMA = {
    "grid.d": (int, 1, "spatial dimension, 1 or 2"),
    "grid.n": (int, 256, "collocation points per dimension (power of two)"),
    "grid.dealias_fraction": (float, 2.0 / 3.0, "retained fraction of modes"),
    "sim.s": (float, 2.0, "Sobolev tracking index, must exceed 1 + d/2"),
    "sim.dt": (float, REQUIRED, "initial time step"),
    "sim.t_end": (float, REQUIRED, "time horizon"),
    "sim.scheme": (str, "euler_maruyama", f"one of {SCHEMES}"),
    "sim.record_every": (int, 1, "steps between diagnostic records"),
    "sim.record_states": (_parse_bool, False, "retain full states per record"),
    "sim.blowup_winf": (float, 1.0e3, "W^{1,inf} blow-up threshold"),
    "sim.blowup_hs": (float, 1.0e6, "H^s blow-up threshold"),
    "sim.dt_min": (float, 1.0e-10, "time-step underflow floor"),
    "noise.kind": (str, "zero", "zero | linear | polynomial | finite_mode"),
    "noise.c1": (float, 0.0, "velocity noise amplitude"),
    "noise.c2": (float, 0.0, "density noise amplitude"),
    "noise.delta1": (float, None, "velocity intensity exponent (polynomial)"),
    "noise.delta2": (float, None, "density intensity exponent (polynomial)"),
    "noise.s_norm": (float, None, "Sobolev index inside polynomial coefficients"),
    "reg.epsilon": (float, None, "mollifier scale for the regularized drift"),
    "reg.R": (float, None, "truncation radius for the regularized drift"),
    "init.kind": (str, "smooth", "zero | smooth | steep_slope | approx_family"),
    "init.scale": (float, 0.35, "amplitude of the initial data"),
    "init.slope": (float, 10.0, "target slope magnitude (steep_slope)"),
    "init.margin": (float, 2.0, "shape-condition margin (steep_slope)"),
    "init.lam": (float, 0.5, "lambda of the shape condition (steep_slope)"),
    "init.n": (int, 8, "family frequency (approx_family)"),
    "init.kappa": (int, 1, "family sign (approx_family)"),
    "seed": (int, 0, "base seed (env MCH2_SEED overrides)"),
}


def parse_config(text: str) -> dict:
    """Parse and validate; returns a flat {key: typed value} dict with
    defaults applied."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        ctor = SCHEMA[key][0]
        try:
            values[key] = ctor(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc

    for key, (_, default, _) in SCHEMA.items():
        if key in values:
            continue
        if default is REQUIRED:
            raise ConfigError(f"missing required key {key!r}")
        if default is not None:
            values[key] = default

    _cross_validate(values)
    return values


def _cross_validate(v: dict) -> None:
    d = v["grid.d"]
    if v["sim.s"] <= 1.0 + d / 2.0:
        raise ConfigError(
            f"sim.s = {v['sim.s']} violates the well-posedness constraint "
            f"s > 1 + d/2 = {1.0 + d / 2.0}"
        )
    kind = v["noise.kind"]
    if kind == "polynomial":
        for needed in ("noise.delta1", "noise.delta2", "noise.s_norm"):
            if needed not in v:
                raise ConfigError(f"noise.kind=polynomial requires key {needed!r}")
        if v["noise.s_norm"] <= 1.0 + d / 2.0:
            raise ConfigError(
                f"noise.s_norm = {v['noise.s_norm']} must exceed 1 + d/2"
            )
    if v["sim.scheme"] == "euler_maruyama_regularized":
        for needed in ("reg.epsilon", "reg.R"):
            if needed not in v:
                raise ConfigError(f"the regularized scheme requires key {needed!r}")
    if v["init.kind"] == "approx_family" and d % 2 == 1:
        raise ConfigError("init.kind=approx_family requires even grid.d")


def build_noise(v: dict) -> NoiseModel:
    kind = v["noise.kind"]
    if kind == "zero":
        return NoiseModel.zero()
    if kind == "linear":
        return NoiseModel.linear(v["noise.c1"], v["noise.c2"])
    if kind == "polynomial":
        return NoiseModel.polynomial(
            v["noise.c1"], v["noise.delta1"], v["noise.c2"], v["noise.delta2"],
            v["noise.s_norm"],
        )
    raise ConfigError("finite_mode noise is constructed programmatically")


def build_initial_state(v: dict, grid: Grid) -> State:
    from .spectral import zero_state
    from .experiments import ApproxFamilyParams, approx_solution, steep_slope_data

    kind = v["init.kind"]
    a = v["init.scale"]
    if kind == "zero":
        return zero_state(grid)
    if kind == "smooth":
        pts = grid.points()
        if grid.d == 1:
            x = pts[0]
            u = (from_physical(grid, a * np.sin(x)),)
            gamma = from_physical(grid, a * np.cos(x))
        else:
            x1, x2 = pts
            u = (
                from_physical(grid, a * np.sin(x2)),
                from_physical(grid, a * np.sin(x1)),
            )
            gamma = from_physical(grid, a * np.cos(x1))
        return State(u, gamma)
    if kind == "steep_slope":
        u0, g0 = steep_slope_data(
            grid, v["init.slope"], v["noise.c1"] or 1e-6, v["init.lam"],
            slope_margin=v["init.margin"],
        )
        return State((u0,), g0)
    if kind == "approx_family":
        s = v["sim.s"]
        sigma = (grid.d / 2.0 + min(s - 1.0, 1.0 + grid.d / 2.0)) / 2.0
        p = ApproxFamilyParams(
            kappa=v["init.kappa"], n=v["init.n"], s=s, sigma=sigma, d=grid.d
        )
        return approx_solution(p, grid, 0.0)
    raise ConfigError(f"unknown init.kind {kind!r}")


def build_sim_config(v: dict) -> SimConfig:
    grid = Grid(
        d=v["grid.d"], n_per_dim=v["grid.n"],
        dealias_fraction=v["grid.dealias_fraction"],
    )
    reg = None
    if "reg.epsilon" in v and "reg.R" in v:
        reg = RegularizationParams(epsilon=v["reg.epsilon"], R=v["reg.R"])
    cfg = SimConfig(
        grid=grid,
        initial_state=build_initial_state(v, grid),
        s=v["sim.s"],
        dt=v["sim.dt"],
        t_end=v["sim.t_end"],
        noise=build_noise(v),
        scheme=v["sim.scheme"],
        reg=reg,
        blowup_winf=v["sim.blowup_winf"],
        blowup_hs=v["sim.blowup_hs"],
        dt_min=v["sim.dt_min"],
        record_every=v["sim.record_every"],
        record_states=v["sim.record_states"],
    )
    cfg.validate()
    return cfg
