"""Wiener paths, diffusion-coefficient models, and the exponential
change of variables that removes linear multiplicative noise.

Noise structure: the linear and polynomial models drive both components
with one shared scalar Brownian motion (the setting of the global-existence
and wave-breaking results); the finite-mode model attaches one independent
driver per shaped mode.  Paths are generated with the counter-based Philox
generator keyed by (seed, driver), so ensemble members are reproducible
independent of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralField, State, sobolev_norm, to_physical
from .operators import Tendency
from .spectral import dealias


def _generator(seed: int, driver: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.random.SeedSequence((int(seed), int(driver))).generate_state(4, dtype=np.uint64)))


@dataclass(frozen=True)
class WienerPath:
    """Seeded Brownian increments over a uniform time grid, one row per driver."""

    seed: int
    dt: float
    increments: np.ndarray = field(repr=False)  # (drivers, steps)
    cumulative: np.ndarray = field(repr=False)  # (drivers, steps + 1)

    @property
    def drivers(self) -> int:
        return self.increments.shape[0]

    @property
    def steps(self) -> int:
        return self.increments.shape[1]

    def value(self, t: float, driver: int = 0) -> float:
        """W(t) by piecewise-linear interpolation between grid nodes."""
        s = t / self.dt
        k = int(np.floor(s))
        k = min(max(k, 0), self.steps - 1)
        frac = s - k
        w = self.cumulative[driver]
        return float(w[k] + frac * (w[k + 1] - w[k]))

    def coarsen(self, factor: int) -> "WienerPath":
        """The same Brownian path sampled at dt * factor (summed increments)."""
        if self.steps % factor != 0:
            raise ValueError("step count not divisible by coarsening factor")
        inc = self.increments.reshape(self.drivers, -1, factor).sum(axis=2)
        cum = np.concatenate(
            [np.zeros((self.drivers, 1)), np.cumsum(inc, axis=1)], axis=1
        )
        return WienerPath(self.seed, self.dt * factor, inc, cum)


def sample_path(seed: int, dt: float, steps: int, drivers: int = 1) -> WienerPath:
    """Independent N(0, dt) increments per driver; deterministic in its key."""
    if dt <= 0.0:
        raise ValueError(f"step size must be positive, got {dt}")
    inc = np.empty((drivers, steps))
    for j in range(drivers):
        inc[j] = _generator(seed, j).standard_normal(steps) * np.sqrt(dt)
    cum = np.concatenate([np.zeros((drivers, 1)), np.cumsum(inc, axis=1)], axis=1)
    return WienerPath(seed, dt, inc, cum)


# ---------------------------------------------------------------------------
# diffusion models


@dataclass(frozen=True)
class NoiseModel:
    """Diffusion-coefficient specification.

    kind 'zero': no noise.
    kind 'linear': (c1 u, c2 gamma) dW with one shared scalar W.
    kind 'polynomial': (c1 ||u||^{d1}_{H^sn} u, c2 ||gamma||^{d2}_{H^sn} gamma) dW.
    kind 'finite_mode': one driver per entry of mode_coeffs, each applying
        amp * Lambda^{-2}(shape(x) * y) with shape = cos(m.x); the smoothing
        keeps the coefficients within a linear growth bound in ||y||_{H^s}.
    """

    kind: str
    c1: float = 0.0
    c2: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    s_norm: float = 2.0
    mode_coeffs: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "polynomial", "finite_mode"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "polynomial" and (self.delta1 < 0 or self.delta2 < 0):
            raise ValueError("polynomial intensities must be nonnegative")

    @staticmethod
    def zero() -> "NoiseModel":
        return NoiseModel("zero")

    @staticmethod
    def linear(c1: float, c2: float | None = None) -> "NoiseModel":
        return NoiseModel("linear", c1=c1, c2=c1 if c2 is None else c2)

    @staticmethod
    def polynomial(c1, delta1, c2, delta2, s_norm) -> "NoiseModel":
        return NoiseModel(
            "polynomial", c1=c1, c2=c2, delta1=delta1, delta2=delta2, s_norm=s_norm
        )

    @staticmethod
    def finite_mode(mode_coeffs) -> "NoiseModel":
        return NoiseModel("finite_mode", mode_coeffs=tuple(mode_coeffs))

    def n_drivers(self) -> int:
        if self.kind == "zero":
            return 0
        if self.kind == "finite_mode":
            return len(self.mode_coeffs)
        return 1

    def validate_for_dimension(self, d: int) -> None:
        if self.kind == "polynomial" and self.s_norm <= 1.0 + d / 2.0:
            raise ValueError(
                f"polynomial noise requires s_norm > 1 + d/2 = {1 + d / 2}, "
                f"got {self.s_norm}"
            )


def _scaled_state_tendency(y: State, cu: float, cg: float) -> Tendency:
    du = tuple(SpectralField(y.grid, cu * ui.coeffs) for ui in y.u)
    return Tendency(du, SpectralField(y.grid, cg * y.gamma.coeffs))


def diffusion(t: float, y: State, model: NoiseModel) -> list:
    """Diffusion coefficients, one Tendency per scalar driver."""
    if model.kind == "zero":
        return []
    if model.kind == "linear":
        return [_scaled_state_tendency(y, model.c1, model.c2)]
    if model.kind == "polynomial":
        model.validate_for_dimension(y.grid.d)
        nu = np.sqrt(sum(sobolev_norm(ui, model.s_norm) ** 2 for ui in y.u))
        ng = sobolev_norm(y.gamma, model.s_norm)
        cu = model.c1 * nu ** model.delta1
        cg = model.c2 * ng ** model.delta2
        return [_scaled_state_tendency(y, cu, cg)]

    out = []
    grid = y.grid
    pts = grid.points()
    lam = 1.0 + grid.modes_sq
    for amp, mode in model.mode_coeffs:
        mode = (mode,) if np.isscalar(mode) else tuple(mode)
        shape = np.cos(sum(mi * xi for mi, xi in zip(mode, pts)))

        def smooth(f: SpectralField) -> SpectralField:
            prod = shape * to_physical(f)
            c = dealias(grid, np.fft.rfftn(prod) / prod.size)
            return SpectralField(grid, amp * c / lam)

        out.append(Tendency(tuple(smooth(ui) for ui in y.u), smooth(y.gamma)))
    return out


# ---------------------------------------------------------------------------
# exponential transformation


def mu(t: float, w_t: float, c: float) -> float:
    """mu(t) = exp(c^2 t / 2 - c W(t)); maps the linear-noise system to a
    pathwise-deterministic random PDE."""
    return float(np.exp(0.5 * c * c * t - c * w_t))


def transform_state(y: State, mu_t: float) -> State:
    if mu_t <= 0.0:
        raise ValueError(f"mu must be positive, got {mu_t}")
    return State(
        tuple(SpectralField(y.grid, mu_t * ui.coeffs) for ui in y.u),
        SpectralField(y.grid, mu_t * y.gamma.coeffs),
    )


def untransform_state(y_tilde: State, mu_t: float) -> State:
    return transform_state(y_tilde, 1.0 / mu_t)
