"""Time integration with blow-up detection, plus the characteristic flow.

Two integration routes:

- Euler-Maruyama on the Ito system dy = (-B - F) dt + G dW (any noise model,
  optionally with the mollified/truncated drift);
- classical RK4 on the random PDE obtained from the exponential
  transformation (linear noise only): d y~/dt = mu^{-1}(t) (-B - F)(y~),
  with W piecewise-linear inside a step.

Blow-up is declared operationally: the run stops when the discrete
W^{1,inf} norm (primary clock), the H^s norm, a non-finite state, or a
time-step underflow is reached.  The step halves whenever the W^{1,inf}
norm has doubled since the last halving.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    State,
    evaluate_at_points,
    sobolev_norm,
    state_norm,
    winf_norm,
)
from .operators import RegularizationParams, Tendency, drift, drift_regularized
from .stochastics import NoiseModel, diffusion, _generator
from .diagnostics import h1_energy, min_slope

SCHEMES = ("euler_maruyama", "rk4_random_pde", "euler_maruyama_regularized")


@dataclass(frozen=True)
class SimConfig:
    """Everything one trajectory needs besides its seed."""

    grid: Grid
    initial_state: State
    s: float
    dt: float
    t_end: float
    noise: NoiseModel = field(default_factory=NoiseModel.zero)
    scheme: str = "euler_maruyama"
    reg: RegularizationParams | None = None
    blowup_winf: float = 1.0e3
    blowup_hs: float = 1.0e6
    dt_min: float = 1.0e-10
    record_every: int = 1
    record_states: bool = False

    def validate(self) -> None:
        d = self.grid.d
        if self.s <= 1.0 + d / 2.0:
            raise ValueError(
                f"tracking index s = {self.s} violates the well-posedness "
                f"constraint s > 1 + d/2 = {1 + d / 2}"
            )
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.dt_min >= self.dt:
            raise ValueError("dt_min must be below the initial step")
        if self.blowup_winf <= 0 or self.blowup_hs <= 0:
            raise ValueError("blow-up thresholds must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.scheme == "euler_maruyama_regularized" and self.reg is None:
            raise ValueError("regularized scheme needs RegularizationParams")
        if self.scheme == "rk4_random_pde":
            if self.noise.kind not in ("zero", "linear"):
                raise ValueError("the random-PDE route applies to linear noise only")
            if self.noise.kind == "linear" and self.noise.c1 != self.noise.c2:
                raise ValueError(
                    "the exponential transformation needs equal amplitudes "
                    "on both components"
                )
        self.noise.validate_for_dimension(d)
        if self.initial_state.grid != self.grid:
            raise ValueError("initial state lives on a different grid")


@dataclass
class Trajectory:
    """Diagnostic time series plus terminal status for one realization."""

    times: np.ndarray
    hs_u: np.ndarray
    hs_gamma: np.ndarray
    winf: np.ndarray
    energy: np.ndarray
    min_slope: np.ndarray
    status: str  # survived | broke | dt_underflow
    t_star: float | None
    seed: int
    states: list | None = None
    wiener: np.ndarray | None = None  # (drivers, n_records), W at record times

    @property
    def broke(self) -> bool:
        return self.status == "broke"


def _apply_tendency(y: State, tend: Tendency, dt: float) -> State:
    return State(
        tuple(
            SpectralField(y.grid, ui.coeffs + dt * di.coeffs)
            for ui, di in zip(y.u, tend.du)
        ),
        SpectralField(y.grid, y.gamma.coeffs + dt * tend.dgamma.coeffs),
    )


def _state_finite(y: State) -> bool:
    return all(np.all(np.isfinite(f.coeffs)) for f in (*y.u, y.gamma))


def step_em(
    y: State,
    t: float,
    dt: float,
    dw: np.ndarray,
    model: NoiseModel,
    drift_mode: str = "plain",
    reg: RegularizationParams | None = None,
) -> State:
    """One Ito-forward step: y + drift dt + sum_j g_j dW_j."""
    tend = drift(y) if drift_mode == "plain" else drift_regularized(y, reg)
    out = _apply_tendency(y, tend, dt)
    for j, g in enumerate(diffusion(t, y, model)):
        out = _apply_tendency(out, g, float(dw[j]))
    return out


def _mu_inv(t: float, w: float, c: float) -> float:
    return float(np.exp(c * w - 0.5 * c * c * t))


def step_rk4_random(
    y: State, t: float, dt: float, w_start: float, w_end: float, c: float
) -> State:
    """Classical RK4 on dy/dt = mu^{-1}(t) drift(y), W linear in the step."""

    def mu_inv_at(tau: float) -> float:
        frac = (tau - t) / dt
        return _mu_inv(tau, w_start + frac * (w_end - w_start), c)

    def rhs(tau: float, state: State) -> Tendency:
        return drift(state).scaled(mu_inv_at(tau))

    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, _apply_tendency(y, k1, 0.5 * dt))
    k3 = rhs(t + 0.5 * dt, _apply_tendency(y, k2, 0.5 * dt))
    k4 = rhs(t + dt, _apply_tendency(y, k3, dt))

    out = y
    for k, w in ((k1, 1.0), (k2, 2.0), (k3, 2.0), (k4, 1.0)):
        out = _apply_tendency(out, k, dt * w / 6.0)
    return out


def simulate(config: SimConfig, seed: int) -> Trajectory:
    """Run one trajectory to t_end or to its stopping time."""
    config.validate()
    grid = config.grid
    d1 = grid.d == 1
    n_drivers = config.noise.n_drivers()
    rngs = [_generator(seed, j) for j in range(max(n_drivers, 1))]
    rk4 = config.scheme == "rk4_random_pde"
    c_lin = config.noise.c1 if config.noise.kind == "linear" else 0.0

    y = config.initial_state
    t = 0.0
    dt = config.dt
    w = np.zeros(max(n_drivers, 1)) if not rk4 else np.zeros(1)

    rec_t, rec_hsu, rec_hsg, rec_winf, rec_e, rec_h = [], [], [], [], [], []
    rec_states = [] if config.record_states else None
    rec_w = [] if config.record_states else None

    def record():
        rec_t.append(t)
        rec_hsu.append(
            float(np.sqrt(sum(sobolev_norm(ui, config.s) ** 2 for ui in y.u)))
        )
        rec_hsg.append(sobolev_norm(y.gamma, config.s))
        rec_winf.append(winf_norm(y))
        rec_e.append(h1_energy(y) if d1 else np.nan)
        rec_h.append(min_slope(y.u[0]) if d1 else np.nan)
        if rec_states is not None:
            rec_states.append(y)
            rec_w.append(w.copy())

    record()
    ref_winf = rec_winf[0]
    status, t_star = "survived", None
    step_index = 0

    with np.errstate(over="ignore", invalid="ignore"):
        while t < config.t_end - 1e-14:
            dt_step = min(dt, config.t_end - t)
            if rk4:
                dw = (
                    rngs[0].standard_normal() * np.sqrt(dt_step)
                    if config.noise.kind == "linear"
                    else 0.0
                )
                y_new = step_rk4_random(y, t, dt_step, w[0], w[0] + dw, c_lin)
                w_new = w + dw
            else:
                dw = np.array(
                    [rngs[j].standard_normal() for j in range(n_drivers)]
                ) * np.sqrt(dt_step)
                y_new = step_em(
                    y,
                    t,
                    dt_step,
                    dw,
                    config.noise,
                    drift_mode=(
                        "regularized"
                        if config.scheme == "euler_maruyama_regularized"
                        else "plain"
                    ),
                    reg=config.reg,
                )
                w_new = w.copy()
                w_new[:n_drivers] += dw

            y, t, w = y_new, t + dt_step, w_new
            step_index += 1

            if not _state_finite(y):
                status, t_star = "broke", t
                record()
                break

            cur_winf = winf_norm(y)
            if step_index % config.record_every == 0:
                record()
            if cur_winf >= config.blowup_winf or state_norm(y, config.s) >= config.blowup_hs:
                status, t_star = "broke", t
                if step_index % config.record_every != 0:
                    record()
                break
            if ref_winf > 0 and cur_winf >= 2.0 * ref_winf:
                dt *= 0.5
                ref_winf = cur_winf
                if dt < config.dt_min:
                    status, t_star = "dt_underflow", t
                    if step_index % config.record_every != 0:
                        record()
                    break

    if status == "survived" and rec_t[-1] < t - 1e-15:
        record()

    return Trajectory(
        times=np.array(rec_t),
        hs_u=np.array(rec_hsu),
        hs_gamma=np.array(rec_hsg),
        winf=np.array(rec_winf),
        energy=np.array(rec_e),
        min_slope=np.array(rec_h),
        status=status,
        t_star=t_star,
        seed=seed,
        states=rec_states,
        wiener=np.array(rec_w).T if rec_w else None,
    )


# ---------------------------------------------------------------------------
# characteristic flow (d = 1)


def characteristic_flow(
    times: np.ndarray,
    states: list,
    c: float,
    w_values: np.ndarray,
    x0: np.ndarray,
):
    """Integrate dPhi/dt = mu^{-1} u~(t, Phi) and the log of
    dPhi_x/dt = mu^{-1} u~_x(t, Phi) Phi_x with RK4 on the sampled grid.

    `states` holds the transformed solution at `times`; u~ is interpolated
    linearly in time between samples and evaluated off-grid by direct
    Fourier summation.  Returns (Phi, Phi_x) of shape (len(times), len(x0)).
    """
    grid = states[0].grid
    if grid.d != 1:
        raise ValueError("characteristic flow implemented for d = 1 only")
    x0 = np.asarray(x0, dtype=float)
    nt = len(times)
    phi = np.empty((nt, x0.size))
    log_phix = np.empty((nt, x0.size))
    phi[0] = x0
    log_phix[0] = 0.0

    ik = grid.deriv_factor[0]
    coeff = [st.u[0].coeffs for st in states]

    def velocity(tau, alpha, k, pts):
        ck = (1.0 - alpha) * coeff[k] + alpha * coeff[k + 1]
        f = SpectralField(grid, ck)
        fx = SpectralField(grid, ck * ik)
        w_tau = (1.0 - alpha) * w_values[k] + alpha * w_values[k + 1]
        mi = _mu_inv(tau, w_tau, c)
        return mi * evaluate_at_points(f, pts), mi * evaluate_at_points(fx, pts)

    for k in range(nt - 1):
        t0, h = times[k], times[k + 1] - times[k]
        p = phi[k]
        lp = log_phix[k]

        k1, l1 = velocity(t0, 0.0, k, p)
        k2, l2 = velocity(t0 + 0.5 * h, 0.5, k, p + 0.5 * h * k1)
        k3, l3 = velocity(t0 + 0.5 * h, 0.5, k, p + 0.5 * h * k2)
        k4, l4 = velocity(t0 + h, 1.0, k, p + h * k3)

        phi[k + 1] = p + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        log_phix[k + 1] = lp + h / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4)

    return phi, np.exp(log_phix)
