"""Conserved and monitored quantities, and the wave-breaking predicates.

All quantities here follow the physical-integral convention
E = int_T (u^2 + u_x^2 + gamma^2 + gamma_x^2) dx, so that the breaking
threshold, the slope barrier -sqrt(E(0)) and the Riccati window are
mutually consistent (the coefficient-sum H^s norm is never mixed in).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    SpectralField,
    State,
    bessel_potential,
    evaluate_at_points,
    gradient,
    integrate_physical,
    oversampled_values,
    sobolev_norm,
    to_physical,
)


def h1_energy(y: State) -> float:
    """E = int(u^2 + u_x^2 + gamma^2 + gamma_x^2) dx by spectral quadrature
    (d = 1); conserved along the transformed random PDE."""
    if y.grid.d != 1:
        raise ValueError("the H^1 energy is a one-dimensional diagnostic")
    u, gamma = y.u[0], y.gamma
    total = 0.0
    for f in (u, gradient(u)[0], gamma, gradient(gamma)[0]):
        v = to_physical(f)
        total += integrate_physical(v * v, y.grid)
    return total


def h1_norm_physical(f: SpectralField) -> float:
    """sqrt(int(f^2 + f_x^2) dx), the H^1 norm in the integral convention."""
    v = to_physical(f)
    vx = to_physical(gradient(f)[0])
    return float(
        np.sqrt(
            integrate_physical(v * v, f.grid) + integrate_physical(vx * vx, f.grid)
        )
    )


def min_slope(u: SpectralField) -> float:
    """H = inf_x u_x over a 4x-oversampled grid (collocation minima
    under-resolve steep slopes near breaking)."""
    if u.grid.d != 1:
        raise ValueError("min_slope is a one-dimensional diagnostic")
    ux = SpectralField(u.grid, u.coeffs * u.grid.deriv_factor[0])
    return float(np.min(oversampled_values(ux, factor=4)))


@dataclass(frozen=True)
class BreakingAssessment:
    """Shape-condition verdict for initial data (u0, gamma0)."""

    threshold: float
    min_slope0: float
    satisfied: bool
    sigma1: float
    sigma2: float
    predicted_window: float | None
    energy0: float


def breaking_condition(
    u0: SpectralField, gamma0: SpectralField, c: float, lam: float
) -> BreakingAssessment:
    """Check inf_x u0' < -c^2/(2 lam) - sqrt(c^4/(4 lam^2) + E(0)) with
    E(0) = ||u0||_{H^1}^2 + ||gamma0||_{H^1}^2 in the integral convention.

    Also returns the roots sigma_{1,2} of lam x^2 + c^2 x - lam E(0) = 0
    (sigma2 is the threshold) and the deterministic Riccati window.
    """
    if u0.grid.d != 1:
        raise ValueError("the breaking criterion applies in one dimension")
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0,1), got {lam}")
    if c == 0.0:
        raise ValueError("the criterion is stated for nonzero noise amplitude")

    e0 = h1_norm_physical(u0) ** 2 + h1_norm_physical(gamma0) ** 2
    disc = np.sqrt(c ** 4 + 4.0 * lam * lam * e0)
    sigma1 = (-c * c + disc) / (2.0 * lam)
    sigma2 = (-c * c - disc) / (2.0 * lam)
    h0 = min_slope(u0)
    return BreakingAssessment(
        threshold=sigma2,
        min_slope0=h0,
        satisfied=h0 < sigma2,
        sigma1=sigma1,
        sigma2=sigma2,
        predicted_window=riccati_window(h0, e0, c, lam),
        energy0=e0,
    )


def riccati_window(h0: float, e0: float, c: float, lam: float) -> float | None:
    """Deterministic-path upper bound on the breaking time from
    dH/dt <= -H^2/2 + E(0)/2: t* solving -1/H0 = (1 - E0/H0^2) t / 2.

    Valid (returns a value) only under the barrier H0 < -sqrt(E0); this is
    an oracle for the c -> 0 reduction, not a pathwise guarantee.  The noise
    parameters are accepted for interface symmetry but do not enter the
    deterministic bound.
    """
    del c, lam
    if e0 < 0:
        raise ValueError("energy must be nonnegative")
    if h0 >= -np.sqrt(e0):
        return None
    return float(-2.0 / h0 / (1.0 - e0 / (h0 * h0)))


def log_norm_functional(y: State, s: float) -> float:
    """ln(e + ||u||_{H^s}^2) + ln(e + ||gamma||_{H^s}^2); grows at most
    affinely in t along the global-existence regimes."""
    nu2 = sum(sobolev_norm(ui, s) ** 2 for ui in y.u)
    ng2 = sobolev_norm(y.gamma, s) ** 2
    return float(np.log(np.e + nu2) + np.log(np.e + ng2))


def transport_residual(trajectory, c: float, x_samples: np.ndarray) -> float:
    """sup |rho~(t, Phi(t,x)) Phi_x(t,x) - rho_0(x)| over samples and records.

    `trajectory` must carry transformed states (record_states=True run of the
    random-PDE scheme); rho~ = Lambda^2 gamma~ is evaluated along the flow by
    Fourier summation.
    """
    from .dynamics import characteristic_flow

    if trajectory.states is None or trajectory.wiener is None:
        raise ValueError("transport residual needs a trajectory with states")
    states = trajectory.states
    grid = states[0].grid
    if grid.d != 1:
        raise ValueError("the transport identity is one-dimensional")

    x_samples = np.asarray(x_samples, dtype=float)
    phi, phix = characteristic_flow(
        trajectory.times, states, c, trajectory.wiener[0], x_samples
    )
    rho0 = evaluate_at_points(states[0].density(), x_samples)

    worst = 0.0
    for k, st in enumerate(states):
        rho_k = evaluate_at_points(st.density(), phi[k])
        worst = max(worst, float(np.max(np.abs(rho_k * phix[k] - rho0))))
    return worst
