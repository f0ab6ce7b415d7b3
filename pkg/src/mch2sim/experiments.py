"""Quantitative experiment drivers: the explicit cosine family and its
residual decay, the nonuniform-continuity gap, steep-slope breaking data,
and Monte Carlo ensembles for the global-existence regimes.

The explicit family (even d) is

    u_i(x, t) = kappa/n + n^{-s} cos(eta_i),   eta_i = n x_{d+1-i} - kappa t,

a divergence-free velocity; the scalar density deviation is realized as the
first component's pattern gamma = kappa/n + n^{-s} cos(eta_1).  (The family
is formally stated with a d-vector density; taking the first component is
the scalar realization, and the residual closed forms below are the
component-wise reductions for it.)
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    State,
    bessel_potential,
    dealias,
    from_physical,
    sobolev_norm,
    state_norm,
)
from .operators import Tendency, drift
from .stochastics import NoiseModel
from .diagnostics import breaking_condition, h1_norm_physical
from .dynamics import SimConfig, simulate


@dataclass(frozen=True)
class ApproxFamilyParams:
    """Parameters of the explicit travelling-cosine family."""

    kappa: int
    n: int
    s: float
    sigma: float
    d: int
    T: float = 1.0

    def __post_init__(self):
        if self.kappa not in (1, -1):
            raise ValueError("kappa must be +1 or -1")
        if self.n < 2:
            raise ValueError("frequency must be an integer >= 2")
        if self.s <= 1.0 + self.d / 2.0:
            raise ValueError("family requires s > 1 + d/2 (empty sigma window)")
        lo, hi = self.d / 2.0, min(self.s - 1.0, 1.0 + self.d / 2.0)
        if not lo < self.sigma < hi:
            raise ValueError(
                f"sigma = {self.sigma} outside the window ({lo}, {hi})"
            )
        if self.d % 2 == 1:
            raise ValueError(
                "odd dimensions degenerate to inactive components; "
                "only the even-dimensional family is realized"
            )


def _check_resolution(p: ApproxFamilyParams, grid: Grid) -> None:
    if grid.d != p.d:
        raise ValueError("grid dimension does not match family dimension")
    if p.n > grid.cutoff // 2:
        raise ValueError(
            f"frequency n = {p.n} under-resolved: need n <= K/2 = "
            f"{grid.cutoff // 2} so quadratic products stay alias-free"
        )


def _eta(p: ApproxFamilyParams, grid: Grid, i: int, t: float) -> np.ndarray:
    """Phase of component i (1-based): n x_{d+1-i} - kappa t."""
    axis = p.d - i  # 0-based axis of coordinate x_{d+1-i}
    return p.n * grid.points()[axis] - p.kappa * t


def approx_solution(p: ApproxFamilyParams, grid: Grid, t: float) -> State:
    """The family member at time t as a simulable State (scalar gamma)."""
    _check_resolution(p, grid)
    amp = float(p.n) ** (-p.s)
    off = p.kappa / p.n
    u = tuple(
        from_physical(grid, off + amp * np.cos(_eta(p, grid, i, t)))
        for i in range(1, p.d + 1)
    )
    gamma = from_physical(grid, off + amp * np.cos(_eta(p, grid, 1, t)))
    return State(u, gamma)


def approx_time_derivative(p: ApproxFamilyParams, grid: Grid, t: float) -> Tendency:
    """d/dt of the family in closed form: kappa n^{-s} sin(eta_i)."""
    amp = p.kappa * float(p.n) ** (-p.s)
    du = tuple(
        from_physical(grid, amp * np.sin(_eta(p, grid, i, t)))
        for i in range(1, p.d + 1)
    )
    dgamma = from_physical(grid, amp * np.sin(_eta(p, grid, 1, t)))
    return Tendency(du, dgamma)


def closed_form_residual(p: ApproxFamilyParams, grid: Grid, t: float) -> Tendency:
    """The spatial residual d_t y + B + F of the family, assembled term by
    term from the exact single-mode evaluations of each operator piece.

    Writing A_i = sin(eta_i) cos(eta_{d+1-i}), B_i = sin cos(eta_{d+1-i}),
    the velocity residual is

      -n^{1-2s} A_i
      + Lam^{-2}[ n^{3-2s} A_i - (n^{3-2s} + n^{1-2s}) B_i
                  - kappa n^{-s} sin(eta_{d+1-i}) ]
      + delta_{i,d} Lam^{-2}[ -kappa n^{-s} sin(eta_1)
                              - (n^{3-2s} + n^{1-2s}) B_d ],

    and the density residual is -n^{1-2s} A_1 + Lam^{-2}[n^{3-2s} A_1].
    """
    _check_resolution(p, grid)
    n, s, kappa, d = float(p.n), p.s, p.kappa, p.d

    def lam_inv2(vals: np.ndarray) -> SpectralField:
        return bessel_potential(from_physical(grid, vals), -2.0)

    du = []
    for i in range(1, d + 1):
        eta_i = _eta(p, grid, i, t)
        eta_ci = _eta(p, grid, d + 1 - i, t)
        a_i = np.sin(eta_i) * np.cos(eta_ci)
        b_i = np.sin(eta_ci) * np.cos(eta_ci)
        direct = -(n ** (1 - 2 * s)) * a_i
        nonlocal_part = (
            n ** (3 - 2 * s) * a_i
            - (n ** (3 - 2 * s) + n ** (1 - 2 * s)) * b_i
            - kappa * n ** (-s) * np.sin(eta_ci)
        )
        if i == d:
            eta1 = _eta(p, grid, 1, t)
            nonlocal_part = nonlocal_part + (
                -kappa * n ** (-s) * np.sin(eta1)
                - (n ** (3 - 2 * s) + n ** (1 - 2 * s))
                * np.sin(eta1)
                * np.cos(eta1)
            )
        total = from_physical(grid, direct).coeffs + lam_inv2(nonlocal_part).coeffs
        du.append(SpectralField(grid, total))

    eta1 = _eta(p, grid, 1, t)
    eta_c1 = _eta(p, grid, d, t)
    a_1 = np.sin(eta1) * np.cos(eta_c1)
    dgamma = SpectralField(
        grid,
        from_physical(grid, -(n ** (1 - 2 * s)) * a_1).coeffs
        + lam_inv2(n ** (3 - 2 * s) * a_1).coeffs,
    )
    return Tendency(tuple(du), dgamma)


def spatial_residual(p: ApproxFamilyParams, grid: Grid, t: float) -> Tendency:
    """r(t) = d_t y - drift(y) evaluated spectrally on the family."""
    y = approx_solution(p, grid, t)
    dy = approx_time_derivative(p, grid, t)
    dr = drift(y)
    du = tuple(
        SpectralField(grid, a.coeffs - b.coeffs) for a, b in zip(dy.du, dr.du)
    )
    return Tendency(du, SpectralField(grid, dy.dgamma.coeffs - dr.dgamma.coeffs))


def _tendency_norm(t: Tendency, sigma: float) -> float:
    total = sum(sobolev_norm(f, sigma) ** 2 for f in t.du)
    total += sobolev_norm(t.dgamma, sigma) ** 2
    return float(np.sqrt(total))


def residual_error(
    p: ApproxFamilyParams, grid: Grid, t_grid: np.ndarray
) -> np.ndarray:
    """||E(t)||_{H^sigma} on t_grid, E(t) = int_0^t r; per-interval Simpson
    (midpoint rule) in time, zero-noise evaluation."""
    _check_resolution(p, grid)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0:
        raise ValueError("the residual integral starts at t = 0")

    acc_u = [np.zeros(grid.spectral_shape, dtype=complex) for _ in range(p.d)]
    acc_g = np.zeros(grid.spectral_shape, dtype=complex)
    out = np.empty(t_grid.size)

    r_left = spatial_residual(p, grid, t_grid[0])
    out[0] = 0.0
    for k in range(t_grid.size - 1):
        h = t_grid[k + 1] - t_grid[k]
        r_mid = spatial_residual(p, grid, t_grid[k] + 0.5 * h)
        r_right = spatial_residual(p, grid, t_grid[k + 1])
        for i in range(p.d):
            acc_u[i] += (h / 6.0) * (
                r_left.du[i].coeffs
                + 4.0 * r_mid.du[i].coeffs
                + r_right.du[i].coeffs
            )
        acc_g += (h / 6.0) * (
            r_left.dgamma.coeffs + 4.0 * r_mid.dgamma.coeffs + r_right.dgamma.coeffs
        )
        e = Tendency(
            tuple(SpectralField(grid, c.copy()) for c in acc_u),
            SpectralField(grid, acc_g.copy()),
        )
        out[k + 1] = _tendency_norm(e, p.sigma)
        r_left = r_right
    return out


def grid_for_frequency(n: int, d: int, min_n: int = 64) -> Grid:
    """Smallest power-of-two grid whose dealias band resolves quadratic
    products of mode-n fields (2n <= K)."""
    size = min_n
    while int(math.floor(size / 3)) < 2 * n:
        size *= 2
    return Grid(d=d, n_per_dim=size)


def decay_fit(
    s: float,
    sigma: float,
    d: int,
    n_values,
    T: float = 1.0,
    time_intervals: int = 8,
    kappa: int = 1,
    min_grid: int = 64,
):
    """Least-squares decay exponent of ||E(T)|| against n.

    Returns (theta_hat, fit_rms, errors) with errors the list of terminal
    residual norms, one per n.
    """
    n_values = list(n_values)
    if len(n_values) < 4:
        raise ValueError("need at least four frequencies for a stable fit")
    errors = []
    t_grid = np.linspace(0.0, T, time_intervals + 1)
    for n in n_values:
        p = ApproxFamilyParams(kappa=kappa, n=n, s=s, sigma=sigma, d=d, T=T)
        grid = grid_for_frequency(n, d, min_n=min_grid)
        errors.append(residual_error(p, grid, t_grid)[-1])
    errors = np.array(errors)
    if np.any(errors <= 0):
        raise ValueError("degenerate fit: zero residual encountered")
    logn = np.log(np.array(n_values, dtype=float))
    loge = np.log(errors)
    coeffs, residuals, *_ = np.polyfit(logn, loge, 1, full=True)
    slope = coeffs[0]
    rms = float(np.sqrt(residuals[0] / len(n_values))) if len(residuals) else 0.0
    return float(-slope), rms, errors


def expected_decay_exponent(s: float, sigma: float) -> float:
    """The piecewise decay rate: 2s - sigma - 1 for s <= 3, s - sigma + 2 above."""
    return 2.0 * s - sigma - 1.0 if s <= 3.0 else s - sigma + 2.0


# ---------------------------------------------------------------------------
# nonuniform-continuity gap


def family_gap(n: int, s: float, d: int, T: float) -> float:
    """sup_{t<=T} distance between the kappa = +1 and kappa = -1 family
    members, evaluated in closed form.

    Per velocity component the difference is 2/n + 2 n^{-s} sin(n x) sin(t);
    the density contributes the oscillatory pattern of each component (its
    mean offset is a single scalar, not one per component, and is dropped
    from the gap functional).  Hence

        gap(t)^2 = 4d/n^2 + 4d sin^2(t) (1 + n^{-2})^s .
    """
    if d % 2 == 1:
        raise ValueError("the explicit family requires even d")
    sup_sin = 1.0 if T >= np.pi / 2.0 else np.sin(T)
    osc = (1.0 + 1.0 / (n * n)) ** s
    return float(np.sqrt(4.0 * d / n ** 2 + 4.0 * d * sup_sin ** 2 * osc))


def simulated_gap(
    n: int,
    s: float,
    d: int,
    T: float,
    seed: int,
    noise: NoiseModel | None = None,
    dt: float = 0.05,
    min_grid: int = 64,
    sigma: float | None = None,
) -> float:
    """sup over records of the H^s distance between simulated solutions
    started from the two family members' initial data."""
    noise = noise or NoiseModel.zero()
    if sigma is None:
        sigma = (d / 2.0 + min(s - 1.0, 1.0 + d / 2.0)) / 2.0
    grid = grid_for_frequency(n, d, min_n=min_grid)
    trajs = []
    for kappa in (1, -1):
        p = ApproxFamilyParams(kappa=kappa, n=n, s=s, sigma=sigma, d=d, T=T)
        config = SimConfig(
            grid=grid,
            initial_state=approx_solution(p, grid, 0.0),
            s=s,
            dt=dt,
            t_end=T,
            noise=noise,
            scheme="rk4_random_pde",
            record_states=True,
        )
        trajs.append(simulate(config, seed))
    gaps = [
        state_norm(
            State(
                tuple(
                    SpectralField(grid, a.coeffs - b.coeffs)
                    for a, b in zip(ya.u, yb.u)
                ),
                SpectralField(grid, ya.gamma.coeffs - yb.gamma.coeffs),
            ),
            s,
        )
        for ya, yb in zip(trajs[0].states, trajs[1].states)
    ]
    return float(np.max(gaps))


# ---------------------------------------------------------------------------
# steep-slope initial data for the breaking experiments


def steep_slope_data(
    grid: Grid,
    amplitude: float,
    c: float,
    lam: float,
    slope_margin: float = 2.0,
    gamma_scale: float = 0.0,
    center: float = np.pi,
):
    """Initial pair (u0, gamma0) with min-slope ~ -amplitude and bump width
    tuned so the shape condition holds with H(0) ~ slope_margin * threshold.

    u0 is the mean-zero antiderivative of -amplitude * (bump - mean(bump)),
    with the bump a periodized Gaussian; single-mode profiles cannot satisfy
    the shape condition (their slope never beats their H^1 norm), so a
    concentrated-slope profile is required.
    """
    if grid.d != 1:
        raise ValueError("steep-slope data is one-dimensional")
    if slope_margin <= 1.0:
        raise ValueError("slope margin must exceed 1 for the condition to hold")
    target_thresh = -amplitude / slope_margin
    half_c2 = c * c / (2.0 * lam)
    root_target = -target_thresh - half_c2
    if root_target <= 0:
        raise ValueError("amplitude too small against the noise term")
    e0_target = root_target ** 2 - half_c2 ** 2
    # Gaussian slope profile: E0 is dominated by ||u0'||^2 ~ A^2 w sqrt(pi)
    width = e0_target / (amplitude ** 2 * np.sqrt(np.pi))
    width = max(width, 6.0 * np.pi / grid.cutoff)  # keep the bump resolved

    x = grid.points()[0]
    u0 = gamma0 = None
    for _ in range(4):
        shifts = np.arange(-3, 4) * 2.0 * np.pi
        bump = sum(np.exp(-((x - center + sft) ** 2) / (2.0 * width ** 2)) for sft in shifts)
        profile = -amplitude * (bump - bump.mean())
        slope = from_physical(grid, profile)
        slope = SpectralField(grid, dealias(grid, slope.coeffs))
        ik = grid.deriv_factor[0]
        anti = np.zeros_like(slope.coeffs)
        nonzero = ik != 0
        anti[nonzero] = slope.coeffs[nonzero] / ik[nonzero]
        u0 = SpectralField(grid, anti)
        gamma0 = SpectralField(grid, gamma_scale * u0.coeffs)
        e0 = h1_norm_physical(u0) ** 2 + h1_norm_physical(gamma0) ** 2
        if e0 <= 0 or abs(e0 - e0_target) / max(e0_target, 1e-30) < 0.02:
            break
        width *= e0_target / e0
        width = max(width, 6.0 * np.pi / grid.cutoff)
    return u0, gamma0


# ---------------------------------------------------------------------------
# ensembles


@dataclass
class EnsembleReport:
    """Aggregated Monte Carlo outcome over independent Wiener paths."""

    members: int
    survived: int
    broke: int
    underflow: int
    breaking_times: list
    survival_fraction: float | None
    lognorm_slope: float | None
    lognorm_residual: float | None
    member_seeds: list

    @staticmethod
    def empty() -> "EnsembleReport":
        return EnsembleReport(0, 0, 0, 0, [], None, None, None, [])


def member_seed(base_seed: int, index: int) -> int:
    """Deterministic, scheduling-independent per-member seed."""
    ss = np.random.SeedSequence((int(base_seed), int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _member_summary(args):
    config, seed, s_track = args
    traj = simulate(config, seed)
    lognorm = [
        float(np.log(np.e + hu * hu) + np.log(np.e + hg * hg))
        for hu, hg in zip(traj.hs_u, traj.hs_gamma)
    ]
    return {
        "status": traj.status,
        "t_star": traj.t_star,
        "times": traj.times,
        "lognorm": np.array(lognorm),
        "min_slope": traj.min_slope,
        "winf": traj.winf,
        "seed": seed,
    }


def run_ensemble(config: SimConfig, members: int, base_seed: int, jobs: int = 1):
    """Fan out independent members; the fold is by member index, so serial
    and parallel execution produce identical results."""
    seeds = [member_seed(base_seed, k) for k in range(members)]
    tasks = [(config, sd, config.s) for sd in seeds]
    if jobs > 1 and members > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_member_summary, tasks))
    else:
        summaries = [_member_summary(t) for t in tasks]
    return summaries, seeds


def _aggregate(summaries, seeds) -> EnsembleReport:
    if not summaries:
        return EnsembleReport.empty()
    survived = sum(1 for s in summaries if s["status"] == "survived")
    broke = sum(1 for s in summaries if s["status"] == "broke")
    underflow = sum(1 for s in summaries if s["status"] == "dt_underflow")
    breaking_times = [s["t_star"] for s in summaries if s["status"] == "broke"]

    ts = np.concatenate([s["times"] for s in summaries])
    dl = np.concatenate([s["lognorm"] - s["lognorm"][0] for s in summaries])
    slope = residual = None
    if ts.size >= 2 and np.ptp(ts) > 0:
        coef = np.polyfit(ts, dl, 1)
        slope = float(coef[0])
        residual = float(np.sqrt(np.mean((np.polyval(coef, ts) - dl) ** 2)))
    return EnsembleReport(
        members=len(summaries),
        survived=survived,
        broke=broke,
        underflow=underflow,
        breaking_times=breaking_times,
        survival_fraction=survived / len(summaries),
        lognorm_slope=slope,
        lognorm_residual=residual,
        member_seeds=list(seeds),
    )


def global_ensemble(
    config: SimConfig, members: int, base_seed: int, jobs: int = 1
) -> EnsembleReport:
    """Survival statistics and log-norm growth for one noise regime."""
    summaries, seeds = run_ensemble(config, members, base_seed, jobs)
    return _aggregate(summaries, seeds)


def scale_sweep(
    config: SimConfig,
    scales,
    members: int,
    base_seed: int,
    jobs: int = 1,
):
    """Survival fractions across initial-data scales with common random
    numbers (member k sees the same path at every scale)."""
    out = []
    base = config.initial_state
    for scale in scales:
        scaled = State(
            tuple(SpectralField(base.grid, scale * f.coeffs) for f in base.u),
            SpectralField(base.grid, scale * base.gamma.coeffs),
        )
        cfg = replace(config, initial_state=scaled)
        out.append((scale, global_ensemble(cfg, members, base_seed, jobs)))
    return out


def breaking_ensemble(
    u0: SpectralField,
    gamma0: SpectralField,
    c: float,
    lam: float,
    members: int,
    T: float,
    base_seed: int,
    dt: float = 1.0e-3,
    s: float = 2.0,
    blowup_winf: float = 1.0e3,
    jobs: int = 1,
) -> EnsembleReport:
    """Monte Carlo breaking statistics under linear noise for data that
    satisfies the shape condition (rejected otherwise)."""
    assessment = breaking_condition(u0, gamma0, c, lam)
    if not assessment.satisfied:
        raise ValueError(
            "initial data violates the shape condition: min slope "
            f"{assessment.min_slope0:.4g} >= threshold {assessment.threshold:.4g}"
        )
    config = SimConfig(
        grid=u0.grid,
        initial_state=State((u0,), gamma0),
        s=s,
        dt=dt,
        t_end=T,
        noise=NoiseModel.linear(c),
        scheme="euler_maruyama",
        blowup_winf=blowup_winf,
        record_every=10,
    )
    summaries, seeds = run_ensemble(config, members, base_seed, jobs)
    return _aggregate(summaries, seeds)
