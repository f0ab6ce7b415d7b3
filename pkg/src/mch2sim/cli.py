"""Command-line interface.

Subcommands: simulate, verify-ops, decay, gap, global, breaking, plot.
Exit codes: 0 success, 1 assertion/check failure, 2 usage error.
Every run writes <outdir>/manifest.json; re-running the command recorded in
a manifest reproduces byte-identical CSV/JSON/SVG outputs.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .spectral import (
    Grid,
    State,
    bessel_potential,
    dealiased_product,
    from_physical,
    hermitian_defect,
    integrate_physical,
    mollify,
    random_field,
    sobolev_norm,
    state_norm,
    to_physical,
)
from .operators import (
    drift,
    greens_convolve,
    greens_convolve_quadrature,
    rhs_1d,
)
from .stochastics import NoiseModel
from .dynamics import SimConfig, simulate
from .diagnostics import breaking_condition
from .experiments import (
    breaking_ensemble,
    decay_fit,
    expected_decay_exponent,
    family_gap,
    global_ensemble,
    scale_sweep,
    simulated_gap,
    steep_slope_data,
)
from .config import ConfigError, build_sim_config, parse_config
from .output import RunManifest, emit_svg, write_csv, write_json, write_manifest


def _base_seed(args) -> int:
    env = os.environ.get("MCH2_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _manifest(args, command: str, config: dict, seed: int) -> RunManifest:
    return RunManifest(
        tool="mch2sim",
        version=__version__,
        command=[command] + args.raw_argv,
        config=config,
        base_seed=seed,
    )


def _finish(outdir: Path, manifest: RunManifest, t0: float) -> None:
    write_manifest(outdir / "manifest.json", manifest, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    text = Path(args.config).read_text()
    values = parse_config(text)
    seed = int(os.environ.get("MCH2_SEED", values["seed"]))
    config = build_sim_config(values)
    traj = simulate(config, seed)

    rows = zip(
        traj.times, traj.hs_u, traj.hs_gamma, traj.winf, traj.energy,
        traj.min_slope,
    )
    csv_path = outdir / "trajectory.csv"
    write_csv(
        csv_path,
        ["t", "hs_u", "hs_gamma", "winf", "energy", "min_slope"],
        ([float(v) for v in row] for row in rows),
    )
    manifest = _manifest(args, "simulate", values, seed)
    manifest.outputs = ["trajectory.csv", "trajectory.svg", "report.json"]
    report = {
        "status": traj.status,
        "t_star": traj.t_star,
        "records": int(traj.times.size),
        "final_hs_u": float(traj.hs_u[-1]),
        "final_hs_gamma": float(traj.hs_gamma[-1]),
        "final_winf": float(traj.winf[-1]),
    }
    write_json(outdir / "report.json", manifest, report)
    emit_svg(
        outdir / "trajectory.svg",
        {
            "hs_u": (traj.times, traj.hs_u),
            "hs_gamma": (traj.times, traj.hs_gamma),
            "winf": (traj.times, traj.winf),
        },
        xlabel="t",
        ylabel="norm",
        title="trajectory diagnostics",
    )
    _finish(outdir, manifest, t0)
    print(f"status={traj.status} records={traj.times.size} -> {outdir}")
    return 0


def _check(name: str, ok: bool, detail: str, results: list) -> None:
    results.append(ok)
    print(f"  [{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def _cmd_verify_ops(args) -> int:
    rng = np.random.Generator(np.random.Philox(key=args.seed))
    grid = Grid(d=1, n_per_dim=512)
    results: list = []

    f = random_field(grid, rng, kmax=grid.cutoff, decay=2.0)
    g = bessel_potential(bessel_potential(f, 2.0), -2.0)
    err = np.max(np.abs(g.coeffs - f.coeffs)) / np.max(np.abs(f.coeffs))
    _check("bessel inverse pair", err <= 1e-10, f"rel err {err:.2e}", results)

    fb = random_field(grid, rng, kmax=8, decay=1.0)
    pts = np.linspace(0.0, 2.0 * np.pi, 17)[:-1]
    by_quad = greens_convolve_quadrature(fb, pts)
    by_mult = np.interp(
        pts, grid.points()[0], to_physical(greens_convolve(fb))
    )
    scale = max(np.max(np.abs(by_quad)), 1e-30)
    gerr = np.max(np.abs(by_quad - by_mult)) / scale
    _check("greens quadrature vs multiplier", gerr <= 1e-10,
           f"rel err {gerr:.2e}", results)

    worst = 0.0
    for _ in range(100):
        u = random_field(grid, rng, kmax=40, decay=2.0)
        gm = random_field(grid, rng, kmax=40, decay=2.0)
        y = State((u,), gm)
        t1, t2 = drift(y), rhs_1d(u, gm)
        num = max(
            np.max(np.abs(t1.du[0].coeffs - t2.du[0].coeffs)),
            np.max(np.abs(t1.dgamma.coeffs - t2.dgamma.coeffs)),
        )
        den = max(np.max(np.abs(t1.du[0].coeffs)),
                  np.max(np.abs(t1.dgamma.coeffs)), 1e-30)
        worst = max(worst, num / den)
    _check("drift vs 1-D convolution form (100 states)", worst <= 1e-10,
           f"worst rel err {worst:.2e}", results)

    h = dealiased_product(f, fb)
    defect = hermitian_defect(h)
    _check("hermitian symmetry after product", defect <= 1e-14,
           f"defect {defect:.2e}", results)

    eps = 0.05
    jf, jg = mollify(f, eps), mollify(fb, eps)
    lhs = integrate_physical(to_physical(jf) * to_physical(fb), grid)
    rhs = integrate_physical(to_physical(f) * to_physical(jg), grid)
    serr = abs(lhs - rhs) / max(abs(lhs), 1e-30)
    _check("mollifier self-adjointness", serr <= 1e-10,
           f"rel err {serr:.2e}", results)

    a = random_field(grid, rng, kmax=grid.cutoff // 2, decay=1.0)
    b = random_field(grid, rng, kmax=grid.cutoff // 2, decay=1.0)
    exact = from_physical(grid, to_physical(a) * to_physical(b))
    perr = np.max(np.abs(dealiased_product(a, b).coeffs - exact.coeffs))
    _check("dealiased product exact below K/2", perr <= 1e-14,
           f"abs err {perr:.2e}", results)

    n_pass = sum(results)
    print(f"verify-ops: {n_pass}/{len(results)} checks passed")
    return 0 if all(results) else 1


def _cmd_decay(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    n_values = [int(v) for v in args.n.split(",")]
    theta, rms, errors = decay_fit(
        s=args.s, sigma=args.sigma, d=args.d, n_values=n_values,
        T=args.T, min_grid=args.min_grid,
    )
    expected = expected_decay_exponent(args.s, args.sigma)

    write_csv(
        outdir / "decay.csv",
        ["n", "error"],
        [[n, float(e)] for n, e in zip(n_values, errors)],
    )
    seed = _base_seed(args)
    manifest = _manifest(
        args, "decay",
        {"s": args.s, "sigma": args.sigma, "d": args.d, "n": n_values,
         "T": args.T, "min_grid": args.min_grid},
        seed,
    )
    manifest.outputs = ["decay.csv", "decay.svg", "report.json"]
    report = {
        "theta_hat": theta,
        "theta_expected": expected,
        "fit_rms": rms,
        "relative_gap": abs(theta - expected) / expected,
    }
    write_json(outdir / "report.json", manifest, report)

    fit_line = [
        float(errors[0] * (n / n_values[0]) ** (-theta)) for n in n_values
    ]
    emit_svg(
        outdir / "decay.svg",
        {
            "measured": (np.array(n_values, float), np.array(errors)),
            "fit": (np.array(n_values, float), np.array(fit_line)),
        },
        xlabel="n",
        ylabel="terminal residual norm",
        title="residual decay",
        loglog=True,
        annotations=[f"theta_hat = {theta:.3f} (expected {expected:.3f})"],
    )
    _finish(outdir, manifest, t0)
    print(
        f"theta_hat={theta:.4f} expected={expected:.4f} "
        f"gap={abs(theta - expected) / expected:.2%}"
    )
    return 0 if abs(theta - expected) / expected <= 0.10 else 1


def _cmd_gap(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    seed = _base_seed(args)
    rows = []
    report = {}
    for n in [int(v) for v in args.n.split(",")]:
        initial = family_gap(n, args.s, args.d, 0.0)
        total = family_gap(n, args.s, args.d, args.T)
        rows.append([n, initial, total])
        report[str(n)] = {"initial": initial, "family_gap": total}
    if args.simulate_n:
        sim = simulated_gap(
            args.simulate_n, args.s, args.d, args.T, seed, dt=args.dt
        )
        fam = family_gap(args.simulate_n, args.s, args.d, args.T)
        report["simulated"] = {
            "n": args.simulate_n,
            "simulated_gap": sim,
            "family_gap": fam,
            "ratio": sim / fam,
        }
    write_csv(outdir / "gap.csv", ["n", "initial_gap", "family_gap"], rows)
    manifest = _manifest(
        args, "gap",
        {"n": args.n, "s": args.s, "d": args.d, "T": args.T,
         "simulate_n": args.simulate_n, "dt": args.dt},
        seed,
    )
    manifest.outputs = ["gap.csv", "report.json"]
    write_json(outdir / "report.json", manifest, report)
    _finish(outdir, manifest, t0)
    for n, initial, total in rows:
        print(f"n={n}: initial gap {initial:.4e}, sup gap {total:.4f}")
    if "simulated" in report:
        r = report["simulated"]
        print(
            f"simulated gap at n={r['n']}: {r['simulated_gap']:.4f} "
            f"({r['ratio']:.2f} of family gap)"
        )
    return 0


def _smooth_state_1d(grid: Grid, a: float) -> State:
    x = grid.points()[0]
    return State(
        (from_physical(grid, a * np.sin(x)),),
        from_physical(grid, a * np.cos(x)),
    )


def _cmd_global(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    seed = _base_seed(args)
    grid = Grid(d=1, n_per_dim=args.grid_n)
    report = {}

    if args.mode == "polynomial":
        noise = NoiseModel.polynomial(
            args.c1, args.delta1, args.c2, args.delta2, s_norm=args.s
        )
        config = SimConfig(
            grid=grid,
            initial_state=_smooth_state_1d(grid, args.scale),
            s=args.s, dt=args.dt, t_end=args.T, noise=noise,
            scheme="euler_maruyama", record_every=args.record_every,
        )
        rep = global_ensemble(config, args.members, seed, jobs=args.jobs)
        report["ensemble"] = {
            "members": rep.members,
            "survived": rep.survived,
            "broke": rep.broke,
            "survival_fraction": rep.survival_fraction,
            "lognorm_slope": rep.lognorm_slope,
            "lognorm_residual": rep.lognorm_residual,
        }
        rows = [[rep.members, rep.survived, rep.broke, rep.survival_fraction]]
        write_csv(
            outdir / "global.csv",
            ["members", "survived", "broke", "survival_fraction"],
            rows,
        )
        ok = rep.survival_fraction is not None
    else:  # linear-noise data-scale sweep
        u0, g0 = steep_slope_data(
            grid, args.slope, args.c1, args.lam, slope_margin=args.margin
        )
        config = SimConfig(
            grid=grid, initial_state=State((u0,), g0), s=args.s, dt=args.dt,
            t_end=args.T, noise=NoiseModel.linear(args.c1),
            scheme="euler_maruyama", record_every=args.record_every,
        )
        scales = [float(v) for v in args.scales.split(",")]
        sweep = scale_sweep(config, scales, args.members, seed, jobs=args.jobs)
        rows = [
            [sc, rep.members, rep.survived, rep.survival_fraction]
            for sc, rep in sweep
        ]
        write_csv(
            outdir / "global.csv",
            ["scale", "members", "survived", "survival_fraction"],
            rows,
        )
        fracs = [rep.survival_fraction for _, rep in sweep]
        report["sweep"] = {
            str(sc): rep.survival_fraction for sc, rep in sweep
        }
        ok = all(b >= a - 1e-12 for a, b in zip(fracs, fracs[1:]))
        report["monotone_nondecreasing"] = ok

    manifest = _manifest(args, "global", vars_without_raw(args), seed)
    manifest.outputs = ["global.csv", "report.json"]
    write_json(outdir / "report.json", manifest, report)
    _finish(outdir, manifest, t0)
    print(f"global ({args.mode}): {report}")
    return 0 if ok else 1


def _cmd_breaking(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    seed = _base_seed(args)
    grid = Grid(d=1, n_per_dim=args.grid_n)
    u0, g0 = steep_slope_data(
        grid, args.slope, args.c, args.lam, slope_margin=args.margin
    )
    assessment = breaking_condition(u0, g0, args.c, args.lam)
    rep = breaking_ensemble(
        u0, g0, args.c, args.lam, args.members, args.T, seed,
        dt=args.dt, s=args.s, jobs=args.jobs,
    )
    frac = rep.broke / rep.members if rep.members else None
    report = {
        "threshold": assessment.threshold,
        "min_slope0": assessment.min_slope0,
        "sigma1": assessment.sigma1,
        "sigma2": assessment.sigma2,
        "riccati_window": assessment.predicted_window,
        "members": rep.members,
        "broke": rep.broke,
        "breaking_fraction": frac,
        "mean_breaking_time": (
            float(np.mean(rep.breaking_times)) if rep.breaking_times else None
        ),
    }
    if rep.breaking_times:
        write_csv(
            outdir / "breaking_times.csv",
            ["member", "t_star"],
            [[k, float(t)] for k, t in enumerate(rep.breaking_times)],
        )
    manifest = _manifest(args, "breaking", vars_without_raw(args), seed)
    manifest.outputs = ["breaking_times.csv", "report.json"]
    write_json(outdir / "report.json", manifest, report)
    _finish(outdir, manifest, t0)
    print(
        f"breaking fraction {frac} over {rep.members} paths "
        f"(riccati window {assessment.predicted_window:.3f})"
    )
    return 0


def _cmd_plot(args) -> int:
    path = Path(args.input)
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    data = np.array(
        [[float(v) for v in line.split(",")] for line in lines[1:]]
    ) if len(lines) > 1 else np.zeros((0, len(header)))
    xcol = header.index(args.x)
    series = {}
    for ycol_name in args.y.split(","):
        ycol = header.index(ycol_name)
        series[ycol_name] = (data[:, xcol], data[:, ycol]) if data.size else ([], [])
    emit_svg(
        args.output, series, xlabel=args.x, ylabel=",".join(args.y.split(",")),
        title=path.name, loglog=args.loglog,
    )
    print(f"wrote {args.output}")
    return 0


def vars_without_raw(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "raw_argv")}


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mch2sim",
        description="Pseudospectral simulator and verification suite for the "
        "stochastic modified two-component Camassa-Holm system",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trajectory from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify-ops", help="run the operator identity suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify_ops)

    p = sub.add_parser("decay", help="residual decay-rate fit")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", default="8,16,32,64,128")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--min-grid", dest="min_grid", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=_cmd_decay)

    p = sub.add_parser("gap", help="nonuniform-continuity gap")
    p.add_argument("--n", default="64,128")
    p.add_argument("--s", type=float, default=2.5)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--simulate-n", dest="simulate_n", type=int, default=0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=_cmd_gap)

    p = sub.add_parser("global", help="global-existence ensembles")
    p.add_argument("--mode", choices=["polynomial", "linear-sweep"],
                   default="polynomial")
    p.add_argument("--members", type=int, default=50)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=2e-3)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=64)
    p.add_argument("--scale", type=float, default=0.35)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--delta1", type=float, default=1.0)
    p.add_argument("--delta2", type=float, default=1.5)
    p.add_argument("--slope", type=float, default=3.0)
    p.add_argument("--margin", type=float, default=1.5)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--scales", default="1,0.5,0.25,0.125")
    p.add_argument("--record-every", dest="record_every", type=int, default=20)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=_cmd_global)

    p = sub.add_parser("breaking", help="wave-breaking ensemble")
    p.add_argument("--members", type=int, default=100)
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--T", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--slope", type=float, default=10.0)
    p.add_argument("--margin", type=float, default=2.0)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=256)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=_cmd_breaking)

    p = sub.add_parser("plot", help="SVG line plot from a CSV file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True, help="comma-separated column names")
    p.add_argument("--loglog", action="store_true")
    p.set_defaults(func=_cmd_plot)
    return parser


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version, 2 for usage errors
        return int(exc.code or 0)
    args.raw_argv = list(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
