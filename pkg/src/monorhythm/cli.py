"""Batch front end: run configurations in, machine-readable results out.

Five subcommands cover the suite: ``feasibility`` evaluates the existence
window and samples the load/gain curves, ``solve-cauchy`` integrates the
modal initial-value problem with a priori monitors, ``solve-periodic``
finds a periodic orbit by Picard iteration and/or shooting and optionally
certifies a trapping ball, ``converge`` measures truncation refinement on
a shared time grid, and ``param-region`` rasterizes the admissible
reaction-coefficient region.

Every run writes a JSON report (configuration echo, payload, condition
flags, timings) and CSV data files with 17-significant-digit floats, so
identical configurations reproduce identical bytes apart from timings.
Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 trajectory blow-up.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .feasibility import (
    AggregateConstants,
    EmbeddingConstants,
    RegionConstants,
    a2_bound,
    aggregate_from_raw,
    build_report,
    feasible_window_condition_reduced,
    r_star,
)
from .galerkin import (
    BlowUpError,
    GalerkinState,
    apriori_monitor,
    assemble_system,
    integrate_cauchy,
    l2_qi_difference,
)
from .ionic import (
    PhysiologicalParameters,
    RescalingParameters,
    derive_parameters,
    rescale_period,
)
from .periodic import (
    NonConvergenceError,
    PeriodicGrid,
    certify_ball,
    orbit_gap,
    picard_solve,
    shooting_solve,
)
from .spectral import (
    Geometry1D,
    build_basis,
    constant_stimulus,
    pulse_stimulus,
    sinusoid_stimulus,
)

_DIRECT_AGGREGATE_KEYS = (
    "feasibility.kappa",
    "feasibility.beta",
    "feasibility.gamma",
    "feasibility.delta",
)


@dataclass(frozen=True)
class RunReport:
    """Everything one invocation produced, ready for JSON emission."""

    command: str
    config_echo: dict
    payload: dict
    condition_flags: dict
    timings: dict


def _fmt(value) -> str:
    return "%.17g" % float(value)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return _fmt(value)


def _jsonable(obj):
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_csv(path: str, comment: str, header: str, rows) -> None:
    lines = [f"# {comment}", header]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _write_json(path: str, report: RunReport) -> None:
    obj = _jsonable(
        {
            "command": report.command,
            "config": report.config_echo,
            "payload": report.payload,
            "condition_flags": report.condition_flags,
            "timings": report.timings,
        }
    )
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(obj, handle, sort_keys=True, indent=2)
        handle.write("\n")


def _build_model(cfg: RunConfig):
    phys = PhysiologicalParameters(
        u_res=cfg.require("model.u_res"),
        u_peak=cfg.require("model.u_peak"),
        a=cfg.require("model.a"),
        c1=cfg.require("model.c1"),
        c2=cfg.require("model.c2"),
        c3=cfg.require("model.c3"),
        b=cfg.require("model.b"),
        C_m=cfg.get("model.C_m", 1.0),
        chi=cfg.get("model.chi", 1.0),
        sigma_const=cfg.get("model.sigma", 1.0),
    )
    resc = RescalingParameters(
        epsilon=cfg.require("rescale.epsilon"), xi=cfg.require("rescale.xi")
    )
    d = derive_parameters(phys, resc, c4_override=cfg.get("derived.c4_override", None))
    return phys, resc, d


def _build_stimulus(cfg: RunConfig, resc: RescalingParameters):
    key, value = cfg.require_exactly_one("stimulus.period", "stimulus.period_raw")
    period = rescale_period(value, resc) if key == "stimulus.period_raw" else value
    # echo the resolved period only, so the echo re-parses cleanly
    cfg.consumed.pop("stimulus.period_raw", None)
    cfg.consumed["stimulus.period"] = period

    kind = cfg.require("stimulus.kind")
    phi = cfg.require("stimulus.phi")
    if kind == "constant":
        return constant_stimulus(cfg.require("stimulus.amplitude"), period, phi)
    if kind == "sinusoid":
        return sinusoid_stimulus(
            period,
            cfg.require("stimulus.amplitude"),
            phi,
            offset=cfg.get("stimulus.offset", 0.0),
        )
    return pulse_stimulus(
        period,
        cfg.require("stimulus.amplitude"),
        phi,
        center=cfg.get("stimulus.center", 0.5),
        width=cfg.get("stimulus.width", 0.05),
        offset=cfg.get("stimulus.offset", 0.0),
    )


def _build_system(cfg: RunConfig, resc, d):
    geom = Geometry1D(cfg.require("geometry.length"))
    basis = build_basis(geom, cfg.require("solver.m"), d, resc)
    stim = _build_stimulus(cfg, resc)
    return assemble_system(basis, d, resc, stim)


def _build_aggregates(cfg: RunConfig, d) -> AggregateConstants:
    if any(cfg.has(key) for key in _DIRECT_AGGREGATE_KEYS):
        kappa, beta, gamma, delta = (cfg.require(key) for key in _DIRECT_AGGREGATE_KEYS)
        return AggregateConstants(kappa=kappa, beta=beta, gamma=gamma, delta=delta)
    emb = EmbeddingConstants(
        k1=cfg.require("feasibility.k1"),
        k2=cfg.require("feasibility.k2"),
        projection_excess=cfg.require("feasibility.projection_excess"),
        trace_norm=cfg.require("feasibility.trace_norm"),
        domain_measure=cfg.require("feasibility.domain_measure"),
        s_sup=cfg.require("feasibility.s_sup"),
        phi_norm=cfg.require("feasibility.phi_norm"),
    )
    return aggregate_from_raw(d, emb)


def _condition_entry(result) -> dict:
    return {"satisfied": result.satisfied, "margin": result.margin}


def _initial_state(cfg: RunConfig, n_modes: int) -> GalerkinState:
    u0 = np.asarray(cfg.get("ic.u", (0.0,) * n_modes), dtype=float)
    w0 = np.asarray(cfg.get("ic.w", (0.0,) * n_modes), dtype=float)
    for name, arr in (("ic.u", u0), ("ic.w", w0)):
        if arr.shape != (n_modes,):
            raise ConfigError(
                f"key '{name}' must list {n_modes} coefficients, got {arr.size}",
                cfg.path,
            )
    return GalerkinState(u=u0, w=w0, t=0.0)


def cmd_feasibility(cfg: RunConfig, seed=None):
    _, resc, d = _build_model(cfg)
    agg = _build_aggregates(cfg, d)
    rate = resc.epsilon * d.c4 / d.C
    t_max = cfg.get("feasibility.t_max", 5.0 / rate)
    r_max = cfg.get("feasibility.r_max", 4.0 * r_star(agg))
    n_samples = cfg.get("feasibility.n_samples", 256)
    report = build_report(
        agg,
        d.c4,
        resc.epsilon,
        d.C,
        xi=resc.xi,
        c3=d.c3,
        t_max=t_max,
        r_max=r_max,
        n_samples=n_samples,
    )

    payload = {
        "aggregates": {
            "kappa": agg.kappa,
            "beta": agg.beta,
            "gamma": agg.gamma,
            "delta": agg.delta,
            "provenance": agg.provenance,
        },
        "r_star": report.r_star,
        "p_at_r_star": report.p_at_r_star,
        "h_at_zero": report.h_at_zero,
        "r_lower": report.r_lower,
        "r_upper": report.r_upper,
        "t_star_at_r_star": report.t_star_at_r_star,
    }
    flags = {
        "feasible_window": _condition_entry(report.window),
        "feasible_window_reduced": _condition_entry(report.reduced_window),
        "recovery_coupling": _condition_entry(report.coupling),
    }
    files = [
        (
            "h_curve.csv",
            "load curve: x = drive period (rescaled time), value = h (dimensionless)",
            "x,value",
            report.h_curve,
        ),
        (
            "p_curve.csv",
            "gain curve: x = ball radius (mixed-norm units), value = p (dimensionless)",
            "x,value",
            report.p_curve,
        ),
    ]
    return payload, flags, files


def cmd_solve_cauchy(cfg: RunConfig, seed=None):
    _, resc, d = _build_model(cfg)
    sys_ = _build_system(cfg, resc, d)
    state0 = _initial_state(cfg, sys_.n_modes)
    t_end = cfg.require("cauchy.t_end")
    dt = cfg.require("cauchy.dt")
    traj = integrate_cauchy(sys_, state0, t_end, dt)
    monitor = apriori_monitor(traj)

    payload = {
        "n_nodes": traj.n_nodes,
        "t_end": float(traj.times[-1]),
        "dt": dt,
        "final_u": traj.u[-1],
        "final_w": traj.w[-1],
        "monitors": {
            "sup_state_sq": monitor.sup_state_sq,
            "l2_v_u": monitor.l2_v_u,
            "l2_du": monitor.l2_du,
            "l2_dw": monitor.l2_dw,
            "per_period_sup": monitor.per_period_sup,
        },
    }
    flags = {"growth_doubling": monitor.growth_flag}
    files = [_trajectory_file("trajectory.csv", traj.times, traj.u, traj.w)]
    return payload, flags, files


def _trajectory_file(name: str, times, u, w):
    n = u.shape[1]
    header = (
        "t,"
        + ",".join(f"u_{i}" for i in range(n))
        + ","
        + ",".join(f"w_{i}" for i in range(n))
    )
    rows = np.column_stack([times, u, w])
    comment = "t in rescaled time; u_i, w_i are modal coefficients of the two fields"
    return name, comment, header, rows


def _orbit_summary(orbit) -> dict:
    return {
        "method": orbit.method,
        "n_iter": orbit.n_iter,
        "converged": orbit.converged,
        "n_t": orbit.grid.n_t,
        "periodicity_residual": orbit.periodicity_residual,
        "ct_norm": orbit.ct_norm,
        "operator_residual": orbit.operator_residual,
    }


def cmd_solve_periodic(cfg: RunConfig, seed=None):
    _, resc, d = _build_model(cfg)
    sys_ = _build_system(cfg, resc, d)
    method = cfg.get("solver.method", "picard")
    tol = cfg.get("solver.tol", 1e-10)
    period = sys_.period
    payload: dict = {}
    files = []

    picard_orbit = shooting_orbit = None
    if method in ("picard", "both"):
        grid = PeriodicGrid(n_t=cfg.get("solver.n_t", 1024), period=period)
        u0 = w0 = None
        if seed is not None:
            rng = np.random.default_rng(seed)
            u0 = 0.01 * rng.standard_normal((grid.n_t, sys_.n_modes))
            w0 = 0.01 * rng.standard_normal((grid.n_t, sys_.n_modes))
        picard_orbit = picard_solve(
            sys_,
            grid,
            u0=u0,
            w0=w0,
            theta=cfg.get("solver.theta", 1.0),
            tol=tol,
            max_iter=cfg.get("solver.max_iter", 200),
        )
        if not picard_orbit.converged:
            raise NonConvergenceError(
                f"picard exhausted {picard_orbit.n_iter} sweeps without reaching tol {tol}",
                history=[],
            )
        payload["picard"] = _orbit_summary(picard_orbit)

    if method in ("shooting", "both"):
        shooting_orbit = shooting_solve(
            sys_,
            dt=cfg.get("solver.dt", period / 1024),
            tol=tol,
            max_iter=cfg.get("solver.newton_max_iter", 25),
        )
        payload["shooting"] = _orbit_summary(shooting_orbit)

    if method == "both":
        payload["cross_method_gap"] = orbit_gap(picard_orbit, shooting_orbit, sys_.basis)

    primary = picard_orbit if picard_orbit is not None else shooting_orbit
    files.append(
        _trajectory_file("orbit.csv", primary.grid.times, primary.u, primary.w)
    )
    if method == "both":
        files.append(
            _trajectory_file(
                "orbit_shooting.csv",
                shooting_orbit.grid.times,
                shooting_orbit.u,
                shooting_orbit.w,
            )
        )

    flags: dict = {}
    radius = cfg.get("solver.radius", None)
    if radius is None:
        payload["ball_certificate"] = "skipped: no solver.radius configured"
        flags["ball_member"] = None
    else:
        cert = certify_ball(primary, radius, sys_.basis)
        payload["ball_certificate"] = {
            "radius": cert.radius,
            "member": cert.member,
            "worst_t": cert.worst_t,
            "margin": cert.margin,
        }
        flags["ball_member"] = cert.member
    return payload, flags, files


def cmd_converge(cfg: RunConfig, seed=None):
    _, resc, d = _build_model(cfg)
    m_list = cfg.require("converge.m_list")
    if len(m_list) < 2:
        raise ConfigError("converge.m_list needs at least two entries", cfg.path)
    if any(b < a for a, b in zip(m_list, m_list[1:])):
        raise ConfigError("converge.m_list must be nondecreasing", cfg.path)
    t_end = cfg.require("cauchy.t_end")
    dt = cfg.require("cauchy.dt")
    geom = Geometry1D(cfg.require("geometry.length"))
    stim = _build_stimulus(cfg, resc)

    trajectories = []
    for m in m_list:
        basis = build_basis(geom, m, d, resc)
        sys_ = assemble_system(basis, d, resc, stim)
        n = sys_.n_modes
        state0 = GalerkinState(u=np.zeros(n), w=np.zeros(n), t=0.0)
        trajectories.append(integrate_cauchy(sys_, state0, t_end, dt))

    pairs = []
    for coarse, fine, traj_c, traj_f in zip(
        m_list, m_list[1:], trajectories, trajectories[1:]
    ):
        u_diff, w_diff = l2_qi_difference(traj_f, traj_c)
        pairs.append(
            {"m_coarse": coarse, "m_fine": fine, "u_diff": u_diff, "w_diff": w_diff}
        )

    u_diffs = [p["u_diff"] for p in pairs]
    nonincreasing = all(b <= a for a, b in zip(u_diffs, u_diffs[1:]))
    payload = {"pairs": pairs, "t_end": t_end, "dt": dt}
    flags = {"u_diff_nonincreasing": nonincreasing}
    rows = [[p["m_coarse"], p["m_fine"], p["u_diff"], p["w_diff"]] for p in pairs]
    files = [
        (
            "convergence.csv",
            "space-time L2 gaps between consecutive truncation sizes",
            "m_coarse,m_fine,u_diff,w_diff",
            rows,
        )
    ]
    return payload, flags, files


def cmd_param_region(cfg: RunConfig, seed=None):
    _, resc, d = _build_model(cfg)
    kappa = cfg.get("feasibility.kappa", None)
    if kappa is None:
        excess = cfg.require("feasibility.projection_excess")
        kappa = math.sqrt(2.0) / (2.0 * (1.0 + excess))
    const = RegionConstants(
        kappa=kappa,
        epsilon=resc.epsilon,
        C=d.C,
        u_tr=d.u_tr,
        u_pr=d.u_pr,
        xi=resc.xi,
        c3=d.c3,
        k1=cfg.require("feasibility.k1"),
        domain_measure=cfg.require("feasibility.domain_measure"),
        s_sup=cfg.require("feasibility.s_sup"),
        trace_norm=cfg.require("feasibility.trace_norm"),
        phi_norm=cfg.require("feasibility.phi_norm"),
    )
    a1_min = cfg.get("region.a1_min", 0.0)
    a1_max = cfg.require("region.a1_max")
    n_a1 = cfg.get("region.n_a1", 64)
    if a1_min < 0.0 or a1_max <= a1_min:
        raise ConfigError(
            f"need 0 <= region.a1_min < region.a1_max, got [{a1_min}, {a1_max}]",
            cfg.path,
        )
    if n_a1 < 2:
        raise ConfigError("region.n_a1 must be at least 2", cfg.path)

    a1 = np.linspace(a1_min, a1_max, n_a1)
    bound = a2_bound(a1, const)
    files = [
        (
            "region.csv",
            "admissible-region boundary: largest quadratic coefficient per cubic one",
            "a1,a2_bound",
            np.column_stack([a1, bound]),
        )
    ]

    raster_counts = None
    a2_max = cfg.get("region.a2_max", None)
    if a2_max is not None:
        n_a2 = cfg.get("region.n_a2", 64)
        if a2_max <= 0.0 or n_a2 < 2:
            raise ConfigError(
                "raster needs positive region.a2_max and region.n_a2 >= 2", cfg.path
            )
        a2 = np.linspace(0.0, a2_max, n_a2)
        admissible = a2[None, :] < bound[:, None]
        rows = []
        for i in range(n_a1):
            for j in range(n_a2):
                rows.append([a1[i], a2[j], int(admissible[i, j])])
        files.append(
            (
                "region_raster.csv",
                "membership raster over the (a1, a2) rectangle; admissible is 0 or 1",
                "a1,a2,admissible",
                rows,
            )
        )
        raster_counts = {
            "n_admissible": int(np.sum(admissible)),
            "n_total": int(admissible.size),
        }

    # spot-check the boundary against the reduced window condition it inverts
    checks = []
    for i in range(0, n_a1, max(1, n_a1 // 8)):
        if a1[i] <= 0.0 or bound[i] <= 0.0:
            continue
        a2_probe = 0.9 * bound[i]
        agg = AggregateConstants(
            kappa=const.kappa,
            beta=0.0,
            gamma=const.xi * a2_probe * const.k1 / 3.0,
            delta=const.epsilon * const.k1 * const.a_const / const.C * a1[i]
            + const.b_const,
        )
        h0 = const.C / (const.epsilon * a1[i] * const.u_tr * const.u_pr)
        checks.append(feasible_window_condition_reduced(agg, h0).satisfied)

    payload = {
        "a1_min": a1_min,
        "a1_max": a1_max,
        "n_a1": n_a1,
        "bound_at_a1_max": float(bound[-1]),
        "raster": raster_counts,
    }
    flags = {
        "boundary_monotone": bool(np.all(np.diff(bound) >= 0.0)),
        "interior_consistent": all(checks) if checks else True,
    }
    return payload, flags, files


_COMMANDS = {
    "feasibility": cmd_feasibility,
    "solve-cauchy": cmd_solve_cauchy,
    "solve-periodic": cmd_solve_periodic,
    "converge": cmd_converge,
    "param-region": cmd_param_region,
}


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monorhythm",
        description="Periodic-rhythm solver suite for the spectral monodomain model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "feasibility": "evaluate the existence window and sample the h/p curves",
        "solve-cauchy": "integrate the modal initial-value problem",
        "solve-periodic": "find a periodic orbit by Picard iteration and/or shooting",
        "converge": "compare trajectories across truncation sizes",
        "param-region": "sweep the admissible (a1, a2) reaction-coefficient region",
    }
    for name in _COMMANDS:
        cmd = sub.add_parser(name, help=helps[name])
        cmd.add_argument("--config", required=True, help="path to a run configuration")
        cmd.add_argument("--out", default=None, help="output directory (default: cwd)")
        cmd.add_argument(
            "--format",
            choices=("csv", "json", "both"),
            default=None,
            help="which outputs to write (default: both)",
        )
        cmd.add_argument(
            "--seed",
            type=int,
            default=None,
            help="draw a random Picard starting trajectory from this seed",
        )
    return parser


def _run(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    parse_s = time.perf_counter() - t0

    t1 = time.perf_counter()
    payload, flags, file_specs = _COMMANDS[args.command](cfg, seed=args.seed)
    solve_s = time.perf_counter() - t1

    out_dir = args.out if args.out is not None else cfg.get("output.dir", ".")
    fmt = args.format if args.format is not None else cfg.get("output.format", "both")
    os.makedirs(out_dir, exist_ok=True)

    report = RunReport(
        command=args.command,
        config_echo=cfg.echo(),
        payload=payload,
        condition_flags=flags,
        timings={"parse_s": parse_s, "solve_s": solve_s},
    )
    written = []
    if fmt in ("csv", "both"):
        for name, comment, header, rows in file_specs:
            path = os.path.join(out_dir, name)
            _write_csv(path, comment, header, rows)
            written.append(path)
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, "report.json")
        _write_json(path, report)
        written.append(path)
    for path in written:
        print(path)
    return 0


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NonConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 3
    except BlowUpError as exc:
        print(
            f"trajectory blew up at t = {exc.time:.6g} (magnitude {exc.magnitude:.3e})",
            file=sys.stderr,
        )
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
