"""Batch front-end: subcommand dispatch over a validated run config, with
CSV and SVG report emission.

Exit codes: 0 success, 1 validation error, 2 numerical blow-up.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .demag import FftDemag, TensorDemag, demag_tensor_estimate, demag_field
from .dynamics import (
    BlowUpError,
    SolverConfig,
    equilibrium_residual,
    integrate,
    relax_to_equilibrium,
)
from .experiments import (
    AsymptoticsPlan,
    HysteresisPlan,
    detect_layer_exit,
    run_asymptotics,
    run_hysteresis,
)
from .grid import DomainMask, EllipsoidSpec, Grid3, constant_field, normalize_pointwise
from .linearization import dissipation_scan
from .reporting import (
    CSV_HEADER,
    record_to_csv,
    svg_line_chart,
    table_to_csv,
)
from .schedule import (
    BumpEnvelope,
    ConstantEnvelope,
    FieldSchedule,
    FixedDirection,
    RotatingDirection,
)
from .spectral import commutator_PkF, project_Pk


def _build_grid(cfg: RunConfig) -> Grid3:
    g = cfg.to_dict()["grid"]
    return Grid3(g["nx"], g["ny"], g["nz"], g["hx"], g["hy"], g["hz"])


def _build_mask(cfg: RunConfig, g: Grid3) -> DomainMask:
    d = cfg.to_dict()["domain"]
    if d["shape"] == "ellipsoid":
        return DomainMask.ellipsoid(g, EllipsoidSpec(d["a"], d["b"], d["c"]))
    return DomainMask.full(g)


def _build_demag(cfg: RunConfig, g: Grid3):
    d = cfg.to_dict()["domain"]
    if g.is_macrospin:
        if d["shape"] == "ellipsoid":
            res = cfg.get("experiment", "tensor_resolution")
            D = demag_tensor_estimate(
                EllipsoidSpec(d["a"], d["b"], d["c"]), res)
        else:
            D = np.eye(3) / 3.0  # spherical sample
        return TensorDemag(D)
    return FftDemag.for_grid(g)


def _build_schedule(cfg: RunConfig) -> FieldSchedule:
    f = cfg.to_dict()["field"]
    if f["rotate_to"] is not None:
        direction = RotatingDirection(np.asarray(f["direction"]),
                                      np.asarray(f["rotate_to"]), f["omega"])
    else:
        direction = FixedDirection(np.asarray(f["direction"]))
    if f["envelope"] == "bump":
        center = f["bump_center"] or (0.0, 0.0, 0.0)
        envelope = BumpEnvelope(center, f["bump_radius"])
    else:
        envelope = ConstantEnvelope()
    return FieldSchedule(np.asarray(f["knots"]), direction, envelope)


def _build_solver(cfg: RunConfig) -> SolverConfig:
    s = cfg.to_dict()["solver"]
    m = cfg.to_dict()["material"]
    return SolverConfig(epsilon=m["epsilon"], alpha=m["alpha"],
                        T=s["t_final"], integrator=s["integrator"],
                        dt=s["dt"], renormalize=s["renormalize"])


def _write(path: str, text: str, quiet: bool) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(text)
    if not quiet:
        print(f"wrote {path}")


def cmd_relax(cfg: RunConfig, out: str, seed: int, quiet: bool) -> int:
    g = _build_grid(cfg)
    mask = _build_mask(cfg, g)
    demag = _build_demag(cfg, g)
    sched = _build_schedule(cfg)
    solver = _build_solver(cfg)
    tol = cfg.get("experiment", "relax_tol")
    max_t = cfg.get("experiment", "relax_max_t")
    m0 = constant_field(g, sched.direction.at(sched.t_min), mask)
    m, converged = relax_to_equilibrium(m0, sched.t_min, tol, max_t, solver,
                                        g, mask, demag, sched)
    res = equilibrium_residual(sched.t_min, m, g, mask, demag, sched)
    zero_T = SolverConfig(epsilon=solver.epsilon, alpha=solver.alpha, T=0.0,
                          integrator=solver.integrator, dt=solver.dt)
    rec, _ = integrate(m, zero_T, g, mask, demag, sched, t0=sched.t_min)
    _write(os.path.join(out, "relax.csv"), record_to_csv(rec), quiet)
    if not quiet:
        print(f"converged={converged} residual={res:.3e}")
    return 0


def cmd_evolve(cfg: RunConfig, out: str, seed: int, quiet: bool) -> int:
    g = _build_grid(cfg)
    mask = _build_mask(cfg, g)
    demag = _build_demag(cfg, g)
    sched = _build_schedule(cfg)
    solver = _build_solver(cfg)
    m0 = normalize_pointwise(
        constant_field(g, sched.direction.at(sched.t_min), mask), mask)
    rec, _ = integrate(m0, solver, g, mask, demag, sched,
                       sample_every=cfg.get("solver", "sample_every"),
                       t0=sched.t_min)
    _write(os.path.join(out, "evolve.csv"), record_to_csv(rec), quiet)
    return 0


def cmd_asymptotics(cfg: RunConfig, out: str, seed: int, quiet: bool) -> int:
    g = _build_grid(cfg)
    mask = _build_mask(cfg, g)
    demag = _build_demag(cfg, g)
    sched = _build_schedule(cfg)
    ladder = cfg.get("material", "epsilon_ladder")
    if ladder is None:
        eps = cfg.get("material", "epsilon")
        ladder = tuple(eps * 0.5**i for i in range(4))
    plan = AsymptoticsPlan(
        eps_ladder=tuple(ladder), sched=sched,
        alpha=cfg.get("material", "alpha"),
        T=cfg.get("solver", "t_final"),
        perturbation=cfg.get("experiment", "perturbation"),
        threshold_factor=cfg.get("experiment", "threshold_factor"),
        seed=seed,
        integrator="projected-explicit" if g.is_macrospin
        else cfg.get("solver", "integrator"),
        analytic_equilibrium=g.is_macrospin,
    )
    result = run_asymptotics(plan, g, mask, demag)
    for eps, rec in result["records"].items():
        _write(os.path.join(out, f"asymptotics_eps_{eps:g}.csv"),
               record_to_csv(rec), quiet)
    summary = result["summary"]
    _write(os.path.join(out, "asymptotics_summary.csv"), table_to_csv({
        "eps": [r["eps"] for r in summary],
        "tau": [r["tau"] for r in summary],
        "tau_over_eps_log": [r["tau_over_eps_log"] for r in summary],
        "sup_dist_after_tau": [r["sup_dist_after_tau"] for r in summary],
    }), quiet)
    return 0


def cmd_hysteresis(cfg: RunConfig, out: str, seed: int, quiet: bool) -> int:
    d = cfg.to_dict()["domain"]
    if d["shape"] != "ellipsoid":
        ell = EllipsoidSpec(1.0, 1.0, 1.0)
    else:
        ell = EllipsoidSpec(d["a"], d["b"], d["c"])
    solver = cfg.to_dict()["solver"]
    plan = HysteresisPlan(
        ellipsoid=ell,
        lam_max=cfg.get("experiment", "lam_max"),
        period=cfg.get("experiment", "period"),
        epsilon=cfg.get("material", "epsilon"),
        alpha=cfg.get("material", "alpha"),
        dt=solver["dt"] if solver["dt"] is not None else 0.05,
        field_tilt=cfg.get("experiment", "field_tilt"),
        tensor_resolution=cfg.get("experiment", "tensor_resolution"),
        n_warmup_periods=cfg.get("experiment", "warmup_periods"),
    )
    result = run_hysteresis(plan)
    _write(os.path.join(out, "hysteresis_loop.csv"), table_to_csv({
        "lambda": result["lam"], "m_dot_u": result["m_dot_u"]}), quiet)
    _write(os.path.join(out, "hysteresis_summary.csv"), table_to_csv({
        "switching_up": [result["switching_up"]],
        "switching_down": [result["switching_down"]],
        "switching_predicted": [result["switching_predicted"]],
        "loop_area": [result["loop_area"]],
        "loop_closure": [result["loop_closure"]],
    }), quiet)
    _write(os.path.join(out, "hysteresis_loop.svg"), svg_line_chart(
        [("loop", result["lam"], result["m_dot_u"])],
        x_label="lambda", y_label="m.u"), quiet)
    return 0


def cmd_dissipation_scan(cfg: RunConfig, out: str, seed: int,
                         quiet: bool) -> int:
    d = cfg.to_dict()["domain"]
    if d["shape"] == "ellipsoid":
        D = demag_tensor_estimate(
            EllipsoidSpec(d["a"], d["b"], d["c"]),
            cfg.get("experiment", "tensor_resolution"))
    else:
        D = np.eye(3) / 3.0
    evals, evecs = np.linalg.eigh(D)
    u = evecs[:, 0]
    g = Grid3(1, 1, 1)
    mask = DomainMask.full(g)
    result = dissipation_scan(
        D, u, cfg.get("experiment", "lambda_grid"),
        cfg.get("material", "alpha"), cfg.get("experiment", "s"),
        cfg.get("experiment", "n_samples"), g, mask, seed=seed)
    rows = result["rows"]
    _write(os.path.join(out, "dissipation_scan.csv"), table_to_csv({
        "lambda": [r["lam"] for r in rows],
        "sign": [r["sign"] for r in rows],
        "worst_ratio": [r["worst_ratio"] for r in rows],
        "c_lin": [r["c_lin"] for r in rows],
    }), quiet)
    if not quiet:
        print(f"plus branch uniformly negative from lambda = "
              f"{result['plus_branch_negative_from']}")
    return 0


def cmd_demag_selftest(cfg: RunConfig, out: str, seed: int,
                       quiet: bool) -> int:
    res = cfg.get("experiment", "resolution")
    sphere = EllipsoidSpec(1.0, 1.0, 1.0)
    D = demag_tensor_estimate(sphere, res)
    trace = float(np.trace(D))
    diag_err = float(np.max(np.abs(np.diag(D) - 1.0 / 3.0)))
    off = float(np.max(np.abs(D - np.diag(np.diag(D)))))
    _write(os.path.join(out, "demag_selftest.csv"), table_to_csv({
        "resolution": [res], "trace": [trace],
        "max_diag_error": [diag_err], "max_offdiag": [off]}), quiet)
    ok = abs(trace - 1.0) < 0.05 and off < 1e-3
    if not quiet:
        print(f"trace={trace:.6f} diag_err={diag_err:.2e} offdiag={off:.2e} "
              f"-> {'ok' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_spectral_selftest(cfg: RunConfig, out: str, seed: int,
                          quiet: bool) -> int:
    from .grid import inner_products, laplacian_neumann

    g = Grid3(12, 10, 8, 0.1, 0.12, 0.15)
    mask = DomainMask.full(g)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(g.shape + (3,))
    rows = []
    for k in (8, 27, 64):
        pu = project_Pk(u, k, g, mask)
        commute = np.max(np.abs(
            laplacian_neumann(pu, g, mask)
            - project_Pk(laplacian_neumann(u, g, mask), k, g, mask)))
        ortho = inner_products(pu, u - pu, g, mask)["l2"]
        rows.append({"k": k, "commute_err": float(commute),
                     "ortho_err": abs(float(ortho))})
    _write(os.path.join(out, "spectral_selftest.csv"), table_to_csv({
        "k": [r["k"] for r in rows],
        "commute_err": [r["commute_err"] for r in rows],
        "ortho_err": [r["ortho_err"] for r in rows]}), quiet)
    ok = all(r["commute_err"] < 1e-10 and r["ortho_err"] < 1e-10
             for r in rows)
    if not quiet:
        print("ok" if ok else "FAIL")
    return 0 if ok else 1


def _read_record_csv(path: str) -> dict[str, np.ndarray]:
    with open(path) as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path} is not a run-record CSV")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    names = CSV_HEADER.split(",")
    return {name: data[:, i] for i, name in enumerate(names)}


def cmd_plot(cfg: RunConfig, out: str, seed: int, quiet: bool) -> int:
    paths = sorted(glob.glob(os.path.join(out, "*.csv")))
    series_d = []
    for p in paths:
        try:
            cols = _read_record_csv(p)
        except ValueError:
            continue
        name = os.path.splitext(os.path.basename(p))[0]
        if np.any(np.isfinite(cols["dist_h2"])):
            series_d.append((name, cols["t"], cols["dist_h2"]))
        _write(os.path.join(out, f"{name}_energy.svg"), svg_line_chart(
            [(name, cols["t"], cols["energy"])], x_label="t",
            y_label="energy"), quiet)
    if series_d:
        _write(os.path.join(out, "dist_h2.svg"), svg_line_chart(
            series_d, log_y=True, x_label="t", y_label="dist_h2"), quiet)
    return 0


_COMMANDS = {
    "relax": cmd_relax,
    "evolve": cmd_evolve,
    "asymptotics": cmd_asymptotics,
    "hysteresis": cmd_hysteresis,
    "dissipation-scan": cmd_dissipation_scan,
    "demag-selftest": cmd_demag_selftest,
    "spectral-selftest": cmd_spectral_selftest,
    "plot": cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tsll",
        description="Two-scale Landau-Lifshitz batch runner")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None,
                        help="path to the run config (INI-style)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            with open(args.config) as f:
                cfg = parse_config(f.read())
        else:
            cfg = parse_config("")
        return _COMMANDS[args.command](cfg, args.out, args.seed, args.quiet)
    except ConfigError as e:
        for msg in e.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except BlowUpError as e:
        print(f"numerical blow-up: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
