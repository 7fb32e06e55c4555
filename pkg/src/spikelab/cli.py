"""Command-line entry point.

Subcommands: radial, curvature, mesh, solve, sweep, verify.  Every run
echoes the effective (defaults-merged) configuration into the output
directory next to its results so experiments are diffable and
re-runnable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .acceptance import criterion_names, run_criteria
from .config import ConfigError, ExperimentConfig, load_config
from .errors import SpikelabError
from .fem import energy
from .geometry import max_mean_curvature
from .harness import epsilon_sweep, peak_convergence_report
from .meshing import generate_mesh
from .nehari import BoundaryBump, SolveConfig, least_energy_solve
from .nonlinearity import check_hypotheses
from .radial import (decay_diagnostics, gamma_crosscheck,
                     ground_state_cached, ground_state_constants)

__all__ = ["main"]


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True,
                               default=_json_default) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _prepare_out(cfg: ExperimentConfig, out_override) -> Path:
    out = Path(out_override) if out_override else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "effective_config.json", cfg.effective())
    return out


def _error_json(out: Path, code: str, message: str) -> None:
    try:
        _write_json(out / "error.json", {"error": code, "message": message})
    except OSError:
        pass


def cmd_radial(cfg: ExperimentConfig, out: Path) -> int:
    spec = cfg.nonlinearity()
    report = check_hypotheses(spec)
    if not report.all_pass:
        failed = [k for k, e in report.entries.items()
                  if e.status != "pass"]
        msg = "; ".join(f"{k}: {report.entries[k].detail}" for k in failed)
        _error_json(out, "hypothesis_violation", msg)
        print(f"hypothesis check failed: {msg}", file=sys.stderr)
        return 1
    prof = ground_state_cached(spec, h_r=cfg.h_r, r_max=cfg.r_max,
                               bisect_tol=cfg.bisect_tol)
    mu_fit, c0_fit, plateau, slope_gap = decay_diagnostics(prof)
    consts = ground_state_constants(prof, spec)
    chk = gamma_crosscheck(prof, spec, sample_count=cfg.mc_samples,
                           seed=cfg.seed)
    _write_json(out / "radial_report.json", {
        "constants": consts.as_dict(),
        "shoot_height": prof.shoot_height,
        "mu_fit": mu_fit, "C0_fit": c0_fit,
        "plateau_error": plateau, "slope_gap": slope_gap,
        "gamma_crosscheck": {
            "gamma_direct": chk.gamma_direct,
            "gamma_radial": chk.gamma_radial,
            "relative_gap": chk.relative_gap,
            "mc_standard_error": chk.mc_standard_error,
        },
    })
    _write_csv(out / "profile.csv", ["r", "w", "dw"],
               zip(prof.r, prof.w, prof.dw))
    ok = plateau < cfg.plateau_tol and chk.relative_gap < cfg.crosscheck_tol
    print(f"radial: plateau {plateau:.2e}, crosscheck gap "
          f"{chk.relative_gap:.2e} -> {'ok' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_curvature(cfg: ExperimentConfig, out: Path) -> int:
    domain = cfg.domain()
    result = max_mean_curvature(domain)
    _write_json(out / "curvature_report.json", {
        "maximizers": [p.tolist() for p in result.points],
        "H_max": result.H_max,
        "degenerate": result.degenerate,
        "note": result.note,
    })
    if domain.N == 2:
        from .geometry import mean_curvature
        ts = np.linspace(0.0, 2.0 * math.pi, 721)
        rows = [(t, mean_curvature(domain, domain.boundary_point(t)))
                for t in ts]
        _write_csv(out / "boundary_curvature.csv", ["theta", "H"], rows)
    print(f"curvature: H_max {result.H_max:.6g} at {len(result.points)} "
          f"point(s)")
    return 0


def cmd_mesh(cfg: ExperimentConfig, out: Path) -> int:
    domain = cfg.domain()
    h = cfg.mesh_h if cfg.mesh_h > 0 else cfg.eps / 3.0
    mesh = generate_mesh(domain, h)
    _write_csv(out / "vertices.csv",
               [f"x{i}" for i in range(mesh.N)], mesh.vertices)
    _write_csv(out / "cells.csv",
               [f"v{i}" for i in range(mesh.N + 1)], mesh.cells)
    _write_json(out / "mesh_report.json", {
        "h": mesh.h, "vertices": len(mesh.vertices),
        "cells": len(mesh.cells),
        "boundary_vertices": len(mesh.boundary_vertices),
        "total_volume": mesh.total_volume(),
    })
    print(f"mesh: {len(mesh.vertices)} vertices, {len(mesh.cells)} cells, "
          f"volume {mesh.total_volume():.6g}")
    return 0


def cmd_solve(cfg: ExperimentConfig, out: Path) -> int:
    domain = cfg.domain()
    spec = cfg.nonlinearity()
    h = cfg.mesh_h if cfg.mesh_h > 0 else cfg.eps / 3.0
    mesh = generate_mesh(domain, h)
    target = max_mean_curvature(domain)
    rep = least_energy_solve(mesh, spec, SolveConfig(
        eps=cfg.eps, grad_tol=cfg.grad_tol, max_iters=cfg.max_iters,
        init=BoundaryBump(P=target.points[0])))
    _write_json(out / "solve_report.json", {
        "eps": cfg.eps, "c_eps": rep.c_eps, "converged": rep.converged,
        "iterations": rep.iterations, "residual": rep.residual,
        "peak_location": rep.peak_location.tolist(),
        "peak_value": rep.peak_value,
        "t_final": rep.t_history[-1] if rep.t_history else None,
    })
    _write_csv(out / "field.csv",
               [f"x{i}" for i in range(mesh.N)] + ["u"],
               np.column_stack([mesh.vertices, rep.u.values]))
    print(f"solve: eps {cfg.eps}, c_eps {rep.c_eps:.8g}, "
          f"{'converged' if rep.converged else 'NOT converged'} in "
          f"{rep.iterations} iterations")
    return 0 if rep.converged else 2


def cmd_sweep(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    domain = cfg.domain()
    spec = cfg.nonlinearity()
    sweep = epsilon_sweep(domain, spec, cfg.schedule,
                          grad_tol=cfg.grad_tol, max_iters=cfg.max_iters,
                          workers=workers)
    cases_out = []
    for case in sweep.cases:
        entry = {"eps": case.eps, "converged": case.converged,
                 "error": case.error}
        if case.report is not None:
            entry.update({
                "c_eps": case.report.c_eps,
                "scaled_energy": case.report.c_eps * case.eps ** -domain.N,
                "residual": case.report.residual,
                "iterations": case.report.iterations,
            })
        if case.converged:
            entry.update({
                "peak": case.peak.tolist(),
                "peak_boundary_point": case.peak_boundary_point.tolist(),
                "dist_over_eps": case.dist_over_eps,
                "c4_fit": case.decay.c4_fit if case.decay else None,
                "grad_c4_fit": case.decay.grad_c4_fit if case.decay else None,
            })
            mesh = case.report.u.mesh
            _write_csv(out / f"field_eps_{case.eps:g}.csv",
                       [f"x{i}" for i in range(mesh.N)] + ["u"],
                       np.column_stack([mesh.vertices,
                                        case.report.u.values]))
        cases_out.append(entry)
    summary = {
        "domain": {"shape": domain.shape, "params": list(domain.params)},
        "nonlinearity": {"m": spec.m, "N": spec.N, "p": spec.p},
        "curvature_target": {
            "maximizers": [p.tolist() for p in sweep.curvature_target[0]],
            "H_max": sweep.curvature_target[1]},
        "cases": cases_out,
        "expansion_fit": (None if sweep.expansion_fit is None else {
            "intercept": sweep.expansion_fit[0],
            "slope": sweep.expansion_fit[1],
            "max_relative_residual": sweep.expansion_fit[2]}),
    }
    try:
        summary["peak_convergence"] = peak_convergence_report(sweep)
    except SpikelabError as exc:
        summary["peak_convergence"] = str(exc)
    _write_json(out / "sweep_summary.json", summary)
    _write_csv(out / "energy_table.csv", ["eps", "scaled_energy"],
               [(c.eps, c.report.c_eps * c.eps ** -domain.N)
                for c in sweep.converged_cases()])
    conv = sweep.converged_cases()
    if conv:
        case = conv[-1]
        mesh = case.report.u.mesh
        s = np.linalg.norm(mesh.vertices - case.report.peak_location,
                           axis=1) / case.eps
        mask = case.report.u.values > 1e-290
        _write_csv(out / "decay_table.csv", ["s", "log_u"],
                   np.column_stack([s[mask],
                                    np.log(case.report.u.values[mask])]))
    if domain.N == 2:
        from .geometry import mean_curvature
        ts = np.linspace(0.0, 2.0 * math.pi, 721)
        _write_csv(out / "curvature_table.csv", ["theta", "H"],
                   [(t, mean_curvature(domain, domain.boundary_point(t)))
                    for t in ts])
    n_conv = len(conv)
    print(f"sweep: {n_conv}/{len(sweep.cases)} cases converged")
    for entry in cases_out:
        status = "ok" if entry["converged"] else f"FAILED ({entry['error']})"
        print(f"  eps={entry['eps']:g}: {status}")
    return 0 if n_conv == len(sweep.cases) else 2


def cmd_verify(args) -> int:
    names = args.criteria or None
    try:
        results = run_criteria(names=names, budget=args.budget)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        all_ok &= r.passed
        print(f"{r.name:<{width}}  {mark}  {r.detail}")
    return 0 if all_ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikelab",
        description="Boundary-spike laboratory for the singularly "
                    "perturbed m-Laplacian Neumann problem")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
            ("radial", "ground-state profile and constants"),
            ("curvature", "boundary mean-curvature maximization"),
            ("mesh", "generate and export a mesh"),
            ("solve", "one least-energy solve"),
            ("sweep", "epsilon sweep with fits"),
            ("verify", "run the acceptance criteria")]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", type=str, default=None,
                        help="experiment config file (sections or JSON)")
        sp.add_argument("--out", type=str, default=None,
                        help="output directory (overrides config)")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--budget", choices=["quick", "full"],
                        default="quick")
        if name == "verify":
            sp.add_argument("criteria", nargs="*",
                            help="criterion names to run (default: all "
                                 "within budget)")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        else:
            cfg = ExperimentConfig()
        if args.seed is not None:
            cfg.seed = args.seed
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr)
        return 1
    out = _prepare_out(cfg, args.out)
    try:
        if args.command == "radial":
            return cmd_radial(cfg, out)
        if args.command == "curvature":
            return cmd_curvature(cfg, out)
        if args.command == "mesh":
            return cmd_mesh(cfg, out)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, args.workers)
    except SpikelabError as exc:
        _error_json(out, type(exc).__name__, str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
