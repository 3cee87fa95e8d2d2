"""
Command line tool ``rovella``.

Subcommands: validate, simulate, pressure, spectrum, lift.
Exit codes: 0 success, 1 failed check or domain error, 2 usage or config error.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

import numpy as np
from astropy.table import Table

from . import __version__
from .config import load_config, parse_map_key
from .core.cuspmap import FlowParams, PLFullBranchMap, rovella_map_from_flow, validate_cusp_map
from .core.flow import (ConstantRoof, RoofFunction, SectionPoint, domination_check, fiber_contraction_check,
                        sample_trajectory, simulate)
from .core.lift import flow_equilibrium
from .core.pressure import admissible_t_range, exponent_bounds, pressure_curve
from .core.spectrum import lyapunov_spectrum_flow, spectrum_domain
from .errors import ConfigError, RovellaError
from .tableio import write_table, write_yaml

__all__ = ["main", "build_map", "cmd_validate", "cmd_simulate", "cmd_pressure", "cmd_spectrum", "cmd_lift"]


def build_map(cfg):
    """ The cusp map selected by cfg.map. """
    kind, weights = parse_map_key(cfg.map)
    if kind == "rovella":
        return rovella_map_from_flow(FlowParams(**cfg.flow_dict()))
    return PLFullBranchMap(weights)


def _resolution(cfg, method=None):
    method = cfg.method if method is None else method
    return {"periodic-orbit": cfg.n, "ulam": cfg.N, "closed-form": 0}[method]


def _path(cfg, name):
    return os.path.join(cfg.out, name)


def cmd_validate(cfg):
    """ Cusp-map axioms (and the flow checks for rovella maps) -> validation.yml """
    cmap = build_map(cfg)
    report = validate_cusp_map(cmap, holder_C=cfg.holder_C, holder_alpha=cfg.holder_alpha,
                               grid_size=cfg.grid_size, seed=cfg.seed, f4_horizon=cfg.f4_horizon)
    doc = report.to_dict()
    passed = report.passed
    if cmap.is_rovella:
        params = cmap.params
        dom = domination_check(params, np.arange(1, 101) * 0.1)
        fib = fiber_contraction_check(params, seed=cfg.seed, x_min_cutoff=cfg.x_min_cutoff)
        doc["domination"] = dict(rate=dom.rate, max_product=float(dom.products.max()), passed=dom.passed)
        doc["fiber_contraction"] = dict(lam=fib.lam, max_step_ratio=fib.max_step_ratio, best_C=fib.best_C,
                                        n_skipped=fib.n_skipped, passed=fib.passed)
        passed = passed and dom.passed and fib.passed
        doc["passed"] = passed
    write_yaml(doc, _path(cfg, "validation.yml"), cfg.digest())
    if not passed:
        logging.error("@validate: {} failed".format(cmap.name))
    return 0 if passed else 1


def cmd_simulate(cfg, x0=0.25, y0=0.5, n_returns=10):
    """ Flow trajectory -> trajectory.csv and sections.csv """
    params = FlowParams(**cfg.flow_dict()).validate()
    sim = simulate(SectionPoint(x0, y0), n_returns, params, sample_dt=cfg.sample_dt,
                   x_min_cutoff=cfg.x_min_cutoff)
    t, xyz, phase = sample_trajectory(sim)
    traj = Table([t, xyz[:, 0], xyz[:, 1], xyz[:, 2], phase], names=["t", "x", "y", "z", "phase"])
    hits = np.array(sim.hits, dtype=float).reshape(-1, 2)
    sections = Table([np.arange(len(hits)), hits[:, 0], hits[:, 1], np.asarray(sim.return_times, dtype=float)],
                     names=["n", "x", "y", "return_time"])
    write_table(traj, _path(cfg, "trajectory.csv"), cfg.digest())
    write_table(sections, _path(cfg, "sections.csv"), cfg.digest())
    return 0


def _pressure_pipeline(cfg, curve_hook=None):
    cmap = build_map(cfg)
    curve = pressure_curve(cmap, cfg.t_grid(), method=cfg.method, resolution=_resolution(cfg),
                           floor=cfg.delta_floor, n_jobs=cfg.jobs)
    if curve_hook is not None:
        curve = curve_hook(curve)
    bounds = exponent_bounds(cmap, n=cfg.n, floor=cfg.delta_floor)
    dom = admissible_t_range(curve, bounds)
    return cmap, curve, dom


def cmd_pressure(cfg, curve_hook=None):
    """ Pressure curve and admissible range -> pressure.csv and domain.yml

    curve_hook, if given, replaces the sampled curve before the range scan.
    """
    cmap, curve, dom = _pressure_pipeline(cfg, curve_hook)
    write_table(curve.to_table(), _path(cfg, "pressure.csv"), cfg.digest())
    doc = dom.to_dict()
    doc["map"] = cmap.name
    doc["method"] = curve.method
    doc["convex"] = curve.convex
    doc["entropy_positive"] = curve.entropy_positive
    doc["slope_jump"] = curve.slope_jump
    write_yaml(doc, _path(cfg, "domain.yml"), cfg.digest())
    if not curve.convex:
        logging.error("@pressure: curve {} is not convex".format(cmap.name))
        return 1
    return 0


def cmd_spectrum(cfg, curve_hook=None):
    """ Flow Lyapunov spectrum -> spectrum.csv, or spectrum.yml for an empty domain """
    cmap, curve, dom = _pressure_pipeline(cfg, curve_hook)
    if not curve.convex:
        logging.error("@spectrum: curve {} is not convex".format(cmap.name))
        return 1
    sdom = spectrum_domain(curve, dom)
    alpha_grid = np.asarray(cfg.alpha_grid) if isinstance(cfg.alpha_grid, tuple) else cfg.alpha_grid
    spec = lyapunov_spectrum_flow(curve, alpha_grid, domain=sdom)
    if spec.empty:
        write_yaml(spec.to_dict(), _path(cfg, "spectrum.yml"), cfg.digest())
    else:
        write_table(spec.to_table(), _path(cfg, "spectrum.csv"), cfg.digest())
    return 0


def cmd_lift(cfg, t=1.0, curve_hook=None):
    """ Flow equilibrium state at t -> suspension.yml (and square_measure.csv) """
    kind, _ = parse_map_key(cfg.map)
    if cfg.roof == "flow":
        if kind != "rovella":
            raise ConfigError("@lift: roof 'flow' needs map 'rovella' [{}]".format(cfg.map))
        roof = RoofFunction(FlowParams(**cfg.flow_dict()))
    else:
        roof = ConstantRoof(cfg.roof)
    flow = FlowParams(**cfg.flow_dict()) if kind == "rovella" else None
    cmap, curve, dom = _pressure_pipeline(cfg, curve_hook)
    method = "periodic-orbit" if cfg.method == "closed-form" else cfg.method
    susp = flow_equilibrium(cmap, t, flow=flow, roof=roof, N=cfg.N, n_push=cfg.n_push, domain=dom,
                            method=method, resolution=_resolution(cfg, method), floor=cfg.delta_floor,
                            x_min_cutoff=cfg.x_min_cutoff)
    doc = susp.to_dict()
    doc["map"] = cmap.name
    doc["t_range"] = [dom.to_dict()["t_minus"], dom.to_dict()["t_plus"]]
    write_yaml(doc, _path(cfg, "suspension.yml"), cfg.digest())
    if susp.base.provenance == "lifted-from-interval":
        write_table(susp.base.to_table(), _path(cfg, "square_measure.csv"), cfg.digest())
    return 0


def get_parser():
    p = argparse.ArgumentParser(prog="rovella", description="Thermodynamic formalism of contracting Lorenz flows.")
    p.add_argument("--version", action="version", version="%(prog)s " + __version__)
    p.add_argument("--config", type=str, default=None, help="YAML run config (default: package defaults).")
    p.add_argument("--out", type=str, default=None, help="Output directory.")
    p.add_argument("--jobs", type=int, default=None, help="Number of workers.")
    p.add_argument("--seed", type=int, default=None, help="Seed of all sampling checks.")
    p.add_argument("-v", "--verbose", action="store_true", help="Log at INFO level.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", help="Check the cusp-map axioms.")
    ps = sub.add_parser("simulate", help="Simulate the flow from a section point.")
    ps.add_argument("--x0", type=float, default=0.25)
    ps.add_argument("--y0", type=float, default=0.5)
    ps.add_argument("--n-returns", type=int, default=10, dest="n_returns")
    sub.add_parser("pressure", help="Pressure curve and admissible range.")
    sub.add_parser("spectrum", help="Lyapunov spectrum of the flow.")
    pl = sub.add_parser("lift", help="Flow equilibrium state.")
    pl.add_argument("--t", type=float, default=1.0)
    return p


def main(argv: Optional[List[str]] = None, curve_hook=None) -> int:
    parser = get_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, out=args.out, jobs=args.jobs, seed=args.seed)
        if args.command == "validate":
            return cmd_validate(cfg)
        elif args.command == "simulate":
            return cmd_simulate(cfg, args.x0, args.y0, args.n_returns)
        elif args.command == "pressure":
            return cmd_pressure(cfg, curve_hook=curve_hook)
        elif args.command == "spectrum":
            return cmd_spectrum(cfg, curve_hook=curve_hook)
        return cmd_lift(cfg, args.t, curve_hook=curve_hook)
    except ConfigError as e:
        logging.error(str(e))
        return 2
    except RovellaError as e:
        logging.error("{}: {}".format(type(e).__name__, e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
