"""Command line interface.

    kveit mesh-info --level 4
    kveit forward --level 16 --out out/
    kveit reconstruct --level 4,8,16 --theta 0.01 --seed 3 --out out/
    kveit example 1 --config run.ini --out out/

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.
"""
import argparse
import os
import sys

import numpy as np
import scipy

from . import __version__
from .config import parse_config
from .errors import ConfigError, InvalidArgument, SolverFailure
from .experiments import (RNG_ALGORITHM, ExampleResult, NoiseSpec, Phantom, boundary_current,
                          run_example, run_ladder)
from .forward import Measurement, dirichlet_solve, neumann_solve
from .io import atomic_write, csv_text, read_vtk_points, vtk_text
from .mesh import boundary_trace, build_structured_mesh
from .optimizer import ArmijoConfig, IterationRecord

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

TABLE_FIELDS = ("level", "h", "rho", "delta", "theta", "n_measurements", "seed", "iterations",
                "tolerance", "L2_q", "L2_N", "L2_D", "EOC_q", "EOC_N", "EOC_D")
TABLE_DISPLAY = ("h", "rho", "delta", "tolerance", "L2_q", "L2_N", "L2_D")


def ladder_kwargs(cfg):
    a, p = cfg.armijo, cfg.problem
    return dict(
        data_level=cfg.run.data_level,
        rho_scale=p.rho_scale,
        eps=p.eps,
        q_init=p.q_init,
        bounds=(p.lower, p.upper),
        method=cfg.run.solver,
        config=ArmijoConfig(beta0=a.beta0, tau=a.tau, max_iter=a.max_iter,
                            tol1_scale=a.tol1_scale, tol2_scale=a.tol2_scale,
                            reset_beta=a.reset_beta),
    )


def manifest_text(cfg):
    meta = [
        "[meta]",
        f"package = kveit {__version__}",
        f"numpy = {np.__version__}",
        f"scipy = {scipy.__version__}",
        f"rng = {RNG_ALGORITHM}",
        f"digest = {cfg.digest()}",
        "",
    ]
    return cfg.to_ini() + "\n" + "\n".join(meta)


def _run_files(tag, run, cfg):
    files = {}
    if cfg.output.csv:
        for lr in run.levels:
            files[f"history_{tag}_l{lr.level}.csv"] = csv_text(lr.result.history, IterationRecord.FIELDS)
    if cfg.output.vtk:
        for lr in run.levels:
            files[f"fields_{tag}_l{lr.level}.vtk"] = vtk_text(lr.mesh, run.fields[lr.level],
                                                              title=f"{tag} level {lr.level}")
    return files


def run_tag(example, key):
    """File name tag of one ladder run inside an experiment."""
    if example == 2:
        return f"theta{key:g}"
    if example == 3:
        return f"I{key}"
    return "ladder"


def emit_outputs(result, cfg, directory=None):
    """Write tables, histories, fields and the manifest; returns the written paths.

    ``result`` is an :class:`~kveit.experiments.ExampleResult`.  Everything is
    rendered in memory first and each file is written atomically.
    """
    directory = directory or cfg.output.directory
    files = {}
    name = f"example{result.example}" if cfg.run.command == "example" else "reconstruct"
    if cfg.output.csv:
        files[f"{name}_table.csv"] = csv_text(result.rows, TABLE_FIELDS, TABLE_DISPLAY)
    for key, run in result.runs.items():
        files.update(_run_files(run_tag(result.example, key), run, cfg))
    files["manifest.ini"] = manifest_text(cfg)
    os.makedirs(directory, exist_ok=True)
    paths = []
    for fname, text in files.items():
        path = os.path.join(directory, fname)
        atomic_write(path, text)
        paths.append(path)
    return paths


def load_conductivity(path, mesh):
    """Nodal conductivity from the ``q`` point scalar of a VTK file on ``mesh``."""
    points, data = read_vtk_points(path)
    if "q" not in data:
        raise ConfigError("problem.q_file", f"{path} has no point scalar 'q'")
    if points.shape[0] != mesh.n_nodes or not np.allclose(points[:, :2], mesh.nodes):
        raise ConfigError("problem.q_file", f"{path} does not hold a level {mesh.level} mesh")
    return data["q"]


def forward_files(cfg, level):
    mesh = build_structured_mesh(level)
    phantom = Phantom()
    q = load_conductivity(cfg.problem.q_file, mesh) if cfg.problem.q_file else phantom.interpolate(mesh)
    j = boundary_current(mesh)
    uN = neumann_solve(mesh, q, Measurement(j, np.zeros_like(j)), phantom.source, method=cfg.run.solver)
    g = boundary_trace(mesh, uN)
    uD = dirichlet_solve(mesh, q, Measurement(j, g), phantom.source, method=cfg.run.solver)
    rows = [
        {"k": k, "node": int(n), "x1": mesh.nodes[n, 0], "x2": mesh.nodes[n, 1], "j": j[k], "g": g[k]}
        for k, n in enumerate(mesh.boundary_nodes)
    ]
    files = {f"forward_l{level}_boundary.csv": csv_text(rows, ("k", "node", "x1", "x2", "j", "g"))}
    files[f"forward_l{level}.vtk"] = vtk_text(mesh, {"q": q, "u_N": uN, "u_D": uD}, f"forward level {level}")
    files["manifest.ini"] = manifest_text(cfg)
    return files, float(np.max(np.abs(uN - uD)))


def build_parser():
    p = argparse.ArgumentParser(prog="kveit", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--level", help="mesh level, or comma separated ladder")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--theta", type=float, help="fixed noise amplitude")
        sp.add_argument("--rho-scale", type=float, dest="rho_scale")
        sp.add_argument("--solver", choices=("cg", "direct"))
        sp.add_argument("--out", help="output directory")
        return sp

    common(sub.add_parser("mesh-info", help="print mesh statistics"))
    common(sub.add_parser("forward", help="solve the forward problems for the phantom"))
    common(sub.add_parser("reconstruct", help="reconstruct down a level ladder"))
    ex = common(sub.add_parser("example", help="run one of the reference experiments"))
    ex.add_argument("number", type=int, choices=(1, 2, 3))
    return p


def config_from_args(args):
    over = {"run.command": args.command}
    if getattr(args, "number", None) is not None:
        over["run.example"] = args.number
    if args.level:
        try:
            over["run.levels"] = tuple(int(v) for v in args.level.split(","))
        except ValueError as exc:
            raise ConfigError("run.levels", str(exc)) from exc
    if args.seed is not None:
        over["run.seed"] = args.seed
    if args.theta is not None:
        over["noise.theta"] = args.theta
        over["noise.mode"] = "fixed"
    if args.rho_scale is not None:
        over["problem.rho_scale"] = args.rho_scale
    if args.solver:
        over["run.solver"] = args.solver
    if args.out:
        over["output.directory"] = args.out
    return parse_config(path=args.config, overrides=over)


def prepare_directory(directory):
    """Create ``directory`` and fail early (OSError) if it cannot take files."""
    os.makedirs(directory, exist_ok=True)
    if not os.access(directory, os.W_OK | os.X_OK):
        raise PermissionError(f"output directory {directory!r} is not writable")


def execute(cfg, out=None):
    out = sys.stdout if out is None else out
    cmd = cfg.run.command
    if cmd == "mesh-info":
        for level in cfg.run.levels:
            print(build_structured_mesh(level).describe(), file=out)
        return []
    prepare_directory(cfg.output.directory)
    if cmd == "forward":
        level = cfg.run.levels[0]
        files, gap = forward_files(cfg, level)
        paths = []
        for fname, text in files.items():
            path = os.path.join(cfg.output.directory, fname)
            atomic_write(path, text)
            paths.append(path)
        print(f"level {level}: max |u_N - u_D| = {gap:.3e}", file=out)
        return paths
    kw = ladder_kwargs(cfg)
    n = cfg.noise
    if cmd == "reconstruct":
        noise = NoiseSpec(n.mode, n.theta, cfg.run.seed)
        run = run_ladder(cfg.run.levels, noise, n_measurements=n.measurements,
                         currents=n.currents or None, **kw)
        result = ExampleResult(0, run.reports, {"ladder": run})
    else:
        result = run_example(cfg.run.example, seed=cfg.run.seed, levels=cfg.run.levels,
                             thetas=n.thetas, sizes=n.sizes, theta=n.example3_theta, **kw)
    for r in result.rows:
        print(f"l={r.level:3d} delta={r.delta:.4e} it={r.iterations:4d} tol={r.tolerance: .4e} "
              f"L2_q={r.L2_q:.4e} L2_N={r.L2_N:.4e} L2_D={r.L2_D:.4e}", file=out)
    return emit_outputs(result, cfg)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        execute(cfg)
    except (ConfigError, InvalidArgument) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
