"""Command line front end: solve, stp-matrix, mesh-box."""

import argparse
import sys
from pathlib import Path

from . import meshing, pipeline, tensors, transfer
from .errors import (
    AssemblyError,
    ConfigError,
    FiberFemError,
    FormatError,
    MaterialError,
    MeshError,
    SolverError,
    TransferValidityError,
)

# Most specific class first; the first match names the stderr category.
_CATEGORIES = (
    (ConfigError, "config"),
    (FormatError, "format"),
    (TransferValidityError, "validity"),
    (MaterialError, "material"),
    (MeshError, "mesh"),
    (AssemblyError, "assembly"),
    (SolverError, "solver"),
    (FiberFemError, "internal"),
    (OSError, "io"),
    (ValueError, "value"),
)


def _category(exc):
    for cls, name in _CATEGORIES:
        if isinstance(exc, cls):
            return name
    return "internal"


def _run_solve(args):
    cfg = pipeline.load_case_config(args.config)
    trace = pipeline.run_case(cfg, skip_reference=args.skip_reference)
    pipeline.write_csv(trace, cfg.output_path)
    print(f"wrote {cfg.output_path} ({trace.num_vertices} rows)")
    return 0


def _run_stp_matrix(args):
    C_matrix = tensors.load_material(args.matrix)
    C_fiber = tensors.load_material(args.fiber)
    op = transfer.assemble_stp(C_matrix, C_fiber, transfer.FiberSection(args.radius))
    if args.alpha != 0.0 or args.beta != 0.0:
        op = transfer.rotate_stp(op, args.alpha, args.beta)
    M = op.as_matrix(args.notation)
    for row in M:
        print(",".join(repr(float(x)) for x in row))
    return 0


def _run_mesh_box(args):
    mesh = meshing.build_box_mesh(args.nx, args.ny, args.nz, args.lx, args.ly, args.lz)
    chains = None
    if args.fiber_line is not None:
        parts = args.fiber_line.split(",")
        if len(parts) != 3 or parts[0] not in ("x", "y", "z"):
            raise ConfigError(
                f"--fiber-line must be 'axis,a,b' with axis x|y|z, got {args.fiber_line!r}")
        try:
            a, b = int(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(
                f"--fiber-line indices must be integers, got {args.fiber_line!r}") from None
        chains = {args.fiber_name: meshing.box_grid_line(args.nx, args.ny, args.nz,
                                                         parts[0], a, b)}
    Path(args.out).write_text(meshing.serialize_msh(mesh, chains))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fiberfem",
        description="Strain transfer for embedded fibers: case solver, "
                    "analytical transfer matrices, structured box meshes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a case from a JSON config and write the CSV trace")
    solve.add_argument("--config", required=True, help="case configuration file")
    solve.add_argument("--skip-reference", action="store_true",
                       help="skip the resolved reference solve even if region materials are configured")
    solve.set_defaults(run=_run_solve)

    stp = sub.add_parser("stp-matrix", help="print a 6x6 strain-transfer matrix as CSV")
    stp.add_argument("--matrix", required=True, help="matrix material file")
    stp.add_argument("--fiber", required=True, help="fiber material file")
    stp.add_argument("--radius", type=float, required=True, help="fiber radius")
    stp.add_argument("--alpha", type=float, default=0.0,
                     help="matrix rotation about the fiber axis frame, radians")
    stp.add_argument("--beta", type=float, default=0.0,
                     help="in-plane fiber direction angle, radians")
    stp.add_argument("--notation", choices=("voigt", "mandel"), default="voigt")
    stp.set_defaults(run=_run_stp_matrix)

    box = sub.add_parser("mesh-box", help="write a structured box mesh (MSH 2.2 ASCII)")
    box.add_argument("--nx", type=int, required=True)
    box.add_argument("--ny", type=int, required=True)
    box.add_argument("--nz", type=int, required=True)
    box.add_argument("--lx", type=float, default=1.0)
    box.add_argument("--ly", type=float, default=1.0)
    box.add_argument("--lz", type=float, default=1.0)
    box.add_argument("--fiber-line", default=None, metavar="AXIS,A,B",
                     help="add a fiber chain along a grid line, e.g. x,5,5")
    box.add_argument("--fiber-name", default="fiber", help="physical name of the fiber chain")
    box.add_argument("--out", required=True, help="output mesh file")
    box.set_defaults(run=_run_mesh_box)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (FiberFemError, OSError, ValueError) as exc:
        message = " ".join(str(exc).split())
        print(f"error:{_category(exc)}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
