"""Command-line surface: evaluation, fields, certificates, meshes, corpus.

Every subcommand is a thin adapter over the library; outputs are JSON or
CSV and byte-identical across runs for fixed inputs and seed. Exit codes:
0 success, 2 invalid input (machine-readable JSON error on stderr), 3
numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import ComputeError, InputError


def _constants():
    from .bounds import CASE1_MARGIN
    from .christoffel import (
        MAX_EVAL_DEGREE,
        MAX_MOMENT_DEGREE,
        _CHOL_PIVOT_RTOL,
        _CHOL_RESIDUAL_RTOL,
    )
    from .quadmesh import MAX_MESH_DEGREE, _RESIDUAL_ACCEPT, _RESIDUAL_TARGET

    return {
        "max_eval_degree": MAX_EVAL_DEGREE,
        "max_moment_degree": MAX_MOMENT_DEGREE,
        "max_mesh_degree": MAX_MESH_DEGREE,
        "case1_margin": CASE1_MARGIN,
        "cholesky_pivot_rtol": _CHOL_PIVOT_RTOL,
        "cholesky_residual_rtol": _CHOL_RESIDUAL_RTOL,
        "compression_residual_target": _RESIDUAL_TARGET,
        "compression_residual_accept": _RESIDUAL_ACCEPT,
        "moment_defect_tol": 1e-10,
    }


def _parse_point(text):
    try:
        x, y = (float(c) for c in text.split(","))
    except ValueError:
        raise InputError(f"cannot parse point {text!r}; expected 'x,y'")
    return [x, y]


def _parse_grid(text):
    try:
        w, h = (int(c) for c in text.lower().split("x"))
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}; expected 'WxH'")
    return w, h


def _load_polygon(path):
    from .geometry import load_polygon

    try:
        return load_polygon(path)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"cannot read polygon file {path}: {exc}")


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(payload):
    return json.dumps(payload, indent=1) + "\n"


def _field_csv(table):
    lines = ["x,y,lambda,lower,upper,case_lower,case_upper"]
    for i in range(len(table)):
        lines.append(
            f"{float(table.x[i])!r},{float(table.y[i])!r},"
            f"{float(table.value[i])!r},{float(table.lower[i])!r},"
            f"{float(table.upper[i])!r},"
            f"{int(table.case_lower[i])},{int(table.case_upper[i])}"
        )
    return "\n".join(lines) + "\n"


def _quad_csv(quad):
    lines = ["x,y,w"]
    for (x, y), w in zip(quad.nodes, quad.weights):
        lines.append(f"{float(x)!r},{float(y)!r},{float(w)!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_eval(args):
    from .christoffel import christoffel_eval

    poly = _load_polygon(args.polygon)
    point = _parse_point(args.point) if args.point else poly.centroid.tolist()
    lam = christoffel_eval(poly, args.degree, point)
    _emit(_json_text({"n": args.degree, "point": point, "lambda": lam}),
          args.out)
    return 0


def _cmd_field(args):
    from .christoffel import christoffel_field

    poly = _load_polygon(args.polygon)
    table = christoffel_field(poly, args.degree, _parse_grid(args.grid))
    _emit(_field_csv(table), args.out)
    return 0


def _cmd_bounds(args):
    from .christoffel import christoffel_two_sided

    poly = _load_polygon(args.polygon)
    point = _parse_point(args.point) if args.point else poly.centroid.tolist()
    ts = christoffel_two_sided(poly, args.degree, point)
    payload = {
        "n": args.degree,
        "point": point,
        "lambda": ts.value,
        "lower": ts.lower,
        "upper": ts.upper,
        "retracted": ts.retracted.tolist(),
        "det_normalizer": ts.det_normalizer,
        "certificate_lower": ts.cert_lower.to_dict(),
        "certificate_upper": ts.cert_upper.to_dict(),
    }
    _emit(_json_text(payload), args.out)
    return 0


def _cmd_mesh(args):
    from .quadmesh import build_mesh

    poly = _load_polygon(args.polygon)
    mesh = build_mesh(poly, args.degree, args.multiplier, args.density)
    _emit(_json_text(mesh.to_dict()), args.out)
    return 0


def _cmd_quad(args):
    from .quadmesh import fine_quadrature, tchakaloff_compress

    poly = _load_polygon(args.polygon)
    quad = fine_quadrature(poly, args.degree)
    if args.compress:
        quad = tchakaloff_compress(quad, poly, args.degree)
    quad.validate(poly, tol=args.tol_moment)
    _emit(_quad_csv(quad), args.out)
    return 0


def _cmd_verify(args):
    from .quadmesh import load_mesh, verify_mesh

    poly = _load_polygon(args.polygon)
    try:
        mesh = load_mesh(args.mesh)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"cannot read mesh file {args.mesh}: {exc}")
    measured = verify_mesh(poly, mesh, trials=args.trials, seed=args.seed)
    payload = {
        "mesh": args.mesh,
        "trials": args.trials,
        "seed": args.seed,
        "nu_bound": mesh.nu_bound,
        "measured_nu": measured,
        "within_slack": measured <= mesh.nu_bound * 1.05,
    }
    _emit(_json_text(payload), args.out)
    return 0


def _cmd_corpus(args):
    from .corpus import acceptance_summary

    summary = acceptance_summary(fast=args.fast)
    _emit(_json_text(summary), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="christoffel",
        description="Christoffel functions, certified bounds, and "
                    "polynomial meshes on convex polygons.",
    )
    parser.add_argument(
        "--version", action="version",
        version=_json_text({"version": __version__,
                            "constants": _constants()}).rstrip("\n"),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, degree_default=None):
        p.add_argument("--polygon", required=True,
                       help="polygon JSON file {\"vertices\": [[x,y],...]}")
        p.add_argument("-n", "--degree", type=int,
                       required=degree_default is None,
                       default=degree_default, help="polynomial degree")
        p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("eval", help="evaluate lambda_n at a point")
    common(p)
    p.add_argument("--point", help="evaluation point 'x,y' "
                                   "(default: polygon centroid)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("field", help="lambda_n and bounds on a lattice, CSV")
    common(p)
    p.add_argument("--grid", default="64x64", help="lattice size WxH")
    p.set_defaults(func=_cmd_field)

    p = sub.add_parser("bounds", help="certified two-sided bounds at a point")
    common(p)
    p.add_argument("--point", help="evaluation point 'x,y' "
                                   "(default: polygon centroid)")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("mesh", help="build a norming mesh, JSON")
    common(p)
    p.add_argument("-m", "--multiplier", type=int, default=2,
                   help="gap multiplier m >= 2 (default 2)")
    p.add_argument("--density", type=int, default=64,
                   help="norming-constant sample lattice side (default 64)")
    p.set_defaults(func=_cmd_mesh)

    p = sub.add_parser("quad", help="positive quadrature rule, CSV")
    common(p)
    p.add_argument("--compress", action="store_true",
                   help="compress to at most dim-many nodes")
    p.add_argument("--tol-moment", type=float, default=1e-10,
                   help="moment-defect validation tolerance (default 1e-10)")
    p.set_defaults(func=_cmd_quad)

    p = sub.add_parser("verify", help="measure a mesh's norming constant")
    p.add_argument("--polygon", required=True)
    p.add_argument("--mesh", required=True, help="mesh JSON file")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("corpus",
                       help="regenerate the acceptance measured-constants "
                            "tables, JSON")
    p.add_argument("--fast", action="store_true",
                   help="smaller corpora for a quick preview")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=_cmd_corpus)

    parser.add_argument(
        "--tol-chol", type=float, default=None,
        help="override the Cholesky pivot gate (relative to the Gram "
             "diagonal) for this invocation",
    )
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol_chol is not None:
            if not args.tol_chol > 0:
                raise InputError("--tol-chol must be positive")
            from . import christoffel

            christoffel._CHOL_PIVOT_RTOL = args.tol_chol
        return args.func(args)
    except InputError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2
    except ComputeError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
