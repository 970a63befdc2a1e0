"""Command-line entry point.

Every subcommand emits machine-readable output (JSON to stdout or a file,
CSV/OBJ files for bulk data). JSON payloads always start with a "config"
echo block so a result file documents the invocation that produced it.
Floats are serialized with Python's shortest-roundtrip repr, so identical
invocations produce byte-identical output.

Exit codes: 0 success, 1 domain error (singularity, non-regular value,
empty critical set, ...), 2 usage error.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import critical, curves, fieldkernel as fk, isosurface, planar, sweep
from ._util import _THREADS_ENV
from .errors import KnotfieldError

CURVE_CHOICES = curves.CATALOG_NAMES


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(payload, out_path):
    text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(args, keys):
    cfg = {"subcommand": args.command}
    for k in keys:
        cfg[k] = getattr(args, k.replace("-", "_"))
    cfg["threads"] = args.threads
    cfg["seed_rng"] = args.seed_rng
    return cfg


def _parse_point(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected x,y,z with two commas, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _make_charges(args):
    params = {}
    if getattr(args, "gamma", None) is not None:
        params["gamma"] = args.gamma
    if getattr(args, "aspect", None) is not None:
        params["a"] = args.aspect
    curve = curves.make_curve(args.curve, params)
    return curves.discretize(curve, args.n)


def _seeding_config(args):
    kwargs = {}
    if getattr(args, "grid", None) is not None:
        kwargs["grid_resolution"] = args.grid
    if getattr(args, "inflation", None) is not None:
        kwargs["inflation"] = args.inflation
    return critical.SeedingConfig(**kwargs)


def _cmd_eval(args):
    charges = _make_charges(args)
    ev = fk.evaluate(charges, args.point)
    payload = {
        "config": _config_echo(args, ["curve", "gamma", "aspect", "n",
                                      "point"]),
        "point": ev.point,
        "phi": ev.phi,
        "E": ev.E,
        "H": ev.H,
    }
    _emit(payload, args.out)
    return 0


def _cmd_planar(args):
    shape = args.shape
    a = args.aspect
    summary = {
        "config": _config_echo(args, ["shape", "aspect", "profile",
                                      "contour", "grid"]),
    }
    if shape in ("rectangle", "stadium"):
        d2 = (planar.rectangle_d2phi_origin(a) if shape == "rectangle"
              else planar.stadium_d2phi_origin(a))
    else:
        d2 = planar.ellipse_d2phi_origin(a)
    summary["d2phi_origin"] = d2
    points = planar.planar_critical_points(shape, a)
    summary["critical_points"] = [
        {"x": x, "kind": kind} for x, kind in points]

    if args.profile:
        prof = planar.axis_profile(shape, a)
        with open(args.profile, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "phi"])
            for x, phi in zip(prof.abscissae, prof.phi_values):
                writer.writerow([repr(float(x)), repr(float(phi))])
        summary["profile_csv"] = args.profile
    if args.contour:
        m = args.grid
        curve = curves.make_curve(shape, {"a": a})
        charges = curves.discretize(curve, 4096)
        lo, hi = charges.bounding_box()
        xs = np.linspace(1.1 * lo[0], 1.1 * hi[0], m)
        ys = np.linspace(1.1 * lo[1], 1.1 * hi[1], m)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel(), np.zeros(m * m)], axis=1)
        phi = fk.potential_grid(charges, pts)
        with open(args.contour, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "phi"])
            for p, v in zip(pts, phi):
                writer.writerow([repr(float(p[0])), repr(float(p[1])),
                                 repr(float(v))])
        summary["contour_csv"] = args.contour
    _emit(summary, None)
    return 0


def _cmd_bifurcation(args):
    res = (planar.rectangle_threshold() if args.shape == "rectangle"
           else planar.stadium_threshold())
    payload = {
        "config": _config_echo(args, ["shape"]),
        "threshold": res.threshold,
        "bracket": list(res.bracket),
        "aspect_ratio": res.aspect_ratio,
    }
    if res.polynomial_root is not None:
        payload["polynomial_root"] = res.polynomial_root
    _emit(payload, args.out)
    return 0


def _critical_payload(args):
    charges = _make_charges(args)
    config = _seeding_config(args)
    cset = critical.find_critical_set(charges, config, seeder=args.seeder)
    return charges, cset


def _cmd_critical(args):
    _, cset = _critical_payload(args)
    payload = {
        "config": _config_echo(args, ["curve", "gamma", "aspect", "n",
                                      "grid", "seeder"]),
        "critical_points": [p.as_dict() for p in cset],
    }
    _emit(payload, args.out)
    return 0


def _cmd_morse_code(args):
    _, cset = _critical_payload(args)
    code = critical.morse_code(cset)
    payload = {
        "config": _config_echo(args, ["curve", "gamma", "aspect", "n",
                                      "grid", "seeder"]),
        "morse_code": [
            {"value": v, "index": idx, "multiplicity": m}
            for v, idx, m in code],
    }
    _emit(payload, args.out)
    return 0


def _cmd_isosurface(args):
    charges = _make_charges(args)
    mesh = isosurface.extract_isosurface(charges, args.level,
                                         grid_resolution=args.grid)
    isosurface.save_obj(mesh, args.out)
    report = None
    if args.report:
        report = isosurface.topology(mesh)
        payload = {
            "config": _config_echo(args, ["curve", "gamma", "aspect", "n",
                                          "level", "grid", "out"]),
            "topology": report.as_dict(),
        }
        _emit(payload, args.report)
    return 0


def _cmd_gallery(args):
    charges = _make_charges(args)
    finder_cfg = critical.SeedingConfig(grid_resolution=args.crit_grid)
    cset = critical.find_critical_set(charges, finder_cfg)
    entries = isosurface.morse_transition_gallery(
        charges, cset, grid_resolution=args.grid)
    os.makedirs(args.outdir, exist_ok=True)
    summary = {
        "config": _config_echo(args, ["curve", "gamma", "aspect", "n",
                                      "grid", "crit_grid", "outdir"]),
        "levels": [],
    }
    for i, (level, mesh, report) in enumerate(entries):
        path = os.path.join(args.outdir, f"level_{i:02d}.obj")
        isosurface.save_obj(mesh, path)
        summary["levels"].append({
            "level": level,
            "obj": path,
            "topology": report.as_dict(),
        })
    _emit(summary, args.summary)
    return 0


def _cmd_sweep(args):
    res = sweep.flatten_sweep(args.curve, args.gamma_start, args.gamma_end,
                              args.steps, n_base=args.n_base,
                              n_max=args.n_max, schedule=args.schedule)
    sweep.write_sweep_csv(res, args.out)
    payload = {
        "config": _config_echo(args, ["curve", "gamma_start", "gamma_end",
                                      "steps", "n_base", "n_max",
                                      "schedule", "out"]),
        "min_zero_count": res.min_zero_count,
        "argmin_gamma_range": list(res.argmin_gamma_range),
        "bound_check": res.bound_check,
    }
    _emit(payload, None)
    return 0


def _cmd_table(args):
    rows = sweep.conjecture_table(steps=args.steps, n_base=args.n_base,
                                  n_max=args.n_max)
    payload = {
        "config": _config_echo(args, ["steps", "n_base", "n_max"]),
        "rows": [
            {"knot": r.knot, "lower_2t1": r.lower,
             "observed_min": r.observed_min, "conjectured": r.conjectured,
             "upper_2c1": r.upper, "pass": r.passed,
             "fail_gamma_range": (list(r.fail_gamma_range)
                                  if r.fail_gamma_range else None)}
            for r in rows],
    }
    if args.out:
        _emit(payload, args.out)
    sys.stdout.write(sweep.format_table(rows) + "\n")
    return 0


def _add_curve_args(p, with_n=True):
    p.add_argument("--curve", required=True, choices=CURVE_CHOICES,
                   help="catalog curve name")
    p.add_argument("--gamma", type=float, default=None,
                   help="height scale for knots (default 1)")
    p.add_argument("--aspect", type=float, default=None,
                   help="aspect ratio a for planar shapes")
    if with_n:
        p.add_argument("--n", type=int, default=2048,
                       help="number of point charges minus one (default 2048)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="knotfield",
        description="Electric fields of charged loops: equilibria, Morse "
                    "indices, equipotential topology, flattening sweeps.")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker cap (default: ${_THREADS_ENV} or cpu count)")
    parser.add_argument("--seed-rng", type=int, default=0,
                        help="seed for randomized property tests; core "
                             "algorithms are deterministic and ignore it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="potential, field, Hessian at a point")
    _add_curve_args(p)
    p.add_argument("--point", type=_parse_point, required=True,
                   help="evaluation point as x,y,z")
    p.add_argument("--out", default=None, help="write JSON here (else stdout)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("planar", help="planar shape profiles and critical points")
    p.add_argument("--shape", required=True,
                   choices=("rectangle", "stadium", "ellipse"))
    p.add_argument("--aspect", type=float, required=True)
    p.add_argument("--profile", default=None, help="axis profile CSV (x,phi)")
    p.add_argument("--contour", default=None, help="plane grid CSV (x,y,phi)")
    p.add_argument("--grid", type=int, default=101,
                   help="contour grid points per axis (default 101)")
    p.set_defaults(func=_cmd_planar)

    p = sub.add_parser("bifurcation", help="pitchfork threshold of a shape")
    p.add_argument("--shape", required=True, choices=("rectangle", "stadium"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bifurcation)

    for name, fn, extra_help in (
            ("critical", _cmd_critical, "find all field zeros"),
            ("morse-code", _cmd_morse_code,
             "grouped critical values (value, index, multiplicity)")):
        p = sub.add_parser(name, help=extra_help)
        _add_curve_args(p)
        p.add_argument("--grid", type=int, default=30,
                       help="seeding cells per axis (default 30)")
        p.add_argument("--inflation", type=float, default=None,
                       help="bounding box inflation factor (default 1.5)")
        p.add_argument("--seeder", choices=("mc", "dense"), default="mc")
        p.add_argument("--out", default=None)
        p.set_defaults(func=fn)

    p = sub.add_parser("isosurface", help="extract one equipotential surface")
    _add_curve_args(p)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--grid", type=int, default=isosurface.DEFAULT_GRID)
    p.add_argument("--out", required=True, help="OBJ output path")
    p.add_argument("--report", default=None, help="topology JSON path")
    p.set_defaults(func=_cmd_isosurface)

    p = sub.add_parser("gallery",
                       help="one surface per topological regime, as OBJ files")
    _add_curve_args(p)
    p.add_argument("--grid", type=int, default=isosurface.DEFAULT_GRID)
    p.add_argument("--crit-grid", type=int, default=30,
                   help="seeding resolution for the critical set")
    p.add_argument("--outdir", required=True)
    p.add_argument("--summary", default=None, help="summary JSON path")
    p.set_defaults(func=_cmd_gallery)

    p = sub.add_parser("sweep", help="flattening staircase for one knot")
    p.add_argument("--curve", required=True, choices=sweep.TABLE_KNOTS)
    p.add_argument("--gamma-start", type=float, default=1.0)
    p.add_argument("--gamma-end", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--n-base", type=int, default=2048)
    p.add_argument("--n-max", type=int, default=20000)
    p.add_argument("--schedule", choices=("linear", "geometric"),
                   default="linear")
    p.add_argument("--out", required=True, help="staircase CSV path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("table", help="conjectured-minimum table for all knots")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--n-base", type=int, default=2048)
    p.add_argument("--n-max", type=int, default=20000)
    p.add_argument("--out", default=None, help="JSON output path")
    p.set_defaults(func=_cmd_table)
    return parser


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        os.environ[_THREADS_ENV] = str(args.threads)
    try:
        return args.func(args)
    except KnotfieldError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
