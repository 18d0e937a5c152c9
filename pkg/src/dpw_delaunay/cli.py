"""Command line interface: ``dpw-delaunay {generate,check,radii,monodromy,selftest}``.

Exit status is 0 on success, 2 when the closing conditions fail and 1 on error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from .delaunay import (
    DelaunayParams,
    check_closing,
    classify,
    closed_form_monodromy,
    delaunay_geometry,
    delaunay_triple,
    neck_bulge_radii,
)
from .dpw import immerse
from .iwasawa import iwasawa_decompose
from .loops import DEFAULT_DEGREE, LoopMatrix, is_positive_loop, is_unitary_on_circle, multiply
from .monodromy import closing_conditions, compute_monodromy
from .surface import export_mesh, generate_mesh, measure

log = logging.getLogger("dpw_delaunay")

EXIT_OK, EXIT_ERROR, EXIT_OPEN = 0, 1, 2


def _params(args) -> DelaunayParams:
    data = {}
    if args.params:
        with open(args.params) as fh:
            data = json.load(fh)
    for key, attr in (("a", "a"), ("b", "b"), ("c", "c"), ("H", "H"), ("lambda0_arg", "lambda0_arg")):
        val = getattr(args, attr)
        if val is not None:
            data[key] = val
    if "a" not in data or "b" not in data:
        raise ValueError("parameters a and b are required (flags or --params file)")
    for key in ("a", "b"):
        v = complex(str(data[key]).replace(" ", "")) if isinstance(data[key], str) else data[key]
        if isinstance(v, complex):
            v = [v.real, v.imag]
        data[key] = v
    return DelaunayParams.from_dict(data)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_check(args) -> int:
    p = _params(args)
    check = check_closing(p, args.tol, args.fourier)
    out = check.to_dict()
    out["classification"] = classify(p) if abs(p.a) > 0 else "branched/invalid"
    _emit(out)
    return EXIT_OK if check.report.closed else EXIT_OPEN


def cmd_radii(args) -> int:
    p = _params(args)
    neck, bulge = neck_bulge_radii(p)
    out = {"neck": neck, "bulge": bulge, "classification": classify(p)}
    out.update(delaunay_geometry(p).to_dict())
    _emit(out)
    return EXIT_OK


def cmd_monodromy(args) -> int:
    p = _params(args)
    tri = delaunay_triple(p)
    chi = compute_monodromy(tri, args.fourier)
    ref = closed_form_monodromy(p, args.fourier)
    report = closing_conditions(chi, p.lam0, args.tol)
    out = report.to_dict()
    out["closed_form_difference"] = float(np.abs(chi.chi.coeffs - ref.chi.coeffs).max())
    out["unitary"] = is_unitary_on_circle(chi.chi, 64, 1e-8)
    _emit(out)
    return EXIT_OK if report.closed else EXIT_OPEN


def cmd_generate(args) -> int:
    p = _params(args)
    mesh = generate_mesh(p, args.t_steps, args.rho_min, args.rho_max, args.rho_steps,
                         args.fourier, args.tol, workers=args.workers)
    if args.out:
        export_mesh(mesh, args.format, args.out)
    check = check_closing(p, N=args.fourier)
    out = check.to_dict()
    geom = delaunay_geometry(p)
    out.update(classification=geom.classification, neck=geom.neck_radius, bulge=geom.bulge_radius)
    out.update(measure(mesh, geom).to_dict())
    out["vertices"] = int(mesh.points.shape[0] * mesh.points.shape[1])
    _emit(out)
    return EXIT_OK if mesh.closed else EXIT_OPEN


def _selftest_loop(rng):
    def unipotent(upper):
        m = {0: np.eye(2, dtype=complex)}
        for k in (-1, 1):
            e = np.zeros((2, 2), dtype=complex)
            e[(0, 1) if upper else (1, 0)] = 0.4 * complex(*rng.normal(size=2))
            m[k] = m[k] + e if k in m else e
        return LoopMatrix.from_modes(m)

    return multiply(unipotent(True), unipotent(False), headroom=1)


def cmd_selftest(args) -> int:
    rng = np.random.default_rng(0)
    results = {}
    worst = 0.0
    for _ in range(10):
        fb = iwasawa_decompose(_selftest_loop(rng), args.fourier)
        ok = is_unitary_on_circle(fb.F, tol=1e-9) and is_positive_loop(fb.B, tol=1e-9)
        if not ok:
            worst = math.inf
        worst = max(worst, fb.residual)
    results["iwasawa_residual"] = worst
    p = DelaunayParams(0.25, 0.25, 0.0)
    tri = delaunay_triple(p)
    pts = [immerse(tri, complex(0.5, t), args.fourier) for t in (0.0, 1.0, 2.0)]
    results["cylinder_radius_error"] = max(abs(math.hypot(x[0], x[1]) - 0.5) for x in pts)
    report = closing_conditions(compute_monodromy(tri, args.fourier), 1.0)
    results.update(report.to_dict())
    passed = worst <= 1e-8 and results["cylinder_radius_error"] <= 1e-6 and report.closed
    results["passed"] = passed
    _emit(results)
    return EXIT_OK if passed else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpw-delaunay", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--params", help="JSON file with keys a, b, c, H, lambda0_arg")
        sp.add_argument("--a", type=str)
        sp.add_argument("--b", type=str)
        sp.add_argument("--c", type=float)
        sp.add_argument("--H", type=float)
        sp.add_argument("--lambda0-arg", dest="lambda0_arg", type=float)
        sp.add_argument("--fourier", type=int, default=DEFAULT_DEGREE, help="truncation degree N")
        sp.add_argument("--tol", type=float, default=None)

    for name, func, tol in (("check", cmd_check, 1e-7), ("radii", cmd_radii, 1e-7),
                            ("monodromy", cmd_monodromy, 1e-7), ("generate", cmd_generate, 1e-8)):
        sp = sub.add_parser(name)
        common(sp)
        sp.set_defaults(func=func, default_tol=tol)
        if name == "generate":
            sp.add_argument("--t-steps", dest="t_steps", type=int, default=128)
            sp.add_argument("--rho-min", dest="rho_min", type=float, default=-math.pi)
            sp.add_argument("--rho-max", dest="rho_max", type=float, default=math.pi)
            sp.add_argument("--rho-steps", dest="rho_steps", type=int, default=129)
            sp.add_argument("--format", choices=("obj", "ply", "csv"), default="obj")
            sp.add_argument("--out")
            sp.add_argument("--workers", type=int, default=None)
    sp = sub.add_parser("selftest")
    sp.add_argument("--fourier", type=int, default=DEFAULT_DEGREE)
    sp.set_defaults(func=cmd_selftest, default_tol=None, tol=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.tol is None:
        args.tol = args.default_tol
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
