"""``ancf-bridge`` command line.

Exit codes: 0 success, 1 verification/equivalence failure, 2 input error,
3 infeasible degree request.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time

import numpy as np

from . import io
from .bezier import (
    DegreeTooLowError,
    ancf_to_bezier,
    bezier_to_ancf,
    degree_elevate,
    detect_optimal_degrees,
    general_T,
)
from .bspline import (
    ancf_to_bspline_span,
    bspline_to_ancf,
    decompose_to_bezier,
    psi_matrix,
    span_dimensions,
)
from .core import (
    GEOM_TOL,
    AncfSurfaceElement,
    BezierSurface,
    BSplineSurface,
    DomainError,
    KnotSpan,
    ValidationError,
)
from .sampling import IncompatibleInputs, compare, sample, to_csv, to_obj

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DEGREE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def default_tol() -> float:
    raw = os.environ.get("ANCF_BRIDGE_TOL")
    if raw is None:
        return GEOM_TOL
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"ANCF_BRIDGE_TOL is not a number: {raw!r}") from None


def _single_element(obj) -> AncfSurfaceElement:
    if isinstance(obj, AncfSurfaceElement):
        return obj
    if isinstance(obj, list) and len(obj) == 1:
        return obj[0].element
    raise UsageError("expected a single ANCF patch")


def _clamped(degree: int) -> np.ndarray:
    return np.array([0.0] * (degree + 1) + [1.0] * (degree + 1))


def _convert(obj, args, tol: float):
    target = args.target
    degrees = tuple(args.degrees) if args.degrees else None
    if isinstance(obj, BezierSurface):
        if target == "ancf":
            a, b = args.a or 1.0, args.b or 1.0
            m, n = obj.degrees
            print(f"T_g condition estimate: {general_T(m, n, a, b).condition():.3e}")
            return bezier_to_ancf(obj, a, b)
        if target == "bspline":
            m, n = obj.degrees
            print("control net copied onto clamped single-span knots")
            return BSplineSurface(m, n, _clamped(m), _clamped(n), obj.net)
        if degrees is None or degrees == obj.degrees:
            return obj
        m, n = obj.degrees
        if degrees[0] >= m and degrees[1] >= n:
            print(f"degree elevation {m}x{n} -> {degrees[0]}x{degrees[1]}")
            return degree_elevate(obj, degrees[0] - m, degrees[1] - n)
        return _to_bezier(bezier_to_ancf(obj), degrees, tol)

    if isinstance(obj, BSplineSurface):
        if target == "ancf":
            pairs = bspline_to_ancf(obj, args.a, args.b)
            conds = [
                psi_matrix(obj.knots_u, obj.knots_v, span, obj.degrees, el.a, el.b).condition()
                for span, el in pairs
            ]
            print(f"Psi condition estimate (max over {len(pairs)} spans): {max(conds):.3e}")
            return [
                io.SpanPatch(
                    el,
                    span,
                    (float(obj.knots_u[span.e]), float(obj.knots_u[span.e + 1])),
                    (float(obj.knots_v[span.f]), float(obj.knots_v[span.f + 1])),
                )
                for span, el in pairs
            ]
        if target == "bezier":
            patches = decompose_to_bezier(obj)
            if len(patches) != 1:
                raise UsageError(f"surface has {len(patches)} spans; a single Bezier file holds one patch")
            return patches[0][1]
        raise UsageError("input is already a B-spline surface")

    el = _single_element(obj)
    if args.a is not None or args.b is not None:
        raise UsageError("--a/--b only apply when converting to ancf")
    if target == "bezier":
        return _to_bezier(el, degrees or (3, 3), tol)
    if target == "bspline":
        k, l = degrees or (3, 3)
        vec = ancf_to_bspline_span(el, _clamped(k), _clamped(l), KnotSpan(k, l), (k, l), tol)
        psi = psi_matrix(_clamped(k), _clamped(l), KnotSpan(k, l), (k, l), el.a, el.b)
        print(f"Psi condition estimate: {psi.condition():.3e}")
        return BSplineSurface(k, l, _clamped(k), _clamped(l), vec.window())
    raise UsageError("input is already an ANCF patch")


def _to_bezier(el: AncfSurfaceElement, degrees, tol: float) -> BezierSurface:
    m, n = degrees
    print(f"T_g condition estimate: {general_T(m, n, el.a, el.b).condition():.3e}")
    surface = ancf_to_bezier(el, m, n, tol)
    if (m, n) != (3, 3):
        residual = np.abs(bezier_to_ancf(surface, el.a, el.b).nodes - el.nodes).max()
        print(f"degree {m}x{n} residual: {residual:.3e}")
    return surface


def cmd_convert(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    obj = io.load(args.input)
    result = _convert(obj, args, tol)
    io.save(result, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    report = compare(io.load(args.left), io.load(args.right), args.grid, tol)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_reduce(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    obj = io.load(args.input)
    el = _single_element(obj)
    report = detect_optimal_degrees(el, tol)
    print("  m  n  residual")
    for m, n, res in report.table():
        mark = "  <- optimal" if (m, n) == report.degrees else ""
        print(f"  {m}  {n}  {res:.3e}{mark}")
    m, n = report.degrees
    print(f"optimal degrees: {m}x{n}")
    io.save(ancf_to_bezier(el, m, n, tol), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    samples = sample(io.load(args.input), args.grid)
    text = to_obj(samples) if args.format == "obj" else to_csv(samples)
    io.write_text_atomic(args.out, text)
    print(f"wrote {args.out} ({sum(s[2].shape[0] * s[2].shape[1] for s in samples)} points)")
    return EXIT_OK


def bench_paths(surface: BSplineSurface, reps: int):
    """Median wall time of the direct and the knot-insertion route, and their max deviation."""
    direct_times, split_times = [], []
    direct = split = None
    for _ in range(reps):
        t0 = time.perf_counter()
        direct = bspline_to_ancf(surface)
        t1 = time.perf_counter()
        split = [
            bezier_to_ancf(patch, *span_dimensions(surface, span))
            for span, patch in decompose_to_bezier(surface)
        ]
        t2 = time.perf_counter()
        direct_times.append(t1 - t0)
        split_times.append(t2 - t1)
    dev = max(float(np.abs(a.nodes - b.nodes).max()) for (_, a), b in zip(direct, split))
    return statistics.median(direct_times), statistics.median(split_times), dev


def cmd_bench(args) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    surface = io.load(args.input)
    if not isinstance(surface, BSplineSurface):
        raise UsageError("bench needs a bspline_surface input")
    t_direct, t_split, dev = bench_paths(surface, args.reps)
    print(f"{'path':<28}{'median time':>14}")
    print(f"{'direct (Psi)':<28}{t_direct * 1e6:>11.1f} us")
    print(f"{'knot insertion + Bezier':<28}{t_split * 1e6:>11.1f} us")
    print(f"speedup: {t_split / t_direct:.2f}x")
    print(f"max slot deviation between paths: {dev:.3e}")
    return EXIT_OK if dev <= 1e-9 else EXIT_FAIL


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ancf-bridge", description="Convert between ANCF plate elements and Bezier/B-spline surfaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("convert", help="convert a surface file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--target", choices=("ancf", "bezier", "bspline"), required=True)
    p.add_argument("--degrees", nargs=2, type=int, metavar=("M", "N"))
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("verify", help="compare two surface files by dense sampling")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", help="find the lowest Bezier degrees of an ANCF patch")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("sample", help="sample a surface to OBJ or CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--grid", type=int, default=21)
    p.add_argument("--format", choices=("obj", "csv"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bench", help="time the direct and knot-insertion B-spline routes")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--reps", type=int, default=1000)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DegreeTooLowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGREE
    except IncompatibleInputs as exc:
        print(f"error: incompatible inputs: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValidationError, DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
