"""Command-line driver: check / solve / layout / rate over instance files.

Exit codes: 0 success, 1 usage, 2 parse/validation, 3 target not
attainable, 4 solver non-convergence (or unusable history), 5 layout
failure.
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NOT_ATTAINABLE = 3
EXIT_NO_CONVERGENCE = 4
EXIT_LAYOUT = 5


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we reserve 2
        raise _UsageError(message)


def _apply_thread_limit() -> None:
    # must run before numpy pulls in its BLAS; main() imports lazily
    n = os.environ.get("CIRCLEFLOW_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _build_parser() -> _Parser:
    p = _Parser(prog="circleflow", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("instance", help="instance file path")
        sp.add_argument("--geometry", choices=["euclidean", "hyperbolic"],
                        help="override the instance geometry")
        sp.add_argument("--method", choices=["flow", "newton"],
                        help="override the solver method")
        sp.add_argument("--tol", type=float, help="override the residual tolerance")
        sp.add_argument("--max-steps", type=int, help="override the step budget")
        sp.add_argument("--force", action="store_true",
                        help="solve even when the checker refutes the target")
        sp.add_argument("--out", help="output file path")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp_check = sub.add_parser("check", help="run (C1), Gauss-Bonnet and attainability checks")
    common(sp_check)
    sp_solve = sub.add_parser("solve", help="solve for the prescribed curvature target")
    common(sp_solve)
    sp_layout = sub.add_parser("layout", help="solve, develop and write an SVG pattern")
    common(sp_layout)
    sp_layout.add_argument("--overlay", action="store_true",
                           help="draw the triangulation over the circles")
    sp_rate = sub.add_parser("rate", help="fit the exponential decay rate of a stored history")
    sp_rate.add_argument("solution", help="solution file written by solve")
    return p


def _load_instance(path: str, args):
    from . import io as cfio
    from .circlegeom import Geometry

    with open(path, "r", encoding="utf-8") as fh:
        inst = cfio.parse_instance(fh.read())
    if args.geometry and Geometry(args.geometry) is not inst.geometry:
        # re-validate under the override rather than patching half the state
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        text = text.replace(f"geometry {inst.geometry.value}", f"geometry {args.geometry}")
        inst = cfio.parse_instance(text)
    if args.tol:
        inst.solver.tolerance = args.tol
    if args.max_steps:
        inst.solver.max_steps = args.max_steps
    if args.method:
        inst.solver.method = args.method
    return inst


def _run_checks(inst, verbose: bool):
    from .conditions import attainability, check_c1, check_target

    bad_tris = check_c1(inst.surface, inst.theta)
    target = inst.target()
    tr = check_target(inst.surface, target)
    rep = attainability(inst.surface, inst.theta, target, full_report=verbose)
    return bad_tris, tr, rep


def _print_check(inst, bad_tris, tr, rep) -> None:
    s = inst.surface
    print(f"surface: {s!r}")
    print(f"(C1): {'ok' if not bad_tris else f'violated on triangles {bad_tris}'}")
    if tr.ok:
        print("target: ok (upper bounds and Gauss-Bonnet)")
    else:
        for f in tr.failures:
            print(f"target: FAIL [{f.clause}] {f.detail}")
    word = "attainable" if rep.attainable else "NOT attainable"
    print(f"attainability ({rep.mode}, {rep.checked_subsets} subsets): {word}")
    for v in rep.violations[:8]:
        kind = "borderline" if v.borderline else "violated"
        print(
            f"  [{v.clause}] A={sorted(v.subset)}: lhs={v.lhs:.9g} rhs={v.rhs:.9g} "
            f"slack={v.slack:.3g} ({kind})"
        )
    if len(rep.violations) > 8:
        print(f"  ... and {len(rep.violations) - 8} more")


def _solve(inst):
    from .curvature import r_to_u
    from .solver import integrate_flow, newton_solve

    if inst.solver.method == "newton":
        u0 = r_to_u(inst.radii, inst.geometry)
        return newton_solve(
            inst.surface, inst.theta, u0, inst.target(), inst.geometry,
            tol=inst.solver.tolerance,
        )
    spec = inst.flow_spec()
    return integrate_flow(inst.surface, inst.theta, inst.radii, spec)


def _cmd_check(args) -> int:
    inst = _load_instance(args.instance, args)
    bad_tris, tr, rep = _run_checks(inst, args.verbose)
    _print_check(inst, bad_tris, tr, rep)
    ok = not bad_tris and tr.ok and rep.attainable
    return EXIT_OK if ok else EXIT_NOT_ATTAINABLE


def _cmd_solve(args) -> int:
    from . import io as cfio

    inst = _load_instance(args.instance, args)
    bad_tris, tr, rep = _run_checks(inst, args.verbose)
    verdict = "attainable" if rep.attainable else "not-attainable"
    if not rep.exhaustive:
        verdict += "-not-exhaustive"
    if (bad_tris or not rep.attainable) and not args.force:
        _print_check(inst, bad_tris, tr, rep)
        print("refusing to solve (use --force to override)")
        return EXIT_NOT_ATTAINABLE
    report = _solve(inst)
    text = cfio.write_solution(report, attainability=verdict)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out} ({report.status})")
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _cmd_layout(args) -> int:
    from . import io as cfio
    from .errors import NonflatInterior, NotDiskType
    from .layout import SvgOptions, develop, render_svg

    inst = _load_instance(args.instance, args)
    bad_tris, tr, rep = _run_checks(inst, args.verbose)
    if (bad_tris or not rep.attainable) and not args.force:
        _print_check(inst, bad_tris, tr, rep)
        print("refusing to solve (use --force to override)")
        return EXIT_NOT_ATTAINABLE
    report = _solve(inst)
    if not report.converged:
        print(f"solver did not converge ({report.status}); no layout written")
        return EXIT_NO_CONVERGENCE
    try:
        pattern = develop(inst.surface, inst.theta, report.r, inst.geometry)
    except (NotDiskType, NonflatInterior) as exc:
        print(f"layout failed: {exc}")
        return EXIT_LAYOUT
    for w in pattern.warnings:
        print(f"warning: {w}")
    svg = render_svg(pattern, SvgOptions(overlay=args.overlay))
    out = args.out or os.path.splitext(args.instance)[0] + ".svg"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_rate(args) -> int:
    from . import io as cfio
    from .errors import InsufficientHistory
    from .solver import fit_rate_from_history

    with open(args.solution, "r", encoding="utf-8") as fh:
        record = cfio.parse_solution(fh.read())
    if record.fields.get("converged") != "true":
        print(f"history is from a non-converged run (status {record.status})")
        return EXIT_NO_CONVERGENCE
    try:
        rate, r2, n = fit_rate_from_history(record.times, record.residuals)
    except InsufficientHistory as exc:
        print(f"cannot fit a rate: {exc}")
        return EXIT_NO_CONVERGENCE
    print(f"rate {rate!r}")
    print(f"r-squared {r2!r}")
    print(f"samples {n}")
    return EXIT_OK


def main(argv=None) -> int:
    _apply_thread_limit()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    from .errors import CircleFlowError, ParseError, ValidationError

    try:
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "layout":
            return _cmd_layout(args)
        return _cmd_rate(args)
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return EXIT_PARSE
    except (ParseError, ValidationError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CircleFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
