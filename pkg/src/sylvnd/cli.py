"""Batch command-line front end.

Subcommands: ``solve``, ``ode``, ``advdiff``, ``bench`` and ``selftest``.

Exit status: 0 success, 1 any other failure (including usage errors),
2 singular operator, 3 I/O or file-format error, 4 memory budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import re
import sys
import time
from math import prod

import numpy as np

from . import __version__, _backsub
from .errors import MemoryBudgetExceeded, SingularOperator, TensorFormatError
from .hermite import advdiff_exact, build_advdiff_system, hermite_grid
from .instances import make_rng, random_complex, random_ode, random_sylvester
from .kron import oracle_solve
from .ode import DEFAULT_RK4_DT, OdeSystem, propagate, rk4_reference
from .solver import SylvesterProblem, solve, sylvester_apply
from .tensor import _wrap_owned
from .tensorfile import read_matrix, read_tensor, write_tensor

EXIT_OK, EXIT_FAIL, EXIT_SINGULAR, EXIT_IO, EXIT_MEMORY = 0, 1, 2, 3, 4
BENCH_COLUMNS = ["N", "total_size", "schur_s", "transform_s", "backsub_s",
                 "inverse_s", "total_s", "max_error"]
BENCH_SCHEMA = "# sylvnd-bench schema=1"
DEFAULT_MAX_MEM = 2 * 1024 ** 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parse_dims(text):
    try:
        dims = tuple(int(p) for p in re.split(r"[,x\s]+", text.strip()) if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dims {text!r}") from None
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"invalid dims {text!r}")
    return dims


def _parse_range(text):
    m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.|:|-)\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}, expected e.g. 2..16")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}")
    return lo, hi


def _parse_bytes(text):
    m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*([kKmMgGtT]?)i?[bB]?\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"invalid memory size {text!r}")
    scale = {"": 1, "k": 1024, "m": 1024 ** 2, "g": 1024 ** 3, "t": 1024 ** 4}
    return int(float(m.group(1)) * scale[m.group(2).lower()])


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--dims", type=_parse_dims, help="comma-separated sizes, e.g. 5,4,3")
    common.add_argument("--seed", type=int, default=0, help="seed for random instances")
    common.add_argument("--random", action="store_true", help="generate a random instance")
    common.add_argument("--coeffs", nargs="+", metavar="FILE", help="coefficient matrix files")
    common.add_argument("--rhs", metavar="FILE", help="right-hand side / forcing tensor file")
    common.add_argument("--out", metavar="FILE", help="write the solution tensor here")
    common.add_argument("--tol", type=float, help="singularity threshold for denominators")
    common.add_argument("--max-mem", type=_parse_bytes, default=DEFAULT_MAX_MEM,
                        help="memory budget in bytes (suffixes K, M, G accepted)")
    common.add_argument("--csv", metavar="FILE", help="write a machine-readable summary here")
    common.add_argument("--backend", choices=["auto", "python", "numba"], default="auto")

    p = _Parser(prog="sylvnd", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve sum_j A_j x_j X = B")
    s.add_argument("--real", action="store_true", help="return the real part of the solution")

    o = sub.add_parser("ode", parents=[common], help="propagate X' = sum_j A_j x_j X + B")
    o.add_argument("--x0", metavar="FILE", help="initial state tensor file")
    o.add_argument("--t", type=float, default=0.1)
    o.add_argument("--dt", type=float, default=DEFAULT_RK4_DT)
    o.add_argument("--no-rk4", action="store_true", help="skip the RK4 comparison")

    a = sub.add_parser("advdiff", parents=[common], help="Hermite advection-diffusion experiment")
    a.add_argument("--N", type=int, default=3, help="number of space dimensions")
    a.add_argument("--hermite-m", type=int, default=16)
    a.add_argument("--hermite-b", type=float, default=1.4)
    a.add_argument("--t", type=float, default=1.0)

    b = sub.add_parser("bench", parents=[common], help="dimension-scaling benchmark, CSV output")
    b.add_argument("--n-range", type=_parse_range, default=(2, 16))

    sub.add_parser("selftest", parents=[common], help="quick randomized self-checks")
    return p


def _check_memory(size, buffers, budget):
    need = 16 * size * buffers
    if budget is not None and need > budget:
        raise MemoryBudgetExceeded(need, budget)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _timings_line(report):
    parts = [f"{k}={v:.4f}s" for k, v in report.stage_timings.items()]
    return "timings: " + " ".join(parts) + f" total={report.total_time:.4f}s"


def _load_coeffs(paths):
    return [read_matrix(p) for p in paths]


def _max_abs(a):
    return float(np.max(np.abs(a))) if a.size else 0.0


def cmd_solve(args, out):
    truth = None
    if args.random:
        if args.dims is None:
            raise UsageError("--random requires --dims")
        _check_memory(prod(args.dims), 3, args.max_mem)
        problem, truth = random_sylvester(args.dims, args.seed)
    else:
        if not args.coeffs or not args.rhs:
            raise UsageError("solve needs --coeffs and --rhs, or --random with --dims")
        As = _load_coeffs(args.coeffs)
        B = read_tensor(args.rhs)
        _check_memory(B.size, 3, args.max_mem)
        problem = SylvesterProblem(As, B)

    X, report = solve(problem, tol=args.tol, real_output=args.real, backend=args.backend)
    resid = sylvester_apply(problem.coefficients, X).array - problem.rhs.array
    rel_resid = _max_abs(resid) / (1.0 + _max_abs(problem.rhs.array))

    print(f"dims: {problem.dims}", file=out)
    print(f"relative residual: {rel_resid:.3e}", file=out)
    print(f"min |denominator|: {report.min_abs_denominator:.6e}", file=out)
    print(f"flop estimate: {report.flop_estimate} (+ Schur worst case "
          f"{report.schur_flop_estimate})", file=out)
    print(f"normal fast path: {report.used_normal_fast_path}  backend: {report.backend}",
          file=out)
    print(_timings_line(report), file=out)
    row = [problem.ndim, X.size, rel_resid, report.min_abs_denominator, report.total_time]
    header = ["N", "total_size", "relative_residual", "min_abs_denominator", "total_s"]
    if truth is not None:
        err = _max_abs(X.array - truth.array)
        print(f"max error: {err:.3e}", file=out)
        header.append("max_error")
        row.append(err)
    if args.out:
        write_tensor(args.out, X)
    if args.csv:
        _write_csv(args.csv, header, [row])
    return EXIT_OK


def cmd_ode(args, out):
    if args.random:
        if args.dims is None:
            raise UsageError("--random requires --dims")
        _check_memory(prod(args.dims), 3, args.max_mem)
        system = random_ode(args.dims, args.seed)
    else:
        if not args.coeffs or not args.rhs or not args.x0:
            raise UsageError("ode needs --coeffs, --rhs and --x0, or --random with --dims")
        As = _load_coeffs(args.coeffs)
        B, X0 = read_tensor(args.rhs), read_tensor(args.x0)
        _check_memory(B.size, 3, args.max_mem)
        system = OdeSystem(As, B, X0)

    t0 = time.perf_counter()
    X, report = propagate(system, args.t, tol=args.tol, backend=args.backend)
    t_prop = time.perf_counter() - t0
    print(f"dims: {system.dims}  t = {args.t}", file=out)
    print(f"propagate time: {t_prop:.4f}s", file=out)
    print(f"min |denominator|: {report.min_abs_denominator:.6e}", file=out)
    header = ["N", "total_size", "t", "propagate_s"]
    row = [len(system.dims), X.size, args.t, t_prop]
    if not args.no_rk4:
        t0 = time.perf_counter()
        X_rk = rk4_reference(system, args.t, args.dt)
        t_rk = time.perf_counter() - t0
        disc = _max_abs(X.array - X_rk.array)
        print(f"rk4 time (dt = {args.dt:g}): {t_rk:.4f}s", file=out)
        print(f"max discrepancy: {disc:.3e}", file=out)
        header += ["dt", "rk4_s", "max_discrepancy"]
        row += [args.dt, t_rk, disc]
    if args.out:
        write_tensor(args.out, X)
    if args.csv:
        _write_csv(args.csv, header, [row])
    return EXIT_OK


def cmd_advdiff(args, out):
    if args.N < 2:
        raise UsageError("--N must be at least 2")
    _check_memory(args.hermite_m ** args.N, 3, args.max_mem)
    t0 = time.perf_counter()
    grid = hermite_grid(args.hermite_m, args.hermite_b)
    system = build_advdiff_system(grid, args.N)
    t_build = time.perf_counter() - t0
    X, report = propagate(system, args.t, tol=args.tol, backend=args.backend,
                          real_output=True)
    exact = advdiff_exact(grid, args.N, args.t)
    err = _max_abs(X.array - exact.array)
    print(f"N = {args.N}, M = {args.hermite_m}, b = {args.hermite_b}, t = {args.t}", file=out)
    print(f"max error vs exact: {err:.3e}", file=out)
    print(f"build time: {t_build:.4f}s", file=out)
    print(_timings_line(report), file=out)
    if args.out:
        write_tensor(args.out, X)
    if args.csv:
        _write_csv(args.csv, ["N", "M", "b", "t", "max_error", "total_s"],
                   [[args.N, args.hermite_m, args.hermite_b, args.t, err,
                     t_build + report.total_time]])
    return EXIT_OK


def bench_rows(n_range, seed, backend="auto"):
    """Yield one benchmark row per N with random 2x2 coefficients."""
    lo, hi = n_range
    if backend != "python":
        _backsub.warmup()
    for N in range(lo, hi + 1):
        rng = make_rng(seed + N)
        dims = (2,) * N
        As = [random_complex(rng, (2, 2)) for _ in range(N)]
        X = _wrap_owned(random_complex(rng, dims))
        problem = SylvesterProblem(As, sylvester_apply(As, X))
        Xn, report = solve(problem, backend=backend)
        st = report.stage_timings
        yield [N, 2 ** N, st["schur"], st["forward"], st["backsub"], st["inverse"],
               report.total_time, _max_abs(Xn.array - X.array)]


def cmd_bench(args, out):
    lo, hi = args.n_range
    _check_memory(2 ** hi, 3, args.max_mem)
    sink = open(args.csv, "w", newline="") if args.csv else out
    try:
        print(BENCH_SCHEMA, file=sink)
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for row in bench_rows(args.n_range, args.seed, args.backend):
            w.writerow([row[0], row[1]] + [f"{v:.6e}" for v in row[2:]])
            sink.flush()
    finally:
        if sink is not out:
            sink.close()
    return EXIT_OK


def cmd_selftest(args, out):
    checks = []

    problem, X = random_sylvester((5, 4, 3), args.seed)
    Xn, _ = solve(problem, backend=args.backend)
    checks.append(("reconstruct-and-solve dims (5,4,3)", _max_abs(Xn.array - X.array), 1e-9))

    problem, X = random_sylvester((3, 3, 3), args.seed + 1)
    Xn, _ = solve(problem, backend=args.backend)
    checks.append(("Kronecker-sum oracle dims (3,3,3)",
                   _max_abs(Xn.array - oracle_solve(problem).array), 1e-10))

    system = random_ode((2, 3, 2), args.seed + 2)
    Xt, _ = propagate(system, 0.05, backend=args.backend)
    checks.append(("propagate vs RK4 dims (2,3,2)",
                   _max_abs(Xt.array - rk4_reference(system, 0.05, 1e-3).array), 1e-10))

    grid = hermite_grid(16, 1.4)
    x = grid.nodes
    g = np.exp(-x ** 2)
    checks.append(("Hermite D1 on exp(-x^2)", _max_abs(grid.D1 @ g + 2 * x * g), 1e-13))
    checks.append(("Hermite D2 on exp(-x^2)",
                   _max_abs(grid.D2 @ g - (4 * x ** 2 - 2) * g), 5e-13))

    ok = True
    for name, value, tol in checks:
        passed = value <= tol
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {value:.3e} (tol {tol:.0e})", file=out)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "ode": cmd_ode, "advdiff": cmd_advdiff,
            "bench": cmd_bench, "selftest": cmd_selftest}


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except SingularOperator as exc:
        print(f"error: {exc}", file=err)
        return EXIT_SINGULAR
    except (TensorFormatError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO
    except MemoryBudgetExceeded as exc:
        print(f"error: {exc}", file=err)
        return EXIT_MEMORY
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FAIL
    except SystemExit as exc:
        # --help / --version
        return EXIT_OK if exc.code in (0, None) else EXIT_FAIL
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_FAIL


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
