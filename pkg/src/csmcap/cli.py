"""Command-line driver: ``csmcap {compute,sweep,extrapolate,validate,bench}``.

Records go to stdout (or ``--out``); diagnostics go to stderr.

Exit codes:
  0  success
  1  usage or parameter error
  2  a solve did not converge, or unconverged input was refused
  3  differences are not geometric (mixed signs or no decay)
  4  a validation check failed
  5  a resource guard refused the request
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import records
from .analytic import two_disk_bound, two_disk_exact
from .capacity import capacity_of_configuration, capacity_of_level, error_bound, recover_charges
from .errors import (
    CapacityError,
    CapacityGuardError,
    DegenerateSolutionError,
    ExtrapolationError,
    NonGeometricSequenceError,
    ParameterError,
)
from .extrapolate import Direction, fit_log_differences
from .fastsum import Backend, FastLogSummation, SummationConfig, log_potential_direct
from .geometry import CantorParameters, Family, build_configuration, reduce_by_symmetry, two_disk_configuration
from .krylov import Method, SolverConfig, gmres
from .operator import BOperator, DIRECT_CAP, assemble_dense_B, check_structure
from .precond import build_preconditioner

EXIT_OK, EXIT_USAGE, EXIT_UNCONVERGED, EXIT_NONGEOMETRIC, EXIT_VALIDATION, EXIT_GUARD = range(6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_q(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational or decimal number: {text!r}") from exc


def parse_range(text: str) -> tuple[int, int]:
    try:
        a, b = text.replace(":", "..").split("..")
        return int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a range like 5..19, got {text!r}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- compute / sweep --------------------------------------------------------


def _sum_cfg(backend: str) -> SummationConfig | None:
    if backend == "auto":
        return None
    return SummationConfig(backend=Backend(backend))


def _run_level(args_tuple) -> records.RunRecord:
    family, q, k, rf, j, backend, tol, maxit, method, want_bound, samples = args_tuple
    params = CantorParameters(q, k, Family(family), rf)
    solver = SolverConfig(tol=tol, maxit=maxit, method=Method(method))
    cfg = build_configuration(params)
    rep = capacity_of_configuration(cfg, solver, _sum_cfg(backend), j)
    bound = None
    if want_bound:
        bound = error_bound(cfg, recover_charges(rep), rep.c, samples)
    return records.record_from_report(rep, method=method, tol=tol, maxit=maxit, bound=bound)


def _level_args(a, k):
    return (a.family, a.q, k, a.radius_factor, a.j, a.backend, a.tol, a.maxit, a.method,
            a.bound, a.samples)


def _finish(recs, a) -> int:
    _emit(records.dump(recs, a.format), a.out)
    if getattr(a, "pairs", None):
        with open(a.pairs, "w", encoding="utf-8") as fh:
            for r in recs:
                fh.write(f"{r.k} {r.capacity:.17g}\n")
    bad = [r.k for r in recs if not r.converged]
    if bad:
        _diag(f"unconverged levels: {bad}")
        return EXIT_UNCONVERGED
    return EXIT_OK


def cmd_compute(a) -> int:
    return _finish([_run_level(_level_args(a, a.k))], a)


def _sweep(a) -> list[records.RunRecord]:
    if a.q is None:
        raise UsageError("--q is required")
    if a.k_min > a.k_max:
        raise UsageError(f"empty level range {a.k_min}..{a.k_max}")
    jobs = [_level_args(a, k) for k in range(a.k_min, a.k_max + 1)]
    if a.jobs > 1:
        with ProcessPoolExecutor(a.jobs) as ex:
            recs = list(ex.map(_run_level, jobs))
    else:
        recs = []
        for job in jobs:
            recs.append(_run_level(job))
            _diag(f"k={recs[-1].k} capacity={recs[-1].capacity:.15f} iter={recs[-1].iterations} "
                  f"time={recs[-1].wall_time:.2f}s")
    return recs


def cmd_sweep(a) -> int:
    return _finish(_sweep(a), a)


# -- extrapolate ------------------------------------------------------------


def cmd_extrapolate(a) -> int:
    if a.input:
        text = sys.stdin.read() if a.input == "-" else open(a.input, encoding="utf-8").read()
        rows = records.parse_rows(text)
        family = rows[0].get("family", a.family) if rows else a.family
        q = float(rows[0].get("q", a.q or math.nan)) if rows else math.nan
        levels = records.iter_levels(rows)
    else:
        if a.q is None or a.k_min is None or a.k_max is None:
            raise UsageError("extrapolate needs --input or --q with --k-min/--k-max")
        recs = _sweep(a)
        family, q = a.family, a.q
        levels = [(r.k, r.capacity, r.converged) for r in recs]
    if len(levels) < 4:
        raise UsageError(f"need at least 4 levels, got {len(levels)}")
    bad = [k for k, _, ok in levels if not ok]
    if bad:
        _diag(f"refusing unconverged levels {bad}")
        return EXIT_UNCONVERGED
    values = [(k, c) for k, c, _ in levels]
    fit = fit_log_differences(values, a.direction, a.fit_range)
    ks = sorted(k for k, _ in values)
    rec = records.LimitRecord(
        records.SCHEMA_VERSION, str(family), q, ks[0], ks[-1], fit.k_range[0], fit.k_range[1],
        fit.p1, fit.p2, fit.direction.value, fit.cutoff_K, fit.limit, fit.residual_rms,
    )
    _emit(records.dump([rec], a.format), a.out)
    return EXIT_OK


# -- validate ---------------------------------------------------------------


def _check_structure(a):
    n = 0
    for q in (0.1, 1 / 3, 0.45):
        for k in range(2, 9):
            check_structure(build_configuration(CantorParameters(q, k)))
            n += 1
    for k in range(1, 5):
        check_structure(build_configuration(CantorParameters(1 / 3, k, Family.DUST)))
        n += 1
    return True, f"{n} configurations, bounds and decay hold"


def _check_two_disk(a):
    radii = [a.r] if a.r is not None else [1e-7, 1e-5, 1e-3, 1e-2, 1 / 6]
    msgs, ok = [], True
    for r in radii:
        cfg = two_disk_configuration(r)
        rep = capacity_of_configuration(cfg)
        ref = two_disk_exact(r)
        rel = abs(rep.capacity / ref.capacity_csm - 1)
        eb = error_bound(cfg, recover_charges(rep), rep.c, 64, reference_capacity=ref.capacity_exact)
        err = abs(ref.capacity_exact - rep.capacity)
        good = rel <= 1e-13 and err <= eb.bound * (1 + 1e-12) + 1e-16
        if r <= 1e-7:
            good = good and ref.error <= 1e-10
        ok &= good
        msgs.append(f"r={r:.3g}: |exact-csm|={err:.3e} bound={eb.bound:.3e} closed-form={two_disk_bound(r):.3e}")
    return ok, "; ".join(msgs)


def _check_precond_ratio(a):
    k = int(round(math.log2(a.m)))
    cfg = build_configuration(CantorParameters(1 / 3, k))
    b = assemble_dense_B(reduce_by_symmetry(cfg))
    pre = build_preconditioner(cfg, a.j)
    pb = np.vstack([pre.apply_inverse(col) for col in b.T]).T
    ratio = np.linalg.cond(pb) / np.linalg.cond(b)
    return ratio <= 0.06, f"m={2**k} j={a.j}: kappa(P^-1 B)/kappa(B) = {ratio:.4f} (limit 0.06)"


def _check_backend(a):
    red = reduce_by_symmetry(build_configuration(CantorParameters(1 / 3, 14)))
    y = np.random.default_rng(0).standard_normal(red.size)
    y /= np.abs(y).sum()
    fast = FastLogSummation(red.zpoints, SummationConfig(), red.zlo).apply(y, want_imag=False)
    direct = log_potential_direct(red.zpoints, y, red.zlo, want_imag=False)
    dev = np.abs(fast.real - direct.real).max()
    return dev <= 1e-11, f"n={red.size}: max |fast - direct| = {dev:.2e} (limit 1e-11)"


def _check_oracle(a):
    msgs, ok = [], True
    for fam, k in ((Family.INTERVAL, 12), (Family.DUST, 6)):
        cfg = build_configuration(CantorParameters(1 / 3, k, fam))
        red = reduce_by_symmetry(cfg)
        b = assemble_dense_B(red)
        ref = np.linalg.solve(b, np.ones(red.size))
        res = gmres(BOperator(red, SummationConfig(backend="direct")), np.ones(red.size))
        dev = np.abs(res.solution - ref).max() / np.abs(ref).max()
        ok &= dev <= 1e-9
        msgs.append(f"{fam.value} k={k}: |y_gmres - y_dense| = {dev:.2e}")
    return ok, "; ".join(msgs) + " (limit 1e-9)"


CHECKS = {
    "structure": _check_structure,
    "two-disk": _check_two_disk,
    "precond-ratio": _check_precond_ratio,
    "backend": _check_backend,
    "oracle": _check_oracle,
}


def cmd_validate(a) -> int:
    names = list(CHECKS) if a.check == "all" else [a.check]
    failed = 0
    for name in names:
        t0 = time.perf_counter()
        try:
            ok, detail = CHECKS[name](a)
        except CapacityError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail} [{time.perf_counter() - t0:.2f}s]")
    return EXIT_VALIDATION if failed else EXIT_OK


# -- bench ------------------------------------------------------------------


def _matvec_time(n: int, rng, repeats: int = 3) -> float:
    z = rng.random(n) + 1j * rng.random(n)
    plan = FastLogSummation(z, SummationConfig())
    y = rng.standard_normal(n)
    plan.apply(y, want_imag=False)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        plan.apply(y, want_imag=False)
        best = min(best, time.perf_counter() - t0)
    return best


def scaling_exponent(n1: int = 10_000, n2: int = 100_000, seed: int = 0) -> tuple[float, float, float]:
    rng = np.random.default_rng(seed)
    t1 = _matvec_time(n1, rng)
    t2 = _matvec_time(n2, rng)
    return t1, t2, math.log(t2 / t1) / math.log(n2 / n1)


def cmd_bench(a) -> int:
    print("family,q,k,m,backend,iterations,capacity,wall_time")
    if a.k_min is not None:
        for k in range(a.k_min, (a.k_max if a.k_max is not None else a.k_min) + 1):
            params = CantorParameters(a.q, k, Family(a.family))
            n_half = params.m // 2
            if a.backend == "direct" and n_half > DIRECT_CAP:
                raise CapacityGuardError(f"direct backend refuses m/2 = {n_half} > {DIRECT_CAP}")
            rep = capacity_of_level(params, sum_cfg=_sum_cfg(a.backend), j=a.j)
            print(f"{params.family.value},{a.q:.17g},{k},{rep.m},{rep.backend},{rep.iterations},"
                  f"{rep.capacity:.17g},{rep.wall_time:.4f}")
    if a.scaling:
        t1, t2, p = scaling_exponent(a.n1, a.n2)
        print(f"# matvec n={a.n1}: {t1:.4f}s  n={a.n2}: {t2:.4f}s  exponent={p:.3f}")
        if p >= 1.3:
            _diag(f"scaling exponent {p:.3f} is not below 1.3")
            return EXIT_VALIDATION
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _solve_flags(p: argparse.ArgumentParser, sweep: bool) -> None:
    p.add_argument("--family", choices=[f.value for f in Family], default="cantor")
    p.add_argument("--q", type=parse_q, required=not sweep)
    if sweep:
        p.add_argument("--k-min", type=int)
        p.add_argument("--k-max", type=int)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--pairs", help="also write 'k capacity' lines for plotting")
    else:
        p.add_argument("--k", type=int, required=True)
    p.add_argument("--j", type=int, default=None, help="preconditioner exponent, 0 disables")
    p.add_argument("--backend", choices=["auto", "direct", "fast"], default="auto")
    p.add_argument("--method", choices=[m.value for m in Method], default="gmres")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--maxit", type=int, default=400)
    p.add_argument("--radius-factor", type=float, default=1.0)
    p.add_argument("--bound", action="store_true", help="add the a-posteriori error bound")
    p.add_argument("--samples", type=int, default=None, help="boundary samples per circle")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csmcap", description="Logarithmic capacity of Cantor-type sets.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="one level")
    _solve_flags(p, sweep=False)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", help="a range of levels")
    _solve_flags(p, sweep=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("extrapolate", help="fit level differences and extrapolate")
    _solve_flags(p, sweep=True)
    p.add_argument("--input", help="CSV or JSON records with k and capacity ('-' for stdin)")
    p.add_argument("--fit-range", type=parse_range, default=None, help="e.g. 5..19")
    p.add_argument("--direction", choices=[d.value for d in Direction], default=None)
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("validate", help="structural, analytic and backend checks")
    p.add_argument("--check", choices=["all", *CHECKS], default="all")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--m", type=int, default=1024)
    p.add_argument("--j", type=int, default=4)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="timings and fast-summation scaling")
    p.add_argument("--family", choices=[f.value for f in Family], default="cantor")
    p.add_argument("--q", type=parse_q, default=1 / 3)
    p.add_argument("--k-min", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--backend", choices=["auto", "direct", "fast"], default="auto")
    p.add_argument("--scaling", action="store_true")
    p.add_argument("--n1", type=int, default=10_000)
    p.add_argument("--n2", type=int, default=100_000)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) in ("sweep",) and (args.k_min is None or args.k_max is None):
            raise UsageError("sweep needs --k-min and --k-max")
        return args.func(args)
    except UsageError as exc:
        _diag(f"csmcap: usage error: {exc}")
        return EXIT_USAGE
    except ParameterError as exc:
        _diag(f"csmcap: {exc}")
        return EXIT_USAGE
    except (NonGeometricSequenceError, ExtrapolationError) as exc:
        _diag(f"csmcap: {exc}")
        return EXIT_NONGEOMETRIC
    except CapacityGuardError as exc:
        _diag(f"csmcap: {exc}")
        return EXIT_GUARD
    except DegenerateSolutionError as exc:
        _diag(f"csmcap: {exc}")
        return EXIT_UNCONVERGED
    except CapacityError as exc:
        _diag(f"csmcap: {type(exc).__name__}: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
