"""End-to-end capacity estimates and their a-posteriori error bound."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSolutionError, ParameterError
from .fastsum import Backend, SummationConfig, log_potential_at
from .geometry import CantorParameters, ChargeConfiguration, build_configuration, reduce_by_symmetry
from .krylov import KrylovResult, Method, SolverConfig, gmres, minres
from .operator import BOperator
from .precond import build_preconditioner, default_block_exponent

DIRECT_MAX_HALF = 4096
DEFAULT_SAMPLES = 64
MIN_SAMPLES = 8
SAMPLE_THRESHOLD = 2**14


def default_summation(n_reduced: int) -> SummationConfig:
    backend = Backend.DIRECT if n_reduced <= DIRECT_MAX_HALF else Backend.HIERARCHICAL
    return SummationConfig(backend=backend)


@dataclass
class SolveReport:
    params: CantorParameters
    m: int
    c: float
    capacity: float
    iterations: int
    relative_residual: float
    true_relative_residual: float
    converged: bool
    backend: str
    preconditioner_j: int
    wall_time: float
    radius: float
    history: list[float] = field(default_factory=list, repr=False)
    reduced_solution: np.ndarray | None = field(default=None, repr=False)
    configuration: ChargeConfiguration | None = field(default=None, repr=False)


def _resolve_j(cfg: ChargeConfiguration, j: int | None) -> int:
    if j is None:
        j = default_block_exponent(cfg.family)
    if j < 0:
        raise ParameterError("block exponent must be non-negative")
    # j = 0 disables preconditioning; so does k <= j
    return j if 1 <= j <= cfg.params.k - 1 else 0


def capacity_of_configuration(cfg: ChargeConfiguration, solver: SolverConfig | None = None,
                              sum_cfg: SummationConfig | None = None,
                              j: int | None = None) -> SolveReport:
    """Solve the folded collocation system and return ``e^{-c}``.

    ``j`` selects the preconditioner block exponent (family default when
    None, no preconditioning when 0 or when ``k <= j``).  A preconditioner
    already present on ``solver`` takes precedence.
    """
    t0 = time.perf_counter()
    solver = solver or SolverConfig()
    if cfg.count == 1:
        c = -math.log(cfg.radius)
        return SolveReport(
            cfg.params, 1, c, math.exp(-c), 0, 0.0, 0.0, True, "none", 0,
            time.perf_counter() - t0, cfg.radius, [], np.array([1.0 / (2.0 * c)]), cfg,
        )
    red = reduce_by_symmetry(cfg)
    sum_cfg = sum_cfg or default_summation(red.size)
    op = BOperator(red, sum_cfg)
    jj = 0
    if solver.preconditioner is None and solver.method is Method.GMRES:
        jj = _resolve_j(cfg, j)
        if jj:
            solver = SolverConfig(solver.tol, solver.maxit, solver.method,
                                  build_preconditioner(cfg, jj))
    elif solver.preconditioner is not None:
        jj = solver.preconditioner.block_exponent
    solve = minres if solver.method is Method.MINRES else gmres
    res: KrylovResult = solve(op, np.ones(red.size), solver)
    s = float(res.solution.sum())
    if not s > 0.0:
        raise DegenerateSolutionError(f"e^T y = {s!r} is not positive")
    c = 1.0 / (2.0 * s)
    return SolveReport(
        params=cfg.params, m=cfg.count, c=c, capacity=math.exp(-c),
        iterations=res.iterations, relative_residual=res.relative_residual,
        true_relative_residual=res.true_relative_residual, converged=res.converged,
        backend=sum_cfg.backend.value, preconditioner_j=jj,
        wall_time=time.perf_counter() - t0, radius=cfg.radius, history=res.relative_residual_history,
        reduced_solution=res.solution, configuration=cfg,
    )


def capacity_of_level(params: CantorParameters, solver: SolverConfig | None = None,
                      sum_cfg: SummationConfig | None = None, j: int | None = None) -> SolveReport:
    return capacity_of_configuration(build_configuration(params), solver, sum_cfg, j)


def recover_charges(report: SolveReport) -> np.ndarray:
    """Full charge vector ``p = c [y; J y]``, which sums to one."""
    y = report.reduced_solution
    if y is None:
        raise ParameterError("report carries no reduced solution")
    if report.m == 1:
        return np.array([1.0])
    return report.c * np.concatenate([y, y[::-1]])


@dataclass(frozen=True)
class ErrorBoundReport:
    M_hat: float
    bound: float
    samples_per_circle: int
    reference_capacity: float | None = None


def default_samples(m: int) -> int:
    n = DEFAULT_SAMPLES
    size = SAMPLE_THRESHOLD
    while m > size and n > MIN_SAMPLES:
        n //= 2
        size *= 2
    return n


def bound_from_max(c: float, M: float) -> float:
    return math.exp(-c) * (M + 0.5 * M * M * math.exp(M))


def error_bound(cfg: ChargeConfiguration, p, c: float, samples_per_circle: int | None = None,
                sum_cfg: SummationConfig | None = None,
                reference_capacity: float | None = None) -> ErrorBoundReport:
    """Sample ``|h|`` on every boundary circle and bound ``|cap - e^{-c}|``.

    ``h(z) = c + sum_j p_j log|z - w_j|`` vanishes at the collocation
    points; its largest sampled modulus on the circles is ``M_hat``.
    """
    n = samples_per_circle or default_samples(cfg.count)
    if n < MIN_SAMPLES:
        raise ParameterError(f"need at least {MIN_SAMPLES} samples per circle")
    p = np.asarray(p, dtype=np.float64)
    w = cfg.points
    if p.shape != w.shape:
        raise ParameterError("charge vector does not match the configuration")
    ring = cfg.radius * np.exp(2j * np.pi * np.arange(n) / n)
    targets = (w[:, None] + ring[None, :]).ravel()
    pot = log_potential_at(targets, w, p, sum_cfg or SummationConfig())
    M = float(np.abs(c + pot.real).max())
    return ErrorBoundReport(M, bound_from_max(c, M), n, reference_capacity)
