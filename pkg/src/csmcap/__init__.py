"""Logarithmic capacity of Cantor-type sets by the charge simulation method.

One charge point per disk, a symmetry-folded collocation system solved by
preconditioned GMRES with fast log-kernel products, and geometric-tail
extrapolation of the level sequence.
"""

from .analytic import cantor_f, dust_bounds, dust_f, two_disk_exact
from .capacity import (
    ErrorBoundReport,
    SolveReport,
    capacity_of_configuration,
    capacity_of_level,
    error_bound,
    recover_charges,
)
from .extrapolate import ExtrapolationFit, extrapolate_limit, fit_log_differences
from .fastsum import SummationConfig, log_potential_direct, log_potential_fast
from .geometry import (
    CantorParameters,
    ChargeConfiguration,
    Family,
    ReducedSystem,
    build_configuration,
    cantor_dust_points,
    cantor_interval_points,
    reduce_by_symmetry,
)
from .krylov import KrylovResult, SolverConfig, gmres, minres
from .operator import BOperator, apply_B, assemble_dense_A, assemble_dense_B, check_structure
from .precond import BlockPreconditioner, build_preconditioner

__version__ = "0.1.0"
