"""Collocation matrices A and B, dense and matrix-free.

A is the full ``m x m`` system with ``a_ii = -log r`` and
``a_ij = -log|w_i - w_j|``.  B is the symmetric half-size block obtained
from the centrosymmetric fold, with ``b_ii = -log|2 r sqrt(z_i)|`` and
``b_ij = -log|z_i - z_j|``.  Indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityGuardError, ParameterError, TheoremViolation
from .fastsum import Backend, FastLogSummation, SummationConfig
from .geometry import ChargeConfiguration, Family, ReducedSystem, reduce_by_symmetry

DENSE_CAP = 4096
DIRECT_CAP = 2**15
STRUCTURE_TOL = 1e-13
BLOCK_TOL = 1e-14


def entry_A(cfg: ChargeConfiguration, i: int, j: int) -> float:
    m = cfg.count
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"index ({i}, {j}) outside 0..{m - 1}")
    if i == j:
        return -math.log(cfg.radius)
    return -math.log(abs(complex(cfg.points[i]) - complex(cfg.points[j])))


def _guard(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapacityGuardError(f"{what} of size {n} exceeds the cap {cap}")


def assemble_dense_A(cfg: ChargeConfiguration, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense A, exactly symmetric and exactly centrosymmetric.

    The generated points mirror each other only to a few ulps, which is
    far too coarse for differences of neighbouring points.  So only the
    first block row is evaluated; the upper-left block of A12 is mirrored
    onto its persymmetric image and the second block row follows from
    centrosymmetry.  Both symmetries then hold bitwise.
    """
    m = cfg.count
    _guard(m, cap, "dense A")
    w = cfg.points
    if m == 1:
        return np.array([[-math.log(cfg.radius)]])
    h = m // 2
    with np.errstate(divide="ignore"):
        top = -np.log(np.abs(w[:h, None] - w[None, :]))
    a11 = top[:, :h]
    np.fill_diagonal(a11, -math.log(cfg.radius))
    p = top[:, h:]
    i, j = np.indices((h, h))
    a12 = np.where(i + j <= h - 1, p, p[::-1, ::-1].T)
    return np.block([[a11, a12], [a12.T, a11[::-1, ::-1]]])


def _pair_distances(zh, zl):
    return np.abs((zh[:, None] - zh[None, :]) + (zl[:, None] - zl[None, :]))


def assemble_dense_B(red: ReducedSystem, cap: int = DENSE_CAP) -> np.ndarray:
    n = red.size
    _guard(n, cap, "dense B")
    with np.errstate(divide="ignore"):
        b = -np.log(_pair_distances(red.zpoints, red.zlo))
    np.fill_diagonal(b, red.diag)
    return b


def block_identity_B(a: np.ndarray) -> np.ndarray:
    """``A11 + A12 J`` by explicit slicing and column reversal."""
    h = a.shape[0] // 2
    return a[:h, :h] + a[:h, h:][:, ::-1]


@dataclass(eq=False)
class BOperator:
    """Matrix-free ``y -> B y`` using the log-kernel summation engine.

    The summation plan for the z-points is built on first use and reused
    for every later product.
    """

    reduced: ReducedSystem
    sum_cfg: SummationConfig = field(default_factory=SummationConfig)
    direct_cap: int = DIRECT_CAP
    _plan: FastLogSummation | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.sum_cfg.backend is Backend.DIRECT:
            _guard(self.reduced.size, self.direct_cap, "direct summation")

    @property
    def size(self) -> int:
        return self.reduced.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.size, self.size)

    @property
    def plan(self) -> FastLogSummation:
        if self._plan is None:
            self._plan = FastLogSummation(self.reduced.zpoints, self.sum_cfg, self.reduced.zlo)
        return self._plan

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return apply_B(self, y)


def apply_B(op: BOperator, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (op.size,):
        raise ParameterError(f"expected a vector of length {op.size}, got shape {y.shape}")
    u = op.plan.apply(y, want_imag=False)
    return op.reduced.diag * y - u.real


# -- structural checks ------------------------------------------------------


@dataclass
class StructureReport:
    family: Family
    k: int
    checks: dict[str, str] = field(default_factory=dict)

    def lines(self) -> list[str]:
        return [f"{name}: {detail}" for name, detail in self.checks.items()]


def _check_decay(mat: np.ndarray, name: str) -> None:
    # row i must increase strictly up to the diagonal and decrease after it;
    # columns follow because the matrix is symmetric
    d = np.diff(mat, axis=1)
    n = mat.shape[0]
    above = np.triu(np.ones((n, n - 1), dtype=bool))
    bad = np.where(above, d >= 0, d <= 0)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise TheoremViolation(
            f"{name}: entries ({i}, {j}) and ({i}, {j + 1}) do not decay away from the diagonal"
        )


def _check_bounds(mat: np.ndarray, lo: float, hi: float, name: str) -> None:
    below = mat < lo - STRUCTURE_TOL
    above = mat > hi + STRUCTURE_TOL
    for mask, side, ref in ((below, "lower", lo), (above, "upper", hi)):
        if mask.any():
            i, j = map(int, np.argwhere(mask)[0])
            raise TheoremViolation(
                f"{name}: entry ({i}, {j}) = {mat[i, j]:.17g} breaks the {side} bound {ref:.17g}"
            )


def _check_symmetric(mat: np.ndarray, name: str) -> None:
    if not np.array_equal(mat, mat.T):
        i, j = map(int, np.argwhere(mat != mat.T)[0])
        raise TheoremViolation(f"{name} is not symmetric at ({i}, {j})")


def _check_block_identity(a: np.ndarray, b: np.ndarray) -> float:
    dev = np.abs(block_identity_B(a) - b)
    if dev.max() > BLOCK_TOL:
        i, j = map(int, np.unravel_index(dev.argmax(), dev.shape))
        raise TheoremViolation(f"B differs from A11 + A12 J by {dev[i, j]:.3e} at ({i}, {j})")
    return float(dev.max())


def check_structure(cfg: ChargeConfiguration, *, check_B: bool | None = None,
                    cap: int = DENSE_CAP) -> StructureReport:
    """Verify the entry bounds and off-diagonal decay of A and B.

    For the interval family this checks decay and bounds of A (k >= 1) and
    of B (k >= 2).  The bounds have no dust analog, so dust mode checks
    symmetry, centrosymmetry and the folded entry formulas only.
    Any violation raises :class:`TheoremViolation` naming the entry.
    """
    k, q, r = cfg.params.k, cfg.params.q, cfg.radius
    if k < 1:
        raise ParameterError("structure checks need k >= 1")
    if check_B is None:
        check_B = cfg.family is Family.DUST or k >= 2
    if check_B and cfg.family is Family.INTERVAL and k < 2:
        raise ParameterError("bounds for B need k >= 2 (q - 2r > 0)")
    rep = StructureReport(cfg.family, k)
    a = assemble_dense_A(cfg, cap)
    _check_symmetric(a, "A")
    if not np.array_equal(a, a[::-1, ::-1]):
        raise TheoremViolation("A is not centrosymmetric")
    rep.checks["A symmetric"] = "exact"
    rep.checks["A centrosymmetric"] = "exact"
    if cfg.family is Family.INTERVAL:
        _check_decay(a, "A")
        rep.checks["A decay"] = "ok"
        lo, hi = -math.log(1 - 2 * r), -math.log(r)
        _check_bounds(a, lo, hi, "A")
        rep.checks["A bounds"] = f"[{lo:.6g}, {hi:.6g}] ok"
    if check_B:
        red = reduce_by_symmetry(cfg)
        b = assemble_dense_B(red, cap)
        _check_symmetric(b, "B")
        rep.checks["B symmetric"] = "exact"
        dev = _check_block_identity(a, b)
        rep.checks["B = A11 + A12 J"] = f"max deviation {dev:.2e}"
        if cfg.family is Family.INTERVAL:
            _check_decay(b, "B")
            rep.checks["B decay"] = "ok"
            lo = -math.log((1 - q) * (q - 2 * r))
            hi = -math.log(r * (1 - 2 * q + 2 * r))
            _check_bounds(b, lo, hi, "B")
            rep.checks["B bounds"] = f"[{lo:.6g}, {hi:.6g}] ok"
    return rep
