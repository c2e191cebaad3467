"""Block-diagonal preconditioner built from the leading principal block of A.

With ``d = 2**j`` (intervals) or ``d = 4**j`` (dust), the first ``d``
charge points form a scaled copy of every other group of ``d`` points.
Their ``d x d`` block D of A therefore approximates every diagonal block,
and ``P = diag(D, ..., D)`` is used as a left preconditioner for B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import FactorizationError, ParameterError
from .geometry import ChargeConfiguration, Family

MAX_BLOCK = 4096
SELF_TEST_TOL = 1e-10
DEFAULT_EXPONENT = {Family.INTERVAL: 4, Family.DUST: 2}


def default_block_exponent(family: Family) -> int:
    return DEFAULT_EXPONENT[Family(family)]


@dataclass(frozen=True, eq=False)
class BlockPreconditioner:
    block_exponent: int
    block_size: int
    block: np.ndarray
    lu: tuple
    copies: int

    @property
    def size(self) -> int:
        return self.block_size * self.copies

    def _blocks(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.size % self.block_size:
            raise ParameterError(
                f"vector length {v.size} is not a multiple of the block size {self.block_size}"
            )
        return v.reshape(-1, self.block_size)

    def apply_inverse(self, v) -> np.ndarray:
        """Solve ``D x_b = v_b`` for every contiguous block."""
        vb = self._blocks(v)
        return lu_solve(self.lu, vb.T).T.ravel()

    def apply(self, v) -> np.ndarray:
        return (self._blocks(v) @ self.block.T).ravel()


def leading_block(cfg: ChargeConfiguration, d: int) -> np.ndarray:
    w = cfg.points[:d]
    with np.errstate(divide="ignore"):
        blk = -np.log(np.abs(w[:, None] - w[None, :]))
    np.fill_diagonal(blk, -math.log(cfg.radius))
    return blk


def build_preconditioner(cfg: ChargeConfiguration, j: int, *, reduced: bool = True,
                         seed: int = 0) -> BlockPreconditioner:
    """Factor the leading block of A for ``P_{m/2}`` (or ``P_m`` if not reduced)."""
    k = cfg.params.k
    if not (isinstance(j, (int, np.integer)) and 1 <= j <= k - 1):
        raise ParameterError(f"block exponent j must satisfy 1 <= j <= k-1 = {k - 1}, got {j!r}")
    base = 2 if cfg.family is Family.INTERVAL else 4
    d = base**j
    if d > MAX_BLOCK:
        raise ParameterError(f"block size {d} exceeds {MAX_BLOCK}")
    n = cfg.count // 2 if reduced else cfg.count
    blk = leading_block(cfg, d)
    lu = lu_factor(blk, check_finite=True)
    if np.any(np.diag(lu[0]) == 0.0):
        raise FactorizationError(f"leading {d}x{d} block is singular")
    pre = BlockPreconditioner(int(j), d, blk, lu, n // d)
    v = np.random.default_rng(seed).standard_normal(d)
    back = pre.apply_inverse(blk @ v)
    err = np.abs(back - v).max() / np.abs(v).max()
    if not err <= SELF_TEST_TOL:
        raise FactorizationError(f"block solve self-test failed: error {err:.2e}")
    return pre
