"""Mutual log-kernel potentials ``u_j = sum_{l != j} y_l log(z_j - z_l)``.

Two backends share one contract:

* ``direct`` -- the O(n^2) double loop, exact up to rounding;
* ``fast`` -- an adaptive dual-tree multipole method.  Each far-field
  interaction between cells of radii ``r_a``, ``r_b`` at center distance
  ``d`` is truncated at the smallest order ``p`` with
  ``2 alpha**(p+1) / (1 - alpha) <= epsilon`` where
  ``alpha = (r_a + r_b) / d``.  Translations between levels are exact,
  so ``|Re u_fast - Re u_direct| <= epsilon * ||y||_1`` up to rounding
  (documented constant C = 1).

The real part is the logarithmic potential.  The imaginary part of the
direct backend uses the principal branch term by term; the fast backend
returns a value on some branch of the same multivalued sum, i.e. equal
to the direct value modulo integer combinations of ``2 pi y_l``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, ParameterError, SingularityError
from . import _kernels as K

__all__ = [
    "Backend",
    "SummationConfig",
    "FastLogSummation",
    "log_potential_direct",
    "log_potential_fast",
    "log_potential_at",
]


class Backend(str, enum.Enum):
    DIRECT = "direct"
    HIERARCHICAL = "fast"


@dataclass(frozen=True)
class SummationConfig:
    backend: Backend = Backend.HIERARCHICAL
    epsilon: float = 0.5e-12
    theta: float = 0.5
    max_order: int = 64
    leaf_size: int = 32
    crossover: int = 512

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if self.epsilon < 1e-15:
            raise ConfigurationError(
                f"epsilon={self.epsilon:g} is below double precision resolution"
            )
        if not (0.0 < self.theta < 1.0):
            raise ConfigurationError("opening parameter theta must lie in (0, 1)")
        if self.leaf_size < 1 or self.crossover < 0:
            raise ConfigurationError("leaf_size must be >= 1 and crossover >= 0")
        if self.required_order > self.max_order:
            raise ConfigurationError(
                f"epsilon={self.epsilon:g} at theta={self.theta} needs expansion "
                f"order {self.required_order} > max_order={self.max_order}"
            )

    @property
    def required_order(self) -> int:
        target = self.epsilon * (1.0 - self.theta) / 2.0
        return max(1, math.ceil(math.log(target) / math.log(self.theta)) - 1)


def _as_points(z, z_lo=None):
    zh = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    if z_lo is None:
        zl = np.zeros_like(zh)
    else:
        zl = np.ascontiguousarray(z_lo, dtype=np.complex128).ravel()
        if zl.shape != zh.shape:
            raise ParameterError("z_lo must match z in shape")
    if not (np.all(np.isfinite(zh)) and np.all(np.isfinite(zl))):
        raise ParameterError("points must be finite")
    return zh, zl


def _check_distinct(zh, zl):
    order = np.lexsort((zl.imag, zl.real, zh.imag, zh.real))
    sh, sl = zh[order], zl[order]
    same = (sh[1:] == sh[:-1]) & (sl[1:] == sl[:-1])
    if same.any():
        i = int(np.flatnonzero(same)[0])
        raise SingularityError(
            f"points {order[i]} and {order[i + 1]} coincide at {sh[i]!r}"
        )


def _as_charges(y, n):
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if y.size != n:
        raise ParameterError(f"expected {n} charges, got {y.size}")
    return y


def log_potential_direct(z, y, z_lo=None, *, want_imag=True) -> np.ndarray:
    """Reference O(n^2) evaluation on the principal branch."""
    zh, zl = _as_points(z, z_lo)
    if zh.size < 1:
        raise ParameterError("need at least one point")
    _check_distinct(zh, zl)
    return K.direct_self(zh, zl, _as_charges(y, zh.size), want_imag)


class FastLogSummation:
    """Reusable summation plan for one fixed point set.

    The tree and interaction lists are built once; :meth:`apply` may then
    be called for any number of charge vectors.  The plan is read-only
    after construction.
    """

    def __init__(self, z, cfg: SummationConfig | None = None, z_lo=None):
        self.cfg = cfg or SummationConfig()
        self.zh, self.zl = _as_points(z, z_lo)
        n = self.zh.size
        if n < 1:
            raise ParameterError("need at least one point")
        _check_distinct(self.zh, self.zl)
        self.direct = self.cfg.backend is Backend.DIRECT or n <= self.cfg.crossover
        self.order = self.cfg.required_order
        self.stats = {"n": n, "nodes": 0, "m2l": 0, "p2p": 0}
        if self.direct:
            return
        c = self.cfg
        (self.perm, self.start, self.stop, self.left, self.right,
         self.center, radius) = K.build_tree(self.zh, self.zl, c.leaf_size)
        self.scale = np.maximum(radius, K.TINY_SCALE)
        (self.m2l_a, self.m2l_b, self.m2l_p, self.p2p_a, self.p2p_b,
         self.selfn) = K.build_interactions(
            self.start, self.stop, self.left, self.right, self.center, radius,
            c.theta, c.epsilon, self.order, c.leaf_size * c.leaf_size,
        )
        self.binom = K.binomial_table(2 * self.order + 1)
        self.stats.update(
            nodes=int(self.start.size), m2l=int(self.m2l_a.size),
            p2p=int(self.p2p_a.size + self.selfn.size),
        )

    @property
    def n(self) -> int:
        return self.zh.size

    def apply(self, y, want_imag=True) -> np.ndarray:
        y = _as_charges(y, self.n)
        if self.direct:
            return K.direct_self(self.zh, self.zl, y, want_imag)
        p = self.order
        q, a = K.upward_pass(
            self.zh, self.zl, y, self.perm, self.start, self.stop,
            self.left, self.right, self.center, self.scale, p, self.binom,
        )
        loc = K.m2l_pass(
            self.m2l_a, self.m2l_b, self.m2l_p, self.center, self.scale, q, a, p, self.binom
        )
        out = np.zeros(self.n, dtype=np.complex128)
        K.downward_pass(
            self.zh, self.zl, self.perm, self.start, self.stop, self.left, self.right,
            self.center, self.scale, loc, p, self.binom, out,
        )
        if not want_imag:
            out.imag = 0.0
        K.near_field(
            self.zh, self.zl, y, self.perm, self.start, self.stop,
            self.p2p_a, self.p2p_b, self.selfn, want_imag, out,
        )
        return out


def log_potential_fast(z, y, cfg: SummationConfig | None = None, z_lo=None,
                       *, want_imag=True) -> np.ndarray:
    return FastLogSummation(z, cfg, z_lo).apply(y, want_imag=want_imag)


DIRECT_TARGET_WORK = 4_000_000


def log_potential_at(targets, sources, y, cfg: SummationConfig | None = None,
                     *, want_imag=False) -> np.ndarray:
    """Potentials ``sum_l y_l log(t - s_l)`` at targets disjoint from sources.

    Large problems reuse the self-interaction plan on the union of both
    point sets, with zero charge on the targets.
    """
    tz, _ = _as_points(targets)
    sz, _ = _as_points(sources)
    y = _as_charges(y, sz.size)
    cfg = cfg or SummationConfig()
    if cfg.backend is Backend.DIRECT or tz.size * sz.size <= DIRECT_TARGET_WORK:
        return K.direct_targets(tz, sz, y, want_imag)
    allz = np.concatenate([sz, tz])
    ally = np.concatenate([y, np.zeros(tz.size)])
    return FastLogSummation(allz, cfg).apply(ally, want_imag=want_imag)[sz.size:]
