"""Geometric-tail extrapolation of a level sequence ``cap_k``.

The differences ``d_k = |cap_k - cap_{k+1}|`` are fitted by a straight
line in ``(k, log d_k)``; the fitted geometric tail is then summed onto the
last computed value until its terms drop below ``TAIL_CUTOFF``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ExtrapolationError, NonGeometricSequenceError, ParameterError

TAIL_CUTOFF = 1e-16
MAX_TAIL_TERMS = 100_000


class Direction(str, enum.Enum):
    DECREASING = "decreasing"
    INCREASING = "increasing"


@dataclass(frozen=True)
class ExtrapolationFit:
    k_range: tuple[int, int]
    p1: float
    p2: float
    direction: Direction
    cutoff_K: int | None
    limit: float
    residual_rms: float
    degenerate: bool = False

    def predicted_difference(self, k: float) -> float:
        return math.exp(self.p1 * k + self.p2)


def _as_pairs(values) -> tuple[np.ndarray, np.ndarray]:
    pairs = sorted((int(k), float(v)) for k, v in values)
    if len(pairs) < 3:
        raise ParameterError("need at least three levels to fit")
    ks = np.array([p[0] for p in pairs])
    if np.any(np.diff(ks) != 1):
        raise ParameterError(f"levels must be consecutive, got {ks.tolist()}")
    return ks, np.array([p[1] for p in pairs])


def _direction(diff: np.ndarray) -> Direction:
    if np.all(diff < 0):
        return Direction.DECREASING
    if np.all(diff > 0):
        return Direction.INCREASING
    raise NonGeometricSequenceError("successive differences change sign")


def fit_log_differences(values: Iterable[tuple[int, float]],
                        direction: Direction | str | None = None,
                        fit_range: tuple[int, int] | None = None) -> ExtrapolationFit:
    """Least-squares line through ``(k, log d_k)`` and the implied limit.

    ``fit_range`` is an inclusive range of k for the differences
    ``d_k``; by default every available difference is used.  The tail is
    always attached to the last supplied value.
    """
    ks, caps = _as_pairs(values)
    diff = np.diff(caps)
    dk = ks[:-1]
    if fit_range is not None:
        lo, hi = fit_range
        sel = (dk >= lo) & (dk <= hi)
        if sel.sum() < 2 or hi > dk[-1] or lo < dk[0]:
            raise ParameterError(f"fit range {fit_range} needs differences inside {dk[0]}..{dk[-1]}")
        dk, diff = dk[sel], diff[sel]
    rng = (int(dk[0]), int(dk[-1]))
    if np.any(diff == 0.0):
        # the sequence has stagnated: the current value is the limit
        d = Direction(direction) if direction else Direction.DECREASING
        return ExtrapolationFit(rng, -math.inf, -math.inf, d, None, float(caps[-1]), 0.0, True)
    detected = _direction(diff)
    d = Direction(direction) if direction is not None else detected
    y = np.log(np.abs(diff))
    p1, p2 = np.polyfit(dk.astype(float), y, 1)
    resid = y - (p1 * dk + p2)
    fit = ExtrapolationFit(rng, float(p1), float(p2), d, None, math.nan,
                           float(np.sqrt(np.mean(resid**2))))
    limit, K = _tail(fit, int(ks[-1]), float(caps[-1]))
    return ExtrapolationFit(rng, fit.p1, fit.p2, d, K, limit, fit.residual_rms)


def _tail(fit: ExtrapolationFit, k_last: int, cap_last: float) -> tuple[float, int]:
    if not fit.p1 < 0:
        raise ExtrapolationError(f"slope p1 = {fit.p1} does not decay")
    terms = []
    j = k_last
    while True:
        t = math.exp(fit.p1 * j + fit.p2)
        if t < TAIL_CUTOFF:
            break
        terms.append(t)
        j += 1
        if len(terms) > MAX_TAIL_TERMS:
            raise ExtrapolationError("tail does not reach the cutoff")
    tail = math.fsum(terms)
    sign = -1.0 if fit.direction is Direction.DECREASING else 1.0
    return cap_last + sign * tail, j


def extrapolate_limit(fit: ExtrapolationFit, last: tuple[int, float]) -> float:
    """``cap_last -/+ sum_{j=k_last}^{K*-1} exp(p1 j + p2)``."""
    k_last, cap_last = int(last[0]), float(last[1])
    if fit.degenerate:
        return cap_last
    return _tail(fit, k_last, cap_last)[0]


def extrapolate(values: Sequence[tuple[int, float]], **kw) -> float:
    return fit_log_differences(values, **kw).limit
