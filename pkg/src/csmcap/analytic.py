"""Closed-form references: two disks, and fitted formulas for the limit sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

# capacity of the unit square, Gamma(1/4)**2 / (4 pi**(3/2))
SQUARE_CAPACITY = math.gamma(0.25) ** 2 / (4.0 * math.pi**1.5)
PRODUCT_CUTOFF = 1e-17


def agm(a: float, b: float) -> float:
    if not (a > 0.0 and b > 0.0):
        raise ParameterError("arithmetic-geometric mean needs positive arguments")
    # quadratic convergence; the cap guards against last-bit oscillation
    for _ in range(64):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_k(modulus: float) -> float:
    """Complete elliptic integral of the first kind, ``K(k)`` with modulus k."""
    if not (0.0 <= modulus < 1.0):
        raise ParameterError(f"modulus must lie in [0, 1), got {modulus!r}")
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - modulus * modulus)))


@dataclass(frozen=True)
class TwoDiskReference:
    r: float
    rho: float
    L: float
    K: float
    capacity_exact: float
    capacity_csm: float

    @property
    def error(self) -> float:
        return abs(self.capacity_exact - self.capacity_csm)


def two_disk_exact(r: float) -> TwoDiskReference:
    """Exact capacity of the disks of radius r about 1/6 and 5/6."""
    if not (0.0 < r <= 1.0 / 6.0):
        raise ParameterError(f"radius must lie in (0, 1/6], got {r!r}")
    s = math.sqrt(1.0 - 9.0 * r * r)
    rho = 3.0 * r / (1.0 + s)
    prod = 1.0
    k = 1
    while rho ** (8 * k) >= PRODUCT_CUTOFF:
        prod *= ((1.0 + rho ** (8 * k)) / (1.0 + rho ** (8 * k - 4))) ** 2
        k += 1
    L = 2.0 * rho * prod
    K = elliptic_k(L * L)
    cap = 2.0 * K / (3.0 * math.pi) * s * math.sqrt(2.0 * L * (1.0 + L * L))
    return TwoDiskReference(r, rho, L, K, cap, math.sqrt(2.0 * r / 3.0))


def two_disk_bound(r: float) -> float:
    """Closed-form bound on ``|cap - e^{-c}|`` for the two-disk CSM estimate."""
    t = math.log(1.5 * r + 1.0)
    return math.sqrt(r / 6.0) * t * (1.0 + 0.25 * t * math.sqrt(1.5 * r + 1.0))


def _check_q(q: float) -> float:
    q = float(q)
    if not (0.0 < q <= 0.5):
        raise ParameterError(f"q must lie in (0, 1/2], got {q!r}")
    return q


def cantor_f(q: float) -> float:
    """Fitted approximation of the capacity of the generalized Cantor set."""
    q = _check_q(q)
    return q * (1.0 - q) - 0.5 * q**3 * (0.5 - q) ** 1.5


def dust_f(q: float) -> float:
    """Fitted approximation of the capacity of the Cantor dust."""
    q = _check_q(q)
    return math.sqrt(2.0) * SQUARE_CAPACITY * (q * (1.0 - q)) ** 0.25


def dust_bounds(q: float) -> tuple[float, float]:
    """Known lower and upper bounds for the capacity of the Cantor dust."""
    q = _check_q(q)
    c = q ** (1.0 / 3.0)
    return (1.0 - 2.0 * q) * c, math.sqrt(2.0) * c
