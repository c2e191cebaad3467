"""Charge configurations for generalized Cantor sets and Cantor dust.

Level ``k`` of the interval family replaces each of the ``2**k`` intervals
of E_k by the disk over it; the dust family uses the ``4**k`` disks
circumscribing the squares of F_k.  One charge point sits at every disk
center.  Both families are centrosymmetric, which lets the collocation
system be folded onto half of the points (:func:`reduce_by_symmetry`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, ParameterError, SymmetryError

SYMMETRY_TOL = 1e-13
DUST_Q_MAX = math.sqrt(2.0) - 1.0


class Family(str, enum.Enum):
    INTERVAL = "cantor"
    DUST = "dust"


@dataclass(frozen=True)
class CantorParameters:
    q: float
    k: int
    family: Family = Family.INTERVAL
    radius_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        q, k = float(self.q), self.k
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 0:
            raise ParameterError(f"level k must be a non-negative integer, got {k!r}")
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "q", q)
        if not (0.0 < q < 0.5):
            raise ParameterError(f"q must lie in (0, 1/2), got {q!r}")
        rf = float(self.radius_factor)
        object.__setattr__(self, "radius_factor", rf)
        if self.family is Family.INTERVAL:
            if rf != 1.0:
                raise ParameterError("radius_factor applies to the dust family only")
        elif not (1.0 <= rf < math.sqrt(2.0)):
            raise ParameterError(f"radius_factor must lie in [1, sqrt 2), got {rf!r}")

    @property
    def m(self) -> int:
        return (2 if self.family is Family.INTERVAL else 4) ** self.k

    @property
    def radius(self) -> float:
        if self.family is Family.INTERVAL:
            return 0.5 * self.q**self.k
        return self.radius_factor * self.q**self.k / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ChargeConfiguration:
    """Ordered charge points ``w_j`` with their common disk radius."""

    params: CantorParameters
    points: np.ndarray
    radius: float
    center: complex

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def count(self) -> int:
        return self.points.size

    @property
    def family(self) -> Family:
        return self.params.family


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Half-size point set defining the folded matrix B.

    ``zpoints + zlo`` is a double-double representation of
    ``(w_i - center)**2`` for the first half of the points, so that
    differences of nearby z-points keep full relative accuracy.
    """

    zpoints: np.ndarray
    zlo: np.ndarray
    radius: float
    diag: np.ndarray
    source: ChargeConfiguration = field(repr=False)

    def __post_init__(self):
        for a in (self.zpoints, self.zlo, self.diag):
            a.setflags(write=False)

    @property
    def size(self) -> int:
        return self.zpoints.size


def _digit_expansion(q: float, k: int, digits: np.ndarray) -> np.ndarray:
    """Sum of ``digit_i * (1-q) * q**(i-1)`` plus the half-width ``q**k/2``.

    ``digits`` has shape (k, n) with the most significant digit first.
    """
    out = np.zeros(digits.shape[1])
    for i in range(k):
        out += digits[i] * ((1.0 - q) * q**i)
    return out + 0.5 * q**k


def _binary_digits(k: int, base_bits: int, shift: int) -> np.ndarray:
    # digit i of index j in base 2**base_bits, bit `shift` of that digit
    idx = np.arange(2 ** (base_bits * k), dtype=np.int64)
    rows = [(idx >> (base_bits * (k - 1 - i) + shift)) & 1 for i in range(k)]
    return np.array(rows, dtype=float).reshape(k, idx.size)


def cantor_interval_points(params: CantorParameters) -> ChargeConfiguration:
    """Midpoints of the ``2**k`` intervals of E_k in increasing order."""
    if params.family is not Family.INTERVAL:
        raise ParameterError("cantor_interval_points needs the interval family")
    q, k = params.q, params.k
    w = _digit_expansion(q, k, _binary_digits(k, 1, 0))
    cfg = ChargeConfiguration(params, w.astype(complex), params.radius, 0.5 + 0j)
    _check_interval(cfg)
    return cfg


def cantor_dust_points(params: CantorParameters) -> ChargeConfiguration:
    """Centers of the ``4**k`` dust squares in the recursive quadrant order.

    Index ``j`` written in base 4 selects, digit by digit, the offsets
    0, (1-q), (1-q)i, (1-q)(1+i); the low bit of a digit moves right and
    the high bit moves up.
    """
    if params.family is not Family.DUST:
        raise ParameterError("cantor_dust_points needs the dust family")
    q, k = params.q, params.k
    x = _digit_expansion(q, k, _binary_digits(k, 2, 0))
    y = _digit_expansion(q, k, _binary_digits(k, 2, 1))
    cfg = ChargeConfiguration(params, x + 1j * y, params.radius, 0.5 + 0.5j)
    _check_dust(cfg)
    return cfg


def build_configuration(params: CantorParameters) -> ChargeConfiguration:
    if params.family is Family.INTERVAL:
        return cantor_interval_points(params)
    return cantor_dust_points(params)


def two_disk_configuration(r: float) -> ChargeConfiguration:
    """Disks of radius ``r`` about 1/6 and 5/6 (level one of q = 1/3)."""
    if not (0.0 < r <= 1.0 / 6.0):
        raise ParameterError(f"two-disk radius must lie in (0, 1/6], got {r!r}")
    params = CantorParameters(1.0 / 3.0, 1)
    w = np.array([1.0 / 6.0, 5.0 / 6.0], dtype=complex)
    cfg = ChargeConfiguration(params, w, float(r), 0.5 + 0j)
    check_centrosymmetry(cfg)
    return cfg


def check_centrosymmetry(cfg: ChargeConfiguration) -> None:
    """Raise SymmetryError unless ``w[m-1-j] == 2*center - w[j]``."""
    w = cfg.points
    dev = np.abs(w[::-1] - (2.0 * cfg.center - w))
    if dev.size and dev.max() > SYMMETRY_TOL:
        j = int(dev.argmax())
        raise SymmetryError(
            f"points {j} and {w.size - 1 - j} break centrosymmetry by {dev[j]:.3e}"
        )


def _check_interval(cfg: ChargeConfiguration) -> None:
    x = cfg.points.real
    if not (0.0 < x[0] and x[-1] < 1.0):
        raise GeometryError("interval midpoints leave the unit interval")
    if x.size > 1:
        gaps = np.diff(x)
        i = int(gaps.argmin())
        if not gaps[i] > 2.0 * cfg.radius:
            raise GeometryError(
                f"interval disks {i} and {i + 1} overlap or are out of order: "
                f"gap {gaps[i]:.6g} <= 2r = {2 * cfg.radius:.6g}"
            )
    check_centrosymmetry(cfg)


def _check_dust(cfg: ChargeConfiguration) -> None:
    w = cfg.points
    m = w.size
    q = cfg.params.q
    # the centers form a product grid, so the closest pair is one 1D gap apart
    xs = np.unique(w.real)
    gaps = np.diff(xs)
    if gaps.size and not gaps.min() > 2.0 * cfg.radius:
        i = int(gaps.argmin())
        y0 = w.imag.min()
        a = int(np.flatnonzero((w.real == xs[i]) & (w.imag == y0))[0])
        b = int(np.flatnonzero((w.real == xs[i + 1]) & (w.imag == y0))[0])
        raise GeometryError(
            f"dust disks {a} and {b} overlap: distance {gaps[i]:.6g} "
            f"<= 2r = {2 * cfg.radius:.6g}"
        )
    if m >= 4:
        h = m // 2
        d1 = np.abs(w[h:] - (w[:h] + (1.0 - q) * 1j)).max()
        d2 = np.abs(w[:h][::-1] + w[:h] - (1.0 + q * 1j)).max()
        if max(d1, d2) > SYMMETRY_TOL:
            raise GeometryError("dust ordering identities fail")
    check_centrosymmetry(cfg)


# -- double-double helpers -------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _renorm(hi, lo):
    s = hi + lo
    return s, lo - (s - hi)


def centered_squares(w: np.ndarray, center: complex):
    """``(w - center)**2`` as a (hi, lo) pair of complex arrays."""
    ah, al = _two_sum(w.real, -center.real)
    bh, bl = _two_sum(w.imag, -center.imag)
    p1, e1 = _two_prod(ah, ah)
    p2, e2 = _two_prod(bh, bh)
    s, e3 = _two_sum(p1, -p2)
    re_hi, re_lo = _renorm(s, e3 + (e1 - e2) + 2.0 * (ah * al - bh * bl))
    p, e = _two_prod(ah, bh)
    im_hi, im_lo = _renorm(2.0 * p, 2.0 * e + 2.0 * (ah * bl + al * bh))
    return re_hi + 1j * im_hi, re_lo + 1j * im_lo


def reduce_by_symmetry(cfg: ChargeConfiguration) -> ReducedSystem:
    """Fold the centrosymmetric configuration onto its first half.

    Returns ``z_i = (w_i - center)**2`` for ``i < m/2`` and the diagonal
    entries ``-log|2 r (w_i - center)|`` of the folded matrix.
    """
    m = cfg.count
    if m % 2:
        raise GeometryError("symmetry reduction needs an even number of points")
    check_centrosymmetry(cfg)
    half = cfg.points[: m // 2]
    zh, zl = centered_squares(half, cfg.center)
    diag = -np.log(np.abs(2.0 * cfg.radius * (half - cfg.center)))
    red = ReducedSystem(zh, zl, cfg.radius, diag, cfg)
    if cfg.family is Family.INTERVAL:
        if not (zh.real[0] < 0.25 and np.all(np.diff(zh.real) < 0) and zh.real[-1] > 0):
            raise GeometryError("folded points are not strictly decreasing in (0, 1/4)")
    return red
