import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csmcap.errors import GeometryError, ParameterError, SymmetryError
from csmcap.geometry import (
    DUST_Q_MAX,
    CantorParameters,
    ChargeConfiguration,
    Family,
    build_configuration,
    cantor_dust_points,
    cantor_interval_points,
    centered_squares,
    check_centrosymmetry,
    reduce_by_symmetry,
    two_disk_configuration,
)


def interval_midpoints_exact(q: Fraction, k: int) -> list[Fraction]:
    """Oracle: apply E_k = qE_{k-1} u (qE_{k-1} + 1 - q) to intervals exactly."""
    ivs = [(Fraction(0), Fraction(1))]
    for _ in range(k):
        ivs = [(q * a, q * b) for a, b in ivs] + [(q * a + 1 - q, q * b + 1 - q) for a, b in ivs]
    return [(a + b) / 2 for a, b in ivs]


def dust_centers_exact(q: Fraction, k: int) -> list[tuple[Fraction, Fraction]]:
    w = [(Fraction(1, 2), Fraction(1, 2))]
    for _ in range(k):
        s = [(q * x, q * y) for x, y in w]
        d = 1 - q
        w = s + [(x + d, y) for x, y in s] + [(x, y + d) for x, y in s] + [(x + d, y + d) for x, y in s]
    return w


def test_interval_level_one_third():
    cfg = cantor_interval_points(CantorParameters(1 / 3, 1))
    np.testing.assert_allclose(cfg.points.real, [1 / 6, 5 / 6], rtol=0, atol=1e-16)
    assert cfg.radius == pytest.approx(1 / 6)


def test_interval_level_zero():
    cfg = cantor_interval_points(CantorParameters(1 / 3, 0))
    assert cfg.points.tolist() == [0.5]
    assert cfg.radius == 0.5 and cfg.count == 1


def test_interval_quarter_level_two():
    cfg = cantor_interval_points(CantorParameters(0.25, 2))
    expected = [float(x) for x in interval_midpoints_exact(Fraction(1, 4), 2)]
    assert expected == [1 / 32, 7 / 32, 25 / 32, 31 / 32]
    np.testing.assert_allclose(cfg.points.real, expected, rtol=0, atol=1e-16)
    assert cfg.radius == 1 / 32


@pytest.mark.parametrize("q", [Fraction(1, 3), Fraction(1, 10), Fraction(9, 20)])
@pytest.mark.parametrize("k", [3, 6])
def test_interval_points_match_exact_recursion(q, k):
    cfg = cantor_interval_points(CantorParameters(float(q), k))
    exact = np.array([float(x) for x in interval_midpoints_exact(q, k)])
    np.testing.assert_allclose(cfg.points.real, exact, rtol=0, atol=4e-16)
    assert np.all(cfg.points.imag == 0)


def test_dust_level_zero_and_one():
    c0 = cantor_dust_points(CantorParameters(1 / 3, 0, Family.DUST))
    assert c0.points.tolist() == [0.5 + 0.5j]
    assert c0.radius == pytest.approx(1 / math.sqrt(2))
    c1 = cantor_dust_points(CantorParameters(1 / 3, 1, Family.DUST))
    w0 = (1 + 1j) / 6
    np.testing.assert_allclose(c1.points, [w0, w0 + 2 / 3, w0 + 2j / 3, w0 + 2 * (1 + 1j) / 3], atol=1e-16)


@pytest.mark.parametrize("k", [2, 4])
def test_dust_points_match_exact_recursion(k):
    q = Fraction(1, 3)
    cfg = cantor_dust_points(CantorParameters(float(q), k, Family.DUST))
    exact = np.array([float(x) + 1j * float(y) for x, y in dust_centers_exact(q, k)])
    np.testing.assert_allclose(cfg.points, exact, rtol=0, atol=4e-16)


def test_dust_overlap_is_rejected_with_pair():
    with pytest.raises(GeometryError, match=r"disks \d+ and \d+ overlap"):
        build_configuration(CantorParameters(0.45, 1, Family.DUST))
    # brute-force confirmation that q >= sqrt(2) - 1 forces overlap at level one
    q = 0.45
    r = q / math.sqrt(2)
    assert (1 - q) <= 2 * r
    assert DUST_Q_MAX == pytest.approx(math.sqrt(2) - 1)


def test_enlarged_dust_radius():
    cfg = build_configuration(CantorParameters(1 / 3, 3, Family.DUST, radius_factor=1.25))
    assert cfg.radius == pytest.approx(1.25 * (1 / 3) ** 3 / math.sqrt(2))
    with pytest.raises(GeometryError):
        build_configuration(CantorParameters(0.4, 2, Family.DUST, radius_factor=1.4))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(q=0.6, k=2),
        dict(q=0.5, k=2),
        dict(q=0.0, k=2),
        dict(q=1 / 3, k=-1),
        dict(q=1 / 3, k=2.5),
        dict(q=1 / 3, k=2, radius_factor=1.25),
        dict(q=1 / 3, k=2, family=Family.DUST, radius_factor=1.5),
    ],
)
def test_parameter_domain(kwargs):
    with pytest.raises(ParameterError):
        CantorParameters(**kwargs)


def test_family_mismatch():
    with pytest.raises(ParameterError):
        cantor_dust_points(CantorParameters(1 / 3, 2))
    with pytest.raises(ParameterError):
        cantor_interval_points(CantorParameters(1 / 3, 2, Family.DUST))


def test_reduce_two_disk():
    red = reduce_by_symmetry(cantor_interval_points(CantorParameters(1 / 3, 1)))
    assert red.size == 1
    assert red.zpoints[0] == pytest.approx(1 / 9, rel=1e-15)
    assert red.diag[0] == pytest.approx(-math.log(1 / 9), rel=1e-15)


def test_reduce_interval_level_two():
    red = reduce_by_symmetry(cantor_interval_points(CantorParameters(1 / 3, 2)))
    np.testing.assert_allclose(red.zpoints.real, [(4 / 9) ** 2, (2 / 9) ** 2], rtol=1e-15)


def test_reduce_dust_level_one():
    # ((1+i)/6 - (1+i)/2)^2 = 2i/9 and ((5+i)/6 - (1+i)/2)^2 = -2i/9
    red = reduce_by_symmetry(cantor_dust_points(CantorParameters(1 / 3, 1, Family.DUST)))
    np.testing.assert_allclose(red.zpoints, [2j / 9, -2j / 9], atol=1e-16)
    np.testing.assert_allclose(red.diag, -np.log(2 * red.radius * np.sqrt(np.abs(red.zpoints))), rtol=1e-15)


def test_two_disk_configuration_bounds():
    cfg = two_disk_configuration(1e-3)
    assert cfg.points.tolist() == [1 / 6, 5 / 6] and cfg.radius == 1e-3
    with pytest.raises(ParameterError):
        two_disk_configuration(0.2)


def test_symmetry_violation_detected():
    params = CantorParameters(1 / 3, 2)
    w = np.array([0.1, 0.3, 0.7, 0.95], dtype=complex)
    with pytest.raises(SymmetryError):
        check_centrosymmetry(ChargeConfiguration(params, w, 0.01, 0.5 + 0j))


def test_points_are_read_only():
    cfg = build_configuration(CantorParameters(1 / 3, 3))
    with pytest.raises(ValueError):
        cfg.points[0] = 0.0


def test_centered_squares_double_double():
    from mpmath import mp, mpf, mpc

    mp.prec = 200
    w = build_configuration(CantorParameters(1 / 3, 9, Family.DUST)).points[:50]
    c = 0.5 + 0.5j
    hi, lo = centered_squares(w, c)
    for wi, h, l in zip(w, hi, lo):
        exact = (mpc(mpf(wi.real), mpf(wi.imag)) - mpc(mpf(0.5), mpf(0.5))) ** 2
        err = abs(mpc(h.real, h.imag) + mpc(l.real, l.imag) - exact)
        assert float(err) <= 1e-30 * max(abs(h), 1e-300) + 1e-300


admissible = st.one_of(
    st.tuples(st.floats(0.01, 0.49), st.integers(0, 10), st.just(Family.INTERVAL))
    .filter(lambda c: c[0] ** c[1] >= 1e-14),
    st.tuples(st.floats(0.01, 0.41), st.integers(0, 5), st.just(Family.DUST)),
)


@settings(max_examples=60, deadline=None)
@given(admissible)
def test_generated_configurations_are_valid(case):
    q, k, fam = case
    cfg = build_configuration(CantorParameters(q, k, fam))
    w = cfg.points
    assert cfg.count == (2 if fam is Family.INTERVAL else 4) ** k
    assert np.all((w.real > 0) & (w.real < 1))
    if fam is Family.INTERVAL:
        assert w[0].real == pytest.approx(cfg.radius) and w[-1].real == pytest.approx(1 - cfg.radius)
    else:
        assert np.all((w.imag > 0) & (w.imag < 1))
    if cfg.count > 1 and cfg.count <= 1024:
        d = np.abs(w[:, None] - w[None, :]) + np.eye(cfg.count) * 10
        assert d.min() > 2 * cfg.radius
    np.testing.assert_allclose(w[::-1], 2 * cfg.center - w, atol=1e-13)
    if k >= 1:
        red = reduce_by_symmetry(cfg)
        assert red.size == cfg.count // 2
        assert len(set(zip(red.zpoints.real, red.zpoints.imag, red.zlo.real, red.zlo.imag))) == red.size


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.floats(0.01, 0.49), st.integers(0, 9)).filter(lambda c: c[0] ** (c[1] + 1) >= 1e-14))
def test_interval_nesting(case):
    q, k = case
    a = build_configuration(CantorParameters(q, k))
    b = build_configuration(CantorParameters(q, k + 1))
    lo, hi = a.points.real - a.radius, a.points.real + a.radius
    idx = np.searchsorted(lo, b.points.real, side="right") - 1
    assert np.all(idx >= 0)
    assert np.all(b.points.real - b.radius >= lo[idx] - 1e-15)
    assert np.all(b.points.real + b.radius <= hi[idx] + 1e-15)


def test_reduction_is_deterministic():
    cfg = build_configuration(CantorParameters(0.3, 8))
    a, b = reduce_by_symmetry(cfg), reduce_by_symmetry(cfg)
    assert np.array_equal(a.zpoints, b.zpoints) and np.array_equal(a.diag, b.diag)
    assert np.all(np.diff(a.zpoints.real) < 0) and a.zpoints.real[0] < 0.25


def test_unresolvable_level_is_refused():
    with pytest.raises(GeometryError):
        build_configuration(CantorParameters(0.01, 10))
