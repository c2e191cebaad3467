import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csmcap.errors import ConfigurationError, ParameterError, SingularityError
from csmcap.fastsum import (
    Backend,
    FastLogSummation,
    SummationConfig,
    log_potential_at,
    log_potential_direct,
    log_potential_fast,
)
from csmcap.geometry import CantorParameters, Family, build_configuration, reduce_by_symmetry


def loop_oracle(z, y):
    n = len(z)
    return np.array([sum(y[l] * np.log(z[j] - z[l]) for l in range(n) if l != j) for j in range(n)])


def dd_oracle(zh, zl, y, idx):
    # independent vectorized evaluation of the real part at selected targets
    out = np.empty(len(idx))
    for t, i in enumerate(idx):
        d = np.abs((zh[i] - zh) + (zl[i] - zl))
        d[i] = 1.0
        out[t] = np.dot(y, np.log(d))
    return out


def test_two_unit_charges():
    u = log_potential_direct([0, 1], [1, 1])
    assert u[0] == pytest.approx(1j * math.pi) and u[1] == 0


def test_single_point_is_empty_sum():
    assert log_potential_direct([1 / 9], [5]).tolist() == [0]


def test_direct_matches_double_loop(rng):
    z = rng.random(8) + 1j * rng.random(8)
    y = rng.standard_normal(8)
    np.testing.assert_allclose(log_potential_direct(z, y), loop_oracle(z, y), rtol=0, atol=1e-15)


def test_duplicates_raise():
    with pytest.raises(SingularityError):
        log_potential_direct([0.1, 0.2, 0.1], [1, 1, 1])
    with pytest.raises(SingularityError):
        grid = np.linspace(0, 1, 1000)
        FastLogSummation(np.r_[grid, grid[3]], SummationConfig())


def test_shape_errors():
    with pytest.raises(ParameterError):
        log_potential_direct([0.1, 0.2], [1.0])
    with pytest.raises(ParameterError):
        log_potential_direct([], [])


def test_small_n_falls_through_bitwise(rng):
    z = rng.random(300) + 1j * rng.random(300)
    y = rng.standard_normal(300)
    assert np.array_equal(log_potential_fast(z, y), log_potential_direct(z, y))


def test_config_contract():
    with pytest.raises(ConfigurationError):
        SummationConfig(epsilon=1e-17)
    with pytest.raises(ConfigurationError):
        SummationConfig(epsilon=0)
    with pytest.raises(ConfigurationError):
        SummationConfig(theta=0.9, max_order=40)
    cfg = SummationConfig()
    assert cfg.backend is Backend.HIERARCHICAL
    assert 2 * cfg.theta ** (cfg.required_order + 1) / (1 - cfg.theta) <= cfg.epsilon


def _contract(z, zl, cfg, rng, full=True):
    n = z.size
    y = rng.standard_normal(n)
    y /= np.abs(y).sum()
    fast = FastLogSummation(z, cfg, zl).apply(y, want_imag=False).real
    if full:
        ref = log_potential_direct(z, y, zl, want_imag=False).real
        return np.abs(fast - ref).max()
    idx = rng.choice(n, 1500, replace=False)
    return np.abs(fast[idx] - dd_oracle(z, zl, y, idx)).max()


def test_clustered_cantor_points(rng):
    red = reduce_by_symmetry(build_configuration(CantorParameters(1 / 3, 14)))
    assert _contract(red.zpoints, red.zlo, SummationConfig(), rng) <= 1e-11


def test_dust_points(rng):
    red = reduce_by_symmetry(build_configuration(CantorParameters(0.05, 6, Family.DUST)))
    assert _contract(red.zpoints, red.zlo, SummationConfig(), rng) <= 1e-11


def test_uniform_points_large(rng):
    n = 100_000
    z = rng.random(n) + 1j * rng.random(n)
    assert _contract(z, np.zeros(n, complex), SummationConfig(), rng, full=False) <= 1e-11


def test_imaginary_part_agrees_modulo_branch(rng):
    z = rng.random(2000) + 1j * rng.random(2000)
    y = rng.integers(1, 4, 2000).astype(float)
    fast = log_potential_fast(z, y)
    ref = log_potential_direct(z, y)
    # integer charges: branches differ by multiples of 2 pi
    k = (fast.imag - ref.imag) / (2 * math.pi)
    np.testing.assert_allclose(k, np.round(k), atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(600, 3000), st.integers(0, 2**32 - 1))
def test_linearity_and_backend_equivalence(n, seed):
    r = np.random.default_rng(seed)
    z = r.random(n) + 1j * r.random(n)
    y1, y2 = r.standard_normal(n), r.standard_normal(n)
    plan = FastLogSummation(z, SummationConfig())
    a = plan.apply(y1, want_imag=False).real
    b = plan.apply(y2, want_imag=False).real
    ab = plan.apply(y1 + y2, want_imag=False).real
    assert np.abs(ab - a - b).max() <= 1e-12 * (1 + np.abs(y1).sum() + np.abs(y2).sum())
    ref = log_potential_direct(z, y1, want_imag=False).real
    assert np.abs(a - ref).max() <= plan.cfg.epsilon * (1 + np.abs(y1).sum())


@settings(max_examples=10, deadline=None)
@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), st.integers(0, 1000))
def test_translation_covariance(t, seed):
    r = np.random.default_rng(seed)
    z = r.random(700) + 1j * r.random(700)
    y = r.standard_normal(700)
    shifted = log_potential_fast(z + t, y).real
    ref = log_potential_direct(z + t, y).real
    base = log_potential_direct(z, y).real
    assert np.abs(shifted - ref).max() <= 0.5e-12 * (1 + np.abs(y).sum())
    # differences z_j - z_l are translation invariant up to rounding of the shift
    assert np.abs(shifted - base).max() <= 1e-9 * (1 + np.abs(y).sum())


def test_potential_at_targets(rng):
    src = rng.random(3000) + 1j * rng.random(3000)
    y = rng.standard_normal(3000)
    tgt = 2 + rng.random(2000) + 1j * rng.random(2000)
    ref = np.array([np.dot(y, np.log(np.abs(t - src))) for t in tgt])
    np.testing.assert_allclose(log_potential_at(tgt, src, y).real, ref, rtol=0, atol=1e-11)
    np.testing.assert_allclose(
        log_potential_at(tgt, src, y, SummationConfig(backend="direct")).real, ref, rtol=0, atol=1e-11
    )
