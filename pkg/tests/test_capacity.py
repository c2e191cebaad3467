import math

import numpy as np
import pytest
from scipy.special import ellipk

from csmcap.analytic import (
    SQUARE_CAPACITY,
    cantor_f,
    dust_bounds,
    dust_f,
    elliptic_k,
    two_disk_bound,
    two_disk_exact,
)
from csmcap.capacity import (
    capacity_of_configuration,
    capacity_of_level,
    default_samples,
    error_bound,
    recover_charges,
)
from csmcap.errors import ParameterError
from csmcap.fastsum import SummationConfig
from csmcap.geometry import CantorParameters, Family, build_configuration, two_disk_configuration
from csmcap.operator import assemble_dense_A


def test_level_zero_disk():
    rep = capacity_of_level(CantorParameters(1 / 3, 0))
    assert rep.capacity == pytest.approx(0.5, rel=1e-15) and rep.iterations == 0


def test_two_disk_closed_form():
    for r in (1e-7, 1e-3, 1 / 6):
        rep = capacity_of_configuration(two_disk_configuration(r))
        assert rep.capacity == pytest.approx(math.sqrt(2 * r / 3), rel=1e-13)


def test_level_ten_middle_third():
    rep = capacity_of_level(CantorParameters(1 / 3, 10))
    assert rep.converged and rep.iterations == 22
    assert rep.capacity == pytest.approx(0.221173357505459, rel=5e-10)


def test_charges_sum_to_one_and_satisfy_system():
    cfg = build_configuration(CantorParameters(1 / 3, 6))
    rep = capacity_of_configuration(cfg)
    p = recover_charges(rep)
    assert math.fsum(p) == pytest.approx(1.0, abs=1e-13)
    assert np.all(p > 0)
    resid = assemble_dense_A(cfg) @ p - rep.c
    assert np.abs(resid).max() <= 1e-10


def test_monotone_in_k():
    caps = [capacity_of_level(CantorParameters(0.3, k)).capacity for k in range(1, 9)]
    assert all(a > b for a, b in zip(caps, caps[1:]))


def test_dust_radius_factor_sequence_decreases():
    caps = [capacity_of_level(CantorParameters(1 / 3, k, Family.DUST, 1.25)).capacity for k in range(1, 7)]
    assert all(a > b for a, b in zip(caps, caps[1:]))


def test_dust_inside_known_bounds():
    lo, hi = dust_bounds(1 / 3)
    cap = capacity_of_level(CantorParameters(1 / 3, 5, Family.DUST)).capacity
    assert lo <= cap <= hi


@pytest.mark.parametrize("fam,k", [(Family.INTERVAL, 12), (Family.DUST, 6)])
def test_backend_invariance(fam, k):
    p = CantorParameters(1 / 3, k, fam)
    a = capacity_of_level(p, sum_cfg=SummationConfig(backend="direct"))
    b = capacity_of_level(p, sum_cfg=SummationConfig(backend="fast"))
    assert abs(a.capacity - b.capacity) <= 1e-11


def test_preconditioner_choice_is_recorded():
    p = CantorParameters(1 / 3, 9)
    assert capacity_of_level(p).preconditioner_j == 4
    assert capacity_of_level(p, j=0).preconditioner_j == 0
    assert capacity_of_level(CantorParameters(1 / 3, 3)).preconditioner_j == 0
    with pytest.raises(ParameterError):
        capacity_of_level(p, j=-1)


def test_error_bound_on_two_disks():
    for r in (1e-5, 1e-3, 1e-2, 0.1):
        cfg = two_disk_configuration(r)
        rep = capacity_of_configuration(cfg)
        eb = error_bound(cfg, recover_charges(rep), rep.c)
        assert two_disk_exact(r).error <= eb.bound
        assert eb.bound <= two_disk_bound(r) * 3


def test_error_bound_validation():
    cfg = two_disk_configuration(0.01)
    with pytest.raises(ParameterError):
        error_bound(cfg, [0.5, 0.5], 1.0, samples_per_circle=4)
    with pytest.raises(ParameterError):
        error_bound(cfg, [1.0], 1.0)


def test_default_samples():
    assert default_samples(1024) == 64
    assert default_samples(2**15) == 32
    assert default_samples(2**30) == 8


def test_elliptic_k_against_scipy():
    for k in (0.0, 1e-6, 0.3, 0.9, 0.999):
        assert elliptic_k(k) == pytest.approx(ellipk(k * k), rel=1e-14)


def test_two_disk_reference_values():
    assert two_disk_exact(1e-7).error <= 1e-10
    assert two_disk_exact(1 / 6).error == pytest.approx(0.01, rel=0.3)
    with pytest.raises(ParameterError):
        two_disk_exact(0.2)


def test_fitted_formulas():
    assert SQUARE_CAPACITY == pytest.approx(0.59017029950804811, rel=1e-15)
    assert cantor_f(0.5) == pytest.approx(0.25)
    assert cantor_f(1 / 3) == pytest.approx(0.2209, abs=2e-4)
    assert dust_f(0.5) == pytest.approx(SQUARE_CAPACITY, rel=1e-15)
    with pytest.raises(ParameterError):
        cantor_f(0.6)


def test_agm_terminates_and_checks_domain():
    from csmcap.analytic import agm

    for a, b in ((1.0, 0.8), (1.0, 1e-12), (3.0, 3.0 * (1 - 2e-16))):
        assert agm(a, b) == pytest.approx(agm(b, a), rel=1e-15)
    assert agm(1.0, math.sqrt(2) / 2) == pytest.approx(0.8472130847939790, rel=1e-15)
    with pytest.raises(ParameterError):
        elliptic_k(1.0)
