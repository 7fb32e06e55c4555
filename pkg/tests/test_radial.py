import math

import numpy as np
import pytest

from spikelab.errors import BracketNotFound, WindowTooNoisy
from spikelab.nonlinearity import pure_power
from spikelab.radial import (CROSSING, DECAY, REBOUND, compensation_power,
                             decay_diagnostics, decay_rate, find_ground_state,
                             gamma_crosscheck, ground_state_cached,
                             ground_state_constants, half_sphere_moment,
                             moment_identity_check, ode_residual,
                             profile_eval, shoot)

SPEC233 = pure_power(2.0, 3, 3.0)


@pytest.fixture(scope="module")
def profile233():
    return ground_state_cached(SPEC233)


@pytest.fixture(scope="module")
def constants233(profile233):
    return ground_state_constants(profile233, SPEC233)


def test_decay_rate_values():
    assert decay_rate(2.0) == pytest.approx(1.0)
    assert decay_rate(3.0) == pytest.approx(0.5 ** (1.0 / 3.0))


def test_compensation_power():
    # (N-1)/(m(m-1))
    assert compensation_power(2.0, 3) == pytest.approx(1.0)
    assert compensation_power(2.5, 3) == pytest.approx(2.0 / (2.5 * 1.5))


def test_shoot_classifications():
    # far above the ground-state height the trajectory crosses zero;
    # just above u_c it falls back (rebound)
    assert shoot(SPEC233, 100.0).classification == CROSSING
    assert shoot(SPEC233, 1.05).classification == REBOUND


def test_shoot_height_m2_N3_p3(profile233):
    assert profile233.shoot_height == pytest.approx(4.337, abs=5e-3)


def test_decay_diagnostics(profile233):
    mu_fit, c0, plateau, slope_gap = decay_diagnostics(profile233)
    assert mu_fit == pytest.approx(1.0, rel=1e-2)
    assert plateau < 0.02
    assert c0 > 0


def test_profile_monotone_decreasing(profile233):
    w = profile233.w
    assert w[0] == profile233.shoot_height
    assert np.all(np.diff(w) <= 0)
    assert np.all(w > 0)


def test_ode_residual_small(profile233):
    assert ode_residual(profile233, SPEC233) < 1e-4


def test_profile_eval_matches_grid(profile233):
    r = profile233.r[::5000]
    np.testing.assert_allclose(profile_eval(profile233, r),
                               profile233.w[::5000], rtol=1e-12)


def test_profile_eval_beyond_grid_decays(profile233):
    vals = profile_eval(profile233, np.array([35.0, 40.0]))
    assert vals[0] > vals[1] > 0
    assert vals[0] < profile233.w[-1]


def test_half_sphere_moment():
    # integral of z_N over the upper half sphere = volume of the unit
    # ball one dimension down
    assert half_sphere_moment(3) == pytest.approx(math.pi)
    assert half_sphere_moment(2) == pytest.approx(2.0)


def test_constants_m2_N3_p3(constants233):
    assert constants233.mu == pytest.approx(1.0)
    assert constants233.c_star == pytest.approx(18.897, rel=1e-3)
    assert constants233.gamma == pytest.approx(3.063, rel=1e-3)
    assert constants233.C_star_half == pytest.approx(constants233.c_star / 2)
    assert constants233.gamma > 0


def test_gamma_crosscheck(profile233):
    chk = gamma_crosscheck(profile233, SPEC233, sample_count=10 ** 5, seed=0)
    assert chk.relative_gap < 0.05
    assert chk.gamma_direct > 0
    # Monte Carlo estimator consistency: halving the samples moves the
    # estimate by a few standard errors at most
    half = gamma_crosscheck(profile233, SPEC233, sample_count=5 * 10 ** 4,
                            seed=0)
    move = abs(half.gamma_direct - chk.gamma_direct)
    assert move < 3.0 * (half.mc_standard_error + chk.mc_standard_error)


def test_moment_identity(profile233, constants233):
    assert moment_identity_check(profile233, SPEC233, np.eye(2)) < 0.01
    tf = moment_identity_check(profile233, SPEC233, np.diag([1.0, -1.0]))
    assert tf < 0.01 * constants233.gamma
    off = moment_identity_check(profile233, SPEC233,
                                np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert off < 0.01 * constants233.gamma


def test_quasilinear_ground_state():
    prof = ground_state_cached(pure_power(2.5, 3, 2.5))
    mu_fit, _, plateau, _ = decay_diagnostics(prof)
    assert mu_fit == pytest.approx(decay_rate(2.5), rel=1e-2)
    assert plateau < 0.02


def test_r_max_too_small_for_diagnostics():
    prof = find_ground_state(SPEC233, h_r=1e-2, r_max=15.0)
    with pytest.raises(ValueError):
        decay_diagnostics(prof)


def test_tail_fraction_reported(constants233):
    assert 0.0 <= constants233.tail_fraction_c_star < 0.01
    assert not constants233.tail_warning
