import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from icolab import geometry as geo
from icolab import worldlines as wl
from icolab.errors import ConfigurationError, DegeneracyError, TimelikeViolationError

MINK = geo.minkowski(2)


def weak(phi_value):
    return geo.weak_field(lambda x: np.full(np.shape(x)[:-1], phi_value))


# --- proper time oracles


def test_static_clock():
    assert wl.proper_time(wl.static([0.0], (0, 1)), MINK) == pytest.approx(1.0, rel=1e-12)


def test_moving_clock_lorentz_factor():
    tau = wl.proper_time(wl.uniform_velocity([0.0], [0.6], (0, 1)), MINK)
    assert abs(tau - 0.8) < 1e-9


def test_static_clock_in_potential():
    tau = wl.proper_time(wl.static([0.0], (0, 1)), weak(-0.01))
    assert abs(tau - math.sqrt(0.98)) < 1e-9
    assert tau == pytest.approx(0.98995, abs=5e-6)


def test_sinusoidal_matches_scipy_quad():
    from scipy.integrate import quad

    a, w = 0.3, 2.0
    curve = wl.sinusoidal([0.0], a, w, (0, 3))
    expect, _ = quad(lambda t: math.sqrt(1 - (a * w * math.cos(w * t)) ** 2), 0, 3, epsabs=1e-13)
    assert wl.proper_time(curve, MINK) == pytest.approx(expect, rel=1e-10)


def test_fd_velocity_fallback():
    base = wl.sinusoidal([0.0], 0.2, 1.5, (0, 2))
    bare = wl.Worldline(2, base.func, base.lambda_range)
    assert_allclose(bare.velocity(np.linspace(0, 2, 9)), base.velocity(np.linspace(0, 2, 9)), atol=1e-8)
    assert wl.proper_time(bare, MINK) == pytest.approx(wl.proper_time(base, MINK), rel=1e-8)


def test_spacelike_segment_reports_lambda():
    curve = wl.piecewise_linear([(0, 0), (1, 0.5), (2, 2.0)])
    with pytest.raises(TimelikeViolationError) as info:
        wl.proper_time(curve, MINK)
    assert info.value.lam >= 1.0
    with pytest.raises(TimelikeViolationError):
        wl.check_timelike(curve, MINK)


def test_proper_time_range_checked():
    with pytest.raises(ConfigurationError):
        wl.proper_time(wl.static([0.0], (0, 1)), MINK, 0.5, 0.2)


def test_additivity_and_monotonicity():
    g = geo.weak_field(geo.point_mass_potential(0.02, [0.5]))
    curve = wl.sinusoidal([0.0], 0.2, 1.3, (0, 4))
    whole = wl.proper_time(curve, g, 0, 4)
    parts = wl.proper_time(curve, g, 0, 1.7) + wl.proper_time(curve, g, 1.7, 4)
    assert parts == pytest.approx(whole, rel=1e-9)
    ends = np.linspace(0.5, 4, 8)
    taus = [wl.proper_time(curve, g, 0, b) for b in ends]
    assert np.all(np.diff(taus) > 0)


def test_proper_time_diffeo_invariant(rng):
    g = geo.weak_field(geo.point_mass_potential(0.01, [-1.0]))
    curve = wl.piecewise_linear([(0, 0.2), (1.5, -0.3), (3, 0.4)])
    tau = wl.proper_time(curve, g)
    for _ in range(10):
        phi = geo.random_diffeomorphism(rng, anchors=[curve(1.0), curve(2.0)])
        tau2 = wl.proper_time(geo.pushforward_curve(phi, curve), geo.pushforward_metric(phi, g))
        assert tau2 == pytest.approx(tau, rel=1e-6)


# --- coincidences


def test_lines_crossing_at_origin():
    a = wl.uniform_velocity([0.0], [0.5], (-1, 1))
    b = wl.uniform_velocity([0.0], [-0.3], (-1, 1), label="gamma1")
    hits = wl.detect_coincidences(a, b)
    assert len(hits) == 1
    assert_allclose(hits[0].point, [0.0, 0.0], atol=1e-12)
    assert hits[0].which_system == 1


def test_parallel_static_lines_never_meet():
    assert wl.detect_coincidences(wl.static([0.0], (0, 2)), wl.static([1.0], (0, 2), "gamma1")) == []


def test_zigzag_crossing():
    # the middle leg runs from (0.5, 0.1) to (1.5, 0.9) and passes x = 0.5 at t = 1
    zig = wl.piecewise_linear([(0, 0), (0.5, 0.1), (1.5, 0.9), (2, 0.7)])
    lab = wl.static([0.5], (0, 2), "gamma1")
    hits = wl.detect_coincidences(zig, lab)
    assert len(hits) == 1
    assert hits[0].residual < 1e-8
    assert_allclose(hits[0].point, [1.0, 0.5], atol=1e-10)
    assert hits[0].lambda0 == pytest.approx(1.0, abs=1e-10)


def test_multiple_crossings_sorted():
    wave = wl.sinusoidal([0.0], 0.5, 2.0, (0, 6))
    hits = wl.detect_coincidences(wave, wl.static([0.0], (0, 6), "gamma2"))
    lams = [h.lambda0 for h in hits]
    # oracle: zeros of sin(2t) in [0, 6]
    assert_allclose(lams, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2], atol=1e-9)
    assert all(h.which_system == 2 for h in hits)


def test_coincidence_covariance(rng):
    zig = wl.piecewise_linear([(0, 0), (0.5, 0.1), (1.5, 0.9), (2, 0.7)])
    lab = wl.static([0.5], (0, 2), "gamma1")
    (hit,) = wl.detect_coincidences(zig, lab)
    for _ in range(5):
        phi = geo.random_diffeomorphism(rng, anchors=[hit.point])
        (moved,) = wl.detect_coincidences(geo.pushforward_curve(phi, zig), geo.pushforward_curve(phi, lab))
        assert_allclose(moved.point, phi(hit.point), atol=1e-7)
        assert moved.lambda0 == pytest.approx(hit.lambda0, abs=1e-7)
        assert moved.lambda_other == pytest.approx(hit.lambda_other, abs=1e-7)


def test_coincidence_rejects_bad_tol():
    with pytest.raises(ConfigurationError):
        wl.detect_coincidences(wl.static([0.0]), wl.static([1.0], label="gamma1"), tol=0)


# --- orientation


def test_orientation_examples():
    p = [0.0, 0.0]
    assert wl.orientation_sign(MINK, p, [1, 0], [1, 0])
    assert not wl.orientation_sign(MINK, p, [1, 0], [-1, 0])
    assert wl.orientation_sign(weak(-0.01), p, [1, 0], [1, 0.3])


def test_orientation_degenerate():
    with pytest.raises(DegeneracyError):
        wl.orientation_sign(MINK, [0, 0], [1, 0], [0, 0])
    with pytest.raises(DegeneracyError):
        wl.orientation_sign(MINK, [0, 0], [1, 0], [1, 1])


# --- reparametrization


def test_reparametrize_zero_is_identity():
    curve = wl.static([0.0], (0, 1))
    assert wl.reparametrize(curve, 0.0) is curve


def test_reparametrize_shift():
    curve = wl.static([0.0], (0, 3))
    lab = wl.uniform_velocity([1.0], [-0.5], (0, 3), "gamma1")
    shifted = wl.reparametrize(curve, 2.0)
    assert shifted.lambda_range == (2.0, 5.0)
    (h0,) = wl.detect_coincidences(curve, lab)
    (h1,) = wl.detect_coincidences(shifted, lab)
    assert h1.lambda0 == pytest.approx(h0.lambda0 + 2, abs=1e-9)
    assert_allclose(h1.point, h0.point, atol=1e-9)
    dt0 = wl.proper_time(curve, MINK, 0.5, h0.lambda0)
    dt1 = wl.proper_time(shifted, MINK, 2.5, h1.lambda0)
    assert dt1 == pytest.approx(dt0, rel=1e-12)


def test_worldline_validation():
    with pytest.raises(ConfigurationError):
        wl.static([0.0], (1, 1))
    with pytest.raises(ConfigurationError):
        wl.static([0.0], label="gamma7")
    with pytest.raises(ConfigurationError):
        wl.piecewise_linear([(0, 0), (0, 1)])
