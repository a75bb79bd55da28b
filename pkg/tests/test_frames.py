import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from icolab import causal_order as co
from icolab import frames
from icolab import geometry as geo
from icolab.errors import ConstructionError, DegeneracyError

ETA = geo.minkowski_matrix(2)
P = np.array([0.7, -0.2])


def linear_part(phi, p=P):
    return phi.jacobian(p)


def test_normalizer_of_minkowski():
    phi = frames.minkowski_normalizer_at(geo.minkowski(2), P)
    assert_allclose(phi(P), P)
    assert_allclose(geo.pushforward_metric(phi, geo.minkowski(2))(P), ETA, atol=1e-12)


def test_normalizer_diagonal_weak_field():
    g = geo.constant_metric(np.diag([-0.98, 1.02]))
    phi = frames.minkowski_normalizer_at(g, P)
    # x' = L x with L^-T g L^-1 = eta forces L = diag(sqrt 0.98, sqrt 1.02)
    assert_allclose(linear_part(phi), np.diag([math.sqrt(0.98), math.sqrt(1.02)]), atol=1e-14)
    assert np.max(np.abs(geo.pushforward_metric(phi, g)(P) - ETA)) < 1e-12


def test_normalizer_off_diagonal_congruence():
    gp = np.array([[-1.0, 0.1], [0.1, 1.0]])
    phi = frames.minkowski_normalizer_at(geo.constant_metric(gp), P)
    L = linear_part(phi)
    # brute-force congruence: L^T eta L reproduces g(p)
    assert_allclose(L.T @ ETA @ L, gp, atol=1e-12)
    assert np.linalg.det(L) > 0
    # the image of the time direction keeps a positive time component
    assert (L @ [1.0, 0.0])[0] > 0


@pytest.mark.parametrize("dim", [2, 4])
def test_normalizer_random_lorentzian(rng, dim):
    for _ in range(10):
        a = rng.normal(size=(dim, dim)) * 0.2 + np.eye(dim)
        gp = a.T @ geo.minkowski_matrix(dim) @ a
        phi = frames.minkowski_normalizer_at(geo.constant_metric(gp), np.zeros(dim))
        got = geo.pushforward_metric(phi, geo.constant_metric(gp))(np.zeros(dim))
        assert np.max(np.abs(got - geo.minkowski_matrix(dim))) < 1e-10


def test_normalizer_rejects_degenerate():
    with pytest.raises(DegeneracyError):
        frames.minkowski_normalizer_at(geo.MetricField(2, lambda x: np.broadcast_to(
            np.diag([-1.0, 0.0]), np.shape(x)[:-1] + (2, 2))), P)


def test_first_derivative_flattening():
    g = geo.weak_field(geo.point_mass_potential(0.05, [-0.5]))
    p = np.array([0.3, 0.4])
    plain = geo.pushforward_metric(frames.minkowski_normalizer_at(g, p), g)
    flat = geo.pushforward_metric(frames.minkowski_normalizer_at(g, p, first_derivative=True), g)
    assert np.max(np.abs(flat(p) - ETA)) < 1e-9
    g_plain = frames._christoffel(plain, p)
    g_flat = frames._christoffel(flat, p)
    assert np.max(np.abs(g_flat)) < 1e-4 * np.max(np.abs(g_plain))


def test_lightcones_on_switch(grav_switch):
    out, reports = frames.make_lightcones_definite(grav_switch)
    assert len(reports) == 2
    for r in reports:
        assert r.lightcone_definite
        assert max(r.deviation_a, r.deviation_b) < 1e-8
    assert co.order_product(out) == -1
    d = reports[0].to_dict()
    assert set(d) >= {"point", "deviation_a", "lightcone_definite"}


def test_lightcones_flat(paths_switch):
    out, reports = frames.make_lightcones_definite(paths_switch)
    assert all(r.lightcone_definite for r in reports)
    assert co.order_product(out) == -1


def test_overlapping_regions_rejected(grav_switch):
    aligned = co.apply_quantum_diffeo(grav_switch, *co.align_events(grav_switch))
    p1, p2 = aligned.branch_a.points()
    with pytest.raises(ConstructionError):
        frames.make_lightcones_definite(aligned, radius=0.6 * np.linalg.norm(p2 - p1))
