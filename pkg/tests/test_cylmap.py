import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from odx.cylmap import CylinderPoint, StandardLikeMap, iterate, jacobian, step, step_inverse, \
    tangent_orbit
from odx.errors import OrbitDivergence
from odx.fourier import FourierSeries
from odx.kamcurve import continuation

from conftest import chirikov_lift, wrapped_dist

A = np.array([[1.0, 1.0], [0.0, 1.0]])
A_INV = np.array([[1.0, -1.0], [0.0, 1.0]])


@pytest.fixture(scope="module")
def curve01(golden):
    return continuation(StandardLikeMap.chirikov(0.1), golden, 0.1)


def close(p, x, y, tol=1e-14):
    return wrapped_dist(p.x, x) <= tol and abs(p.y - y) <= tol


def test_step_examples():
    m0 = StandardLikeMap.chirikov(0.0)
    m1 = StandardLikeMap.chirikov(0.1)
    assert close(step(m0, CylinderPoint(0.2, 0.3)), 0.5, 0.3)
    assert close(step(m1, CylinderPoint(0.0, 0.618)), 0.618, 0.618)
    assert close(step(m1, CylinderPoint(0.25, 0.4)), 0.75, 0.5)


def test_step_matches_scalar_reference():
    m = StandardLikeMap.chirikov(0.1)
    rng = np.random.default_rng(1)
    for x, y in rng.uniform(0, 1, (50, 2)):
        x1, y1 = chirikov_lift(0.1, x, y, 1)
        assert close(step(m, CylinderPoint(x, y)), x1 % 1.0, y1, 1e-15)


def test_step_inverse_examples():
    m0 = StandardLikeMap.chirikov(0.0)
    m1 = StandardLikeMap.chirikov(0.1)
    assert close(step_inverse(m0, CylinderPoint(0.5, 0.3)), 0.2, 0.3)
    assert close(step_inverse(m1, step(m1, CylinderPoint(0.25, 0.4))), 0.25, 0.4)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1, exclude_max=True), st.floats(-1, 2), st.floats(0, 1.5))
def test_inverse_round_trip(x, y, k):
    m = StandardLikeMap.chirikov(k)
    p = CylinderPoint(x, y)
    q = step_inverse(m, step(m, p))
    assert wrapped_dist(q.x, p.x) <= 1e-14 and abs(q.y - p.y) <= 1e-14
    q = step(m, step_inverse(m, p))
    assert wrapped_dist(q.x, p.x) <= 1e-14 and abs(q.y - p.y) <= 1e-14


def test_jacobian_examples():
    assert np.array_equal(jacobian(StandardLikeMap.chirikov(0.0), CylinderPoint(0.3, 0.1)), A)
    J = jacobian(StandardLikeMap.chirikov(0.1), CylinderPoint(0.0, 0.5))
    assert np.allclose(J, [[1 + 0.2 * math.pi, 1], [0.2 * math.pi, 1]], atol=1e-14, rtol=0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1, exclude_max=True), st.floats(-1, 1), st.floats(0, 3))
def test_jacobian_unimodular(x, y, k):
    J = jacobian(StandardLikeMap.chirikov(k), CylinderPoint(x, y))
    assert abs(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0] - 1) <= 1e-14 * max(1.0, abs(J).max())


def test_tangent_orbit_linear():
    orb = tangent_orbit(StandardLikeMap.chirikov(0.0), CylinderPoint(0.4, 0.2), 1)
    assert np.allclose(orb.tangent(-1), A_INV, atol=0)
    assert np.allclose(orb.tangent(0), np.eye(2), atol=0)
    assert np.allclose(orb.tangent(1), A, atol=0)
    assert list(orb.indices) == [-1, 0, 1]


def test_tangent_orbit_inverse_consistency(curve01):
    m = StandardLikeMap.chirikov(0.1)
    orb = tangent_orbit(m, curve01.point(0.45), 100)
    for n in (1, 2, 10, 57, 100):
        # DS^{-n}(p) inverts DS^n taken at the backward point S^{-n}(p)
        fwd = tangent_orbit(m, orb.point(-n), n).tangent(n)
        P = fwd @ orb.tangent(-n)
        assert np.max(np.abs(P - np.eye(2))) <= 1e-10 * max(1.0, np.abs(fwd).max())


def _fd_tangent(k, x, y, n, h=1e-6):
    cols = []
    for dx, dy in ((h, 0.0), (0.0, h)):
        xp, yp = chirikov_lift(k, x + dx, y + dy, n)
        xm, ym = chirikov_lift(k, x - dx, y - dy, n)
        cols.append([(xp - xm) / (2 * h), (yp - ym) / (2 * h)])
    return np.array(cols).T


def test_tangent_matches_finite_differences(curve01):
    m = StandardLikeMap.chirikov(0.1)
    p = curve01.point(0.3)
    D = tangent_orbit(m, p, 100).tangent(100)
    fd = _fd_tangent(0.1, p.x, p.y, 100)
    assert np.max(np.abs(fd - D)) / np.max(np.abs(D)) < 1e-5


def test_symplectic_and_group_law(curve01):
    m = StandardLikeMap.chirikov(0.1)
    p = curve01.point(0.71)
    orb = tangent_orbit(m, p, 200)
    dets = np.linalg.det(orb.tangents)
    assert np.max(np.abs(dets - 1)) <= 1e-10
    q = iterate(m, iterate(m, p, 150), -150)
    assert wrapped_dist(q.x, p.x) <= 1e-10 and abs(q.y - p.y) <= 1e-10


def test_tangent_consistency_backward(curve01):
    # negative iterates against differences of the inverse map, |n| <= 50
    m = StandardLikeMap.chirikov(0.1)
    p = curve01.point(0.2)
    orb = tangent_orbit(m, p, 50)
    h = 1e-6

    def back(x, y, n):
        for _ in range(n):
            x = x - y
            y = y - 0.1 * math.sin(2 * math.pi * x)
        return x, y

    for n in (1, 10, 50):
        cols = []
        for dx, dy in ((h, 0.0), (0.0, h)):
            xp, yp = back(p.x + dx, p.y + dy, n)
            xm, ym = back(p.x - dx, p.y - dy, n)
            cols.append([(xp - xm) / (2 * h), (yp - ym) / (2 * h)])
        fd = np.array(cols).T
        D = orb.tangent(-n)
        assert np.max(np.abs(fd - D)) / np.max(np.abs(D)) < 1e-4


def test_orbit_divergence_guard():
    m = StandardLikeMap.chirikov(0.1)
    with pytest.raises(OrbitDivergence):
        tangent_orbit(m, CylinderPoint(0.1, 50.0), 5)


def test_point_and_map_validation():
    assert CylinderPoint(1.25, 0.0).x == 0.25
    assert CylinderPoint(-1e-18, 0.0).x < 1.0
    with pytest.raises(ValueError):
        CylinderPoint(float("nan"), 0.0)
    with pytest.raises(ValueError):
        StandardLikeMap(0.1, FourierSeries.from_modes(sin=[(1, 1.0)], const=0.2))
    with pytest.raises(ValueError):
        StandardLikeMap.chirikov(0.1, strip=(0.0, 0.5))
