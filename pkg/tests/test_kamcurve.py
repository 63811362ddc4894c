import json
import math

import numpy as np
import pytest

from odx.cylmap import CylinderPoint, StandardLikeMap, step
from odx.errors import Breakdown, DiophantineViolation, NewtonFailure
from odx.kamcurve import GOLDEN, InvariantCurve, certify_diophantine, continuation, convergents, \
    invariance_residual, solve_curve, trivial_curve

from conftest import wrapped_dist


def independent_residual(curve, k, n, offset=0.0):
    """sup |S(K(s)) - K(s+w)| with the Chirikov kick written out by hand."""
    s = offset + np.arange(n) / n
    w = curve.omega.value
    x = s + curve.psi.eval(s)
    y = curve.eta.eval(s)
    y1 = y + k * np.sin(2 * np.pi * x)
    x1 = x + y1
    xt = s + w + curve.psi.eval(s + w)
    yt = curve.eta.eval(s + w)
    dx = (x1 - xt + 0.5) % 1.0 - 0.5
    return float(np.max(np.hypot(dx, y1 - yt)))


def test_certify_golden(golden):
    assert golden.value == GOLDEN and golden.min_ratio >= 1.0
    # brute force over every denominator up to q_max
    q = np.arange(1, 10**5 + 1, dtype=float)
    p = np.round(q * GOLDEN)
    ratio = np.abs(GOLDEN - p / q) * q ** 2.05 / 0.3
    assert ratio.min() >= 1.0
    assert golden.min_ratio == pytest.approx(ratio.min(), rel=1e-6)


def test_certify_rational_fails():
    with pytest.raises(DiophantineViolation) as exc:
        certify_diophantine(0.5, 1e-3, 2.05, 100)
    assert exc.value.q == 2 and exc.value.gap == 0


def test_certify_golden_best_constant():
    with pytest.raises(DiophantineViolation):
        certify_diophantine(GOLDEN, 0.5, 2.0, 10**4)
    certify_diophantine(GOLDEN, 0.3, 2.0, 10**4)


def test_convergents_are_fibonacci_ratios():
    cv = convergents(GOLDEN, 1000)
    fib = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597]
    assert cv[1:] == [(fib[i], fib[i + 1]) for i in range(len(cv) - 1)]


def test_trivial_at_k0(golden):
    c = solve_curve(StandardLikeMap.chirikov(0.0), golden, trivial_curve(golden))
    assert np.all(c.psi.coeffs == 0)
    assert c.eta.average() == GOLDEN and np.all(np.delete(c.eta.coeffs, c.eta.kmax) == 0)
    assert c.invariance_residual == 0
    c2 = continuation(StandardLikeMap.chirikov(0.3), golden, 0.0)
    assert c2.invariance_residual == 0 and np.all(c2.psi.coeffs == 0)


def test_solve_from_integrable_guess(smap, golden):
    c = solve_curve(smap, golden, trivial_curve(golden))
    assert c.iterations <= 6
    assert c.invariance_residual <= 1e-11
    assert independent_residual(c, 0.05, 4 * 4096) <= 1e-11
    assert (c.eta - GOLDEN).sup_norm() <= 0.05 * c.diagnostics["eta_dev_over_k"] + 1e-15


def test_residual_grid_independence(curve):
    r0 = independent_residual(curve, 0.05, 4096)
    r1 = independent_residual(curve, 0.05, 4096, offset=0.5 / 4096)
    assert abs(r0 - curve.invariance_residual) <= 1e-12
    assert abs(r1 - r0) <= 1e-11
    assert abs(invariance_residual(StandardLikeMap.chirikov(0.05), curve, 4096, 0.3 / 4096)
               - r0) <= 1e-11


def test_curve_properties(curve):
    s = np.linspace(0, 1, 20000, endpoint=False)
    assert np.min(1 + curve.psi.derivative()(s)) > 0
    assert abs(curve.psi.average()) <= 1e-13
    assert (curve.eta - GOLDEN).sup_norm() <= 0.1


def test_conjugacy_order(curve, smap):
    tol = 1e-11
    s0 = 0.123
    p = curve.point(s0)
    for n in range(1, 1001):
        p = step(smap, p)
        x, y = curve(s0 + n * GOLDEN)
        assert wrapped_dist(p.x, x) <= 10 * tol * n and abs(p.y - y) <= 10 * tol * n


def test_smallness_uniform_in_k(golden):
    fam = StandardLikeMap.chirikov(0.0)
    ks = [0.01, 0.02, 0.04, 0.07, 0.1]
    ps, es = [], []
    for k in ks:
        c = continuation(fam, golden, k)
        assert c.invariance_residual <= 1e-11 and abs(c.psi.average()) <= 1e-13
        ps.append(c.diagnostics["psi_sup_over_k"])
        es.append(c.diagnostics["eta_dev_over_k"])
    assert max(ps) / min(ps) < 3 and max(es) / min(es) < 3


def test_continuation_to_0p1(golden):
    c = continuation(StandardLikeMap.chirikov(0.0), golden, 0.1, dk=0.05)
    assert c.k == 0.1
    assert independent_residual(c, 0.1, 4096) <= 1e-11


def test_breakdown(golden):
    with pytest.raises(Breakdown) as exc:
        continuation(StandardLikeMap.chirikov(0.0), golden, 2.0)
    assert 0.0 < exc.value.k_reached < 2.0


def test_newton_failure_reported(smap, golden):
    with pytest.raises(NewtonFailure) as exc:
        solve_curve(smap, golden, trivial_curve(golden), max_iter=1)
    assert len(exc.value.history) == 2


def test_json_round_trip(curve):
    d = json.loads(json.dumps(curve.to_json()))
    assert {"omega", "gamma", "tau", "k", "psi", "eta", "residual"} <= set(d)
    c = InvariantCurve.from_json(d)
    assert np.array_equal(c.psi.coeffs, curve.psi.coeffs)
    assert np.array_equal(c.eta.coeffs, curve.eta.coeffs)
    assert c.invariance_residual == curve.invariance_residual and c.k == curve.k
