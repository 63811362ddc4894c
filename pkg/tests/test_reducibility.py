import numpy as np
import pytest

from odx.cylmap import StandardLikeMap
from odx.errors import OdxError
from odx.kamcurve import InvariantCurve, continuation, trivial_curve
from odx.reducibility import iterated_shear_residual, reduce, tangent_frame, torsion


def test_k0_frame_is_identity(golden):
    m0 = StandardLikeMap.chirikov(0.0)
    c = trivial_curve(golden)
    MK = tangent_frame(c)
    s = np.linspace(0, 1, 50)
    for i in range(2):
        for j in range(2):
            assert np.max(np.abs(MK[i][j](s) - (i == j))) == 0
    T, Tbar = torsion(c, m0)
    assert Tbar == 1.0 and np.max(np.abs(T(s) - 1)) == 0
    fr = reduce(c, m0)
    assert np.all(fr.u.coeffs == 0) and fr.triangularization_residual == 0
    assert np.array_equal(fr.M_at(s), np.broadcast_to(np.eye(2), (50, 2, 2)))


def test_tangent_frame_structure(curve):
    MK = tangent_frame(curve)
    s = np.random.default_rng(0).uniform(0, 1, 1000)
    a, b = MK[0][0](s), MK[1][0](s)
    n1, n2 = MK[0][1](s), MK[1][1](s)
    assert np.max(np.abs(a * n2 - b * n1 - 1)) <= 1e-12
    assert np.max(np.abs(a * n1 + b * n2)) <= 1e-12
    ka, kb = curve.tangent(s)
    assert np.max(np.abs(a - ka)) <= 1e-12 and np.max(np.abs(b - kb)) <= 1e-12


def test_torsion(curve, smap, frame):
    T, Tbar = torsion(curve, smap)
    assert abs(Tbar - 1) <= 0.5 * 0.05
    T2, Tbar2 = torsion(curve, smap, n=2 * 4096)
    s = np.linspace(0, 1, 777, endpoint=False)
    assert np.max(np.abs(T(s) - T2(s))) <= 1e-11
    assert abs(Tbar - Tbar2) <= 1e-11
    assert frame.Tbar == Tbar


def test_torsion_requires_genuine_curve(curve, smap):
    bad = InvariantCurve(curve.psi, curve.eta, curve.omega, 1e-6, k=curve.k)
    with pytest.raises(OdxError):
        torsion(bad, smap)


def test_reduce(frame):
    assert frame.triangularization_residual <= 1e-9
    assert abs(frame.u.average()) <= 1e-13
    s = np.arange(4096) / 4096
    assert np.max(np.abs(np.linalg.det(frame.M_at(s)) - 1)) <= 1e-10
    M = frame.M
    d = M[0][0](s) * M[1][1](s) - M[0][1](s) * M[1][0](s)
    assert np.max(np.abs(d - 1)) <= 1e-10


def test_iterated_shear(frame, smap):
    for s in (0.0, 0.31, 0.77):
        assert iterated_shear_residual(frame, smap, 100, s) <= 1e-7


def test_u_small_uniformly(golden):
    fam = StandardLikeMap.chirikov(0.0)
    ratios, tors = [], []
    for k in (0.01, 0.03, 0.06, 0.1):
        m = fam.with_k(k)
        fr = reduce(continuation(fam, golden, k), m)
        assert fr.triangularization_residual <= 1e-9
        ratios.append(fr.u.sup_norm() / k)
        tors.append(abs(fr.Tbar - 1) / k)
    assert max(ratios) / min(ratios) < 3
    assert max(tors) <= 0.5
