"""Automatic reducibility of the linearized dynamics along an invariant curve.

With ``K'(s) = (1 + psi', eta')``, ``N(s) = Omega K'(s) / |K'(s)|^2`` and the
frame ``M_K = (K', N)``, the tangent map along the curve becomes the shear
``[[1, T(s)], [0, 1]]``.  Solving ``u(s) - u(s + omega) = Tbar - T(s)`` and
setting ``M = M_K [[1, u], [0, 1]]`` turns it into the constant shear with
``Tbar = mean(T)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OdxError
from .fourier import FourierSeries, solve_cohomological
from .kamcurve import DEFAULT_GRID, InvariantCurve

DEGENERATE_TANGENT = 1e-8


def _frame_kmax(curve, n):
    return min(n // 2 - 1, 2 * curve.kmax)


def _tangent_on_grid(curve, n, offset=0.0):
    a = 1.0 + curve.psi.derivative().on_grid(n, offset)
    b = curve.eta.derivative().on_grid(n, offset)
    v = a * a + b * b
    if np.min(v) < DEGENERATE_TANGENT:
        raise OdxError(f"|K'(s)|^2 = {np.min(v):.2e} below {DEGENERATE_TANGENT:g}: degenerate embedding")
    return a, b, v


def tangent_frame(curve, n=DEFAULT_GRID):
    """``M_K(s)`` as a 2x2 nested list of series, columns ``K'(s)`` and ``N(s)``."""
    if np.min(1.0 + curve.psi.derivative().on_grid(n)) <= 0:
        raise OdxError("curve is not an embedding")
    a, b, v = _tangent_on_grid(curve, n)
    K = _frame_kmax(curve, n)
    ser = lambda g: FourierSeries.from_samples(g, K)
    return [[ser(a), ser(-b / v)], [ser(b), ser(a / v)]]


def _torsion_grid(curve, smap, n):
    w = curve.omega.value
    a, b, v = _tangent_on_grid(curve, n)
    a1, b1, v1 = _tangent_on_grid(curve, n, w)
    x = np.arange(n) / n + curve.psi.on_grid(n)
    c = smap.kick_prime(x)
    n1, n2 = -b / v, a / v
    w1 = (1.0 + c) * n1 + n2
    w2 = c * n1 + n2
    # N(s+w)^T Omega (w1, w2) with Omega (w1, w2) = (-w2, w1)
    return (-b1 / v1) * (-w2) + (a1 / v1) * w1


def torsion(curve, smap, n=DEFAULT_GRID, residual_max=1e-9):
    """``T(s) = N(s+omega)^T Omega DS(K(s)) N(s)`` and its average."""
    if curve.invariance_residual > residual_max:
        raise OdxError(f"curve residual {curve.invariance_residual:.2e} too large for torsion")
    T = FourierSeries.from_samples(_torsion_grid(curve, smap, n), _frame_kmax(curve, n))
    return T, T.average()


@dataclass(frozen=True, eq=False)
class ReducibilityFrame:
    curve: InvariantCurve
    u: FourierSeries
    T: FourierSeries
    Tbar: float
    triangularization_residual: float
    cohomological_residual: float = 0.0

    @property
    def omega(self):
        return self.curve.omega.value

    def M_at(self, s):
        """``M(s)`` at an array of parameters, shape ``s.shape + (2, 2)``."""
        s = np.asarray(s, dtype=float)
        a = 1.0 + self.curve.psi.derivative().eval(s)
        b = self.curve.eta.derivative().eval(s)
        v = a * a + b * b
        u = self.u.eval(s)
        M = np.empty(s.shape + (2, 2))
        M[..., 0, 0] = a
        M[..., 1, 0] = b
        M[..., 0, 1] = u * a - b / v
        M[..., 1, 1] = u * b + a / v
        return M

    @property
    def M(self):
        """``M(s)`` entries as series on the frame's truncation."""
        n = DEFAULT_GRID
        s = np.arange(n) / n
        Mg = self.M_at(s)
        K = self.T.kmax
        return [[FourierSeries.from_samples(Mg[:, i, j], K) for j in range(2)] for i in range(2)]

    def to_json(self):
        return {
            "u": self.u.to_json(),
            "T": self.T.to_json(),
            "Tbar": self.Tbar,
            "triangularization_residual": self.triangularization_residual,
        }


def _inv_unit(M):
    # adjugate inverse, valid because det M = 1
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 1, 1] = M[..., 0, 0]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    return out


def triangularization_residual(frame, smap, n=DEFAULT_GRID):
    """Entrywise sup of ``M^{-1}(s+omega) DS(K(s)) M(s) - [[1, Tbar], [0, 1]]``."""
    s = np.arange(n) / n
    x, _ = frame.curve(s)
    c = smap.kick_prime(x)
    DS = np.empty((n, 2, 2))
    DS[:, 0, 0] = 1.0 + c
    DS[:, 0, 1] = 1.0
    DS[:, 1, 0] = c
    DS[:, 1, 1] = 1.0
    P = _inv_unit(frame.M_at(s + frame.omega)) @ DS @ frame.M_at(s)
    target = np.array([[1.0, frame.Tbar], [0.0, 1.0]])
    return float(np.max(np.abs(P - target)))


def reduce(curve, smap, n=DEFAULT_GRID):
    """Build the reducing frame ``M(s)`` and the averaged torsion ``Tbar``."""
    T, Tbar = torsion(curve, smap, n)
    u, coh_res = solve_cohomological(Tbar - T, curve.omega.value, zero_avg_tol=1e-12)
    frame = ReducibilityFrame(curve, u, T, Tbar, 0.0, coh_res)
    res = triangularization_residual(frame, smap, n)
    return ReducibilityFrame(curve, u, T, Tbar, res, coh_res)


def iterated_shear_residual(frame, smap, n_max, s):
    """Max over ``1 <= n <= n_max`` of the entrywise defect of
    ``M^{-1}(s+n omega) DS^n(K(s)) M(s) - [[1, n Tbar], [0, 1]]`` divided by ``n``.
    """
    from .cylmap import tangent_orbit_arrays

    x, y = frame.curve(np.asarray(s, dtype=float))
    _, _, D = tangent_orbit_arrays(smap, x, y, n_max)
    D = D[n_max + 1:]  # n = 1..n_max
    ns = np.arange(1, n_max + 1)
    M0 = frame.M_at(np.atleast_1d(s))
    Mn = frame.M_at(np.add.outer(ns * frame.omega, np.atleast_1d(s)))
    P = _inv_unit(Mn) @ D @ M0[None]
    target = np.zeros_like(P)
    target[..., 0, 0] = target[..., 1, 1] = 1.0
    target[..., 0, 1] = (ns * frame.Tbar)[:, None]
    defect = np.max(np.abs(P - target), axis=(-1, -2))
    return float(np.max(defect / ns[:, None]))
