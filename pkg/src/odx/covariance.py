"""Normal matrix, covariance and confidence ellipse of the orbit-determination problem.

``C_N(p) = sum_{|n|<=N} DS^n(p)^T DS^n(p)`` is computed two ways:

* directly, by accumulating the tangent orbit of ``p``;
* on an invariant curve, from the reducing frame alone as
  ``M(s)^{-T} Ctilde_N(s) M(s)^{-1}`` with
  ``Ctilde_N = sum B_n^T M(s+n w)^T M(s+n w) B_n``, ``B_n = [[1, n Tbar], [0, 1]]``.

Entries grow like ``N^3``, so sums are compensated and all 2x2 inverses use
the adjugate.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from .cylmap import CylinderPoint, tangent_orbit_arrays
from .errors import NotSPD, OdxError


@dataclass(frozen=True)
class NormalMatrix:
    c11: float
    c12: float
    c22: float
    N: int
    base: CylinderPoint | None = None

    @property
    def matrix(self):
        return np.array([[self.c11, self.c12], [self.c12, self.c22]])

    @property
    def trace(self):
        return self.c11 + self.c22

    @property
    def det(self):
        # exact rational evaluation: c11 c22 and c12^2 nearly cancel when N is large
        a, b, c = Fraction(self.c11), Fraction(self.c22), Fraction(self.c12)
        return float(a * b - c * c)

    def is_spd(self):
        return self.c11 > 0 and self.det > 0


@dataclass(frozen=True)
class ConfidenceEllipse:
    lambda_plus: float
    lambda_minus: float
    u_plus: tuple
    u_minus: tuple
    sigma_x: float
    sigma_y: float
    tilt: float
    sigma: float = 1.0

    @property
    def semi_axes(self):
        return self.sigma * math.sqrt(self.lambda_plus), self.sigma * math.sqrt(self.lambda_minus)


def sum_n2(N):
    """``sum_{|n|<=N} n^2 = 2N^3/3 + N^2 + N/3``, exact in integers."""
    return N * (N + 1) * (2 * N + 1) // 3


def linear_normal_matrix(N):
    """Closed form for the integrable twist: ``diag(2N+1, 2N+1 + sum n^2)``."""
    return NormalMatrix(float(2 * N + 1), 0.0, float(2 * N + 1 + sum_n2(N)), N)


class _Kahan:
    """Compensated running sum over numpy arrays."""

    def __init__(self, shape):
        self.s = np.zeros(shape)
        self.c = np.zeros(shape)

    def add(self, x):
        y = x - self.c
        t = self.s + y
        self.c = (t - self.s) - y
        self.s = t


def _gram_terms(D):
    # entries of D^T D for a stack of 2x2 matrices
    g11 = D[..., 0, 0] ** 2 + D[..., 1, 0] ** 2
    g12 = D[..., 0, 0] * D[..., 0, 1] + D[..., 1, 0] * D[..., 1, 1]
    g22 = D[..., 0, 1] ** 2 + D[..., 1, 1] ** 2
    return np.stack([g11, g12, g22], axis=-1)


def normal_matrices_direct_batch(smap, x, y, Ns):
    """Direct ``C_N`` at a batch of base points for several window sizes.

    Returns an array of shape ``(len(Ns), m, 3)`` holding ``(c11, c12, c22)``.
    One tangent orbit of half-width ``max(Ns)`` is shared by all windows.
    """
    Ns = [int(N) for N in Ns]
    if min(Ns) < 1:
        raise ValueError("N must be >= 1")
    Nmax = max(Ns)
    _, _, D = tangent_orbit_arrays(smap, x, y, Nmax)
    G = _gram_terms(D)  # (2Nmax+1, m, 3)
    acc = _Kahan(G.shape[1:])
    acc.add(G[Nmax])
    want = {N: i for i, N in enumerate(Ns)}
    out = np.empty((len(Ns),) + G.shape[1:])
    for n in range(1, Nmax + 1):
        acc.add(G[Nmax + n])
        acc.add(G[Nmax - n])
        if n in want:
            for i, N in enumerate(Ns):
                if N == n:
                    out[i] = acc.s
    return out


def normal_matrix_direct(smap, p, N):
    c = normal_matrices_direct_batch(smap, p.x, p.y, [N])[0, 0]
    return NormalMatrix(float(c[0]), float(c[1]), float(c[2]), int(N), p)


def normal_matrix_reduced(frame, s, N, residual_max=1e-8):
    """``C_N(K(s))`` from the reducing frame, without iterating the map."""
    if frame.triangularization_residual > residual_max:
        raise OdxError(f"frame residual {frame.triangularization_residual:.2e} exceeds {residual_max:.0e}")
    ns = np.arange(-N, N + 1)
    Mn = frame.M_at(s + ns * frame.omega)
    G = _gram_terms(Mn)
    t = ns * frame.Tbar
    # B_n^T G B_n with B_n = [[1, t], [0, 1]]
    r11 = G[:, 0]
    r12 = G[:, 0] * t + G[:, 1]
    r22 = G[:, 0] * t * t + 2.0 * G[:, 1] * t + G[:, 2]
    ct11, ct12, ct22 = math.fsum(r11), math.fsum(r12), math.fsum(r22)
    # C = M^{-T} Ct M^{-1}, M^{-1} = adj(M)
    M = frame.M_at(float(s))
    Minv = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])
    Ct = np.array([[ct11, ct12], [ct12, ct22]])
    C = Minv.T @ Ct @ Minv
    x, y = frame.curve(float(s))
    return NormalMatrix(float(C[0, 0]), float(0.5 * (C[0, 1] + C[1, 0])), float(C[1, 1]), int(N),
                        CylinderPoint(x, y))


def reduced_tilde(frame, s, N):
    """``Ctilde_N(s)`` entries ``(c11, c12, c22)``."""
    ns = np.arange(-N, N + 1)
    G = _gram_terms(frame.M_at(s + ns * frame.omega))
    t = ns * frame.Tbar
    return (math.fsum(G[:, 0]), math.fsum(G[:, 0] * t + G[:, 1]),
            math.fsum(G[:, 0] * t * t + 2.0 * G[:, 1] * t + G[:, 2]))


def eigen_symmetric(C):
    """Eigenpairs of a 2x2 SPD normal matrix, largest first.

    ``lambda_+ = (t + sqrt(t^2 - 4d)) / 2`` and ``lambda_- = d / lambda_+``.
    The eigenvector of ``lambda_+`` is taken from whichever of
    ``(c12, lambda_+ - c11)`` and ``(lambda_+ - c22, c12)`` has the larger
    norm; the other vector is its quarter-turn, oriented with non-negative
    first component.
    """
    c11, c12, c22 = C.c11, C.c12, C.c22
    t = c11 + c22
    d = C.det
    if not (c11 > 0 and c22 > 0 and d > 0 and all(map(math.isfinite, (c11, c12, c22)))):
        raise NotSPD(f"not symmetric positive definite: c11={c11}, c12={c12}, c22={c22}, det={d}")
    # discriminant written as (c11 - c22)^2 + 4 c12^2 to avoid cancellation
    disc = math.hypot(c11 - c22, 2.0 * c12)
    lp = 0.5 * (t + disc)
    lm = min(d / lp, lp)  # the quotient can round one ulp past lp at a tie
    if disc <= 1e-15 * t:
        return lp, lm, np.array([1.0, 0.0]), np.array([0.0, 1.0])
    v1 = np.array([c12, lp - c11])
    v2 = np.array([lp - c22, c12])
    v = v1 if np.hypot(*v1) >= np.hypot(*v2) else v2
    v = v / np.hypot(*v)
    w = np.array([v[1], -v[0]])
    if w[0] < 0 or (w[0] == 0 and w[1] < 0):
        w = -w
    v = np.array([-w[1], w[0]])
    return lp, lm, v, w


def covariance(C):
    """``Gamma_N = C_N^{-1}`` via the adjugate."""
    d = C.det
    return np.array([[C.c22, -C.c12], [-C.c12, C.c11]]) / d


def _tilt(u):
    a = math.atan2(u[1], u[0])
    if a <= -math.pi / 2:
        a += math.pi
    elif a > math.pi / 2:
        a -= math.pi
    return a


def confidence_ellipse(C, sigma=1.0):
    """Ellipse ``{z : z^T C z <= sigma^2}``: axes from ``Gamma_N``, marginal half-widths."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    lcp, lcm, vcp, vcm = eigen_symmetric(C)
    G = covariance(C)
    u_plus = vcm
    return ConfidenceEllipse(
        lambda_plus=1.0 / lcm,
        lambda_minus=1.0 / lcp,
        u_plus=(float(u_plus[0]), float(u_plus[1])),
        u_minus=(float(vcp[0]), float(vcp[1])),
        sigma_x=sigma * math.sqrt(G[0, 0]),
        sigma_y=sigma * math.sqrt(G[1, 1]),
        tilt=_tilt(u_plus),
        sigma=sigma,
    )


def ellipse_boundary(C, sigma=1.0, n=1000):
    """``n`` points on ``{z : z^T C z = sigma^2}`` via the eigen-decomposition."""
    e = confidence_ellipse(C, sigma)
    a, b = e.semi_axes
    th = 2 * np.pi * np.arange(n) / n
    up, um = np.array(e.u_plus), np.array(e.u_minus)
    return np.outer(a * np.cos(th), up) + np.outer(b * np.sin(th), um)


def tilt_test(frame, s, N):
    """Ellipse tilt at ``K(s)`` for window ``N`` and the slope component ``eta'(s)``."""
    C = normal_matrix_reduced(frame, s, N)
    e = confidence_ellipse(C)
    eta_prime = float(frame.curve.eta.derivative().eval(float(s)))
    return e.tilt, eta_prime
