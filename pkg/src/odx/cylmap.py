"""Standard-like maps of the cylinder T x R and their tangent dynamics.

The family realized here is

    x1 = x + y + k*phi(x)   (mod 1)
    y1 = y + k*phi(x)

with ``phi`` a zero-average 1-periodic function.  Every member is exact
symplectic, its Jacobian has unit determinant, and the inverse is explicit.
Functions accept scalars or numpy arrays for ``x`` and ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import OrbitDivergence
from .fourier import FourierSeries


@dataclass(frozen=True)
class CylinderPoint:
    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite point ({x}, {y})")
        x = x % 1.0
        if x == 1.0:  # -tiny % 1.0 rounds up
            x = 0.0
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def as_array(self):
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class StandardLikeMap:
    k: float
    phi: FourierSeries
    strip: tuple = (0.0, 1.0)
    dphi: FourierSeries = field(init=False, repr=False)

    def __post_init__(self):
        a, b = self.strip
        if b - a < 1.0:
            raise ValueError(f"strip width must be >= 1, got ({a}, {b})")
        if abs(self.phi.average()) > 1e-14:
            raise ValueError("phi must have zero average (exactness of the family)")
        if not self.phi.is_real(1e-14):
            raise ValueError("phi coefficients are not conjugate-symmetric")
        object.__setattr__(self, "dphi", self.phi.derivative())

    @classmethod
    def chirikov(cls, k, strip=(0.0, 1.0)):
        """``phi(x) = sin(2 pi x)``."""
        return cls(k, FourierSeries.from_modes(sin=[(1, 1.0)]), strip)

    @property
    def y_bound(self):
        a, b = self.strip
        return 10.0 * (b - a)

    def with_k(self, k):
        return replace(self, k=k)

    def kick(self, x):
        return self.k * self.phi.eval(x)

    def kick_prime(self, x):
        return self.k * self.dphi.eval(x)


def _apply(smap, x, y):
    f = smap.kick(x)
    y1 = y + f
    return (x + y1) % 1.0, y1


def _apply_inverse(smap, x1, y1):
    x = (x1 - y1) % 1.0
    return x, y1 - smap.kick(x)


def step(smap, p):
    x1, y1 = _apply(smap, p.x, p.y)
    return CylinderPoint(x1, y1)


def step_inverse(smap, p1):
    x, y = _apply_inverse(smap, p1.x, p1.y)
    return CylinderPoint(x, y)


def jacobian(smap, p):
    """``DS(x, y) = [[1 + k phi'(x), 1], [k phi'(x), 1]]``."""
    c = smap.kick_prime(p.x)
    return np.array([[1.0 + c, 1.0], [c, 1.0]])


def jacobian_arrays(smap, x):
    """Jacobian entries ``(m11, m12, m21, m22)`` at an array of angles."""
    c = smap.kick_prime(x)
    one = np.ones_like(c)
    return 1.0 + c, one, c, one


@dataclass(frozen=True, eq=False)
class TangentOrbit:
    """Orbit and accumulated Jacobians for ``n = -N..N``.

    ``xs[n + N], ys[n + N]`` is ``S^n(p)`` and ``tangents[n + N]`` is
    ``DS^n(p)``.
    """

    xs: np.ndarray
    ys: np.ndarray
    tangents: np.ndarray
    N: int

    def point(self, n):
        return CylinderPoint(self.xs[n + self.N], self.ys[n + self.N])

    def tangent(self, n):
        return self.tangents[n + self.N]

    @property
    def indices(self):
        return np.arange(-self.N, self.N + 1)


def _check_bound(smap, n, y):
    bound = smap.y_bound
    bad = np.abs(y) > bound
    if np.any(bad) or not np.all(np.isfinite(y)):
        yy = np.atleast_1d(y)
        i = int(np.argmax(~np.isfinite(yy) | (np.abs(yy) > bound)))
        raise OrbitDivergence(n, float(yy[i]), bound)


def tangent_orbit_arrays(smap, x, y, N):
    """Vectorized tangent orbit over a batch of base points.

    Returns ``xs, ys`` of shape ``(2N+1, m)`` and tangents of shape
    ``(2N+1, m, 2, 2)`` for base points ``(x[j], y[j])``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=float)) % 1.0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    m = x.size
    xs = np.empty((2 * N + 1, m))
    ys = np.empty((2 * N + 1, m))
    T = np.empty((2 * N + 1, m, 2, 2))
    xs[N], ys[N] = x, y
    T[N] = np.eye(2)
    _check_bound(smap, 0, y)

    # forward: DS^{n+1} = DS(S^n p) DS^n
    for n in range(N):
        i = N + n
        a11, a12, a21, a22 = jacobian_arrays(smap, xs[i])
        P = T[i]
        T[i + 1, :, 0, :] = a11[:, None] * P[:, 0, :] + a12[:, None] * P[:, 1, :]
        T[i + 1, :, 1, :] = a21[:, None] * P[:, 0, :] + a22[:, None] * P[:, 1, :]
        xs[i + 1], ys[i + 1] = _apply(smap, xs[i], ys[i])
        _check_bound(smap, n + 1, ys[i + 1])

    # backward: DS^{-(n+1)} = [DS(S^{-(n+1)} p)]^{-1} DS^{-n}, adjugate since det = 1
    for n in range(N):
        i = N - n
        xb, yb = _apply_inverse(smap, xs[i], ys[i])
        _check_bound(smap, -(n + 1), yb)
        xs[i - 1], ys[i - 1] = xb, yb
        a11, a12, a21, a22 = jacobian_arrays(smap, xb)
        P = T[i]
        T[i - 1, :, 0, :] = a22[:, None] * P[:, 0, :] - a12[:, None] * P[:, 1, :]
        T[i - 1, :, 1, :] = -a21[:, None] * P[:, 0, :] + a11[:, None] * P[:, 1, :]
    return xs, ys, T


def tangent_orbit(smap, p, N):
    xs, ys, T = tangent_orbit_arrays(smap, p.x, p.y, N)
    return TangentOrbit(xs[:, 0], ys[:, 0], T[:, 0], N)


def iterate(smap, p, n):
    """``S^n(p)`` for any integer ``n``."""
    x, y = p.x, p.y
    f = _apply if n >= 0 else _apply_inverse
    for _ in range(abs(n)):
        x, y = f(smap, x, y)
    return CylinderPoint(x, y)


def orbit_lift(smap, x, y, N):
    """Forward orbit with the angle kept as a real lift (no wrapping).

    Used to form finite differences of the composed map without jumps at
    the seam; returns arrays of length ``N + 1``.
    """
    xs = np.empty(N + 1)
    ys = np.empty(N + 1)
    xs[0], ys[0] = x, y
    for n in range(N):
        f = smap.kick(xs[n])
        ys[n + 1] = ys[n] + f
        xs[n + 1] = xs[n] + ys[n + 1]
    return xs, ys
