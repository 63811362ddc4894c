"""Invariant curves of standard-like maps with Diophantine rotation number.

Curves are parameterized as ``K(s) = (s + psi(s), eta(s))`` and solve

    S(K(s)) = K(s + omega).

``solve_curve`` runs a quasi-Newton iteration in the adapted frame
``M_K(s) = (K'(s), N(s))``: the linearized equation becomes upper
triangular there, leaving two cohomological equations per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cylmap import StandardLikeMap
from .errors import Breakdown, DiophantineViolation, EmbeddingLost, NewtonFailure, OdxError
from .fourier import DEFAULT_KMAX, TAIL_ENERGY_TOL, FourierSeries, solve_cohomological

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_GRID = 4096
DEFAULT_TOL = 1e-11


# -- Diophantine certificates -------------------------------------------------


@dataclass(frozen=True)
class DiophantineNumber:
    value: float
    gamma: float
    tau: float
    q_max: int
    min_ratio: float = float("inf")  # min over checked p/q of q^tau |value - p/q| / gamma


def convergents(value, q_max):
    """Continued-fraction convergents ``(p, q)`` of ``value`` with ``q <= q_max``.

    The float is expanded exactly as the rational it represents.
    """
    x = Fraction(value)
    p0, q0, p1, q1 = 0, 1, 1, 0
    out = []
    while True:
        a = x.numerator // x.denominator
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > q_max:
            break
        out.append((p1, q1))
        frac = x - a
        if frac == 0:
            break
        x = 1 / frac
    return out


def certify_diophantine(value, gamma, tau, q_max):
    """Check ``|value - p/q| >= gamma / q**tau`` for all ``1 <= q <= q_max``.

    Convergents are checked exactly.  Any non-convergent satisfies
    ``|value - p/q| >= 1/(2 q^2)`` (Legendre), hence passes once
    ``q^(tau-2)/2 >= gamma``; denominators below that threshold are
    brute-forced.  Raises ``DiophantineViolation`` with the worst witness.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if tau < 2:
        raise ValueError("tau must be >= 2")
    if q_max < 2:
        raise ValueError("q_max must be >= 2")
    q_max = int(q_max)
    exact = Fraction(value)

    cands = set(convergents(value, q_max))
    if gamma > 0.5:
        q_hi = q_max if tau == 2 else min(q_max, math.ceil((2 * gamma) ** (1 / (tau - 2))))
        for q in range(1, q_hi + 1):
            p = round(exact * q)
            cands.add((p, q))
    cands.add((round(exact), 1))

    worst = None
    for p, q in cands:
        gap = float(abs(exact - Fraction(p, q)))
        ratio = gap * q ** tau / gamma
        if worst is None or ratio < worst[0]:
            worst = (ratio, p, q, gap)
    ratio, p, q, gap = worst
    if ratio < 1.0:
        raise DiophantineViolation(p, q, gap, gamma / q ** tau)
    return DiophantineNumber(float(value), float(gamma), float(tau), q_max, float(ratio))


# -- curves --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InvariantCurve:
    psi: FourierSeries
    eta: FourierSeries
    omega: DiophantineNumber
    invariance_residual: float
    k: float = 0.0
    iterations: int = 0
    history: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def kmax(self):
        return max(self.psi.kmax, self.eta.kmax)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return s + self.psi.eval(s), self.eta.eval(s)

    def point(self, s):
        from .cylmap import CylinderPoint

        x, y = self(float(s))
        return CylinderPoint(x, y)

    def tangent(self, s):
        """``K'(s) = (1 + psi'(s), eta'(s))``."""
        s = np.asarray(s, dtype=float)
        return 1.0 + self.psi.derivative().eval(s), self.eta.derivative().eval(s)

    def to_json(self):
        return {
            "omega": self.omega.value,
            "gamma": self.omega.gamma,
            "tau": self.omega.tau,
            "qmax": self.omega.q_max,
            "k": self.k,
            "psi": self.psi.to_json(),
            "eta": self.eta.to_json(),
            "residual": self.invariance_residual,
        }

    @classmethod
    def from_json(cls, d):
        omega = DiophantineNumber(float(d["omega"]), float(d["gamma"]), float(d["tau"]),
                                  int(d.get("qmax", 0)))
        return cls(FourierSeries.from_json(d["psi"]), FourierSeries.from_json(d["eta"]),
                   omega, float(d["residual"]), k=float(d["k"]))


def trivial_curve(omega, kmax=DEFAULT_KMAX):
    """The invariant circle ``y = omega`` of the integrable twist."""
    return InvariantCurve(FourierSeries.zeros(kmax), FourierSeries.constant(omega.value, kmax),
                          omega, 0.0, k=0.0)


def invariance_error(smap, psi, eta, omega, n, offset=0.0):
    """Components of ``S(K(s)) - K(s + omega)`` on ``s_j = offset + j/n``.

    The angle is compared on the lift, so no wrapping is involved.
    """
    s = offset + np.arange(n) / n
    p = psi.on_grid(n, offset)
    e = eta.on_grid(n, offset)
    x = s + p
    f = smap.kick(x)
    ex = p + e + f - omega - psi.on_grid(n, offset + omega)
    ey = e + f - eta.on_grid(n, offset + omega)
    return ex, ey


def invariance_residual(smap, curve, n=DEFAULT_GRID, offset=0.0):
    """Sup over the grid of ``|S(K(s)) - K(s + omega)|`` (Euclidean norm)."""
    ex, ey = invariance_error(smap, curve.psi, curve.eta, curve.omega.value, n, offset)
    return float(np.max(np.hypot(ex, ey)))


def _reproject(psi, eta):
    # reparametrize s -> s - c so that psi has zero average; keeps invariance
    c = psi.average()
    if c == 0.0:
        return psi, eta
    psi = psi.shift(-c) - c
    return psi, eta.shift(-c)


def _newton_correction(smap, psi, eta, omega, n, ex, ey, kmax):
    """One quasi-Newton correction ``(dpsi, deta)`` as series of order ``kmax``."""
    a = 1.0 + psi.derivative().on_grid(n)
    b = eta.derivative().on_grid(n)
    v = a * a + b * b
    a1 = 1.0 + psi.derivative().on_grid(n, omega)
    b1 = eta.derivative().on_grid(n, omega)
    v1 = a1 * a1 + b1 * b1

    # -M_K(s+omega)^{-1} E, with M_K^{-1} = [[a/v, b/v], [-b, a]]
    e1 = -(a1 * ex + b1 * ey) / v1
    e2 = -(-b1 * ex + a1 * ey)

    # torsion T = N(s+w)^T Omega DS(K(s)) N(s)
    x = np.arange(n) / n + psi.on_grid(n)
    c = smap.kick_prime(x)
    n1, n2 = -b / v, a / v
    w1 = (1.0 + c) * n1 + n2
    w2 = c * n1 + n2
    T = (-b1 / v1) * (-w2) + (a1 / v1) * w1
    Tbar = float(np.mean(T))

    # normal component: xi2(s) - xi2(s+w) = e2, average fixed below
    e2s = FourierSeries.from_samples(e2, kmax)
    avg_e2 = e2s.average()
    xi2, _ = solve_cohomological(e2s - avg_e2, omega, zero_avg_tol=np.inf)
    xi2g = xi2.on_grid(n)
    xi2_avg = (float(np.mean(e1)) - float(np.mean(T * xi2g))) / Tbar
    xi2g = xi2g + xi2_avg

    # tangential component: xi1(s) - xi1(s+w) = e1 - T xi2, zero average
    rhs = FourierSeries.from_samples(e1 - T * xi2g, kmax)
    xi1, _ = solve_cohomological(rhs - rhs.average(), omega, zero_avg_tol=np.inf)
    xi1g = xi1.on_grid(n)

    dpsi = a * xi1g - (b / v) * xi2g
    deta = b * xi1g + (a / v) * xi2g
    return (FourierSeries.from_samples(dpsi, kmax), FourierSeries.from_samples(deta, kmax),
            Tbar, avg_e2)


def solve_curve(smap, omega, guess, tol=DEFAULT_TOL, max_iter=30, n_grid=DEFAULT_GRID,
                kmax_cap=None, polish=True):
    """Newton iteration for ``S(K(s)) = K(s + omega)`` starting from ``guess``.

    The order of the series starts at ``guess.kmax`` and doubles whenever the
    tail energy of a component exceeds ``TAIL_ENERGY_TOL``, up to
    ``kmax_cap`` (default ``n_grid // 8``).  Raises ``NewtonFailure`` (or its
    subclass ``EmbeddingLost``) when tolerance is not reached.  With ``polish``
    one extra step is taken after convergence and kept only if it helps;
    ``iterations`` counts the steps needed to reach ``tol``.
    """
    w = omega.value
    if kmax_cap is None:
        kmax_cap = n_grid // 8
    kmax = min(max(guess.kmax, 1), kmax_cap)
    psi, eta = _reproject(guess.psi.resized(kmax), guess.eta.resized(kmax))
    history = []
    best = np.inf
    for it in range(max_iter + 1):
        n = max(n_grid, 8 * kmax)
        ex, ey = invariance_error(smap, psi, eta, w, n)
        res = float(np.max(np.hypot(ex, ey)))
        history.append(res)
        if not math.isfinite(res):
            raise NewtonFailure("non-finite invariance error", history)
        if res <= tol:
            break
        if it == max_iter:
            raise NewtonFailure(f"no convergence in {max_iter} iterations (residual {res:.3e})",
                                history)
        if res > 10.0 * best and res > 1e-8:
            raise NewtonFailure(f"Newton diverging (residual {res:.3e})", history)
        best = min(best, res)

        dpsi, deta, _, _ = _newton_correction(smap, psi, eta, w, n, ex, ey, kmax)
        psi, eta = _reproject(psi + dpsi, eta + deta)

        if np.min(1.0 + psi.derivative().on_grid(n)) <= 0.0:
            raise EmbeddingLost("1 + psi' <= 0: parameterization is no longer an embedding",
                                history)
        if kmax < kmax_cap and max(psi.tail_energy(), (eta - eta.average()).tail_energy()) \
                > TAIL_ENERGY_TOL:
            kmax = min(2 * kmax, kmax_cap)
            psi, eta = psi.resized(kmax), eta.resized(kmax)

    if polish and res > 0.0:
        # one more step is nearly free near a quadratic fixed point, and the frame
        # built on the curve amplifies the residual by roughly the spectral width
        dpsi, deta, _, _ = _newton_correction(smap, psi, eta, w, n, ex, ey, kmax)
        p2, e2 = _reproject(psi + dpsi, eta + deta)
        r2 = float(np.max(np.hypot(*invariance_error(smap, p2, e2, w, n))))
        if r2 < res and np.min(1.0 + p2.derivative().on_grid(n)) > 0.0:
            psi, eta, res = p2, e2, r2
            history.append(res)

    tail = max(psi.tail_energy(), (eta - eta.average()).tail_energy())
    if tail > TAIL_ENERGY_TOL:
        raise NewtonFailure(f"curve unresolved at kmax={kmax} (tail energy {tail:.2e})", history)

    k = smap.k
    diag = {"tail_energy": tail, "decay_rate_psi": psi.decay_rate(), "kmax": kmax}
    psi_sup = psi.sup_norm()
    eta_dev = (eta - w).sup_norm()
    diag["psi_sup"] = psi_sup
    diag["eta_dev_sup"] = eta_dev
    if k != 0:
        diag["psi_sup_over_k"] = psi_sup / abs(k)
        diag["eta_dev_over_k"] = eta_dev / abs(k)
    return InvariantCurve(psi, eta, omega, res, k=k, iterations=it, history=tuple(history),
                          diagnostics=diag)


def continuation(family, omega, k_target, dk=0.05, tol=DEFAULT_TOL, dk_min=1e-6,
                 n_grid=DEFAULT_GRID, max_iter=30, kmax=DEFAULT_KMAX, kmax_cap=None):
    """Follow the curve of rotation number ``omega`` from ``k = 0`` to ``k_target``.

    ``family`` supplies ``phi`` and the strip; its own ``k`` is ignored.
    The step halves after each failed solve and ``Breakdown`` is raised once
    it drops below ``dk_min``.
    """
    if k_target < 0 or dk <= 0:
        raise ValueError("need k_target >= 0 and dk > 0")
    a, b = family.strip
    if not a < omega.value < b:
        raise ValueError(f"omega={omega.value} outside the strip ({a}, {b})")
    curve = trivial_curve(omega, kmax)
    k = 0.0
    while k < k_target:
        k_next = min(k + dk, k_target)
        try:
            curve = solve_curve(family.with_k(k_next), omega, curve, tol=tol,
                                max_iter=max_iter, n_grid=n_grid, kmax_cap=kmax_cap)
        except (NewtonFailure, OdxError):
            dk /= 2.0
            if dk < dk_min:
                raise Breakdown(k, dk) from None
            continue
        k = k_next
    return curve
