"""Synthetic observations and least-squares orbit determination.

Observations are a true orbit plus iid Gaussian noise.  ``fit`` runs
Gauss-Newton differential corrections on the initial condition

    p <- p + C_N(p)^{-1} sum_{|n|<=N} DS^n(p)^T xi_n(p),

with the second-derivative term dropped from the normal matrix, and a
step-halving safeguard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .covariance import ConfidenceEllipse, NormalMatrix, confidence_ellipse
from .cylmap import CylinderPoint, tangent_orbit_arrays
from .errors import OrbitDivergence

#: relative growth of Q tolerated as round-off when accepting a step
Q_SLACK = 1e-12

#: bit generator used for observation noise; recorded in outputs
RNG_NAME = "numpy.PCG64/SeedSequence(seed, spawn_key=(zigzag(n),))"


def _zigzag(n):
    return 2 * n if n >= 0 else -2 * n - 1


def noise_stream(seed, n):
    """Generator for observation index ``n`` under ``seed``.

    Each index has its own stream, so the noise on ``O_n`` does not depend
    on the window size ``N``.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(_zigzag(int(n)),))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class ObservationSet:
    X: np.ndarray
    Y: np.ndarray
    N: int
    noise_sigma: float
    seed: int

    def __post_init__(self):
        if self.X.shape != (2 * self.N + 1,) or self.Y.shape != self.X.shape:
            raise ValueError("observation arrays must have length 2N+1")

    @property
    def obs(self):
        return list(zip(self.X.tolist(), self.Y.tolist()))


def wrap_centered(d):
    """Nearest representative of an angle difference, in ``[-1/2, 1/2)``."""
    return (np.asarray(d) + 0.5) % 1.0 - 0.5


def synthesize(smap, truth, N, noise_sigma, seed):
    if N < 1:
        raise ValueError("N must be >= 1")
    xs, ys, _ = tangent_orbit_arrays(smap, truth.x, truth.y, N)
    X = xs[:, 0].copy()
    Y = ys[:, 0].copy()
    if noise_sigma > 0:
        z = np.array([noise_stream(seed, n).standard_normal(2) for n in range(-N, N + 1)])
        X += noise_sigma * z[:, 0]
        Y += noise_sigma * z[:, 1]
    return ObservationSet(X % 1.0, Y, N, float(noise_sigma), int(seed))


def _residuals_and_tangents(smap, p, obs):
    xs, ys, D = tangent_orbit_arrays(smap, p.x, p.y, obs.N)
    xi = np.column_stack([wrap_centered(obs.X - xs[:, 0]), obs.Y - ys[:, 0]])
    return xi, D[:, 0]


def residuals(smap, p, obs):
    """``xi_n = O_n - S^n(p)`` for ``n = -N..N``, shape ``(2N+1, 2)``."""
    return _residuals_and_tangents(smap, p, obs)[0]


def _Q(xi):
    return math.fsum((xi * xi).ravel()) / xi.shape[0]


def target_Q(smap, p, obs):
    return _Q(residuals(smap, p, obs))


@dataclass(frozen=True, eq=False)
class FitResult:
    nominal: CylinderPoint
    Q0: float
    C: NormalMatrix | None
    ellipse: ConfidenceEllipse | None
    iterations: int
    converged: bool
    step_history: list = field(default_factory=list)
    message: str = ""
    q_history: list = field(default_factory=list)  # Q at the guess and after each accepted step

    def to_json(self):
        d = {
            "nominal": [self.nominal.x, self.nominal.y],
            "Q0": self.Q0,
            "iterations": self.iterations,
            "converged": self.converged,
            "step_history": list(self.step_history),
            "q_history": list(self.q_history),
            "message": self.message,
            "C": None,
            "ellipse": None,
        }
        if self.C is not None:
            d["C"] = {"c11": self.C.c11, "c12": self.C.c12, "c22": self.C.c22, "N": self.C.N}
        if self.ellipse is not None:
            e = self.ellipse
            d["ellipse"] = {
                "lambda_plus": e.lambda_plus, "lambda_minus": e.lambda_minus,
                "u_plus": list(e.u_plus), "u_minus": list(e.u_minus),
                "sigma_x": e.sigma_x, "sigma_y": e.sigma_y, "tilt": e.tilt,
            }
        return d


def _normal_system(xi, D):
    G = np.einsum("nij,nik->jk", D, D)
    g = np.einsum("nij,ni->j", D, xi)
    return G, g


def _solve2(G, g):
    d = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    return np.array([G[1, 1] * g[0] - G[0, 1] * g[1], G[0, 0] * g[1] - G[1, 0] * g[0]]) / d


def fit(smap, guess, obs, tol=1e-10, max_iter=20, max_halvings=10):
    """Differential corrections from ``guess``.

    Converged when the proposed correction has norm ``<= tol``; the nominal
    solution is the point where that happened.  Non-convergence is returned
    (``converged=False``), not raised; divergence of the guess orbit raises
    ``OrbitDivergence``.  A trial step is accepted when ``Q`` does not grow
    beyond a relative round-off allowance ``Q_SLACK``.
    """
    p = guess
    xi, D = _residuals_and_tangents(smap, p, obs)
    Q = _Q(xi)
    history = []
    qs = [Q]
    iterations = 0
    converged = False
    message = ""
    while True:
        G, g = _normal_system(xi, D)
        delta = _solve2(G, g)
        norm = float(np.hypot(*delta))
        history.append(norm)
        if norm <= tol:
            converged = True
            break
        if iterations >= max_iter:
            message = f"max_iter={max_iter} reached (last step {norm:.3e})"
            break
        lam = 1.0
        for _ in range(max_halvings + 1):
            try:
                trial = CylinderPoint(p.x + lam * delta[0], p.y + lam * delta[1])
                xi_t, D_t = _residuals_and_tangents(smap, trial, obs)
                Q_t = _Q(xi_t)
            except OrbitDivergence:
                Q_t = math.inf
            if Q_t <= Q * (1.0 + Q_SLACK):
                break
            lam *= 0.5
        else:
            message = f"step halving failed after {max_halvings} halvings"
            break
        p, xi, D, Q = trial, xi_t, D_t, Q_t
        qs.append(Q)
        iterations += 1

    C = ell = None
    if converged:
        C = NormalMatrix(float(G[0, 0]), float(0.5 * (G[0, 1] + G[1, 0])), float(G[1, 1]), obs.N, p)
        ell = confidence_ellipse(C)
    return FitResult(p, Q, C, ell, iterations, converged, history, message, qs)


def gradient(smap, p, obs):
    """``sum DS^n(p)^T xi_n(p)``."""
    xi, D = _residuals_and_tangents(smap, p, obs)
    return _normal_system(xi, D)[1]
