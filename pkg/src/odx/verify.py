"""Invariant suites run by ``odx verify``.

Every check recomputes its quantity from scratch; stored artifacts are
never trusted.  A check returns ``(passed, detail)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .covariance import confidence_ellipse, eigen_symmetric, linear_normal_matrix, \
    normal_matrix_direct, normal_matrix_reduced
from .cylmap import CylinderPoint, iterate, orbit_lift, tangent_orbit
from .fourier import FourierSeries, solve_cohomological
from .kamcurve import InvariantCurve, invariance_residual
from .odfit import fit, synthesize


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<34s} {self.detail}"


def _check(name, fn):
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failed check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return Check(name, bool(ok), detail)


def _symplectic(smap, base):
    orb = tangent_orbit(smap, base, 100)
    err = float(np.max(np.abs(np.linalg.det(orb.tangents) - 1.0)))
    return err <= 1e-10, f"max |det DS^n - 1| = {err:.2e}"


def _group_law(smap, base):
    p = iterate(smap, iterate(smap, base, 100), -100)
    err = max(abs(((p.x - base.x + 0.5) % 1.0) - 0.5), abs(p.y - base.y))
    return err <= 1e-10, f"|S^-100 S^100 p - p| = {err:.2e}"


def _tangent_fd(smap, base, n=50, h=1e-6):
    orb = tangent_orbit(smap, base, n)
    D = orb.tangent(n)
    cols = []
    for dx, dy in ((h, 0.0), (0.0, h)):
        xp, yp = orbit_lift(smap, base.x + dx, base.y + dy, n)
        xm, ym = orbit_lift(smap, base.x - dx, base.y - dy, n)
        cols.append([(xp[-1] - xm[-1]) / (2 * h), (yp[-1] - ym[-1]) / (2 * h)])
    fd = np.array(cols).T
    err = float(np.max(np.abs(fd - D)) / np.max(np.abs(D)))
    return err <= 1e-4, f"relative FD error at n={n}: {err:.2e}"


def _cohomological(omega):
    rng = np.random.default_rng(12345)
    K = 128
    k = np.arange(1, K + 1)
    pos = (rng.standard_normal(K) + 1j * rng.standard_normal(K)) * np.exp(-0.2 * k)
    c = np.concatenate([np.conj(pos[::-1]), [0.0], pos])
    u0 = FourierSeries(c)
    v = u0 - u0.shift(omega)
    u, res = solve_cohomological(v, omega)
    err = float(np.max(np.abs(u.coeffs - u0.coeffs)))
    return err <= 1e-12 and res <= 1e-10, f"coefficient error {err:.2e}, residual {res:.2e}"


def _curve(smap, curve, tol):
    r1 = invariance_residual(smap, curve, 4096)
    r2 = invariance_residual(smap, curve, 4096, offset=0.37 / 4096)
    avg = abs(curve.psi.average())
    ok = r1 <= tol and r2 <= 10 * tol and avg <= 1e-13
    return ok, f"residual {r1:.2e} (shifted grid {r2:.2e}), |mean psi| = {avg:.1e}"


def _stored_curve(smap, path, tol):
    doc = json.loads(Path(path).read_text())
    curve = InvariantCurve.from_json(doc)
    if abs(curve.k - smap.k) > 0:
        return False, f"stored k={curve.k} differs from config k={smap.k}"
    r = invariance_residual(smap, curve, 4096)
    stored = curve.invariance_residual
    # absolute agreement, plus a factor-2 relative check so that a falsified
    # round-off level value is caught as well
    ok = abs(r - stored) <= 1e-12 and abs(r - stored) <= 0.5 * max(r, stored) and r <= tol
    return ok, f"{Path(path).name}: stored residual {stored:.3e}, recomputed {r:.3e}"


def _frame(frame, tol):
    M = frame.M_at(np.linspace(0, 1, 1000, endpoint=False))
    det = float(np.max(np.abs(np.linalg.det(M) - 1.0)))
    r = frame.triangularization_residual
    return r <= tol and det <= 1e-10, f"triangularization {r:.2e}, max |det M - 1| = {det:.1e}"


def _oracle(smap, frame, s_values, Ns):
    worst = 0.0
    for s in s_values:
        x, y = frame.curve(s)
        for N in Ns:
            Cd = normal_matrix_direct(smap, CylinderPoint(x, y), N).matrix
            Cr = normal_matrix_reduced(frame, s, N).matrix
            worst = max(worst, float(np.max(np.abs(Cd - Cr)) / np.max(np.abs(Cd))))
    return worst <= 1e-6, f"max relative discrepancy {worst:.2e} over N <= {max(Ns)}"


def _eigen(smap, frame, s_values, Ns):
    worst_r = worst_d = 0.0
    for s in s_values:
        x, y = frame.curve(s)
        for N in Ns:
            C = normal_matrix_direct(smap, CylinderPoint(x, y), N)
            lp, lm, vp, vm = eigen_symmetric(C)
            A = C.matrix
            nrm = np.linalg.norm(A, 2)
            worst_r = max(worst_r, np.linalg.norm(A @ vp - lp * vp) / nrm,
                          np.linalg.norm(A @ vm - lm * vm) / nrm)
            e = confidence_ellipse(C)
            worst_d = max(worst_d, abs(e.lambda_plus * e.lambda_minus * C.det - 1.0))
    return worst_r <= 1e-9 and worst_d <= 1e-10, \
        f"eigen residual {worst_r:.1e}, |lambda+ lambda- / det Gamma - 1| = {worst_d:.1e}"


def _linear():
    worst = 0.0
    from .cylmap import StandardLikeMap

    m0 = StandardLikeMap.chirikov(0.0)
    for N in (1, 10, 100):
        Cd = normal_matrix_direct(m0, CylinderPoint(0.1, 0.3), N).matrix
        Cl = linear_normal_matrix(N).matrix
        worst = max(worst, float(np.max(np.abs(Cd - Cl) / np.abs(np.diag(Cl)).max())))
    return worst <= 1e-12, f"max relative deviation from closed form {worst:.1e}"


def _fit_zero_noise(smap, curve, s):
    truth = curve.point(s)
    obs = synthesize(smap, truth, 20, 0.0, 0)
    r = fit(smap, CylinderPoint(truth.x + 1e-4, truth.y + 1e-4), obs)
    err = max(abs(((r.nominal.x - truth.x + 0.5) % 1) - 0.5), abs(r.nominal.y - truth.y))
    return r.converged and err <= 1e-9, f"converged={r.converged}, |p - truth| = {err:.1e}"


def run_suites(cfg, smap, curve, frame, out_dir=None):
    s_values = cfg.s[:5]
    base = curve.point(s_values[0])
    small_Ns = [N for N in cfg.Ns if N <= 200] or [10, 50, 200]
    checks = [
        _check("cylmap.symplectic", lambda: _symplectic(smap, base)),
        _check("cylmap.group_law", lambda: _group_law(smap, base)),
        _check("cylmap.tangent_fd", lambda: _tangent_fd(smap, base)),
        _check("fourier.cohomological", lambda: _cohomological(curve.omega.value)),
        _check("kamcurve.invariance", lambda: _curve(smap, curve, cfg.tol_curve)),
        _check("reducibility.triangularization", lambda: _frame(frame, cfg.tol_reduce)),
        _check("covariance.linear_closed_form", _linear),
        _check("covariance.oracle_equivalence", lambda: _oracle(smap, frame, s_values, small_Ns)),
        _check("covariance.eigen", lambda: _eigen(smap, frame, s_values, cfg.Ns[:3])),
        _check("odfit.zero_noise", lambda: _fit_zero_noise(smap, curve, s_values[0])),
    ]
    if out_dir is not None:
        stored = Path(out_dir) / "curve.json"
        if stored.exists():
            checks.append(_check("kamcurve.stored_curve",
                                 lambda: _stored_curve(smap, stored, cfg.tol_curve)))
    return checks
