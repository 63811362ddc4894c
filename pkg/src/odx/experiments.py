"""Experiment drivers behind the command-line subcommands.

Each driver returns plain data (rows or dicts); writing files is left to
``odx.cli``.  Sweeps are split into independent cells, run through an
optional process pool, and reassembled in cell-key order so the output does
not depend on the pool.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .covariance import NormalMatrix, confidence_ellipse, normal_matrices_direct_batch, \
    normal_matrix_reduced
from .cylmap import CylinderPoint
from .errors import OdxError
from .kamcurve import continuation
from .odfit import RNG_NAME, fit, synthesize
from .reducibility import reduce
from .scaling import fit_power_law

ELLIPSE_COLUMNS = ["N", "lambda_plus", "lambda_minus", "sigma_x", "sigma_y", "tilt", "ux1", "ux2",
                   "discrepancy"]
SCALING_QUANTITIES = ["lambda_plus", "lambda_minus", "sigma_x", "sigma_y"]


def metadata(cfg, **extra):
    meta = {"tool": "odx", "version": __version__, "config_sha256": cfg.digest}
    meta.update(extra)
    return meta


def run_pool(func, cells, jobs=1):
    """Map ``func`` over ``cells``; results keep the order of ``cells``."""
    if jobs <= 1 or len(cells) <= 1:
        return [func(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(func, cells))


def compute_curve(cfg, dk=0.05):
    """Invariant curve and reducing frame for the configured map and omega."""
    smap = cfg.make_map()
    omega = cfg.make_omega()
    curve = continuation(smap, omega, cfg.k, dk=dk, tol=cfg.tol_curve)
    frame = reduce(curve, smap)
    return smap, curve, frame


def curve_document(cfg, curve, frame):
    doc = {"meta": metadata(cfg)}
    doc.update(curve.to_json())
    doc["diagnostics"] = {k: float(v) for k, v in sorted(curve.diagnostics.items())}
    doc["frame"] = frame.to_json()
    return doc


# -- ellipse sweep -------------------------------------------------------------


def _ellipse_cell(args):
    smap, frame, s, Ns = args
    rows = []
    try:
        x, y = frame.curve(s)
        B = normal_matrices_direct_batch(smap, x, y, Ns)[:, 0]
    except OdxError as exc:
        return [{"N": N, "error": str(exc)} for N in Ns]
    for N, (c11, c12, c22) in zip(Ns, B):
        try:
            C = NormalMatrix(float(c11), float(c12), float(c22), N, CylinderPoint(x, y))
            e = confidence_ellipse(C)
            R = normal_matrix_reduced(frame, s, N)
            disc = float(np.max(np.abs(C.matrix - R.matrix)) / np.max(np.abs(C.matrix)))
            rows.append({"N": N, "lambda_plus": e.lambda_plus, "lambda_minus": e.lambda_minus,
                         "sigma_x": e.sigma_x, "sigma_y": e.sigma_y, "tilt": e.tilt,
                         "ux1": e.u_plus[0], "ux2": e.u_plus[1], "discrepancy": disc,
                         "error": ""})
        except (OdxError, ValueError, ArithmeticError) as exc:
            rows.append({"N": N, "error": str(exc)})
    return rows


def ellipse_sweep(cfg, smap, frame, jobs=1):
    """Rows per ``s`` value: ``{s: [row, ...]}`` with one row per ``N``."""
    cells = [(smap, frame, s, cfg.Ns) for s in cfg.s]
    results = run_pool(_ellipse_cell, cells, jobs)
    return {s: rows for s, rows in zip(cfg.s, results)}


# -- scaling -------------------------------------------------------------------


def scaling_table(cfg, sweep):
    """Slopes of each ellipse quantity against ``N`` for every ``s``."""
    out = []
    for s, rows in sweep.items():
        good = [r for r in rows if not r.get("error")]
        for q in SCALING_QUANTITIES:
            f = fit_power_law([r["N"] for r in good], [r[q] for r in good])
            out.append({"s": s, "quantity": q, "slope": f.slope, "intercept": f.intercept,
                        "r2": f.r2, "n_points": len(f.pairs)})
    return out


# -- orbit determination ------------------------------------------------------


def _fit_cell(args):
    smap, truth, N, seed, sigma, offset, tol, max_iter = args
    guess = CylinderPoint(truth.x + offset[0], truth.y + offset[1])
    rec = {"N": N, "seed": seed, "truth": [truth.x, truth.y], "guess": [guess.x, guess.y]}
    try:
        obs = synthesize(smap, truth, N, sigma, seed)
        r = fit(smap, guess, obs, tol=tol, max_iter=max_iter)
    except OdxError as exc:
        rec.update(status="error", error=str(exc), result=None)
        return rec
    rec.update(status="converged" if r.converged else "not_converged", error=r.message,
               result=r.to_json())
    return rec


def fit_runs(cfg, smap, curve, jobs=1):
    cells = []
    keys = []
    for s in cfg.s:
        truth = curve.point(s)
        for N in cfg.Ns:
            for seed in cfg.seeds:
                keys.append(s)
                cells.append((smap, truth, N, seed, cfg.noise_sigma, cfg.guess_offset,
                              cfg.tol_fit, cfg.fit_max_iter))
    recs = run_pool(_fit_cell, cells, jobs)
    for s, r in zip(keys, recs):
        r["s"] = s
    counts = {st: sum(r["status"] == st for r in recs)
              for st in ("converged", "not_converged", "error")}
    return {"meta": metadata(cfg, rng=RNG_NAME), "summary": counts, "results": recs}


def format_float(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan"
    return format(v, ".17g") if isinstance(v, float) else str(v)
