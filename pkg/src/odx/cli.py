"""Command-line entry point: ``odx {curve,ellipse,fit,scaling,verify}``.

Exit codes: 0 ran (cell failures are recorded, not fatal), 1 usage or
configuration error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .errors import OdxError
from .experiments import ELLIPSE_COLUMNS, compute_curve, curve_document, ellipse_sweep, \
    fit_runs, format_float, metadata, scaling_table
from .scaling import ScalingRangeError
from .verify import run_suites

log = logging.getLogger("odx")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="odx", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("curve", "compute the invariant curve and its reducing frame (curve.json)"),
        ("ellipse", "confidence-ellipse sweep over N and s (ellipse_s*.csv)"),
        ("fit", "Monte-Carlo orbit-determination fits over seeds (fit.json)"),
        ("scaling", "log-log slopes of ellipse quantities against N (scaling.csv)"),
        ("verify", "run the invariant suites; exit 2 on any failure"),
    ]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="JSON experiment configuration")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument("--seed", type=int, default=None,
                        help="run a single noise seed instead of noise.seeds")
    return p


def _write_json(path, doc):
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _meta_lines(meta):
    return "".join(f"# {k} = {v}\n" for k, v in meta.items())


def _write_csv(path, meta, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(_meta_lines(meta))
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(format_float(r.get(c, float("nan"))) for c in columns) + "\n")


def cmd_curve(cfg, out, jobs):
    _, curve, frame = compute_curve(cfg)
    path = out / "curve.json"
    _write_json(path, curve_document(cfg, curve, frame))
    log.info("curve: residual %.3e, Tbar %.12g -> %s", curve.invariance_residual, frame.Tbar, path)
    return EXIT_OK


def _write_sweep(cfg, out, sweep):
    errors = []
    for i, (s, rows) in enumerate(sweep.items()):
        path = out / f"ellipse_s{i}.csv"
        _write_csv(path, metadata(cfg, s=format_float(s)), ELLIPSE_COLUMNS, rows)
        errors += [{"s": s, "N": r["N"], "error": r["error"]} for r in rows if r.get("error")]
    with open(out / "ellipse_errors.csv", "w", newline="") as fh:
        fh.write("s,N,error\n")
        for e in errors:
            fh.write(f"{format_float(e['s'])},{e['N']},\"{e['error']}\"\n")
    return errors


def cmd_ellipse(cfg, out, jobs):
    smap, _, frame = compute_curve(cfg)
    sweep = ellipse_sweep(cfg, smap, frame, jobs)
    errors = _write_sweep(cfg, out, sweep)
    log.info("ellipse: %d s values x %d N, %d failed cells", len(cfg.s), len(cfg.Ns), len(errors))
    return EXIT_OK


def cmd_fit(cfg, out, jobs):
    smap, curve, _ = compute_curve(cfg)
    doc = fit_runs(cfg, smap, curve, jobs)
    doc["config"] = cfg.raw
    _write_json(out / "fit.json", doc)
    log.info("fit: %s", doc["summary"])
    return EXIT_OK


def cmd_scaling(cfg, out, jobs):
    smap, _, frame = compute_curve(cfg)
    sweep = ellipse_sweep(cfg, smap, frame, jobs)
    table = scaling_table(cfg, sweep)
    _write_csv(out / "scaling.csv", metadata(cfg),
               ["s", "quantity", "slope", "intercept", "r2", "n_points"], table)
    for row in table:
        log.info("scaling: s=%.6g %-13s slope %+.4f (r2 %.6f)", row["s"], row["quantity"],
                 row["slope"], row["r2"])
    return EXIT_OK


def cmd_verify(cfg, out, jobs):
    smap, curve, frame = compute_curve(cfg)
    checks = run_suites(cfg, smap, curve, frame, out)
    report = "\n".join(c.line() for c in checks) + "\n"
    (out / "verify.txt").write_text(report)
    sys.stdout.write(report)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


COMMANDS = {"curve": cmd_curve, "ellipse": cmd_ellipse, "fit": cmd_fit, "scaling": cmd_scaling,
            "verify": cmd_verify}


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg.seeds = [args.seed]
            cfg.raw = dict(cfg.raw, noise=dict(cfg.raw.get("noise", {}), seeds=[args.seed]))
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.jobs)
    except (ConfigError, ScalingRangeError) as exc:
        print(f"odx: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OdxError as exc:
        # curve/certificate failures make the whole configuration unusable
        print(f"odx: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
