"""Experiment configuration: JSON loading, validation and derived objects."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .cylmap import StandardLikeMap
from .fourier import FourierSeries
from .kamcurve import GOLDEN, certify_diophantine

DEFAULT_NS = {"geom": [100, 10000, 9]}
# "fit" is an optional extension carrying the first-guess offset and max_iter
KNOWN_KEYS = {"map", "omega", "sweep", "noise", "tol", "fit"}


class ConfigError(ValueError):
    pass


def _require(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"missing key '{key}' in {where}")
    return d[key]


def geometric_Ns(lo, hi, count):
    Ns = np.unique(np.round(np.geomspace(lo, hi, int(count))).astype(int))
    return [int(n) for n in Ns]


def _parse_Ns(spec):
    if isinstance(spec, dict):
        lo, hi, count = _require(spec, "geom", "sweep.Ns")
        return geometric_Ns(lo, hi, count)
    Ns = [int(n) for n in spec]
    if any(float(n) != float(m) for n, m in zip(Ns, spec)):
        raise ConfigError("sweep.Ns must be integers")
    return Ns


@dataclass
class ExperimentConfig:
    k: float
    phi_modes: list
    omega_value: float
    gamma: float
    tau: float
    qmax: int
    Ns: list
    s: list
    noise_sigma: float = 0.0
    seeds: list = field(default_factory=lambda: [0])
    tol_curve: float = 1e-11
    tol_fit: float = 1e-10
    tol_reduce: float = 1e-9
    guess_offset: tuple = (3e-3, 3e-3)
    fit_max_iter: int = 20
    raw: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for name in ("tol_curve", "tol_fit", "tol_reduce"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.Ns or min(self.Ns) < 1:
            raise ConfigError("N values must be >= 1")
        if any(b <= a for a, b in zip(self.Ns, self.Ns[1:])):
            raise ConfigError("N values must be strictly increasing")
        if self.noise_sigma < 0:
            raise ConfigError("noise.sigma must be >= 0")
        if not self.s:
            raise ConfigError("sweep.s must list at least one parameter value")
        if not self.seeds:
            raise ConfigError("noise.seeds must not be empty")

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or not d:
            raise ConfigError("empty configuration")
        unknown = set(d) - KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        m = _require(d, "map", "config")
        om = _require(d, "omega", "config")
        phi = _require(m, "phi", "map")
        modes = [(int(_require(t, "mode", "map.phi")), float(_require(t, "amp", "map.phi")))
                 for t in phi]
        if "preset" in om:
            if om["preset"] != "golden":
                raise ConfigError(f"unknown omega preset {om['preset']!r}")
            value = GOLDEN
        else:
            value = float(_require(om, "value", "omega"))
        sweep = d.get("sweep", {})
        noise = d.get("noise", {})
        tol = d.get("tol", {})
        fit = d.get("fit", {})
        return cls(
            k=float(_require(m, "k", "map")),
            phi_modes=modes,
            omega_value=value,
            gamma=float(_require(om, "gamma", "omega")),
            tau=float(_require(om, "tau", "omega")),
            qmax=int(_require(om, "qmax", "omega")),
            Ns=_parse_Ns(sweep.get("Ns", DEFAULT_NS)),
            s=[float(v) for v in sweep.get("s", [0.0])],
            noise_sigma=float(noise.get("sigma", 0.0)),
            seeds=[int(v) for v in noise.get("seeds", [0])],
            tol_curve=float(tol.get("curve", 1e-11)),
            tol_fit=float(tol.get("fit", 1e-10)),
            tol_reduce=float(tol.get("reduce", 1e-9)),
            guess_offset=tuple(float(v) for v in fit.get("guess_offset", (3e-3, 3e-3))),
            fit_max_iter=int(fit.get("max_iter", 20)),
            raw=d,
        )

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(d)

    def make_map(self, k=None):
        phi = FourierSeries.from_modes(sin=self.phi_modes)
        return StandardLikeMap(self.k if k is None else k, phi)

    def make_omega(self):
        return certify_diophantine(self.omega_value, self.gamma, self.tau, self.qmax)

    @property
    def digest(self):
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()
