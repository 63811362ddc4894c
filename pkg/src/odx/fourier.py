"""Truncated Fourier series for real 1-periodic functions.

A series stores complex coefficients ``c_k`` for ``|k| <= kmax`` in a flat
array indexed ``k + kmax``; the represented function is

    f(s) = sum_k c_k exp(2 pi i k s),

real on the real line because ``c_{-k} = conj(c_k)``.  Grid evaluation goes
through the FFT, pointwise evaluation sums the positive half of the spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonZeroAverage, SmallDivisor

TWO_PI = 2.0 * np.pi

#: divisors |1 - exp(2 pi i k omega)| below this are treated as resonant
DIVISOR_FLOOR = 1e-13
#: tail energy above which a truncation is considered unresolved
TAIL_ENERGY_TOL = 1e-24
DEFAULT_KMAX = 128


def _is_pow2(n):
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class FourierSeries:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient array must be 1-D with odd length 2*kmax+1")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction ---------------------------------------------------

    @classmethod
    def zeros(cls, kmax):
        return cls(np.zeros(2 * kmax + 1, dtype=complex))

    @classmethod
    def constant(cls, value, kmax=0):
        c = np.zeros(2 * kmax + 1, dtype=complex)
        c[kmax] = value
        return cls(c)

    @classmethod
    def from_modes(cls, sin=(), cos=(), const=0.0):
        """Build ``const + sum a*sin(2 pi m s) + sum b*cos(2 pi m s)``.

        ``sin`` and ``cos`` are iterables of ``(mode, amplitude)`` pairs with
        positive integer modes.
        """
        sin, cos = list(sin), list(cos)
        modes = [m for m, _ in sin] + [m for m, _ in cos]
        if any(int(m) != m or m < 1 for m in modes):
            raise ValueError("modes must be positive integers")
        kmax = int(max(modes, default=0))
        c = np.zeros(2 * kmax + 1, dtype=complex)
        c[kmax] = const
        for m, a in sin:
            c[kmax + m] += a / 2j
            c[kmax - m] -= a / 2j
        for m, b in cos:
            c[kmax + m] += b / 2
            c[kmax - m] += b / 2
        return cls(c)

    @classmethod
    def from_samples(cls, values, kmax=None):
        """Interpolate samples on the uniform grid ``s_j = j/L``, ``L = 2**m``.

        The Nyquist mode is dropped, so the default truncation is ``L/2 - 1``.
        A smaller ``kmax`` truncates further.
        """
        v = np.asarray(values, dtype=float)
        L = v.size
        if v.ndim != 1 or not _is_pow2(L) or L < 2:
            raise ValueError(f"sample count must be a power of two >= 2, got {L}")
        K = L // 2 - 1
        if kmax is None:
            kmax = K
        if kmax > K:
            raise ValueError(f"kmax={kmax} exceeds resolvable order {K} for {L} samples")
        fk = np.fft.fft(v) / L
        c = np.empty(2 * kmax + 1, dtype=complex)
        c[kmax:] = fk[: kmax + 1]
        c[:kmax] = fk[L - kmax:]
        # enforce exact conjugate symmetry against FFT rounding
        c = 0.5 * (c + np.conj(c[::-1]))
        return cls(c)

    # -- basic queries ----------------------------------------------------

    @property
    def kmax(self):
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self):
        return np.arange(-self.kmax, self.kmax + 1)

    def coeff(self, k):
        if abs(k) > self.kmax:
            return 0j
        return self.coeffs[k + self.kmax]

    def average(self):
        return float(self.coeffs[self.kmax].real)

    def is_real(self, tol=1e-14):
        c = self.coeffs
        return bool(np.max(np.abs(c - np.conj(c[::-1])), initial=0.0) <= tol)

    # -- evaluation -------------------------------------------------------

    def eval(self, s):
        s = np.asarray(s, dtype=float)
        K = self.kmax
        out = np.full(s.shape, self.coeffs[K].real)
        if K == 0:
            return out if out.ndim else float(out)
        pos = self.coeffs[K + 1:]
        k = np.arange(1, K + 1)
        phase = np.exp(1j * TWO_PI * np.multiply.outer(s, k))
        out = out + 2.0 * (phase @ pos).real
        return out if out.ndim else float(out)

    __call__ = eval

    def on_grid(self, n, offset=0.0):
        """Values at ``s_j = offset + j/n`` for ``j = 0..n-1``.

        Exact for any ``n``: modes beyond the grid's Nyquist limit are folded.
        """
        c = self.coeffs
        k = self.modes
        if offset:
            c = c * np.exp(1j * TWO_PI * k * offset)
        buf = np.zeros(n, dtype=complex)
        np.add.at(buf, k % n, c)
        return (np.fft.ifft(buf) * n).real

    # -- calculus and transformations ------------------------------------

    def derivative(self):
        return FourierSeries(self.coeffs * (1j * TWO_PI * self.modes))

    def shift(self, omega):
        """The series of ``s -> f(s + omega)``."""
        return FourierSeries(self.coeffs * np.exp(1j * TWO_PI * self.modes * omega))

    def resized(self, kmax):
        """Truncate or zero-pad to the given order."""
        K = self.kmax
        if kmax == K:
            return self
        c = np.zeros(2 * kmax + 1, dtype=complex)
        m = min(K, kmax)
        c[kmax - m: kmax + m + 1] = self.coeffs[K - m: K + m + 1]
        return FourierSeries(c)

    def tail_energy(self):
        """Sum of ``|c_k|^2`` over ``|k| > kmax/2``."""
        k = np.abs(self.modes)
        return float(np.sum(np.abs(self.coeffs[k > self.kmax // 2]) ** 2))

    def decay_rate(self, floor=1e-15):
        """Slope estimate rho of ``log|c_k| ~ -2 pi rho k`` over significant modes.

        Coefficients of a function analytic on a strip of half-width rho decay
        like ``exp(-2 pi rho |k|)``; returns ``inf`` if nothing is above floor.
        """
        K = self.kmax
        a = np.abs(self.coeffs[K + 1:])
        k = np.arange(1, K + 1)
        keep = a > floor * max(1.0, float(np.max(np.abs(self.coeffs))))
        if keep.sum() < 2:
            return float("inf")
        slope = np.polyfit(k[keep], np.log(a[keep]), 1)[0]
        return float(-slope / TWO_PI)

    def sup_norm(self, n=None):
        if n is None:
            n = max(4 * self.kmax, 16)
        return float(np.max(np.abs(self.on_grid(n))))

    # -- arithmetic -------------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, FourierSeries):
            K = max(self.kmax, other.kmax)
            return FourierSeries(op(self.resized(K).coeffs, other.resized(K).coeffs))
        if np.isscalar(other) and np.isreal(other):
            c = self.coeffs.copy()
            K = self.kmax
            c[K] = op(c[K], other)
            return FourierSeries(c)
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return FourierSeries(-self.coeffs)

    def __mul__(self, a):
        if np.isscalar(a) and np.isreal(a):
            return FourierSeries(self.coeffs * a)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return f"FourierSeries(kmax={self.kmax}, mean={self.average():.6g})"

    # -- persistence ------------------------------------------------------

    def to_json(self):
        return {
            "kmax": int(self.kmax),
            "re": [float(x) for x in self.coeffs.real],
            "im": [float(x) for x in self.coeffs.imag],
        }

    @classmethod
    def from_json(cls, d):
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d["im"], dtype=float)
        if re.size != 2 * int(d["kmax"]) + 1 or im.size != re.size:
            raise ValueError("series JSON: coefficient count does not match kmax")
        return cls(re + 1j * im)


def divisors(omega, kmax):
    """``1 - exp(2 pi i k omega)`` for ``k = -kmax..kmax``."""
    k = np.arange(-kmax, kmax + 1)
    return 1.0 - np.exp(1j * TWO_PI * k * omega)


def cohomological_residual(u, v, omega, n=None):
    """Sup over a grid of ``|u(s) - u(s + omega) - v(s)|``."""
    if n is None:
        n = 4 * max(u.kmax, v.kmax, 4)
    r = u.on_grid(n) - u.on_grid(n, offset=omega) - v.on_grid(n)
    return float(np.max(np.abs(r)))


def solve_cohomological(v, omega, zero_avg_tol=1e-12):
    """Solve ``u(s) - u(s + omega) = v(s)`` for zero-average ``u``.

    Returns ``(u, residual)`` where ``residual`` is the sup-grid defect of the
    functional equation on ``4*kmax`` points.  Raises ``NonZeroAverage`` if
    ``|mean(v)| > zero_avg_tol`` and ``SmallDivisor`` if a retained divisor
    falls below ``DIVISOR_FLOOR``.
    """
    avg = v.average()
    if abs(avg) > zero_avg_tol:
        raise NonZeroAverage(f"|average(v)| = {abs(avg):.3e} exceeds {zero_avg_tol:.1e}")
    K = v.kmax
    d = divisors(omega, K)
    d[K] = 1.0
    mags = np.abs(d)
    small = np.flatnonzero(mags < DIVISOR_FLOOR)
    if small.size:
        j = small[np.argmin(mags[small])]
        raise SmallDivisor(int(j - K), float(mags[j]))
    c = v.coeffs / d
    c[K] = 0.0
    u = FourierSeries(c)
    return u, cohomological_residual(u, v, omega)
