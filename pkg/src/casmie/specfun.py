"""Spherical Bessel/Hankel functions of complex argument.

Provides j_l, h_l^(1), h_l^(2) together with their first derivatives and
the Riccati derivative d/dz [z S_l(z)] for arbitrary complex z, at any
order up to a configurable cap.  Two evaluation surfaces exist:

* plain values (``sph_bessel``, ``tilde_hankel``) for arguments where the
  result fits in double precision, and
* scaled values (``sph_bessel_scaled`` and the ``*_family_scaled`` array
  routines) that factor out a real log-magnitude, so products such as
  j_l * h_l stay computable where the individual factors over/underflow.

Recurrence directions follow stability: downward (Miller) recurrence with
closed-form normalization for j_l, upward recurrence from the l=0,1 closed
forms for the Hankel functions.  Derivatives always come from the identity
S_l'(z) = S_{l-1}(z) - ((l+1)/z) S_l(z), never from differencing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, OrderCapError, RadialOverflowError

DEFAULT_L_CAP = 512

# renormalization threshold for recurrence passes
_BIG = 1e250
_LOG_BIG = math.log(_BIG)
# largest log-magnitude exp() can produce
_LOG_HUGE = 709.0

# extra orders above max(l, |z|) for the downward Miller start
_MILLER_BUFFER = 30


class RadialKind(Enum):
    """Which spherical radial function family."""

    BESSEL_J = "j"
    HANKEL_OUT = "h1"
    HANKEL_IN = "h2"


@dataclass(frozen=True)
class RadialEval:
    """S_l(z), S_l'(z) and d/dz [z S_l(z)] at one point."""

    value: complex
    derivative: complex
    riccati_derivative: complex


@dataclass(frozen=True)
class ScaledRadialEval:
    """Radial evaluation with the magnitude factored as exp(log_scale).

    The true quantities are ``value_n * exp(log_scale)`` and likewise for
    the two derivatives; ``log_scale`` is real (phases stay in the
    normalized values).
    """

    value_n: complex
    derivative_n: complex
    riccati_derivative_n: complex
    log_scale: float

    def unscaled(self) -> RadialEval:
        mags = [abs(self.value_n), abs(self.derivative_n),
                abs(self.riccati_derivative_n)]
        peak = max(m for m in mags if m > 0.0) if any(mags) else 0.0
        if peak > 0.0 and self.log_scale + math.log(peak) > _LOG_HUGE:
            raise RadialOverflowError(
                "radial function magnitude exceeds double range "
                f"(log scale {self.log_scale:.1f}); use the scaled API")
        s = math.exp(self.log_scale) if self.log_scale > -745.0 else 0.0
        return RadialEval(self.value_n * s, self.derivative_n * s,
                          self.riccati_derivative_n * s)


def _check_order(l: int, l_cap: int) -> None:
    if l < 0:
        raise DomainError(f"order l must be nonnegative, got {l}")
    if l > l_cap:
        raise OrderCapError(f"order l={l} exceeds cap {l_cap}")


def _scaled_sin_cos(z: complex) -> tuple[complex, complex, float]:
    """sin(z)*exp(-t), cos(z)*exp(-t) with t = |Im z| (overflow-free)."""
    t = abs(z.imag)
    ep = cmath.exp(1j * z - t)   # Re exponent <= 0
    em = cmath.exp(-1j * z - t)
    return (ep - em) / 2j, (ep + em) / 2.0, t


def _jn_values_scaled(l_max: int, z: complex) -> tuple[np.ndarray, np.ndarray]:
    """j_l(z) for l = 0..l_max as (normalized values, real log scales)."""
    if z == 0:
        vals = np.zeros(l_max + 1, dtype=complex)
        vals[0] = 1.0
        return vals, np.zeros(l_max + 1)

    absz = abs(z)
    # the downward pass must start above the Airy transition zone, where the
    # y-type contamination still attenuates per step; inside the oscillatory
    # region it would merely stay frozen at its seeded size
    start = int(max(l_max, absz + 4.0 * absz ** (1.0 / 3.0))) + _MILLER_BUFFER
    f_hi, f = 0.0 + 0.0j, 1e-280 + 0.0j
    shift = 0.0
    raw = np.empty(l_max + 2, dtype=complex)
    shifts = np.empty(l_max + 2)
    inv_z = 1.0 / z
    for l in range(start, 0, -1):
        f_lo = (2 * l + 1) * inv_z * f - f_hi
        f_hi, f = f, f_lo
        a = abs(f)
        if a > _BIG:
            f /= a
            f_hi /= a
            shift += math.log(a)
        if l - 1 <= l_max + 1:
            raw[l - 1] = f
            shifts[l - 1] = shift
    # older (higher-l) entries were recorded before later renormalizations;
    # their true scale is exp(shift - shifts[l]) smaller than the final one.
    # Keep per-entry magnitudes in log space: the raw pass spans far more
    # e-folds than one double can hold.
    raw = raw[: l_max + 1]
    mags = np.abs(raw)
    units = np.where(mags > 0.0, raw / np.where(mags > 0.0, mags, 1.0), 0.0)
    logs_raw = (shifts[: l_max + 1] - shift
                + np.where(mags > 0.0, np.log(np.where(mags > 0.0, mags, 1.0)),
                           -math.inf))

    sin_s, _cos_s, t = _scaled_sin_cos(z)
    j0_n, j0_log = sin_s * inv_z, t
    j1_n, j1_log = sin_s * inv_z * inv_z - _cos_s * inv_z, t
    # normalize against whichever seed is farther from a zero of j_0/j_1
    if logs_raw[0] >= logs_raw[1] and abs(j0_n) > 0.0:
        pick, ref_n, ref_log = 0, j0_n, j0_log
    else:
        pick, ref_n, ref_log = 1, j1_n, j1_log
    phase = (ref_n / abs(ref_n)) / units[pick]
    # group the raw logs first: they are individually huge but their
    # differences are modest, and the difference is what carries precision
    logs = (logs_raw - logs_raw[pick]) + (ref_log + math.log(abs(ref_n)))
    return units * phase, logs


def _hn_values_scaled(kind: RadialKind, l_max: int,
                      z: complex) -> tuple[np.ndarray, np.ndarray]:
    """h_l^(1) or h_l^(2) for l = 0..l_max, scaled like _jn_values_scaled."""
    if z == 0:
        raise DomainError("Hankel functions are singular at z = 0")
    sgn = 1.0 if kind is RadialKind.HANKEL_OUT else -1.0
    # factor exp(i*sgn*z) = exp(i*sgn*Re z) * exp(-sgn*Im z) analytically
    phase = cmath.exp(1j * sgn * z.real)
    base_log = -sgn * z.imag
    inv_z = 1.0 / z
    h0 = -1j * sgn * phase * inv_z
    h1 = -phase * (z + 1j * sgn) * inv_z * inv_z

    vals = np.empty(l_max + 1, dtype=complex)
    logs = np.empty(l_max + 1)
    vals[0], logs[0] = h0, base_log
    if l_max >= 1:
        vals[1], logs[1] = h1, base_log
    a, b = h0, h1
    shift = base_log
    for l in range(1, l_max):
        c = (2 * l + 1) * inv_z * b - a
        a, b = b, c
        m = abs(b)
        if m > _BIG:
            a /= m
            b /= m
            shift += math.log(m)
        vals[l + 1], logs[l + 1] = b, shift
    return _renormalize(vals, logs)


def _renormalize(vals: np.ndarray, logs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Move each entry's magnitude into its log scale (unit-ish values)."""
    mags = np.abs(vals)
    nz = mags > 0.0
    out_vals = np.where(nz, vals / np.where(nz, mags, 1.0), 0.0)
    out_logs = np.where(nz, logs + np.log(np.where(nz, mags, 1.0)), -math.inf)
    return out_vals, out_logs


def _hankel_values_scaled(kind: RadialKind, l_max: int,
                          z: complex) -> tuple[np.ndarray, np.ndarray]:
    """Robust scaled Hankel values for l = 0..l_max.

    Upward recurrence is accurate only for the exponentially subdominant
    Hankel kind (h^(1) for Im z > 0, h^(2) for Im z < 0): for the dominant
    one, roundoff excites the subdominant solution with relative weight
    ~eps * exp(2|Im z|), which surfaces once l passes the turning point.
    The dominant kind is therefore assembled as 2 j_l - h_subdominant.
    """
    if z.imag == 0.0:
        return _hn_values_scaled(kind, l_max, z)
    sub = RadialKind.HANKEL_OUT if z.imag > 0.0 else RadialKind.HANKEL_IN
    if kind is sub:
        return _hn_values_scaled(kind, l_max, z)
    vj, lj = _jn_values_scaled(l_max, z)
    vs, ls = _hn_values_scaled(sub, l_max, z)
    m = np.maximum(lj + math.log(2.0), ls)
    vals = (2.0 * vj * np.exp(np.clip(lj - m, -745.0, 0.0))
            - vs * np.exp(np.clip(ls - m, -745.0, 0.0)))
    return _renormalize(vals, m)


def radial_family_scaled(kind: RadialKind, l_max: int, z: complex,
                         l_cap: int = DEFAULT_L_CAP):
    """Values, derivatives and Riccati derivatives for l = 0..l_max.

    Returns four arrays ``(v, d, rd, log_scale)`` with the true quantities
    ``v[l]*exp(log_scale[l])`` etc.  Derivatives use
    S_l' = S_{l-1} - ((l+1)/z) S_l and rd_l = S_l + z S_l'.
    """
    _check_order(l_max, l_cap)
    z = complex(z)
    if kind is RadialKind.BESSEL_J:
        if z == 0:
            v = np.zeros(l_max + 1, dtype=complex)
            d = np.zeros(l_max + 1, dtype=complex)
            rd = np.zeros(l_max + 1, dtype=complex)
            v[0] = 1.0
            rd[0] = 1.0
            if l_max >= 1:
                d[1] = 1.0 / 3.0
            logs = np.zeros(l_max + 1)
            return v, d, rd, logs
        vals, logs = _jn_values_scaled(l_max + 1, z)
    else:
        vals, logs = _hankel_values_scaled(kind, l_max + 1, z)

    v = vals[: l_max + 1]
    lv = logs[: l_max + 1]
    d = np.empty(l_max + 1, dtype=complex)
    # S_0' = -S_1 holds for every spherical Bessel kind
    d[0] = -vals[1] * _exp_clip(logs[1] - lv[0])
    if l_max >= 1:
        ells = np.arange(1, l_max + 1)
        d[1:] = (vals[:l_max] * np.exp(
            np.clip(logs[:l_max] - lv[1:], -745.0, 709.0))
            - (ells + 1) / z * v[1:])
    rd = v + z * d
    return v, d, rd, lv


def _exp_clip(x: float) -> float:
    if x == -math.inf:
        return 0.0
    return math.exp(min(max(x, -745.0), 709.0))


def sph_bessel_scaled(kind: RadialKind, l: int, z: complex,
                      l_cap: int = DEFAULT_L_CAP) -> ScaledRadialEval:
    """Scaled evaluation of one (kind, l) pair at complex z."""
    z = complex(z)
    v, d, _, logs = radial_family_scaled(kind, l, z, l_cap=l_cap)
    value, deriv = complex(v[l]), complex(d[l])
    # recompute the Riccati derivative from the scalar pair so the
    # identity rd = S + z S' holds exactly at this surface
    return ScaledRadialEval(value, deriv, value + z * deriv, float(logs[l]))


def sph_bessel(kind: RadialKind, l: int, z: complex,
               l_cap: int = DEFAULT_L_CAP) -> RadialEval:
    """j_l, h_l^(1) or h_l^(2) with derivative and Riccati derivative.

    Raises ``DomainError`` for z = 0 with a Hankel kind and
    ``RadialOverflowError`` when the magnitude leaves the double range.
    """
    z = complex(z)
    ev = sph_bessel_scaled(kind, l, z, l_cap=l_cap).unscaled()
    return RadialEval(ev.value, ev.derivative,
                      ev.value + z * ev.derivative)


def hankel_kind_for(k: complex) -> RadialKind:
    """Outgoing/incoming tilde-Hankel dispatch for wavenumber k.

    Im k > 0 selects h^(1), Im k < 0 selects h^(2); on the real axis the
    omega -> omega + i0 rule selects h^(1) for Re k > 0.
    """
    if k == 0:
        raise DomainError("tilde Hankel dispatch undefined for k = 0")
    if k.imag > 0.0:
        return RadialKind.HANKEL_OUT
    if k.imag < 0.0:
        return RadialKind.HANKEL_IN
    return RadialKind.HANKEL_OUT if k.real > 0.0 else RadialKind.HANKEL_IN


def tilde_hankel(l: int, k: complex, r: float,
                 l_cap: int = DEFAULT_L_CAP) -> RadialEval:
    """h~_l(k r): the Hankel branch that decays for |r| -> infinity."""
    if r <= 0.0:
        raise DomainError(f"radius must be positive, got {r}")
    k = complex(k)
    return sph_bessel(hankel_kind_for(k), l, k * r, l_cap=l_cap)


def wronskian_residual(l: int, z: complex,
                       l_cap: int = DEFAULT_L_CAP) -> float:
    """|j_l h_l^(1)' - j_l' h_l^(1) - i/z^2|, a self-test of accuracy.

    For Im z < 0 the identity is evaluated through the exact antisymmetry
    W[j, h^(1)] = -W[j, h^(2)]: pairing j with the exponentially
    subdominant Hankel keeps the products O(1/z^2), where the direct form
    would cancel exp(2|Im z|) leading digits.
    """
    if z == 0:
        raise DomainError("Wronskian residual undefined at z = 0")
    z = complex(z)
    j = sph_bessel_scaled(RadialKind.BESSEL_J, l, z, l_cap=l_cap)
    if z.imag < 0.0:
        h = sph_bessel_scaled(RadialKind.HANKEL_IN, l, z, l_cap=l_cap)
        sign = -1.0
    else:
        h = sph_bessel_scaled(RadialKind.HANKEL_OUT, l, z, l_cap=l_cap)
        sign = 1.0
    scale = _exp_clip(j.log_scale + h.log_scale)
    w = (j.value_n * h.derivative_n - j.derivative_n * h.value_n) * scale
    return abs(sign * w - 1j / (z * z))
