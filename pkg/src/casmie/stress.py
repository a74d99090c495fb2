"""Casimir radial stress T_RR on the surface of a layered sphere.

Everything is reduced against the outer radius R: frequencies enter as
y = omega R / c, temperature as tau = k_B T R / (hbar c), and the output
stress is measured in hbar c / R^4.  In these variables the stress is

    T_RR = (1/8 pi^2) Int_0^inf dy  y coth(y / 2 tau) Re Phi(y),

    Phi(y) = Sum_{l>=1} (2l+1) [r_l^TE(y) + r_l^TM(y)] Fhat_l(y),

with Fhat_l = R^2 F_l built from the outgoing exterior waves,

    Fhat_l(z) = l(l+1) h~_l^2(w) (R/r)^2 - z^2 h~_l^2(w)
                - (R/r)^2 [w h~_l'(w) + h~_l(w)]^2,

z = k2 R, w = k2 r, evaluated at r = R(1+delta) (delta = 0 by default).

The production path rotates the frequency integral onto the imaginary
axis.  y Phi(y) continues to an upper-half-plane response function that
is real on the imaginary axis, so the coth poles turn the integral into
a Matsubara sum,

    T_RR = (tau / 4 pi) Sum'_{n>=0} s(y_n),   y_n = 2 pi n tau,
    s(y) = -y Re Phi(i y),

with the n = 0 term at half weight (T = 0 replaces the sum by
(1/8 pi^2) Int dy s(y)).  The real-axis form survives as an independent
diagnostic integrator; the two paths agreeing is the central correctness
check of the module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import ConvergenceError, DomainError, QuadratureError, \
    RadialOverflowError
from .materials import QuadratureSpec, eval_wavenumber
from .mie import Polarization, SphereGeometry, layered_reflection, \
    reflection_blocks_both
from .specfun import hankel_kind_for, radial_family_scaled

DEFAULT_L_CAP = 512
DEFAULT_N_CAP = 200_000
_PREFACTOR_MATSUBARA = 1.0 / (4.0 * math.pi)    # times tau
_PREFACTOR_INTEGRAL = 1.0 / (8.0 * math.pi ** 2)
_Y_EPS = 1e-8   # n = 0 limit is evaluated at y = _Y_EPS * max(1, 2 pi tau)


class StressMode(Enum):
    MATSUBARA = "matsubara"
    IMAG_AXIS_T0 = "zero_T"
    REAL_AXIS_DIAGNOSTIC = "real_axis_diag"


@dataclass(frozen=True)
class StressKernelTerm:
    """One partial-wave stress summand at one frequency."""

    l: int
    F_l: complex
    r_te: complex
    r_tm: complex
    weight: int
    summand: complex    # weight * (r_te + r_tm) * F_l  (units 1/R^2)


@dataclass(frozen=True)
class StressResult:
    """Converged (or partial) stress value with truncation diagnostics."""

    t_rr: float                      # hbar c / R^4
    temperature: float               # k_B T in hbar c / R
    l_max_used: int
    n_max_used: int
    tail_estimate: float             # same units as t_rr
    mode: StressMode
    converged: bool = True
    tolerance: float = 0.0
    imag_residue: float = 0.0
    per_n: tuple = field(default_factory=tuple)   # (n, y, l_used, term) rows
    cross_check: float | None = None

    def tail_ok(self) -> bool:
        scale = abs(self.t_rr)
        if scale == 0.0:
            return self.tail_estimate == 0.0
        return self.tail_estimate <= self.tolerance * scale


@dataclass
class _PhiSum:
    value: complex
    l_used: int
    tail: float


def _fhat_block(geom: SphereGeometry, omega: complex, l_max: int,
                standoff: float):
    """(Fhat_n, 2*log_scale) arrays for l = 0..l_max (scaled by exp)."""
    R = geom.radius
    r_eval = R * (1.0 + standoff)
    k2 = eval_wavenumber(geom.exterior, omega)
    z = k2 * R
    w = k2 * r_eval
    v, _, rd, s = radial_family_scaled(hankel_kind_for(k2), l_max, w)
    ells = np.arange(l_max + 1, dtype=float)
    ratio2 = (R / r_eval) ** 2
    fhat = (ratio2 * (ells * (ells + 1.0) * v * v - rd * rd)
            - (z * z) * (v * v))
    return fhat, 2.0 * s


def _phi_hat(geom: SphereGeometry, omega: complex, tol: float,
             l_cap: int, standoff: float, l_start: int = 8) -> _PhiSum:
    """Adaptive l-sum of (2l+1)(r_TE + r_TM) Fhat_l at one frequency.

    Grows l_max geometrically until three consecutive partial-wave blocks
    each fall below tol/10 of the accumulated sum; the reflection scale
    and the kernel scale are combined in log space, so individual factors
    may exceed the double range as long as their product does not.
    """
    l_max = max(4, l_start)
    while True:
        (te_n, te_log), (tm_n, tm_log) = reflection_blocks_both(
            geom, l_max, omega, l_cap=l_cap)
        fhat, flog = _fhat_block(geom, omega, l_max, standoff)
        blocks = np.zeros(l_max + 1, dtype=complex)
        ells = np.arange(l_max + 1, dtype=float)
        e_te = _exp_checked(te_log + flog, omega)
        e_tm = _exp_checked(tm_log + flog, omega)
        blocks = (2.0 * ells + 1.0) * (te_n * e_te + tm_n * e_tm) * fhat
        blocks[0] = 0.0

        cum = np.cumsum(blocks)
        total = cum[-1]
        floor = max(abs(total), 1e-300)
        thr = (tol / 10.0) * floor
        small = np.abs(blocks) <= thr
        small[0] = False
        run = 0
        found = None
        for l in range(1, l_max + 1):
            run = run + 1 if small[l] else 0
            if run >= 3 and l >= 3:
                found = l
                break
        if found is not None:
            tail = float(np.sum(np.abs(blocks[found + 1:])))
            q = 0.0
            if found >= 2 and abs(blocks[found - 1]) > 0:
                q = min(abs(blocks[found]) / abs(blocks[found - 1]), 0.75)
            tail += abs(blocks[found]) * q / (1.0 - q) if q > 0 else 0.0
            return _PhiSum(complex(cum[found]), found, tail)
        if l_max >= l_cap:
            raise ConvergenceError(
                f"l-sum not converged by l_cap={l_cap} at omega={omega} "
                f"(last block {abs(blocks[-1]):.3e} vs threshold {thr:.3e})")
        l_max = min(2 * l_max, l_cap)


def _exp_checked(logs: np.ndarray, omega: complex) -> np.ndarray:
    if np.any(logs > 700.0):
        raise RadialOverflowError(
            f"stress summand scale exceeds double range at omega={omega}")
    return np.exp(np.maximum(logs, -745.0))


def stress_kernel(geom: SphereGeometry, l: int, omega: complex,
                  standoff: float = 0.0) -> StressKernelTerm:
    """Partial-wave stress term: F_l (Eq.-level kernel) with its r_l pair."""
    if l < 1:
        raise DomainError("stress kernel needs l >= 1")
    omega = complex(omega)
    fhat, flog = _fhat_block(geom, omega, l, standoff)
    r_te = layered_reflection(geom, l, Polarization.TE, omega).value
    r_tm = layered_reflection(geom, l, Polarization.TM, omega).value
    R2 = geom.radius ** 2
    scale = flog[l]
    if scale > 700.0:
        raise RadialOverflowError("F_l exceeds double range at this point")
    F_l = complex(fhat[l]) * math.exp(max(scale, -745.0)) / R2
    summand = (2 * l + 1) * (r_te + r_tm) * F_l
    return StressKernelTerm(l, F_l, r_te, r_tm, 2 * l + 1, summand)


def _summand_imag_axis(geom: SphereGeometry, y: float, tol: float,
                       l_cap: int, standoff: float,
                       l_start: int = 8):
    """s(y) = -y Re Phi(iy) plus (imag residue, l_used, phi tail)."""
    R = geom.radius
    omega = 1j * (y / R)
    phi = _phi_hat(geom, omega, tol, l_cap, standoff, l_start=l_start)
    s = -y * phi.value.real
    return s, abs(y * phi.value.imag), phi.l_used, y * phi.tail


def stress_finite_T(geom: SphereGeometry, temperature: float, tol: float,
                    l_cap: int = DEFAULT_L_CAP, n_cap: int = DEFAULT_N_CAP,
                    standoff: float = 0.0,
                    collect_per_n: bool = True) -> StressResult:
    """Matsubara-summed stress at reduced temperature tau > 0.

    Terms are accumulated in fixed order with compensated summation; the
    n-tail is bounded by a power-law extrapolation of the last terms and
    must fall below tol * |T_RR|.  Raises ConvergenceError (carrying the
    partial result) if n_cap or l_cap is hit first.
    """
    if temperature <= 0.0:
        raise DomainError("finite-T stress needs temperature > 0")
    if tol <= 0.0:
        raise DomainError("tolerance must be positive")
    tau = float(temperature)

    terms: list[float] = []
    rows = []
    imag_residue = 0.0
    phi_tail = 0.0
    l_used_max = 0
    l_hint = 8

    y0 = _Y_EPS * max(1.0, 2.0 * math.pi * tau)
    s0, im0, l0, ptail0 = _summand_imag_axis(geom, y0, tol, l_cap, standoff)
    terms.append(0.5 * s0)
    rows.append((0, 0.0, l0, 0.5 * s0))
    imag_residue += 0.5 * im0
    phi_tail += 0.5 * ptail0
    l_used_max = l0

    n = 0
    tail = math.inf
    converged = False
    while n < n_cap:
        n += 1
        y = 2.0 * math.pi * n * tau
        s, im, l_used, ptail = _summand_imag_axis(
            geom, y, tol, l_cap, standoff, l_start=l_hint)
        l_hint = max(8, l_used)
        terms.append(s)
        if collect_per_n:
            rows.append((n, y, l_used, s))
        imag_residue += im
        phi_tail += ptail
        l_used_max = max(l_used_max, l_used)

        if n < 4:
            continue
        total = math.fsum(terms)
        scale = abs(total)
        if scale == 0.0:
            if all(t == 0.0 for t in terms[-3:]):
                tail = 0.0
                converged = True
                break
            continue
        tail = _n_tail_estimate(terms, n)
        if tail <= 0.5 * tol * scale and abs(terms[-1]) <= 0.5 * tol * scale:
            converged = True
            break

    total = math.fsum(terms)
    pref = _PREFACTOR_MATSUBARA * tau
    result = StressResult(
        t_rr=pref * total,
        temperature=tau,
        l_max_used=l_used_max,
        n_max_used=n,
        tail_estimate=pref * (0.0 if tail is math.inf else tail)
        + pref * phi_tail,
        mode=StressMode.MATSUBARA,
        converged=converged,
        tolerance=tol,
        imag_residue=pref * imag_residue,
        per_n=tuple(rows))
    if not converged:
        raise ConvergenceError(
            f"Matsubara sum not converged after n={n} terms "
            f"(tail {tail:.3e} vs target {tol * abs(total):.3e})",
            partial=result)
    return result


def _n_tail_estimate(terms: list[float], n: int) -> float:
    """Bound the remaining n-sum from a power-law fit of the last terms."""
    a = abs(terms[-1])
    if a == 0.0:
        return 0.0
    m = max(2, n // 2)
    b = abs(terms[m])
    if b <= a or a == b:
        return a * n  # not yet decaying; crude pessimistic bound
    p = math.log(b / a) / math.log(n / m)
    if p <= 1.05:
        return a * n * 20.0
    return a * n / (p - 1.0)


def stress_zero_T(geom: SphereGeometry, tol: float,
                  l_cap: int = DEFAULT_L_CAP, standoff: float = 0.0,
                  y_start: float = 32.0) -> StressResult:
    """Zero-temperature stress via quadrature along the imaginary axis."""
    if tol <= 0.0:
        raise DomainError("tolerance must be positive")
    stats = {"l": 0, "evals": 0}

    def s_of_y(y: float) -> float:
        if y == 0.0:
            y = _Y_EPS
        val, _, l_used, _ = _summand_imag_axis(geom, y, tol, l_cap, standoff)
        stats["l"] = max(stats["l"], l_used)
        stats["evals"] += 1
        return val

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        total, err = quad(s_of_y, 0.0, y_start, limit=200,
                          epsabs=0.0, epsrel=max(1e-10, 0.1 * tol))
        upper = y_start
        tail = math.inf
        for _ in range(24):
            inc, inc_err = quad(s_of_y, upper, 2.0 * upper, limit=100,
                                epsabs=0.0, epsrel=max(1e-9, 0.1 * tol))
            total += inc
            err += abs(inc_err)
            upper *= 2.0
            # geometric extrapolation of the remaining octaves
            tail = abs(inc)
            scale = max(abs(total), 1e-300)
            if tail + err <= 0.5 * tol * scale:
                break

    pref = _PREFACTOR_INTEGRAL
    result = StressResult(
        t_rr=pref * total,
        temperature=0.0,
        l_max_used=stats["l"],
        n_max_used=0,
        tail_estimate=pref * (tail + err),
        mode=StressMode.IMAG_AXIS_T0,
        converged=tail + err <= tol * max(abs(total), 1e-300),
        tolerance=tol)
    if not result.converged:
        raise ConvergenceError(
            f"zero-T quadrature tail {tail:.3e} did not reach tolerance "
            f"(total {total:.6e})", partial=result)
    return result


def stress_real_axis_diagnostic(geom: SphereGeometry, temperature: float,
                                omega_grid: QuadratureSpec,
                                l_cap: int = DEFAULT_L_CAP,
                                standoff: float = 0.0) -> StressResult:
    """Direct real-axis evaluation of the stress integral (oracle path).

    Integrates y coth(y/2tau) Re Phi(y) with adaptive quadrature over the
    resonance region [y_min, y_break], then sums half-period panels of
    the oscillatory tail with iterated averaging (Euler-style)
    acceleration up to omega_grid.omega_max.  Purely a cross-check for
    the Matsubara path; materials must be strictly lossy.
    """
    if temperature <= 0.0:
        raise DomainError("diagnostic integral needs temperature > 0")
    tau = float(temperature)
    R = geom.radius
    y_min = 1e-6
    stats = {"l": 0}

    def integrand(y: float) -> float:
        phi = _phi_hat(geom, complex(y / R), omega_grid.rel_tol / 10.0,
                       l_cap, standoff)
        stats["l"] = max(stats["l"], phi.l_used)
        u = y / tau
        coth = 1.0 + 2.0 / math.expm1(u) if u < 40.0 else 1.0
        return y * coth * phi.value.real

    y_break = min(12.0 + 4.0 * tau, omega_grid.omega_max)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        head, head_err = quad(integrand, y_min, y_break,
                              limit=omega_grid.limit, epsabs=0.0,
                              epsrel=max(1e-9, 0.02 * omega_grid.rel_tol))
        # oscillatory tail: adaptive quadrature over octave blocks until a
        # whole block stops mattering (the integrand decays under phase
        # mixing, so successive octaves shrink fast)
        pieces = [head]
        errs = [abs(head_err)]
        lo = y_break
        truncation = math.inf
        while lo < omega_grid.omega_max:
            hi = min(2.0 * lo, omega_grid.omega_max)
            scale = max(abs(math.fsum(pieces)), 1e-300)
            v, e = quad(integrand, lo, hi, limit=omega_grid.limit,
                        epsabs=0.05 * omega_grid.rel_tol * scale,
                        epsrel=1e-7)
            pieces.append(v)
            errs.append(abs(e))
            lo = hi
            truncation = abs(v)
            if truncation <= 0.1 * omega_grid.rel_tol * scale:
                break

    total = math.fsum(pieces)
    scale = max(abs(total), 1e-300)
    est = math.fsum(errs) + (0.0 if truncation is math.inf else truncation)
    if est > omega_grid.rel_tol * scale:
        raise QuadratureError(
            f"real-axis quadrature error {est:.3e} exceeds "
            f"{omega_grid.rel_tol:.1e} x |T| ({scale:.3e}); refine the grid "
            "(larger omega_max / limit)",
            estimate=est)
    pref = _PREFACTOR_INTEGRAL
    return StressResult(
        t_rr=pref * total,
        temperature=tau,
        l_max_used=stats["l"],
        n_max_used=0,
        tail_estimate=pref * est,
        mode=StressMode.REAL_AXIS_DIAGNOSTIC,
        converged=True,
        tolerance=omega_grid.rel_tol)


def reference_two_path_check(geom: SphereGeometry, temperature: float,
                             tol: float = 1e-3) -> tuple[float, float]:
    """(Matsubara, real-axis) stress pair for two-path validation."""
    mats = stress_finite_T(geom, temperature, tol / 3.0)
    diag = stress_real_axis_diagnostic(
        geom, temperature, QuadratureSpec(omega_max=400.0, rel_tol=tol / 3.0,
                                          limit=400))
    return mats.t_rr, diag.t_rr
