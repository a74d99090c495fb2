"""Independent oracles shared by the test modules.

Each oracle deliberately avoids the library's production path for the
same quantity: high-precision series via mpmath for the radial
functions, a brute-force continuum mode integral for the bulk dyad, and
the plain textbook point-source dyad as a second cross-check.
"""

import math

import mpmath as mp
import numpy as np
from scipy.integrate import quad_vec

from casmie.green import (RadialVariant, SphericalPoint, WaveFamily,
                          _angular_factors, _radial_triplet, _wave_components,
                          legendre_pack)


def mp_sph_bessel(kind: str, l: int, z: complex, extra_dps: int = 0):
    """j_l/h1_l/h2_l via mpmath half-integer Bessel forms.

    The Hankel combinations cancel ~exp(2|Im z|) digits, so precision
    scales with the argument; pass extra_dps accordingly.
    """
    with mp.workdps(45 + extra_dps):
        zz = mp.mpc(z)
        pref = mp.sqrt(mp.pi / (2 * zz))
        j = pref * mp.besselj(l + mp.mpf(1) / 2, zz)
        if kind == "j":
            return complex(j)
        y = pref * mp.bessely(l + mp.mpf(1) / 2, zz)
        return complex(j + 1j * y) if kind == "h1" else complex(j - 1j * y)


def mp_dps_for(l: int, z: complex) -> int:
    return int(3 * abs(complex(z).imag)) + 2 * l


def textbook_bulk_dyad(ra: SphericalPoint, rb: SphericalPoint, k: complex,
                       mu: complex) -> np.ndarray:
    """mu (1 + grad grad / k^2) e^{iks}/(4 pi s) in Cartesian components."""
    a = np.array([math.sin(ra.theta) * math.cos(ra.phi),
                  math.sin(ra.theta) * math.sin(ra.phi),
                  math.cos(ra.theta)]) * ra.r
    b = np.array([math.sin(rb.theta) * math.cos(rb.phi),
                  math.sin(rb.theta) * math.sin(rb.phi),
                  math.cos(rb.theta)]) * rb.r
    d = a - b
    s = float(np.linalg.norm(d))
    u = d / s
    g = np.exp(1j * k * s) / (4.0 * math.pi * s)
    ks = k * s
    c1 = 1.0 + 1j / ks - 1.0 / ks ** 2
    c2 = -1.0 - 3j / ks + 3.0 / ks ** 2
    return mu * g * (c1 * np.eye(3) + c2 * np.outer(u, u))


def _grad_rad_times_ylm(point: SphericalPoint, pack, l: int, m: int,
                        radial_value: float, radial_deriv: float,
                        conjugate: bool) -> np.ndarray:
    """grad[f(r) Y_lm] in the spherical frame; optionally conjugate Y."""
    p, pi_, tau, eim = _angular_factors(pack, l, m, point.phi)
    if conjugate:
        pi_, eim = -pi_, eim.conjugate()
    out = np.zeros(3, dtype=complex)
    out[0] = radial_deriv * p * eim
    out[1] = (radial_value / point.r) * tau * eim
    out[2] = (radial_value / point.r) * (1j * pi_) * eim
    return out


def longitudinal_delta_partial_wave(ra: SphericalPoint, rb: SphericalPoint,
                                    l_max: int) -> np.ndarray:
    """Partial-wave form of delta_par(r, r') for r != r', l = 1..l_max.

    delta_par = grad_r grad_r' (1 / 4 pi |r - r'|) expanded through
    1/|r-r'| = sum_l (4 pi / (2l+1)) r_<^l / r_>^(l+1) sum_m Y Y'*;
    the l = 0 term has no gradient content.  Spherical frames at the two
    points, row index at ra.
    """
    lo, hi = (ra, rb) if ra.r <= rb.r else (rb, ra)
    swapped = ra.r > rb.r
    pack_lo = legendre_pack(l_max, lo.theta)
    pack_hi = legendre_pack(l_max, hi.theta)
    total = np.zeros((3, 3), dtype=complex)
    for l in range(1, l_max + 1):
        coeff = 1.0 / (2 * l + 1)
        f_lo = lo.r ** l
        fp_lo = l * lo.r ** (l - 1)
        f_hi = hi.r ** (-(l + 1))
        fp_hi = -(l + 1) * hi.r ** (-(l + 2))
        for m in range(-l, l + 1):
            ga = _grad_rad_times_ylm(lo, pack_lo, l, m, f_lo, fp_lo, False)
            gb = _grad_rad_times_ylm(hi, pack_hi, l, m, f_hi, fp_hi, True)
            total += coeff * np.outer(ga, gb)
    return total.T if swapped else total


def mode_integral_bulk_green(material, omega: complex, ra: SphericalPoint,
                             rb: SphericalPoint, l_max: int = 12,
                             kmax_factor: float = 40.0) -> np.ndarray:
    """Brute-force continuum-mode form of the bulk Green tensor.

    Adaptive quadrature of the real-k' integral of
    [M(k') x M*(k') + N(k') x N*(k')] / (k'^2 - k^2) per (l, m), plus the
    longitudinal-delta term, truncated consistently at the same l_max.
    Lossy media keep the pole at k off the real axis.
    """
    from casmie.materials import eval_mu, eval_wavenumber

    k = eval_wavenumber(material, omega)
    mu = eval_mu(material, omega)
    pack_a = legendre_pack(l_max, ra.theta)
    pack_b = legendre_pack(l_max, rb.theta)

    def integrand(kp: float) -> np.ndarray:
        reg_a = _radial_triplet(RadialVariant.REGULAR, l_max, complex(kp), ra.r)
        reg_b = _radial_triplet(RadialVariant.REGULAR, l_max, complex(kp), rb.r)
        acc = np.zeros((3, 3), dtype=complex)
        for l in range(1, l_max + 1):
            for m in range(-l, l + 1):
                for fam in (WaveFamily.M, WaveFamily.N):
                    va = _wave_components(fam, RadialVariant.REGULAR, l, m,
                                          complex(kp), ra, pack_a, reg_a)
                    vb = _wave_components(fam, RadialVariant.REGULAR, l, m,
                                          complex(kp), rb, pack_b, reg_b,
                                          bullet=True)
                    acc += np.outer(va, vb)
        flat = (acc / (kp * kp - k * k)).reshape(9)
        return np.concatenate([flat.real, flat.imag])

    kmax = kmax_factor * abs(k)
    flat, _err = quad_vec(integrand, 1e-9, kmax, epsabs=1e-12, epsrel=1e-6,
                          limit=300, points=[abs(k.real), abs(k)])
    # the truncated tail oscillates with the separation phase cos(k' dr);
    # averaging over endpoints spaced by half periods suppresses it
    dr = abs(ra.r - rb.r)
    sep = max(dr, 0.05 * (ra.r + rb.r))
    step = 0.5 * math.pi / sep
    partials = [flat]
    lo = kmax
    for _ in range(3):
        inc, _e = quad_vec(integrand, lo, lo + step, epsabs=1e-12,
                           epsrel=1e-6, limit=100)
        partials.append(partials[-1] + inc)
        lo += step
    flat = np.mean(partials, axis=0)
    dyad = (flat[:9] + 1j * flat[9:]).reshape(3, 3)
    dyad -= longitudinal_delta_partial_wave(ra, rb, l_max) / (k * k)
    return mu * dyad
