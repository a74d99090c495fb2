"""Vector spherical wave functions and dyadic Green tensors.

The transverse waves are built from Debye potentials of the scalar modes
sqrt(2/pi) k j_l(kr) Y_lm:

    M_lm = -sqrt(2/(pi l(l+1))) k S_l(kr) [r x grad Y_lm]
    N_lm = (1/k) curl M_lm
    L_lm = (1/k) grad of the scalar mode

with S_l = j_l for the regular variant and the outgoing/incoming Hankel
for the tilde variant (selected by the sign of Im k).  Components are
returned in the local spherical frame (r-hat, theta-hat, phi-hat).

Dyadic surfaces: the bulk Green tensor follows the residue-evaluated
partial-wave form (regular wave at the smaller radius, tilde wave at the
larger, 'bullet' conjugation of the angular factors only), and the
exterior scattering Green tensor weights tilde-tilde outer products by
the sphere's generalized reflection coefficients.  The explicit m-sums
here are diagnostic surfaces; the stress pipeline uses the closed-form
m-summed identities instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, TailError
from .materials import MaterialModel, eval_mu, eval_wavenumber
from .mie import Polarization, SphereGeometry, reflection_blocks_both
from .specfun import RadialKind, hankel_kind_for, radial_family_scaled

_SIN_POLE = 1e-12


class WaveFamily(Enum):
    L = "L"
    M = "M"
    N = "N"


class RadialVariant(Enum):
    REGULAR = "regular"   # j_l
    TILDE = "tilde"       # outgoing/incoming Hankel by sign of Im k


@dataclass(frozen=True)
class SphericalPoint:
    """Point in spherical coordinates (r > 0, theta in [0, pi], phi in [0, 2pi))."""

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not (self.r > 0.0 and math.isfinite(self.r)):
            raise DomainError(f"radius must be positive, got {self.r}")
        if not (0.0 <= self.theta <= math.pi):
            raise DomainError(f"theta must be in [0, pi], got {self.theta}")
        if not (0.0 <= self.phi < 2.0 * math.pi):
            raise DomainError(f"phi must be in [0, 2pi), got {self.phi}")


@dataclass(frozen=True)
class VectorWave:
    """Descriptor of one vector wave function."""

    family: WaveFamily
    variant: RadialVariant
    l: int
    m: int
    k: complex

    def __post_init__(self):
        if self.family in (WaveFamily.M, WaveFamily.N) and self.l < 1:
            raise DomainError("M and N waves require l >= 1")
        if self.l < 0 or abs(self.m) > self.l:
            raise DomainError(f"invalid (l, m) = ({self.l}, {self.m})")
        if self.k == 0:
            raise DomainError("vector waves need k != 0")


@dataclass(frozen=True)
class DyadicValue:
    """3x3 complex dyad in the spherical frames of the two points."""

    matrix: np.ndarray
    l_max_used: int
    tail_estimate: float


# ---------------------------------------------------------------------------
# Angular building blocks
# ---------------------------------------------------------------------------


def legendre_pack(l_max: int, theta: float):
    """Normalized associated Legendre data at cos(theta), all 0<=m<=l<=l_max.

    Returns (P, PI, TAU) with
        P[l, m]   = Pbar_lm(cos theta)             (Y_lm = P e^{i m phi})
        PI[l, m]  = m Pbar_lm / sin(theta)
        TAU[l, m] = d Pbar_lm / d theta
    Condon-Shortley phase included.  PI and TAU are built on sin^(m-1)
    factors, so the theta -> 0, pi limits are exact (only m = 1 survives).
    """
    x = math.cos(theta)
    s = math.sin(theta)
    n = l_max + 1
    amm = np.zeros((n, n))       # A[l, m] = Pbar_lm / sin^m
    amm[0, 0] = math.sqrt(1.0 / (4.0 * math.pi))
    for m in range(1, n):
        amm[m, m] = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * amm[m - 1, m - 1]
    for m in range(0, n):
        if m + 1 <= l_max:
            amm[m + 1, m] = math.sqrt(2.0 * m + 3.0) * x * amm[m, m]
        for l in range(m + 2, n):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((2.0 * l + 1.0) * (l - 1.0 + m) * (l - 1.0 - m))
                          / ((2.0 * l - 3.0) * (l * l - m * m)))
            amm[l, m] = a * x * amm[l - 1, m] - b * amm[l - 2, m]

    ells = np.arange(n, dtype=float)[:, None]
    ms = np.arange(n, dtype=float)[None, :]
    pows = np.tril(np.power(s, np.minimum(ms, ells)))
    P = amm * pows

    powm1 = np.tril(np.power(s, np.maximum(np.minimum(ms, ells) - 1.0, 0.0)))
    PI = ms * amm * powm1
    PI[:, 0] = 0.0

    TAU = np.zeros((n, n))
    c = np.zeros((n, n))
    for m in range(0, n):
        for l in range(max(m, 1), n):
            c[l, m] = math.sqrt((2.0 * l + 1.0) * (l * l - m * m) / (2.0 * l - 1.0))
    shifted = np.zeros((n, n))
    shifted[1:, :] = amm[:-1, :]
    bracket = ells * x * amm - c * shifted
    TAU[:, 1:] = (bracket * powm1)[:, 1:]
    if abs(s) > _SIN_POLE:
        TAU[:, 0] = bracket[:, 0] * pows[:, 0] / s
    # else: the m = 0 theta-derivative vanishes at the poles
    return P, PI, TAU


def _angular_factors(pack, l: int, m: int, phi: float):
    """(Pbar, pi, tau, e^{i m phi}) for any |m| <= l from an m>=0 pack."""
    P, PI, TAU = pack
    am = abs(m)
    p, pi_, tau = P[l, am], PI[l, am], TAU[l, am]
    if m < 0:
        sgn = -1.0 if am % 2 else 1.0
        p, pi_, tau = sgn * p, -sgn * pi_, sgn * tau
    return p, pi_, tau, complex(math.cos(m * phi), math.sin(m * phi))


def sph_harm(l: int, m: int, theta: float, phi: float) -> complex:
    """Y_lm with the standard (Condon-Shortley) convention."""
    if abs(m) > l:
        raise DomainError(f"|m| > l for (l, m) = ({l}, {m})")
    p, _, _, eim = _angular_factors(legendre_pack(l, theta), l, m, phi)
    return p * eim


# ---------------------------------------------------------------------------
# Vector wave evaluation
# ---------------------------------------------------------------------------


def _radial_triplet(variant: RadialVariant, l_max: int, k: complex, r: float):
    """(S, S', d/dz[zS], log_scale) arrays at z = k r for the variant."""
    kind = (RadialKind.BESSEL_J if variant is RadialVariant.REGULAR
            else hankel_kind_for(k))
    return radial_family_scaled(kind, l_max, k * r)


def _wave_components(family: WaveFamily, variant: RadialVariant, l: int,
                     m: int, k: complex, point: SphericalPoint,
                     pack, radial, bullet: bool = False) -> np.ndarray:
    """Spherical-frame components; 'bullet' conjugates angular factors only."""
    v, d, rd, logs = radial
    scale = math.exp(logs[l]) if logs[l] > -700.0 else 0.0
    S, Sp, Srd = v[l] * scale, d[l] * scale, rd[l] * scale
    p, pi_, tau, eim = _angular_factors(pack, l, m, point.phi)
    if bullet:
        pi_, eim = -pi_, eim.conjugate()   # i*pi and e^{im phi} conjugate
    out = np.zeros(3, dtype=complex)
    if family is WaveFamily.M:
        pref = math.sqrt(2.0 / (math.pi * l * (l + 1.0)))
        out[1] = pref * k * S * (1j * pi_) * eim
        out[2] = pref * k * S * (-tau) * eim
    elif family is WaveFamily.N:
        pref = math.sqrt(2.0 / (math.pi * l * (l + 1.0))) / point.r
        out[0] = pref * l * (l + 1.0) * S * p * eim
        out[1] = pref * Srd * tau * eim
        out[2] = pref * Srd * (1j * pi_) * eim
    else:
        pref = math.sqrt(2.0 / math.pi)
        out[0] = pref * k * Sp * p * eim
        out[1] = pref * (S / point.r) * tau * eim
        out[2] = pref * (S / point.r) * (1j * pi_) * eim
    return out


def eval_vector_wave(spec: VectorWave, point: SphericalPoint) -> np.ndarray:
    """One vector wave at one point, components (r-hat, theta-hat, phi-hat)."""
    pack = legendre_pack(spec.l, point.theta)
    radial = _radial_triplet(spec.variant, spec.l, spec.k, point.r)
    return _wave_components(spec.family, spec.variant, spec.l, spec.m,
                            spec.k, point, pack, radial)


# ---------------------------------------------------------------------------
# Dyadic Green tensors
# ---------------------------------------------------------------------------


def _tail_estimate(norms: list[float]) -> float:
    if len(norms) < 2 or norms[-1] == 0.0:
        return 0.0
    q = norms[-1] / norms[-2] if norms[-2] > 0.0 else 1.0
    if q < 0.9:
        return norms[-1] * q / (1.0 - q)
    return norms[-1]


def bulk_green(material: MaterialModel, omega: complex, r: SphericalPoint,
               rprime: SphericalPoint, l_max: int,
               tail_tol: float = 1e-6) -> DyadicValue:
    """Partial-wave bulk Green tensor at two distinct points (delta excluded).

    Regular waves sit at the smaller radius and tilde waves at the larger;
    the bullet rule conjugates the angular factors of the second point and
    leaves radial functions and k untouched.
    """
    if r.r == rprime.r and r.theta == rprime.theta and r.phi == rprime.phi:
        raise DomainError("bulk Green tensor needs r != r'")
    omega = complex(omega)
    k = eval_wavenumber(material, omega)
    mu = eval_mu(material, omega)
    inner, outer = (r, rprime) if r.r <= rprime.r else (rprime, r)
    swapped = r.r > rprime.r

    pack_in = legendre_pack(l_max, inner.theta)
    pack_out = legendre_pack(l_max, outer.theta)
    reg = _radial_triplet(RadialVariant.REGULAR, l_max, k, inner.r)
    til = _radial_triplet(RadialVariant.TILDE, l_max, k, outer.r)

    total = np.zeros((3, 3), dtype=complex)
    norms = []
    for l in range(1, l_max + 1):
        block = np.zeros((3, 3), dtype=complex)
        for m in range(-l, l + 1):
            for fam in (WaveFamily.M, WaveFamily.N):
                a = _wave_components(fam, RadialVariant.REGULAR, l, m, k,
                                     inner, pack_in, reg)
                b = _wave_components(fam, RadialVariant.TILDE, l, m, k,
                                     outer, pack_out, til, bullet=True)
                block += np.outer(a, b)
        total += block
        norms.append(float(np.linalg.norm(block)))
    if swapped:
        # theta(r - r') branch: tilde at the first argument; by the outer-
        # product structure this is the transpose of the swapped-point sum
        total = total.T
    total *= 1j * math.pi / (2.0 * k) * mu
    tail = _tail_estimate(norms) * abs(1j * math.pi / (2.0 * k) * mu)
    scale = float(np.linalg.norm(total))
    if scale > 0.0 and tail > tail_tol * scale:
        raise TailError(
            f"bulk Green l-tail {tail:.3e} exceeds {tail_tol:.1e} x norm "
            f"{scale:.3e}; raise l_max", estimate=tail)
    return DyadicValue(total, l_max, tail)


def scattering_green_exterior(geom: SphereGeometry, omega: complex,
                              r: SphericalPoint, rprime: SphericalPoint,
                              l_max: int,
                              tail_tol: float = 1e-6) -> DyadicValue:
    """Scattering Green tensor G^(22) for two exterior points.

    Sum of r^TE M~ x M~(bullet) + r^TM N~ x N~(bullet) with the exterior
    wavenumber, weighted by the generalized layered reflection
    coefficients; prefactor i pi mu2 / (2 k2).
    """
    R = geom.radius
    if r.r <= R or rprime.r <= R:
        raise DomainError("both points must lie outside the sphere")
    omega = complex(omega)
    k2 = eval_wavenumber(geom.exterior, omega)
    mu2 = eval_mu(geom.exterior, omega)

    (rte_n, rte_log), (rtm_n, rtm_log) = reflection_blocks_both(
        geom, l_max, omega)

    pack_a = legendre_pack(l_max, r.theta)
    pack_b = legendre_pack(l_max, rprime.theta)
    til_a = _radial_triplet(RadialVariant.TILDE, l_max, k2, r.r)
    til_b = _radial_triplet(RadialVariant.TILDE, l_max, k2, rprime.r)

    total = np.zeros((3, 3), dtype=complex)
    norms = []
    for l in range(1, l_max + 1):
        rte = complex(rte_n[l]) * _safe_exp(rte_log[l])
        rtm = complex(rtm_n[l]) * _safe_exp(rtm_log[l])
        block = np.zeros((3, 3), dtype=complex)
        for m in range(-l, l + 1):
            a = _wave_components(WaveFamily.M, RadialVariant.TILDE, l, m, k2,
                                 r, pack_a, til_a)
            b = _wave_components(WaveFamily.M, RadialVariant.TILDE, l, m, k2,
                                 rprime, pack_b, til_b, bullet=True)
            block += rte * np.outer(a, b)
            a = _wave_components(WaveFamily.N, RadialVariant.TILDE, l, m, k2,
                                 r, pack_a, til_a)
            b = _wave_components(WaveFamily.N, RadialVariant.TILDE, l, m, k2,
                                 rprime, pack_b, til_b, bullet=True)
            block += rtm * np.outer(a, b)
        total += block
        norms.append(float(np.linalg.norm(block)))
    total *= 1j * math.pi * mu2 / (2.0 * k2)
    tail = _tail_estimate(norms) * abs(1j * math.pi * mu2 / (2.0 * k2))
    scale = float(np.linalg.norm(total))
    if scale > 0.0 and tail > tail_tol * scale:
        raise TailError(
            f"scattering Green l-tail {tail:.3e} exceeds tolerance "
            f"relative to norm {scale:.3e}; raise l_max", estimate=tail)
    return DyadicValue(total, l_max, tail)


def _safe_exp(x: float) -> float:
    if x == -math.inf:
        return 0.0
    return math.exp(min(x, 709.0))


# ---------------------------------------------------------------------------
# Frame conversion helpers (diagnostics; the spherical frame is the contract)
# ---------------------------------------------------------------------------


def spherical_frame(point: SphericalPoint) -> np.ndarray:
    """Columns are (r-hat, theta-hat, phi-hat) in Cartesian coordinates."""
    st, ct = math.sin(point.theta), math.cos(point.theta)
    sp, cp = math.sin(point.phi), math.cos(point.phi)
    return np.array([[st * cp, ct * cp, -sp],
                     [st * sp, ct * sp, cp],
                     [ct, -st, 0.0]])


def to_cartesian_vector(v_sph: np.ndarray, point: SphericalPoint) -> np.ndarray:
    return spherical_frame(point) @ v_sph


def to_cartesian_dyad(g_sph: np.ndarray, point: SphericalPoint,
                      point_prime: SphericalPoint) -> np.ndarray:
    qa = spherical_frame(point)
    qb = spherical_frame(point_prime)
    return qa @ g_sph @ qb.T


def cartesian_point(x: float, y: float, z: float) -> SphericalPoint:
    r = math.sqrt(x * x + y * y + z * z)
    theta = math.acos(max(-1.0, min(1.0, z / r))) if r > 0 else 0.0
    phi = math.atan2(y, x) % (2.0 * math.pi)
    return SphericalPoint(r, theta, phi)
