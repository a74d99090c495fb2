"""TE/TM partial-wave reflection coefficients of layered spheres.

Everything is expressed in Riccati form: the working variables at an
interface are z*S_l(z) and d/dz[z*S_l(z)] with z = k*r, which is exactly
the combination entering the spherical matching conditions (for TE waves
k r S and mu^-1 k d/dr[r S] are continuous, for TM waves eps k r S and
k d/dr[r S]).  A single interface gives the compact determinant ratio

    r_l = - D[j(k1 R), j(k2 R); alpha] / D[j(k1 R), h~(k2 R); alpha],

alpha = mu for TE and eps for TM; layered spheres generalize it by an
inside-to-outside recursion over amplitude pairs (a, b) with the radial
field a j_l + b h~_l per layer and b = 0 innermost (regularity).

The recursion runs on log-scaled quantities and is vectorized over l, so
reflection data for a whole multipole block costs a handful of radial
recurrence passes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (DegenerateDenominatorError, DomainError,
                     RadialOverflowError, RootSearchError,
                     SingularSystemError)
from .materials import (MaterialModel, VACUUM, eval_eps, eval_eps_continued,
                        eval_mu, eval_mu_continued, eval_wavenumber)
from .specfun import (DEFAULT_L_CAP, RadialEval, RadialKind, hankel_kind_for,
                      radial_family_scaled, sph_bessel)

_TINY_DEN = 1e-280


class Polarization(Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class Layer:
    """One radial layer: material filling r up to ``radius``."""

    radius: float
    material: MaterialModel

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise DomainError(f"layer radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class SphereGeometry:
    """Radially layered sphere, innermost layer first, plus exterior."""

    layers: tuple[Layer, ...]
    exterior: MaterialModel = VACUUM

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise DomainError("geometry needs at least one layer")
        radii = [ly.radius for ly in self.layers]
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise DomainError(f"layer radii must strictly increase, got {radii}")

    @property
    def radius(self) -> float:
        """Outer radius R."""
        return self.layers[-1].radius

    def dual(self) -> "SphereGeometry":
        """Geometry with eps <-> mu swapped everywhere (TE <-> TM map)."""
        return SphereGeometry(
            tuple(Layer(ly.radius, ly.material.dual()) for ly in self.layers),
            self.exterior.dual())


@dataclass(frozen=True)
class ReflectionCoefficient:
    l: int
    polarization: Polarization
    omega: complex
    value: complex


def homogeneous_sphere(radius: float, material: MaterialModel,
                       exterior: MaterialModel = VACUUM) -> SphereGeometry:
    return SphereGeometry((Layer(radius, material),), exterior)


def interface_determinant(f_inner: RadialEval, f_outer: RadialEval,
                          alpha1: complex, alpha2: complex) -> complex:
    """2x2 matching determinant of Riccati-form evaluations.

    D = f_inner.value * f_outer.riccati_derivative / alpha2
        - f_outer.value * f_inner.riccati_derivative / alpha1
    """
    if alpha1 == 0 or alpha2 == 0:
        raise DomainError("interface determinant needs nonzero alpha")
    return (f_inner.value * f_outer.riccati_derivative / alpha2
            - f_outer.value * f_inner.riccati_derivative / alpha1)


def _alpha(material: MaterialModel, omega: complex, pol: Polarization,
           continued: bool) -> complex:
    if pol is Polarization.TE:
        return (eval_mu_continued if continued else eval_mu)(material, omega)
    return (eval_eps_continued if continued else eval_eps)(material, omega)


def _check_l(l: int) -> None:
    if l < 1:
        raise DomainError(
            f"multipole order must be >= 1 for M/N partial waves, got {l}")


def single_interface_reflection(inner: MaterialModel, outer: MaterialModel,
                                radius: float, l: int, pol: Polarization,
                                omega: complex,
                                continued: bool = False) -> ReflectionCoefficient:
    """r_l for one spherical interface between two media."""
    _check_l(l)
    omega = complex(omega)
    k1 = eval_wavenumber(inner, omega, continued=continued)
    k2 = eval_wavenumber(outer, omega, continued=continued)
    a1 = _alpha(inner, omega, pol, continued)
    a2 = _alpha(outer, omega, pol, continued)
    if a1 == 0 or a2 == 0:
        raise DomainError("vanishing eps/mu at the interface")
    z1, z2 = k1 * radius, k2 * radius
    vj1, _, rdj1, sj1 = radial_family_scaled(RadialKind.BESSEL_J, l, z1)
    vj2, _, rdj2, sj2 = radial_family_scaled(RadialKind.BESSEL_J, l, z2)
    kind2 = hankel_kind_for(k2)
    vh2, _, rdh2, sh2 = radial_family_scaled(kind2, l, z2)

    num = vj1[l] * rdj2[l] / a2 - vj2[l] * rdj1[l] / a1
    den = vj1[l] * rdh2[l] / a2 - vh2[l] * rdj1[l] / a1
    if abs(den) < _TINY_DEN:
        raise DegenerateDenominatorError(
            f"reflection denominator underflow at l={l}, omega={omega}")
    log_ratio = sj2[l] - sh2[l]
    if num == 0:
        return ReflectionCoefficient(l, pol, omega, 0j)
    if log_ratio + math.log(abs(num / den)) > 700.0:
        raise RadialOverflowError(
            "reflection coefficient exceeds double range; "
            "use the scaled block API")
    value = -num / den * math.exp(max(min(log_ratio, 709.0), -745.0))
    return ReflectionCoefficient(l, pol, omega, value)


def reflection_blocks_both(geom: SphereGeometry, l_max: int, omega: complex,
                           continued: bool = False,
                           l_cap: int = DEFAULT_L_CAP):
    """TE and TM generalized reflection coefficients for l = 0..l_max.

    Returns ``((te_n, te_log), (tm_n, tm_log))`` with
    r_l = r_n[l] * exp(r_log[l]); the l = 0 slots are zero (excluded
    order).  Inside-to-outside recursion over the amplitude ray (a, b)
    per layer, log-scaled and vectorized over l; the radial recurrence
    passes are shared between the two polarizations.
    """
    if l_max > l_cap:
        raise DomainError(f"l_max {l_max} exceeds cap {l_cap}")
    omega = complex(omega)
    n_l = l_max + 1
    ev_eps = eval_eps_continued if continued else eval_eps
    ev_mu = eval_mu_continued if continued else eval_mu

    media = [ly.material for ly in geom.layers] + [geom.exterior]
    ks = [eval_wavenumber(m, omega, continued=continued) for m in media]
    eps = [ev_eps(m, omega) for m in media]
    mus = [ev_mu(m, omega) for m in media]
    if any(e == 0 for e in eps) or any(u == 0 for u in mus):
        raise DomainError("vanishing eps/mu in a layer")

    state = {}
    for pol in (Polarization.TE, Polarization.TM):
        state[pol] = (np.ones(n_l, dtype=complex), np.zeros(n_l, dtype=complex),
                      np.zeros(n_l), np.full(n_l, -math.inf))

    def rows(side: int, z: complex, k: complex, pol: Polarization,
             vj, rdj, sj, vh, rdh, sh):
        if pol is Polarization.TE:
            return (z * vj, (k / mus[side]) * rdj, sj,
                    z * vh, (k / mus[side]) * rdh, sh)
        return (eps[side] * z * vj, k * rdj, sj,
                eps[side] * z * vh, k * rdh, sh)

    for i, layer in enumerate(geom.layers):
        r_i = layer.radius
        fams = []
        for side in (i, i + 1):
            z = ks[side] * r_i
            vj, _, rdj, sj = radial_family_scaled(RadialKind.BESSEL_J, l_max, z)
            vh, _, rdh, sh = radial_family_scaled(hankel_kind_for(ks[side]),
                                                  l_max, z)
            fams.append((z, vj, rdj, sj, vh, rdh, sh))
        for pol in (Polarization.TE, Polarization.TM):
            a_n, b_n, la, lb = state[pol]
            z, vj, rdj, sj, vh, rdh, sh = fams[0]
            pj, qj, sj1, ph, qh, sh1 = rows(i, z, ks[i], pol,
                                            vj, rdj, sj, vh, rdh, sh)
            m = np.maximum(la + sj1, lb + sh1)
            ea = _exp_neg(la + sj1 - m)
            eb = _exp_neg(lb + sh1 - m)
            l_val = a_n * pj * ea + b_n * ph * eb
            dl_val = a_n * qj * ea + b_n * qh * eb

            z, vj, rdj, sj, vh, rdh, sh = fams[1]
            pj2, qj2, sj2, ph2, qh2, sh2 = rows(i + 1, z, ks[i + 1], pol,
                                                vj, rdj, sj, vh, rdh, sh)
            det = pj2 * qh2 - ph2 * qj2
            bad = np.abs(det[1:]) < _TINY_DEN
            if np.any(bad):
                raise SingularSystemError(
                    f"singular interface system at radius {r_i}, "
                    f"l={1 + int(np.argmax(bad))}, omega={omega}")
            a_n = (l_val * qh2 - dl_val * ph2) / det
            b_n = (dl_val * pj2 - l_val * qj2) / det
            a_n, la = _fold_scale(a_n, m - sj2)
            b_n, lb = _fold_scale(b_n, m - sh2)
            state[pol] = (a_n, b_n, la, lb)

    out = []
    for pol in (Polarization.TE, Polarization.TM):
        a_n, b_n, la, lb = state[pol]
        r_n = np.zeros(n_l, dtype=complex)
        r_log = np.full(n_l, -math.inf)
        if not np.all(np.abs(a_n[1:]) > 0.0):
            raise DegenerateDenominatorError(
                f"vanishing regular amplitude at omega={omega}")
        r_n[1:] = b_n[1:] / a_n[1:]
        r_log[1:] = lb[1:] - la[1:]
        r_n, r_log = _fold_scale(r_n, r_log)
        out.append((r_n, r_log))
    return tuple(out)


def reflection_block_scaled(geom: SphereGeometry, l_max: int, omega: complex,
                            pol: Polarization, continued: bool = False,
                            l_cap: int = DEFAULT_L_CAP):
    """One polarization's scaled reflection block; see reflection_blocks_both."""
    te, tm = reflection_blocks_both(geom, l_max, omega, continued=continued,
                                    l_cap=l_cap)
    return te if pol is Polarization.TE else tm


def _exp_neg(x: np.ndarray) -> np.ndarray:
    """exp on (-inf, 0]-ish exponents without overflow warnings."""
    return np.exp(np.clip(x, -745.0, 50.0))


def _fold_scale(vals: np.ndarray, logs: np.ndarray):
    mags = np.abs(vals)
    nz = (mags > 0.0) & np.isfinite(mags)
    safe = np.where(nz, mags, 1.0)
    return np.where(nz, vals / safe, 0.0), np.where(
        nz, logs + np.log(safe), -math.inf)


def layered_reflection(geom: SphereGeometry, l: int, pol: Polarization,
                       omega: complex,
                       continued: bool = False) -> ReflectionCoefficient:
    """Generalized reflection coefficient of a layered sphere."""
    _check_l(l)
    if len(geom.layers) == 1:
        return single_interface_reflection(
            geom.layers[0].material, geom.exterior, geom.radius, l, pol,
            omega, continued=continued)
    r_n, r_log = reflection_block_scaled(geom, l, omega, pol,
                                         continued=continued)
    if abs(r_n[l]) > 0.0 and r_log[l] + math.log(abs(r_n[l])) > 700.0:
        raise RadialOverflowError(
            "reflection coefficient exceeds double range")
    scale = math.exp(max(min(r_log[l], 709.0), -745.0)) if r_log[l] > -math.inf else 0.0
    return ReflectionCoefficient(l, pol, complex(omega), complex(r_n[l]) * scale)


# ---------------------------------------------------------------------------
# Mie resonances: zeros of the reflection denominator in the complex plane
# ---------------------------------------------------------------------------


def _denominator(geom: SphereGeometry, l: int, pol: Polarization,
                 omega: complex) -> complex:
    """Resonance denominator (unscaled; fine at desk-scale l and |omega| R).

    For one layer this is D[R j(k1 R), R h~(k2 R); alpha]; for more layers
    it is the regular-wave amplitude a_ext whose zeros mark pure-outgoing
    solutions.

    A passive sphere has no denominator zeros on the physical sheet, so
    the function analytically continues the upper-half-plane expressions
    below the axis: eps/mu as their rational continuations, k as
    omega * principal sqrt(eps mu) (the interior branch choice only flips
    D by a common (-1)^l, and the exterior wave stays the outgoing
    h^(1)).  Zeros of this continuation are the Mie resonances.
    """
    omega = complex(omega)
    media = [ly.material for ly in geom.layers] + [geom.exterior]
    ks = [omega * cmath.sqrt(eval_eps_continued(m, omega)
                             * eval_mu_continued(m, omega)) for m in media]
    if len(geom.layers) == 1:
        rad = geom.radius
        j1 = sph_bessel(RadialKind.BESSEL_J, l, ks[0] * rad)
        h2 = sph_bessel(RadialKind.HANKEL_OUT, l, ks[1] * rad)
        a1 = _alpha(media[0], omega, pol, True)
        a2 = _alpha(media[1], omega, pol, True)
        return interface_determinant(j1, h2, a1, a2)
    a, b = 1.0 + 0j, 0j
    for i, layer in enumerate(geom.layers):
        r_i = layer.radius
        rows = []
        for side in (i, i + 1):
            k = ks[side]
            z = k * r_i
            jj = sph_bessel(RadialKind.BESSEL_J, l, z)
            hh = sph_bessel(RadialKind.HANKEL_OUT, l, z)
            if pol is Polarization.TE:
                mu = eval_mu_continued(media[side], omega)
                rows.append((z * jj.value, k / mu * jj.riccati_derivative,
                             z * hh.value, k / mu * hh.riccati_derivative))
            else:
                eps = eval_eps_continued(media[side], omega)
                rows.append((eps * z * jj.value, k * jj.riccati_derivative,
                             eps * z * hh.value, k * hh.riccati_derivative))
        (pj, qj, ph, qh), (pj2, qj2, ph2, qh2) = rows
        lv, dv = a * pj + b * ph, a * qj + b * qh
        det = pj2 * qh2 - ph2 * qj2
        a, b = (lv * qh2 - dv * ph2) / det, (dv * pj2 - lv * qj2) / det
        norm = max(abs(a), abs(b))
        if norm > 0:
            a, b = a / norm, b / norm
    return a


def _material_poles(geom: SphereGeometry) -> list[complex]:
    """Complex-omega poles of the rational eps/mu continuations."""
    out = []
    media = [ly.material for ly in geom.layers] + [geom.exterior]
    for m in media:
        for p in list(m.eps_poles) + list(m.mu_poles):
            disc = cmath.sqrt(complex(4.0 * p.resonance ** 2 - p.damping ** 2))
            out.append((-1j * p.damping + disc) / 2.0)
            out.append((-1j * p.damping - disc) / 2.0)
    return out


def _boundary_winding(f, corner_lo: complex, corner_hi: complex,
                      n_per_side: int = 48, max_refine: int = 12) -> int:
    """Winding number of f^2 around the box boundary, halved.

    Working with f^2 cancels the (-1)^l sheet flips the wavenumber branch
    can impose on f across Im k = 0 curves.
    """
    re0, re1 = corner_lo.real, corner_hi.real
    im0, im1 = corner_lo.imag, corner_hi.imag
    corners = [complex(re0, im0), complex(re1, im0),
               complex(re1, im1), complex(re0, im1), complex(re0, im0)]
    pts = []
    for a, b in zip(corners[:-1], corners[1:]):
        for t in np.linspace(0.0, 1.0, n_per_side, endpoint=False):
            pts.append(a + t * (b - a))
    pts.append(corners[0])

    vals = [f(p) ** 2 for p in pts]
    total = 0.0
    for i in range(len(pts) - 1):
        total += _phase_step(f, pts[i], pts[i + 1], vals[i], vals[i + 1],
                             max_refine)
    n2 = total / (2.0 * math.pi)
    n = round(n2 / 2.0)
    if abs(n2 - 2 * n) > 0.25:
        raise RootSearchError(
            f"inconsistent boundary winding {n2:.3f}/2 for box "
            f"({corner_lo}, {corner_hi})")
    return n


def _phase_step(f, za, zb, fa, fb, depth: int) -> float:
    d = cmath.phase(fb / fa) if fa != 0 and fb != 0 else math.pi
    if abs(d) <= 0.5 * math.pi:
        return d
    if depth == 0:
        raise RootSearchError(
            f"phase step unresolved near {0.5 * (za + zb)} "
            "(zero on or near the search-box boundary?)")
    zm = 0.5 * (za + zb)
    fm = f(zm) ** 2
    return (_phase_step(f, za, zm, fa, fm, depth - 1)
            + _phase_step(f, zm, zb, fm, fb, depth - 1))


def find_mie_resonances(geom: SphereGeometry, l: int, pol: Polarization,
                        search_box: tuple[complex, complex],
                        tol: float = 1e-10,
                        max_newton: int = 60) -> list[complex]:
    """Complex-omega roots of the reflection denominator inside a box.

    ``search_box`` is (lower-left, upper-right); it must sit in the closed
    lower half-plane (passive resonances have Im omega <= 0) and avoid the
    material models' own pole frequencies.  Roots are located by
    argument-principle counting with quadtree subdivision and polished by
    Newton iterations on the denominator; each returned root satisfies
    |D(root)| < 1e-8 * (median boundary |D|).
    """
    _check_l(l)
    lo, hi = complex(search_box[0]), complex(search_box[1])
    if not (lo.real < hi.real and lo.imag < hi.imag):
        raise DomainError("search box corners must be (lower-left, upper-right)")
    if hi.imag > 1e-12:
        raise DomainError("resonance search box must lie in Im omega <= 0")
    for p in _material_poles(geom):
        if lo.real <= p.real <= hi.real and lo.imag <= p.imag <= hi.imag:
            raise DomainError(
                f"search box contains a material pole at omega={p:.6g}; "
                "winding counts would be corrupted")

    def f(w: complex) -> complex:
        return _denominator(geom, l, pol, w)

    # local scale for the residual acceptance
    edge = np.concatenate([
        np.linspace(lo.real, hi.real, 9) + 1j * lo.imag,
        np.linspace(lo.real, hi.real, 9) + 1j * hi.imag,
        lo.real + 1j * np.linspace(lo.imag, hi.imag, 9),
        hi.real + 1j * np.linspace(lo.imag, hi.imag, 9)])
    local_scale = float(np.median([abs(f(w)) for w in edge]))
    if local_scale == 0.0:
        raise RootSearchError("denominator vanishes on the box boundary")

    roots: list[complex] = []
    stack = [(lo, hi, _boundary_winding(f, lo, hi))]
    min_size = max(1e-7, tol) * max(hi.real - lo.real, hi.imag - lo.imag)
    while stack:
        blo, bhi, count = stack.pop()
        if count == 0:
            continue
        size = max(bhi.real - blo.real, bhi.imag - blo.imag)
        if count == 1 and size < 64.0 * min_size:
            root = _newton_polish(f, 0.5 * (blo + bhi), size, max_newton)
            res = abs(f(root))
            if res > 1e-8 * local_scale:
                raise RootSearchError(
                    f"root polish stalled at omega={root}: |D|={res:.3e} "
                    f"vs scale {local_scale:.3e}", residual=res)
            roots.append(root)
            continue
        # split lines may hit a zero; retry with shifted fractions
        last_err = None
        for frac in (0.5, 0.43, 0.57, 0.47, 0.61):
            mid = complex(blo.real + frac * (bhi.real - blo.real),
                          blo.imag + frac * (bhi.imag - blo.imag))
            quads = [(blo, mid),
                     (complex(mid.real, blo.imag), complex(bhi.real, mid.imag)),
                     (complex(blo.real, mid.imag), complex(mid.real, bhi.imag)),
                     (mid, bhi)]
            try:
                counts = [_boundary_winding(f, qlo, qhi) for qlo, qhi in quads]
            except RootSearchError as err:
                last_err = err
                continue
            if sum(counts) == count:
                break
            last_err = RootSearchError(
                f"winding bookkeeping lost roots while subdividing "
                f"({sum(counts)} != {count})")
        else:
            raise last_err
        for (qlo, qhi), c in zip(quads, counts):
            if c:
                stack.append((qlo, qhi, c))
    roots.sort(key=lambda w: (w.real, w.imag))
    return roots


def _newton_polish(f, w: complex, scale: float, max_iter: int) -> complex:
    h = max(1e-9, 1e-6 * scale)
    for _ in range(max_iter):
        fw = f(w)
        if fw == 0:
            return w
        df = (f(w + h) - f(w - h)) / (2.0 * h)
        if df == 0:
            break
        step = fw / df
        w = w - step
        if abs(step) < 1e-14 * max(1.0, abs(w)):
            break
    return w
