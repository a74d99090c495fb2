"""Causal dispersive permittivity/permeability models.

Materials are Drude-Lorentz pole sums,

    eps(omega) = eps_inf + sum_p  wp2 / (wT^2 - omega^2 - i*gamma*omega),

evaluable anywhere in the closed upper half of the complex frequency
plane; the permeability is the same family over its own pole list.  All
frequencies are reduced, i.e. measured in units of c over a reference
length fixed when the model parameters were written down (radii are
measured in that same reference length, so omega and k coincide
numerically with c = 1).

Strictly lossy media only: every pole must carry positive damping, so
Im eps > 0 and Im mu > 0 on the positive real axis and both response
functions are real and >= 1-ish on the positive imaginary axis.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

from scipy.integrate import IntegrationWarning, quad

from .errors import DomainError, QuadratureError


@dataclass(frozen=True)
class LorentzPole:
    """One causal oscillator: wp2/(wT^2 - w^2 - i*gamma*w).

    ``resonance == 0`` gives a Drude (free-carrier) term.
    """

    plasma_strength: float   # omega_p^2
    resonance: float = 0.0   # omega_T
    damping: float = 0.0     # gamma

    def __post_init__(self):
        for name in ("plasma_strength", "resonance", "damping"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"pole {name} must be finite, got {v}")
        if self.plasma_strength < 0.0:
            raise DomainError("plasma_strength (omega_p^2) must be >= 0")
        if self.resonance < 0.0:
            raise DomainError("resonance frequency must be >= 0")
        if self.damping <= 0.0:
            raise DomainError(
                "damping must be > 0 (only strictly lossy media are modeled)")


@dataclass(frozen=True)
class MaterialModel:
    """Immutable eps/mu model; evaluate with eval_eps / eval_mu."""

    eps_poles: tuple[LorentzPole, ...] = field(default_factory=tuple)
    mu_poles: tuple[LorentzPole, ...] = field(default_factory=tuple)
    eps_infinity: float = 1.0
    mu_infinity: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "eps_poles", tuple(self.eps_poles))
        object.__setattr__(self, "mu_poles", tuple(self.mu_poles))
        for name in ("eps_infinity", "mu_infinity"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 1.0):
                raise DomainError(f"{name} must be finite and >= 1, got {v}")

    def is_vacuum(self) -> bool:
        return (not self.eps_poles and not self.mu_poles
                and self.eps_infinity == 1.0 and self.mu_infinity == 1.0)

    def dual(self) -> "MaterialModel":
        """Model with eps- and mu-data exchanged (TE <-> TM duality)."""
        return MaterialModel(self.mu_poles, self.eps_poles,
                             self.mu_infinity, self.eps_infinity)


VACUUM = MaterialModel()


def _pole_sum(poles, infinity: float, omega: complex) -> complex:
    out = complex(infinity)
    for p in poles:
        out += p.plasma_strength / (
            p.resonance * p.resonance - omega * omega - 1j * p.damping * omega)
    return out


def _check_upper_half(omega: complex) -> complex:
    omega = complex(omega)
    if omega.imag < 0.0:
        raise DomainError(
            "response functions are defined for Im omega >= 0 only; "
            "use the *_continued evaluators for resonance analysis")
    return omega


def eval_eps(model: MaterialModel, omega: complex) -> complex:
    """Permittivity at complex omega in the closed upper half-plane."""
    return _pole_sum(model.eps_poles, model.eps_infinity,
                     _check_upper_half(omega))


def eval_mu(model: MaterialModel, omega: complex) -> complex:
    """Permeability at complex omega in the closed upper half-plane."""
    return _pole_sum(model.mu_poles, model.mu_infinity,
                     _check_upper_half(omega))


def eval_eps_continued(model: MaterialModel, omega: complex) -> complex:
    """Rational continuation of eps to the full plane (resonance searches)."""
    return _pole_sum(model.eps_poles, model.eps_infinity, complex(omega))


def eval_mu_continued(model: MaterialModel, omega: complex) -> complex:
    """Rational continuation of mu to the full plane (resonance searches)."""
    return _pole_sum(model.mu_poles, model.mu_infinity, complex(omega))


def branch_wavenumber(k2: complex) -> complex:
    """Root of k^2 with Im k >= 0; Im k = 0 is resolved toward Re k > 0."""
    k = cmath.sqrt(complex(k2))
    if k.imag < 0.0:
        k = -k
    elif k.imag == 0.0 and k.real < 0.0:
        k = -k
    return k


def eval_wavenumber(model: MaterialModel, omega: complex,
                    continued: bool = False) -> complex:
    """k(omega) with k^2 = omega^2 eps mu (c = 1) on the Im k >= 0 branch.

    In a band where Re eps < 0 and Re mu < 0 simultaneously (left-handed),
    the branch lands on Re k < 0, Im k > 0.
    """
    omega = complex(omega)
    if continued:
        eps = eval_eps_continued(model, omega)
        mu = eval_mu_continued(model, omega)
    else:
        eps = eval_eps(model, omega)
        mu = eval_mu(model, omega)
    return branch_wavenumber(omega * omega * eps * mu)


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the 1-d frequency quadratures (KK check, diagnostics)."""

    omega_max: float = 200.0
    rel_tol: float = 1e-4
    limit: int = 200

    def __post_init__(self):
        if not (self.omega_max > 0 and self.rel_tol > 0 and self.limit >= 1):
            raise DomainError("invalid quadrature spec")


def kramers_kronig_residual(model: MaterialModel, omega_real: float,
                            grid: QuadratureSpec) -> float:
    """Relative deviation of the dispersion-relation reconstruction.

    Rebuilds Re eps(w0) - eps_inf from Im eps via

        (2/pi) P int_0^inf  w' Im eps(w') / (w'^2 - w0^2) dw'

    and compares against the direct evaluation.  Raises QuadratureError
    when the quadrature error plus the truncated tail exceeds the grid's
    relative tolerance.
    """
    if omega_real <= 0.0:
        raise DomainError("KK check requires omega_real > 0")
    if not model.eps_poles:
        return 0.0
    w0 = float(omega_real)
    if grid.omega_max <= 2.0 * w0:
        raise QuadratureError(
            f"omega_max {grid.omega_max} does not cover the pole region "
            f"around omega = {w0}")

    def im_eps_w(w):
        return w * eval_eps(model, complex(w)).imag

    f0 = im_eps_w(w0)

    def integrand(w):
        d = w * w - w0 * w0
        if d == 0.0:
            # removable: limit of the subtracted integrand
            eps = 1e-7 * max(w0, 1.0)
            return (im_eps_w(w0 + eps) - f0) / ((w0 + eps) ** 2 - w0 ** 2)
        return (im_eps_w(w) - f0) / d

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(integrand, 0.0, grid.omega_max,
                        points=[w0], limit=grid.limit, full_output=False)
    # analytic principal value of the subtracted constant over [0, omega_max]
    val += f0 / (2.0 * w0) * math.log(
        (grid.omega_max - w0) / (grid.omega_max + w0))
    # tail estimate from Im eps ~ sum wp2*gamma/w^3
    tail = sum(p.plasma_strength * p.damping for p in model.eps_poles) / (
        3.0 * grid.omega_max ** 3)

    target = eval_eps(model, complex(w0)).real - model.eps_infinity
    scale = max(abs(target), 1e-2)
    if (abs(err) + tail) / scale > grid.rel_tol:
        raise QuadratureError(
            "KK quadrature too coarse: estimated error "
            f"{(abs(err) + tail):.3e} exceeds tolerance {grid.rel_tol:.3e} "
            f"relative to scale {scale:.3e}",
            estimate=abs(err) + tail)
    recon = (2.0 / math.pi) * val
    return abs(recon - target) / scale
