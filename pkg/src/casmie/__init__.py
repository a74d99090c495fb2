"""Casimir radial stress on lossy magnetodielectric spheres.

Reduced units throughout: lengths in a reference radius, frequencies in
c over that radius, temperature as k_B T R/(hbar c), stress in
hbar c / R^4.
"""

from .errors import (CasmieError, ConfigError, ConvergenceError,
                     DegenerateDenominatorError, DomainError, OrderCapError,
                     QuadratureError, RadialOverflowError, RootSearchError,
                     SingularSystemError, TailError)
from .green import (DyadicValue, RadialVariant, SphericalPoint, VectorWave,
                    WaveFamily, bulk_green, eval_vector_wave,
                    scattering_green_exterior, sph_harm)
from .materials import (LorentzPole, MaterialModel, QuadratureSpec, VACUUM,
                        eval_eps, eval_mu, eval_wavenumber,
                        kramers_kronig_residual)
from .mie import (Layer, Polarization, ReflectionCoefficient, SphereGeometry,
                  find_mie_resonances, homogeneous_sphere,
                  interface_determinant, layered_reflection,
                  single_interface_reflection)
from .specfun import (RadialEval, RadialKind, ScaledRadialEval, sph_bessel,
                      sph_bessel_scaled, tilde_hankel, wronskian_residual)
from .stress import (StressKernelTerm, StressMode, StressResult,
                     stress_finite_T, stress_kernel,
                     stress_real_axis_diagnostic, stress_zero_T)
from .cli import emit_convergence_report, run_job, validate_config

__version__ = "0.1.0"

__all__ = [
    "CasmieError", "ConfigError", "ConvergenceError",
    "DegenerateDenominatorError", "DomainError", "OrderCapError",
    "QuadratureError", "RadialOverflowError", "RootSearchError",
    "SingularSystemError", "TailError",
    "DyadicValue", "RadialVariant", "SphericalPoint", "VectorWave",
    "WaveFamily", "bulk_green", "eval_vector_wave",
    "scattering_green_exterior", "sph_harm",
    "LorentzPole", "MaterialModel", "QuadratureSpec", "VACUUM",
    "eval_eps", "eval_mu", "eval_wavenumber", "kramers_kronig_residual",
    "Layer", "Polarization", "ReflectionCoefficient", "SphereGeometry",
    "find_mie_resonances", "homogeneous_sphere", "interface_determinant",
    "layered_reflection", "single_interface_reflection",
    "RadialEval", "RadialKind", "ScaledRadialEval", "sph_bessel",
    "sph_bessel_scaled", "tilde_hankel", "wronskian_residual",
    "StressKernelTerm", "StressMode", "StressResult", "stress_finite_T",
    "stress_kernel", "stress_real_axis_diagnostic", "stress_zero_T",
    "emit_convergence_report", "run_job", "validate_config",
]
