"""Dispersive material models: causality, branches, KK self-check."""

import cmath
import math

import numpy as np
import pytest

from casmie.errors import DomainError, QuadratureError
from casmie.materials import (LorentzPole, MaterialModel, QuadratureSpec,
                              VACUUM, eval_eps, eval_mu, eval_wavenumber,
                              kramers_kronig_residual)

SINGLE = MaterialModel(eps_poles=(LorentzPole(1.0, 1.0, 0.1),))


def test_static_limit():
    assert eval_eps(SINGLE, 0.0) == pytest.approx(2.0)


def test_imaginary_axis_hand_value():
    # eps(i xi) = 1 + wp2/(wT^2 + xi^2 + gamma xi) at xi = 1
    got = eval_eps(SINGLE, 1j)
    assert got.imag == 0.0
    assert got.real == pytest.approx(1.0 + 1.0 / 2.1, rel=1e-15)


def test_vacuum_everywhere():
    for w in (0.0, 1.3, 2j, 0.5 + 0.5j):
        assert eval_eps(VACUUM, w) == 1.0
        assert eval_mu(VACUUM, w) == 1.0


def test_lower_half_plane_rejected():
    with pytest.raises(DomainError):
        eval_eps(SINGLE, 1.0 - 0.1j)


def test_pole_validation():
    with pytest.raises(DomainError):
        LorentzPole(1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        LorentzPole(1.0, 1.0, -0.1)
    with pytest.raises(DomainError):
        LorentzPole(-1.0, 1.0, 0.1)
    with pytest.raises(DomainError):
        MaterialModel(eps_infinity=0.5)


def test_crossing_symmetry():
    rng = np.random.default_rng(23)
    for _ in range(200):
        w = complex(rng.uniform(-8, 8), rng.uniform(0, 8))
        lhs = eval_eps(SINGLE, -w.conjugate())
        rhs = eval_eps(SINGLE, w).conjugate()
        assert lhs == rhs


def test_imaginary_axis_real_and_monotone():
    xs = np.logspace(-3, 3, 200)
    vals = [eval_eps(SINGLE, 1j * x) for x in xs]
    assert all(v.imag == 0.0 for v in vals)
    re = np.array([v.real for v in vals])
    assert np.all(np.diff(re) <= 0.0)
    assert np.all(re >= 1.0)


def test_positive_absorption_on_real_axis():
    model = MaterialModel(eps_poles=(LorentzPole(1.0, 1.0, 0.1),),
                          mu_poles=(LorentzPole(0.5, 2.0, 0.05),))
    for w in np.linspace(0.05, 20.0, 60):
        assert eval_eps(model, w).imag > 0.0
        assert eval_mu(model, w).imag > 0.0


def test_wavenumber_vacuum_real_axis():
    k = eval_wavenumber(VACUUM, 2.0)
    assert k == 2.0


def test_wavenumber_imaginary_axis():
    xi = 1.0
    k = eval_wavenumber(SINGLE, 1j * xi)
    assert k.real == 0.0
    assert k.imag == pytest.approx(
        xi * math.sqrt(eval_eps(SINGLE, 1j * xi).real), rel=1e-14)


def test_wavenumber_left_handed_branch():
    # double-resonance model with an overlapping Re eps < 0, Re mu < 0 band
    lh = MaterialModel(eps_poles=(LorentzPole(2.0, 1.0, 0.01),),
                       mu_poles=(LorentzPole(1.5, 1.0, 0.01),))
    w = 1.25
    e, u = eval_eps(lh, w), eval_mu(lh, w)
    assert e.real < 0 and u.real < 0 and e.imag > 0 and u.imag > 0
    k = eval_wavenumber(lh, w)
    assert k.real < 0 and k.imag > 0
    # direct square-root branch oracle: the Im >= 0 root
    root = cmath.sqrt(w * w * e * u)
    if root.imag < 0:
        root = -root
    assert abs(k - root) < 1e-15 * abs(root)


def test_wavenumber_branch_invariant_and_continuity():
    rng = np.random.default_rng(31)
    for _ in range(120):
        w = complex(rng.uniform(-6, 6), rng.uniform(0, 6))
        k = eval_wavenumber(SINGLE, w)
        assert k.imag >= 0.0
    xs = np.linspace(1e-3, 50.0, 400)
    ks = np.array([eval_wavenumber(SINGLE, 1j * x) for x in xs])
    steps = np.abs(np.diff(ks))
    assert np.all(steps < 5.0 * np.diff(xs) * 2.0)


def test_kk_single_pole():
    res = kramers_kronig_residual(
        SINGLE, 1.0, QuadratureSpec(omega_max=400.0, rel_tol=1e-3))
    assert res < 1e-3


def test_kk_vacuum_zero():
    assert kramers_kronig_residual(VACUUM, 1.0, QuadratureSpec()) == 0.0


def test_kk_coarse_grid_fails():
    two = MaterialModel(eps_poles=(LorentzPole(1.0, 1.0, 0.1),
                                   LorentzPole(0.5, 3.0, 0.05)))
    with pytest.raises(QuadratureError):
        kramers_kronig_residual(
            two, 1.0, QuadratureSpec(omega_max=8.0, rel_tol=1e-6, limit=4))


def test_duality_swap():
    m = MaterialModel(eps_poles=(LorentzPole(1.0, 1.0, 0.1),),
                      mu_poles=(LorentzPole(0.3, 2.0, 0.2),),
                      eps_infinity=1.5, mu_infinity=1.2)
    d = m.dual()
    w = 0.7 + 0.3j
    assert eval_eps(d, w) == eval_mu(m, w)
    assert eval_mu(d, w) == eval_eps(m, w)
