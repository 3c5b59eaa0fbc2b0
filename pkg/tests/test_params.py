"""Derived-parameter chain against quoted and hand-evaluated values."""

import math

import pytest

from magnoncat.params import (
    DerivedParams,
    MismatchParams,
    PhysicalParams,
    derive_params,
    paper_params,
)


@pytest.fixture(scope="module")
def derived():
    p = paper_params()
    return derive_params(p)


def test_effective_coupling_G(derived):
    # g_q/2pi=121, g_m/2pi=21, Delta/2pi=254.1 -> G/2pi = 10
    assert abs(derived.Delta - 254.1) < 1e-9
    assert abs(derived.G - 10.0) < 1e-9


def test_effective_frequencies(derived):
    assert abs(derived.omega_Q - 8223.519) < 5e-3
    assert abs(derived.omega_M - 8167.636) < 5e-3
    assert abs(derived.Delta_m - 0.3) < 1e-9


def test_dressed_components(derived):
    # eta2/2 = 25; |delta_x| = eta3*G/Delta_m = 25; theta = pi/4; nu = 25*sqrt(2)
    assert abs(derived.delta_z - 25.0) < 1e-9
    assert abs(abs(derived.delta_x) - 25.0) < 1e-6
    assert derived.delta_x < 0  # formula sign; the rotation branch absorbs it
    assert abs(derived.theta - math.pi / 4) < 1e-8
    assert abs(derived.nu - 25.0 * math.sqrt(2.0)) < 1e-6
    assert abs(derived.nu - 35.36) < 5e-3


def test_two_magnon_coupling(derived):
    assert abs(derived.g_x - 3.5355) < 1e-4
    assert abs(derived.g_z - 3.5355) < 1e-4
    assert derived.g_x > 0 and derived.g_z > 0
    assert abs(derived.g_eff - 4 * derived.g_x * derived.g_z / derived.nu) < 1e-12
    assert abs(derived.g_eff - 1.4142) < 1e-3


def test_cat_amplitude(derived):
    # quoted-value arithmetic: sqrt(3.53/1.41) = 1.582
    assert abs(math.sqrt(3.53 / 1.41) - 1.582) < 5e-4
    # full-precision chain
    assert abs(derived.alpha - math.sqrt(3.53 / derived.g_eff)) < 1e-12
    assert abs(derived.alpha.real - 1.58) < 5e-3
    assert abs(derived.alpha.imag) < 1e-12


def test_stark_coefficient(derived):
    assert abs(derived.stark - 0.9428) < 1e-4


def test_residual_detuning(derived):
    assert abs(derived.delta_m - (0.3 - derived.nu / 2.0)) < 1e-9
    assert derived.delta_m < 0


def test_modulation_lock():
    p = paper_params()
    assert abs(p.eps - math.sqrt(2.0) * p.eps_p) < 1e-12
    assert abs(p.eps1 - 2.0 * p.eps) < 1e-12
    assert abs(p.eps2 - 4.0 * p.eps) < 1e-12
    with pytest.raises(ValueError):
        PhysicalParams(eps_p=3.53, eps1=1.0)


def test_matched_condition():
    p = paper_params()
    d = derive_params(p)
    assert abs(d.Delta_12 - p.eta1) < 1e-9
    assert abs(d.Delta_13) < 1e-9
    assert abs(p.omega_p - d.nu) < 1e-9


def test_derive_is_pure_and_mismatch_neutral():
    p = paper_params()
    a = derive_params(p)
    b = derive_params(p, MismatchParams(0.0, 0.0))
    assert a == b  # bit-identical fields
    assert derive_params(p) == derive_params(p)


def test_mismatch_enters_transverse_component():
    p = paper_params()
    d0 = derive_params(p)
    d1 = derive_params(p, MismatchParams(delta13=1e-3))
    assert abs(d1.delta_x - (-p.eta3 * d1.G / (d1.Delta_m - 1e-3))) < 1e-12
    assert d1.delta_x != d0.delta_x
    d2 = derive_params(p, MismatchParams(deta12=1e-3))
    assert abs((d2.delta_x - d0.delta_x) - 1e-3) < 1e-12


def test_zero_detuning_rejected():
    with pytest.raises(ZeroDivisionError):
        derive_params(PhysicalParams(omega_c=8165.9, omega=8165.9))


def test_paper_params_overrides_rederive():
    p = paper_params(kappa=0.5)
    assert p.kappa == 0.5
    assert abs(p.omega_p - derive_params(p).nu) < 1e-9
    p2 = paper_params(omega_p=40.0)
    assert p2.omega_p == 40.0
