import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magnon_sim.bessel import bessel_j
from magnon_sim.gaussian import symplectic_form, two_mode_squeezed_cm, vacuum_cm
from magnon_sim.models import (
    TWO_PI,
    Model,
    ParameterError,
    PhysicalParams,
    bogoliubov_transform,
    build_hamiltonian,
    derive_params,
    diffusion_matrix,
    drift_matrix,
    hamiltonian_effective,
    hamiltonian_full,
    jacobi_anger_terms,
    model_diffusion,
    params_from_detunings,
    quadratic_form,
    rwa_validity,
    sideband_shift,
    transform_quadratic_form,
)
from reference_matrices import effective_drift, resonant_drift, rwa_drift

REF = PhysicalParams()


def test_reference_point_derived_values():
    d = derive_params(REF)
    assert d.xi == 1.8
    assert d.Delta_1 / TWO_PI == pytest.approx(0.1, abs=1e-12)
    assert d.Delta_2 / TWO_PI == pytest.approx(0.1, abs=1e-12)
    assert d.varpi / TWO_PI == pytest.approx(-9.9)
    # g1 = -g1' J_{-1}(1.8) = g1' J_1(1.8)
    assert d.g1 == pytest.approx(TWO_PI * 0.05 * bessel_j(1, 1.8), rel=1e-14)


def test_validation():
    with pytest.raises(ParameterError):
        PhysicalParams(kappa=-0.001)
    with pytest.raises(ParameterError):
        PhysicalParams(nu_d=0.0)
    with pytest.raises(ParameterError):
        PhysicalParams(g2=math.nan)
    assert PhysicalParams(nu_d=0.0, Omega_d=0.0).nu_d == 0.0


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(5, 15), st.floats(15, 25))
def test_detunings_round_trip(d1, d2, nu_c, nu_d):
    d = derive_params(params_from_detunings(nu_c=nu_c, nu_d=nu_d, Delta_1=d1, Delta_2=d2))
    assert d.Delta_1 / TWO_PI == pytest.approx(d1, abs=1e-12)
    assert d.Delta_2 / TWO_PI == pytest.approx(d2, abs=1e-12)


def test_large_detuning_quantities():
    d = derive_params(params_from_detunings(Delta_1=0.9, Delta_2=0.9, g1=0.03, g2=0.03))
    assert d.G / TWO_PI == pytest.approx(0.001, rel=1e-12)
    assert (d.Omega_1 + d.Omega_2) / TWO_PI == pytest.approx(-0.002, rel=1e-9)
    assert derive_params(params_from_detunings(Delta_1=0.0, Delta_2=0.9)).G is None


def test_jacobi_anger_terms_and_validity():
    terms = {t.f: t for t in jacobi_anger_terms(REF)}
    assert terms[-1].delta_f / TWO_PI == pytest.approx(0.1, abs=1e-12)
    assert terms[0].amplitude == pytest.approx(TWO_PI * 0.05 * bessel_j(0, 1.8))
    assert rwa_validity(REF) > 100
    assert rwa_validity(REF.replace(g1_prime=0.0)) == math.inf
    undriven = REF.replace(Omega_d=0.0)
    # only J_0 survives, so the ratio is |δ_0| / g1'
    assert rwa_validity(undriven) == pytest.approx(abs(terms[0].delta_f) / (TWO_PI * 0.05))
    with pytest.raises(ValueError):
        jacobi_anger_terms(REF, f_min=0)


def test_sideband_shift_is_small_and_positive():
    s = sideband_shift(REF)
    assert 1e-5 < s < 1e-4
    assert sideband_shift(REF.replace(g1_prime=0.0)) == 0.0


def _draw(rng):
    return params_from_detunings(
        Delta_1=rng.uniform(-1, 1),
        Delta_2=rng.uniform(-1, 1),
        g1=rng.uniform(0, 0.05),
        g2=rng.uniform(0, 0.05),
        kappa=rng.uniform(0, 0.01),
        gamma_1=rng.uniform(0, 0.01),
        gamma_2=rng.uniform(0, 0.01),
    )


def test_drift_matrices_match_written_out_forms():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = _draw(rng)
        d = derive_params(p)
        k, y1, y2 = p.decays
        ref = rwa_drift(k, y1, y2, d.omega_c, d.varpi, d.omega_2, d.g1, d.g2)
        assert np.max(np.abs(drift_matrix(p, Model.RWA) - ref)) <= 1e-14 * max(1.0, np.max(np.abs(ref)))
        assert np.max(np.abs(drift_matrix(p, Model.RESONANT) - resonant_drift(k, y1, y2, d.g1, d.g2))) <= 1e-14
        if d.G is not None:
            ref = effective_drift(y1, y2, d.Omega_1, d.Omega_2, d.G)
            assert np.max(np.abs(drift_matrix(p, Model.EFFECTIVE) - ref)) <= 1e-14 * max(1.0, np.max(np.abs(ref)))


def test_full_hamiltonian_modulation():
    h = hamiltonian_full(REF)
    assert h.period == pytest.approx(0.05)
    d = derive_params(REF)
    m0 = h.matrix(0.0)
    assert m0[2, 2] == pytest.approx(d.omega_1 + TWO_PI * REF.Omega_d)
    assert np.allclose(h.matrix(h.period), m0)
    assert np.allclose(h.matrix(0.25 * h.period)[2, 2], d.omega_1, atol=1e-9)
    assert build_hamiltonian(REF, "rwa").time_dependent is False


def test_effective_needs_detunings():
    with pytest.raises(ParameterError):
        hamiltonian_effective(params_from_detunings(Delta_1=0.0, Delta_2=0.5))


def test_diffusion():
    d = model_diffusion(REF, Model.EFFECTIVE)
    assert d.shape == (4, 4)
    assert np.allclose(np.diag(diffusion_matrix([2.0, 4.0])), [1, 1, 2, 2])
    with pytest.raises(ValueError):
        diffusion_matrix([-1.0])


def test_free_evolution_preserves_vacuum():
    # without couplings and decay the vacuum is stationary: A σ + σ Aᵀ = 0
    a = drift_matrix(params_from_detunings(g1=0.0, g2=0.0, kappa=0, gamma_1=0, gamma_2=0))
    s = vacuum_cm(3)
    assert np.allclose(a @ s + s @ a.T, 0.0)


def test_quadratic_form_conventions():
    m = quadratic_form([1.0, 2.0], beam_splitters=[(0, 1, 0.5)], squeezers=[])
    assert np.allclose(m[0:2, 2:4], 0.5 * np.eye(2))
    m = quadratic_form([0.0, 0.0], beam_splitters=[], squeezers=[(0, 1, 0.5)])
    assert np.allclose(m[0:2, 2:4], 0.5 * np.diag([1.0, -1.0]))


@given(st.floats(0.001, 0.05), st.floats(0.0, 0.999))
def test_bogoliubov_dark_mode(g2, ratio):
    g1 = ratio * g2
    p = params_from_detunings(g1=g1, g2=g2)
    d = derive_params(p)
    b = bogoliubov_transform(d.g1, d.g2)
    m = transform_quadratic_form(build_hamiltonian(p, Model.RESONANT).matrix(0.0), b.embed())
    assert np.max(np.abs(m[0:2, 2:4])) < 1e-12
    assert np.allclose(m[0:2, 4:6], b.J * np.eye(2), atol=1e-12, rtol=0)
    assert b.J == pytest.approx(math.sqrt(d.g2**2 - d.g1**2), abs=1e-12)


def test_bogoliubov_vacuum_is_tmsv():
    b = bogoliubov_transform(0.3, 0.5)
    s_inv = np.linalg.inv(b.s_matrix)
    # the Bogoliubov vacuum, expressed in magnon quadratures, is a two-mode squeezed state
    assert np.allclose(s_inv @ vacuum_cm(2) @ s_inv.T, two_mode_squeezed_cm(b.r))
    omega = symplectic_form(2)
    assert np.allclose(b.s_matrix @ omega @ b.s_matrix.T, omega)
    with pytest.raises(ParameterError):
        bogoliubov_transform(0.5, 0.5)
