import math

import numpy as np
import pytest
import scipy.linalg

from magnon_sim.dynamics import (
    DriftRule,
    LyapunovResidualError,
    NotHurwitzError,
    PropagationConfig,
    PropagationError,
    compare_models,
    evolve_model,
    lyapunov_residual,
    max_step,
    model_drift_rule,
    propagate,
    steady_state,
)
from magnon_sim.gaussian import is_physical, populations, two_mode_squeezed_cm, vacuum_cm
from magnon_sim.models import Model, PhysicalParams, drift_matrix, model_diffusion, params_from_detunings

REF = PhysicalParams()


def resonant(g1, g2, kappa=0.005):
    p = params_from_detunings(g1=g1, g2=g2, kappa=kappa)
    return drift_matrix(p, Model.RESONANT), model_diffusion(p, Model.RESONANT)


def test_steady_state_matches_scipy():
    rng = np.random.default_rng(8)
    for _ in range(20):
        p = params_from_detunings(
            Delta_1=rng.uniform(0.3, 1), Delta_2=rng.uniform(0.3, 1), g1=rng.uniform(0, 0.02), g2=rng.uniform(0, 0.02)
        )
        a, d = drift_matrix(p), model_diffusion(p)
        sigma = steady_state(a, d)
        ref = scipy.linalg.solve_continuous_lyapunov(a, -d)
        assert np.allclose(sigma, ref, rtol=1e-8, atol=1e-10)
        assert lyapunov_residual(a, sigma, d) < 1e-10
        assert np.array_equal(sigma, sigma.T)
        assert is_physical(sigma)


def test_steady_state_of_pure_damping_is_vacuum():
    a = -0.5 * np.eye(4)
    sigma = steady_state(a, 0.5 * np.eye(4))
    assert np.allclose(sigma, vacuum_cm(2))


def test_refuses_non_hurwitz():
    a, d = resonant(0.05, 0.01)
    with pytest.raises(NotHurwitzError):
        steady_state(a, d)


def test_residual_error_at_huge_occupations():
    # stable, but σ ~ 1e6 puts the rounding floor of the residual above tolerance
    a, d = resonant(0.05 * 0.9999, 0.05)
    with pytest.raises(LyapunovResidualError):
        steady_state(a, d)


def test_rk4_fixed_point_is_the_lyapunov_solution():
    p = params_from_detunings(Delta_1=0.1, Delta_2=0.1, g1=0.003, g2=0.004, kappa=0.01, gamma_1=0.01, gamma_2=0.01)
    a, d = drift_matrix(p), model_diffusion(p)
    target = steady_state(a, d)
    margin = abs(np.max(np.linalg.eigvals(a).real))
    traj = propagate(a, d, vacuum_cm(3), PropagationConfig(t_end=25 / margin, record_interval=5.0, steady_detect_tol=None))
    rel = np.linalg.norm(traj.final - target) / np.linalg.norm(target)
    assert rel < 1e-6


def test_constant_and_callable_drifts_agree():
    p = params_from_detunings(Delta_1=0.05, Delta_2=0.05, g1=0.01, g2=0.012, kappa=0.01)
    a, d = drift_matrix(p), model_diffusion(p)
    cfg = PropagationConfig(t_end=2.0, record_interval=0.5, steady_detect_tol=None)
    fast = propagate(a, d, vacuum_cm(3), cfg)
    slow = propagate(lambda t: a, d, vacuum_cm(3), cfg)
    assert np.allclose(fast.cms, slow.cms, rtol=1e-10, atol=1e-12)
    assert np.allclose(fast.times, [0, 0.5, 1.0, 1.5, 2.0])


def test_adaptive_agrees_with_rk4():
    p = params_from_detunings(Delta_1=0.05, Delta_2=0.05, g1=0.01, g2=0.012, kappa=0.01)
    a, d = drift_matrix(p), model_diffusion(p)
    common = dict(t_end=20.0, record_interval=1.0, steady_detect_tol=None)
    rk = propagate(a, d, vacuum_cm(3), PropagationConfig(**common))
    ad = propagate(a, d, vacuum_cm(3), PropagationConfig(method="adaptive", **common))
    assert np.allclose(rk.populations(), ad.populations(), rtol=1e-6, atol=1e-9)


def test_free_two_mode_squeezed_state_relaxes():
    # no Hamiltonian, unit decay: σ(t) = e^{-t} σ0 + (1 - e^{-t}) I/2
    a, d = -0.5 * np.eye(4), 0.5 * np.eye(4)
    s0 = two_mode_squeezed_cm(1.0)
    traj = propagate(a, d, s0, PropagationConfig(t_end=2.0, dt=0.01, record_interval=1.0, steady_detect_tol=None))
    exact = math.exp(-2.0) * s0 + (1 - math.exp(-2.0)) * vacuum_cm(2)
    assert np.allclose(traj.final, exact, atol=1e-9)


def test_step_cap():
    a = drift_matrix(REF)
    cap = max_step(a)
    assert cap == pytest.approx(2 * math.pi / np.max(np.abs(a)) / 20)
    with pytest.raises(ValueError):
        propagate(a, model_diffusion(REF), vacuum_cm(3), PropagationConfig(t_end=1.0, dt=2 * cap))


def test_config_validation():
    with pytest.raises(ValueError):
        PropagationConfig(t_end=0.0)
    with pytest.raises(ValueError):
        PropagationConfig(t_end=1.0, method="euler")
    with pytest.raises(ValueError):
        PropagationConfig(t_end=1.0, dt=-1.0)


def test_unphysical_evolution_aborts():
    a, d = -0.5 * np.eye(2), -2.0 * np.eye(2)
    with pytest.raises(PropagationError):
        propagate(a, d, vacuum_cm(1), PropagationConfig(t_end=5.0, dt=0.01, record_interval=0.1))


def test_zero_coupling_evolution_stays_empty():
    p = params_from_detunings(g1=0.0, g2=0.0)
    traj = evolve_model(p, Model.RWA, PropagationConfig(t_end=10.0, record_interval=1.0))
    assert np.allclose(traj.populations(), 0.0, atol=1e-12)


def test_driven_rule_is_periodic_and_records_whole_periods():
    rule = model_drift_rule(REF, Model.FULL)
    assert isinstance(rule, DriftRule)
    assert rule.period == pytest.approx(0.05)
    traj = propagate(rule, model_diffusion(REF), vacuum_cm(3), PropagationConfig(t_end=0.3, record_interval=0.12))
    # 0.12 ns rounds to two drive periods
    assert np.allclose(np.diff(traj.times), 0.1)
    assert traj.min_margin >= -1e-9


def test_rwa_propagation_reaches_lyapunov_solution():
    traj = evolve_model(REF, Model.RWA, PropagationConfig(t_end=8000.0, record_interval=1.0))
    assert traj.converged
    target = populations(steady_state(drift_matrix(REF), model_diffusion(REF)))
    assert np.allclose(traj.populations()[-1], target, atol=1e-3)


def test_rwa_and_effective_models_track_each_other():
    p = PhysicalParams(nu_c=10, nu_1=10.9, nu_2=9.1, nu_d=20, Omega_d=0, g1_prime=0, g1=0.03, g2=0.03)
    cmp = compare_models(p, PropagationConfig(t_end=8000.0, record_interval=0.5), "rwa-effective")
    assert cmp.pair == "rwa_vs_effective"
    assert cmp.observables == ("n_m1", "n_m2")
    assert cmp.sup_divergence < 0.1
    with pytest.raises(ValueError):
        compare_models(p, PropagationConfig(t_end=1.0), "full-effective")
