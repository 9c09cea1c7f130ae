import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magnon_sim.gaussian import (
    UnphysicalStateError,
    block_diag,
    is_physical,
    log_negativity,
    mode_population,
    phase_rotation,
    physicality_margin,
    populations,
    reduce_two_mode,
    smallest_symplectic_eigenvalue_pt,
    symplectic_form,
    thermal_cm,
    two_mode_squeezed_cm,
    two_mode_squeezing_symplectic,
    vacuum_cm,
)

radii = st.floats(0.0, 3.0)


def test_vacuum_has_no_excitations():
    cm = vacuum_cm(3)
    assert np.allclose(populations(cm), 0.0)
    assert physicality_margin(cm) == pytest.approx(0.0, abs=1e-15)


def test_population_formula():
    cm = thermal_cm([0.0, 2.5, 7.0])
    assert mode_population(cm, 1) == pytest.approx(2.5)
    assert populations(cm) == pytest.approx([0.0, 2.5, 7.0])
    with pytest.raises(IndexError):
        mode_population(cm, 3)


@pytest.mark.parametrize("r", [0.0, 0.1, 0.3, 1.0, 2.0])
def test_tmsv_log_negativity(r):
    assert log_negativity(two_mode_squeezed_cm(r)) == pytest.approx(2 * r, abs=1e-10)


@given(radii)
def test_squeezer_maps_vacuum_to_tmsv(r):
    s = two_mode_squeezing_symplectic(r)
    omega = symplectic_form(2)
    assert np.allclose(s @ omega @ s.T, omega, atol=1e-9 * np.cosh(r) ** 2)
    assert np.allclose(s @ vacuum_cm(2) @ s.T, two_mode_squeezed_cm(r), atol=1e-9 * np.cosh(2 * r))


@given(radii, st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_local_phases_leave_entanglement_unchanged(r, a, b):
    rot = block_diag(phase_rotation(a), phase_rotation(b))
    cm = rot @ two_mode_squeezed_cm(r) @ rot.T
    assert log_negativity(cm) == pytest.approx(2 * r, abs=1e-8)


def test_thermal_product_is_separable():
    assert log_negativity(thermal_cm([0.3, 4.0])) == 0.0
    assert smallest_symplectic_eigenvalue_pt(vacuum_cm(2)) == pytest.approx(0.5)


def test_reduce_two_mode_picks_blocks():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(6, 6))
    cm = m @ m.T + 3 * np.eye(6)
    sub = reduce_two_mode(cm, 1, 2)
    assert np.array_equal(sub, cm[2:6, 2:6])
    sub = reduce_two_mode(cm, 2, 0)
    assert np.array_equal(sub[:2, :2], cm[4:6, 4:6])
    assert np.array_equal(sub[:2, 2:], cm[4:6, 0:2])
    with pytest.raises(ValueError):
        reduce_two_mode(cm, 1, 1)


def test_physicality_margin_values():
    assert physicality_margin(0.4 * np.eye(6)) == pytest.approx(-0.1, abs=1e-12)
    assert physicality_margin(two_mode_squeezed_cm(1.0)) == pytest.approx(0.0, abs=1e-9)
    assert not is_physical(0.4 * np.eye(6))


def test_negative_radicand_is_an_error():
    cm = np.diag([1.0, -1.0, 1.0, -1.0])
    with pytest.raises(UnphysicalStateError):
        log_negativity(cm)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 2.0, 2.5, 3.0])
def test_tmsv_log_negativity_strong_squeezing(r):
    assert log_negativity(two_mode_squeezed_cm(r)) == pytest.approx(2 * r, abs=1e-10)


def test_tmsv_population_and_entries():
    cm = two_mode_squeezed_cm(1.0)
    assert mode_population(cm, 0) == pytest.approx(np.sinh(1.0) ** 2)
    assert two_mode_squeezed_cm(0.5)[0, 0] == pytest.approx(0.771540, abs=1e-6)


def test_population_additive_under_block_diag():
    a, b = two_mode_squeezed_cm(0.7), thermal_cm([1.25])
    combined = block_diag(a, b)
    assert populations(combined) == pytest.approx(np.concatenate([populations(a), populations(b)]))


@given(st.floats(0, 2 * np.pi), st.integers(0, 10_000))
def test_rotation_invariance_random_states(theta, seed):
    rng = np.random.default_rng(seed)
    # random pure-plus-thermal two-mode state built from a random symplectic map
    s = two_mode_squeezing_symplectic(rng.uniform(0, 1.5))
    rot = block_diag(phase_rotation(rng.uniform(0, 6.3)), phase_rotation(rng.uniform(0, 6.3)))
    cm = rot @ s @ thermal_cm(rng.uniform(0, 0.5, 2)) @ s.T @ rot.T
    local = block_diag(phase_rotation(theta), np.eye(2))
    assert abs(log_negativity(local @ cm @ local.T) - log_negativity(cm)) < 1e-9


def test_shape_errors():
    with pytest.raises(ValueError):
        smallest_symplectic_eigenvalue_pt(np.eye(6))
    with pytest.raises(ValueError):
        physicality_margin(np.eye(3))
    with pytest.raises(ValueError):
        two_mode_squeezed_cm(-0.1)
