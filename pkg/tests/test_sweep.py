import numpy as np
import pytest

from magnon_sim.models import Model, ParameterError
from magnon_sim.stability import eigen_stable
from magnon_sim.models import drift_matrix, params_from_detunings
from magnon_sim.sweep import Axis, GridSpec, ratio_sweep, run_sweep

DECAYS = {"kappa": 0.001, "gamma_1": 0.001, "gamma_2": 0.001}


def g_grid(n, d1, d2, model="rwa", task="stability"):
    step = 0.003 / n
    return GridSpec(Axis("g1", step, 0.003, n), Axis("g2", step, 0.003, n), {"Delta_1": d1, "Delta_2": d2, **DECAYS}, model, task)


def test_axis_validation():
    with pytest.raises(ParameterError):
        Axis("omega", 0, 1, 3)
    with pytest.raises(ParameterError):
        Axis("g1", 0, 1, 1)
    with pytest.raises(ParameterError):
        GridSpec(Axis("g1", 0, 1, 2), Axis("g1", 0, 1, 2))
    with pytest.raises(ParameterError):
        GridSpec(Axis("g1", 0, 1, 2), model="full")
    with pytest.raises(ParameterError):
        GridSpec(Axis("g1", 0, 1, 2), fixed={"nu_1": 3.0})


def test_row_major_order():
    spec = GridSpec(Axis("g1", 0.001, 0.002, 2), Axis("g2", 0.001, 0.003, 3), DECAYS, task="stability")
    coords = [r.coords for r in run_sweep(spec, jobs=1).rows]
    assert coords == [(a, b) for a in (0.001, 0.002) for b in (0.001, 0.002, 0.003)]


def test_degenerate_grid_gives_identical_rows():
    spec = GridSpec(Axis("g1", 0.001, 0.001, 2), Axis("g2", 0.002, 0.002, 2), DECAYS)
    rows = run_sweep(spec, jobs=1).rows
    assert len(rows) == 4
    assert all(r == rows[0] for r in rows)


def test_parallel_and_serial_tables_are_identical():
    spec = g_grid(6, 0.1, 0.2, task="both")
    assert run_sweep(spec, jobs=1) == run_sweep(spec, jobs=2)
    assert run_sweep(spec, jobs=1) == run_sweep(spec, jobs=1)


def test_entanglement_present_iff_stable_and_verdicts_reproduce():
    spec = g_grid(7, 0.0, 0.0, task="both")
    res = run_sweep(spec, jobs=1)
    assert any(r.stable for r in res.rows) and any(not r.stable for r in res.rows)
    for r in res.rows:
        assert (r.e_m1m2 is not None) == bool(r.stable)
        p = params_from_detunings(Delta_1=0.0, Delta_2=0.0, g1=r.coords[0], g2=r.coords[1], **DECAYS)
        assert eigen_stable(drift_matrix(p)).stable == r.stable


def test_large_detuning_all_stable():
    res = run_sweep(g_grid(11, 0.9, 0.9), jobs=1)
    assert all(r.stable for r in res.rows)


def test_stable_set_contains_the_coupling_ordered_half():
    res = run_sweep(g_grid(21, 0.0, 0.0), jobs=1)
    for r in res.rows:
        g1, g2 = r.coords
        if g2 >= g1:
            assert r.stable


def test_effective_model_fills_only_the_magnon_pair():
    spec = GridSpec(Axis("Delta_1", 0.5, 1.0, 3), Axis("Delta_2", 0.5, 1.0, 3), {"g1": 0.01, "g2": 0.01, **DECAYS}, Model.EFFECTIVE)
    for r in run_sweep(spec, jobs=1).rows:
        assert r.stable and r.e_cm1 is None and r.e_m1m2 > 0


def test_zero_detuning_cells_become_error_rows_for_the_effective_model():
    spec = GridSpec(Axis("Delta_1", 0.0, 0.5, 2), fixed={"Delta_2": 0.5, "g1": 0.01, "g2": 0.01}, model="effective")
    rows = run_sweep(spec, jobs=1).rows
    assert rows[0].error and rows[0].stable is None
    assert rows[1].error is None


def test_ratio_sweep_shape():
    curves = ratio_sweep([0.01, 0.05], Axis("g1_over_g2", 0.0, 0.99, 34), [0.005], jobs=1)
    assert [c.g2 for c in curves] == [0.01, 0.05]
    for c in curves:
        assert c.e_m1m2[0] == 0.0
        assert 0.0 < c.argmax_ratio < 0.99
    assert curves[0].argmax_ratio <= curves[1].argmax_ratio
    with pytest.raises(ParameterError):
        ratio_sweep([0.01], Axis("g1_over_g2", 0.0, 1.0, 3), [0.005])


def test_ratio_sweep_records_failed_cells():
    curves = ratio_sweep([0.05], Axis("g1_over_g2", 0.9999, 0.99999, 2), [0.005], jobs=1)
    assert curves[0].errors == 2
    assert np.all(np.isnan(curves[0].e_m1m2))
