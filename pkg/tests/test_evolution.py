import math

import numpy as np
import pytest

import hardynls as h
from hardynls.errors import (
    InconsistentEstimateError,
    InsufficientGrowthError,
    ParameterError,
)
from hardynls.evolution import TRACE_COLUMNS


def _soliton_error(gs, t_end, delta):
    grid = gs.profile.grid
    q = gs.profile.values.real
    dt = delta / max(1.0, gs.hardy)
    n_steps = int(round(t_end / dt))
    state = h.EvolutionState(t=0.0, field=gs.profile, dt=dt, step_count=0)
    for _ in range(n_steps):
        state = h.step(state, dt)
    err = math.sqrt(h.mass(h.Field(grid, np.abs(state.field.values) - q)) / gs.mass_sq)
    return err, state


def test_zero_stays_zero(grid_small):
    state = h.EvolutionState(t=0.0, field=h.Field(grid_small, np.zeros(grid_small.n)),
                             dt=1e-3, step_count=0)
    out = h.step(state, 1e-3)
    assert np.all(out.field.values == 0)


def test_linear_mode_mass_per_step(gs_small):
    grid = gs_small.profile.grid
    state = h.EvolutionState(t=0.0, field=gs_small.profile, dt=1e-3, step_count=0)
    m0 = h.mass(state.field)
    for _ in range(20):
        state = h.step(state, 1e-3, nonlinear=False)
        m1 = h.mass(state.field)
        assert abs(m1 - m0) < 1e-12 * m0
        m0 = m1


def test_soliton_invariance(gs_small):
    err, state = _soliton_error(gs_small, t_end=0.25, delta=0.01)
    assert err < 1e-4
    assert abs(h.mass(state.field) - gs_small.mass_sq) < 1e-10 * gs_small.mass_sq


def test_splitting_second_order(gs_small):
    err1, _ = _soliton_error(gs_small, t_end=0.2, delta=0.01)
    err2, _ = _soliton_error(gs_small, t_end=0.2, delta=0.005)
    assert err1 / err2 >= 2.7, (err1, err2)


def test_adaptive_dt_formula(gs_small):
    state = h.EvolutionState(t=0.0, field=gs_small.profile, dt=0.0, step_count=0)
    dt = h.adaptive_dt(state, 0.01)
    assert dt == 0.01 / max(1.0, gs_small.hardy)
    # doubling the Hardy functional halves the step (amplitude sqrt(2))
    f2 = h.Field(gs_small.profile.grid, math.sqrt(2.0) * gs_small.profile.values)
    dt2 = h.adaptive_dt(h.EvolutionState(0.0, f2, 0.0, 0), 0.01)
    assert abs(dt2 - dt / 2) < 1e-12 * dt


def test_adaptive_dt_range(gs_small):
    state = h.EvolutionState(t=0.0, field=gs_small.profile, dt=0.0, step_count=0)
    with pytest.raises(ParameterError):
        h.adaptive_dt(state, 1.5)


def test_blowup_run_terminates_cleanly(blowup_small):
    tr = blowup_small
    assert tr.termination == "blowup_resolved_limit"
    assert tr.growth() >= 299.0
    assert np.all(np.isfinite(tr.rows["hardy"]))
    assert tr.mass_drift() < 1e-8
    assert np.all(np.diff(tr.rows["t"]) > 0)


def test_trace_columns(blowup_small):
    assert tuple(blowup_small.rows.keys()) == TRACE_COLUMNS


def test_boundary_monitor_aborts(grid_small):
    u0 = h.Field(grid_small, np.exp(-((grid_small.radii - 46.0) ** 2)))
    tr = h.evolve(u0, h.EvolveConfig(delta_dt=0.01, t_end=1.0))
    assert tr.termination == "instability_detected"
    assert "under-resolved" in tr.note


def _synthetic_trace(power, t_star=2.0, n=400):
    t = t_star - np.geomspace(t_star, t_star / 4000.0, n)
    grad = (t_star - t) ** (-2 * power)          # ||grad u||^2
    hardy = 0.9 * grad
    rows = {c: np.zeros(n) for c in TRACE_COLUMNS}
    rows["t"], rows["gradient_term"], rows["hardy"] = t, grad, hardy
    rows["mass"] = np.ones(n)
    rows["dt"] = np.full(n, 1e-3)
    return h.EvolutionTrace(rows=rows, checkpoints=[], termination="blowup_resolved_limit")


def test_estimate_exact_sqrt_model():
    tr = _synthetic_trace(power=0.5)
    est = h.estimate_t_star(tr)
    assert abs(est.t_star - 2.0) < 1e-6
    assert abs(est.rate_infimum - 1.0) < 1e-6
    assert est.fit_residual < 1e-8
    assert est.t_star > est.fit_window[1]


def test_estimate_flags_wrong_exponent():
    # the decay mismatch must surface, either as a large reported residual or
    # as a refusal that carries the residual
    tr = _synthetic_trace(power=0.6)
    try:
        est = h.estimate_t_star(tr)
        assert est.fit_residual > 1e-3
    except InconsistentEstimateError as e:
        assert "residual" in str(e)
    tr2 = _synthetic_trace(power=0.4)
    est2 = h.estimate_t_star(tr2)
    assert est2.fit_residual > 1e-3


def test_estimate_requires_growth(gs_small):
    grid = gs_small.profile.grid
    u0 = h.Field(grid, 0.95 * gs_small.profile.values)
    tr = h.evolve(u0, h.EvolveConfig(delta_dt=0.02, t_end=0.3))
    assert tr.termination == "t_end_reached"
    with pytest.raises(InsufficientGrowthError):
        h.estimate_t_star(tr)


def test_estimate_stability_across_windows(blowup_small):
    e1 = h.estimate_t_star(blowup_small, window_growth=50.0)
    e2 = h.estimate_t_star(blowup_small, window_growth=150.0)
    assert abs(e2.rate_infimum - e1.rate_infimum) <= 0.2 * e1.rate_infimum
