"""Stepper checks against closed-form flows and the integral form."""

import math

import numpy as np
import pytest

from gtsim.core import AccuracyWarning, ConfigurationError, Field, make_grid
from gtsim.data import gaussian_data
from gtsim.evolution import (
    SolverParams,
    StepSizeError,
    Trajectory,
    duhamel_residual,
    evolve,
    step,
    suggest_dt,
)
from gtsim.nonlinearity import GTConfig


def plane_wave(grid, a, m):
    k = 2 * np.pi * m / grid.L[0]
    return Field(grid, a * np.exp(1j * k * grid.x_axes[0]))


def plane_wave_flow(grid, a, m, t, cfg):
    """Single-mode flow is a pure phase rotation at rate mu |a|^p - gamma k^2."""
    k = 2 * np.pi * m / grid.L[0]
    mu = 1.0 if cfg.averaged else cfg.lam
    phase = (mu * abs(a) ** cfg.p - cfg.gamma * k * k) * t
    return a * np.exp(1j * k * grid.x_axes[0]) * np.exp(1j * phase)


@pytest.mark.parametrize("gamma,direction", [(-1.0, 1.0), (1.0, 1.0), (1.0, -1.0)])
def test_plane_wave_flow_matches_phase_rotation(gamma, direction):
    grid = make_grid(2 * np.pi, 32)
    a, m = 0.75, 2
    cfg = GTConfig(p=2, gamma=gamma)
    params = SolverParams(dt=0.01 * direction, t_final=0.5 * direction, capture_every=10)
    traj = evolve(plane_wave(grid, a, m), cfg, params)
    assert traj.flag == "completed"
    for t, u in zip(traj.times, traj.fields):
        exact = plane_wave_flow(grid, a, m, t, cfg)
        assert np.max(np.abs(u.values - exact)) < 1e-9


def test_plane_wave_integrated_variant_rate():
    grid = make_grid(2 * np.pi, 32)
    a, m, lam = 0.6, 1, 0.7
    cfg = GTConfig(p=2, gamma=-1.0, variant="integrated-interval", lam=lam)
    traj = evolve(plane_wave(grid, a, m), cfg, SolverParams(dt=0.01, t_final=0.3, capture_every=30))
    exact = plane_wave_flow(grid, a, m, 0.3, cfg)
    assert np.max(np.abs(traj.final.values - exact)) < 1e-9


@pytest.mark.parametrize("p,dt,t_final,tol", [(2, 0.01, 0.4, 1e-10), (8, 1e-3, 1e-2, 1e-12)])
def test_mass_and_energy_drift_is_time_integration_only(p, dt, t_final, tol):
    grid = make_grid(32.0, 256)
    u0 = gaussian_data(grid, amp=1.0, width=1.0)
    cfg = GTConfig(p=p, gamma=-1.0)
    traj = evolve(u0, cfg, SolverParams(dt=dt, t_final=t_final, capture_every=5))
    m0, e0 = traj.records[0].mass, traj.records[0].energy
    for r in traj.records[1:]:
        assert abs(r.mass - m0) / m0 < tol
        assert abs(r.energy - e0) / abs(e0) < tol


def test_captures_land_exactly_and_snap_final_time():
    grid = make_grid(2 * np.pi, 32)
    cfg = GTConfig(p=2, gamma=-1.0)
    params = SolverParams(dt=0.01, t_final=0.1, capture_every=3)
    traj = evolve(plane_wave(grid, 0.2, 1), cfg, params)
    spacing = 0.01 * 3
    assert traj.times == (0.0, spacing, 2 * spacing, 3 * spacing, 0.1)
    assert [r.t for r in traj.records] == list(traj.times)
    assert len(traj.fields) == len(traj.times)


def test_step_guard_raises_with_usable_required_dt():
    grid = make_grid(2 * np.pi, 32)
    u = plane_wave(grid, 2.0, 1)
    cfg = GTConfig(p=8, gamma=-1.0)
    with pytest.raises(StepSizeError) as err:
        step(u, 1e-3, cfg)
    required = err.value.required_dt
    assert required == pytest.approx(0.1 / (2.0**8 + 1.0))
    out = step(u, required, cfg)
    assert np.all(np.isfinite(out.values.view(np.float64)))


def test_evolve_shrinks_steps_under_guard_instead_of_failing():
    grid = make_grid(2 * np.pi, 32)
    u0 = plane_wave(grid, 1.0, 1)
    cfg = GTConfig(p=2, gamma=-1.0)
    # nominal dt carries 0.5 rad of nonlinear phase (error ~3e-4 if taken
    # whole); the guard at safety 0.01 forces ~100 sub-steps of 5e-3
    traj = evolve(u0, cfg, SolverParams(dt=0.5, t_final=0.5, safety=0.01))
    assert traj.flag == "completed"
    assert traj.times[-1] == 0.5
    exact = plane_wave_flow(grid, 1.0, 1, 0.5, cfg)
    assert np.max(np.abs(traj.final.values - exact)) < 1e-9


def test_blowup_flag_truncates_run():
    grid = make_grid(2 * np.pi, 32)
    u0 = plane_wave(grid, 2.0, 1)
    cfg = GTConfig(p=8, gamma=-1.0)
    params = SolverParams(dt=1e-3, t_final=5e-3, safety=0.01, min_step_fraction=0.5)
    traj = evolve(u0, cfg, params)
    assert traj.flag == "blowup-suspected"
    assert not traj.completed
    assert traj.times == (0.0,)


def test_duhamel_residual_small_for_true_flow_and_sees_corruption():
    grid = make_grid(32.0, 128)
    u0 = gaussian_data(grid, amp=1.0, width=1.5)
    cfg = GTConfig(p=2, gamma=-1.0)
    traj = evolve(u0, cfg, SolverParams(dt=0.01, t_final=0.12, capture_every=1))
    clean = duhamel_residual(traj)
    assert clean < 1e-9

    fields = list(traj.fields)
    k = len(fields) // 2
    fields[k] = Field(grid, fields[k].values * (1 + 1e-3))
    corrupted = Trajectory(
        cfg=traj.cfg,
        params=traj.params,
        times=traj.times,
        fields=tuple(fields),
        records=traj.records,
        flag=traj.flag,
    )
    assert duhamel_residual(corrupted) > 1e-4


def test_duhamel_residual_warns_on_few_captures():
    grid = make_grid(32.0, 128)
    u0 = gaussian_data(grid, amp=0.5, width=1.5)
    cfg = GTConfig(p=2, gamma=-1.0)
    traj = evolve(u0, cfg, SolverParams(dt=0.01, t_final=0.03, capture_every=1))
    assert len(traj.times) == 4
    with pytest.warns(AccuracyWarning):
        r = duhamel_residual(traj)
    assert r < 1e-8


def test_suggest_dt_tracks_sup_amplitude():
    grid = make_grid(2 * np.pi, 32)
    u = plane_wave(grid, 1.5, 1)
    cfg = GTConfig(p=4, gamma=-1.0)
    assert suggest_dt(u, cfg, phase=0.02) == pytest.approx(0.02 / (1.5**4 + 1.0))
    with pytest.raises(ConfigurationError):
        suggest_dt(u, cfg, phase=0.5)


def test_solver_params_validation():
    with pytest.raises(ConfigurationError):
        SolverParams(dt=0.0, t_final=1.0)
    with pytest.raises(ConfigurationError):
        SolverParams(dt=-0.01, t_final=1.0)
    with pytest.raises(ConfigurationError):
        SolverParams(dt=0.01, t_final=1.0, capture_every=0)
    with pytest.raises(ConfigurationError):
        SolverParams(dt=0.01, t_final=1.0, safety=0.2)
    with pytest.raises(ConfigurationError):
        SolverParams(dt=0.01, t_final=1.0, min_step_fraction=0.0)
    params = SolverParams(dt=0.01, t_final=1.0, hs_list=[1, -2])
    assert params.hs_list == (1.0, -2.0)
