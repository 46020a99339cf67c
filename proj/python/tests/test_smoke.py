import math

import numpy as np
import pytest

import flagsim


def coarse(name="fitted_sec2"):
    config = flagsim.preset(name)
    config.nodes_per_tail = 6
    config.dt = 0.02 * config.time_scale()
    config.interface_hold = 1.0
    return config


def test_presets_round_trip():
    assert set(flagsim.preset_names()) == {"fitted_sec2", "control_sec4"}
    config = flagsim.preset("control_sec4")
    again = flagsim.parse_config(config.serialize())
    assert again.tails == 2
    assert again.c_yr == pytest.approx(config.c_yr)


def test_invalid_config_raises():
    config = flagsim.preset("fitted_sec2")
    config.tail_length = -1.0
    with pytest.raises(flagsim.ConfigError):
        config.validate()


def test_rft_coefficients_ordered():
    mu0, s = 1.49, 0.11 / 3.2e-3
    par = flagsim.rft_parallel(mu0, s)
    perp = flagsim.rft_perpendicular(mu0, s)
    assert 0 < par < perp < 2.5 * par


def test_schedule_and_short_simulation():
    config = coarse()
    schedule = flagsim.ActuationSchedule.constant(15.0, 2.0)
    assert schedule.omega_at(1.0) == 15.0
    options = flagsim.SimulationOptions()
    options.output_stride = 0.1
    traj = flagsim.simulate(config, schedule, options)
    pos = traj.head_position
    assert pos.shape == (len(traj), 3)
    assert np.all(np.isfinite(pos))
    assert np.allclose(np.linalg.norm(traj.head_axis, axis=1), 1.0, atol=1e-9)
    assert traj.omega_motor[-1] == 15.0


def test_fit_circle_recovers_radius():
    theta = np.linspace(0.0, 2.0 * math.pi, 40, endpoint=False)
    pts = np.column_stack([1.0 + 0.3 * np.cos(theta), -2.0 + 0.3 * np.sin(theta)])
    fit = flagsim.fit_circle(pts)
    assert fit.radius == pytest.approx(0.3, rel=1e-9)
    assert fit.center == pytest.approx([1.0, -2.0])


def test_plan_line_from_hand_written_map():
    m = flagsim.MotionPrimitiveMap()
    m.omega_H = 15.0
    m.omega_yr = -0.3
    m.R_yr = 0.1
    m.path_speed = 0.03
    m.heading_signed = 1.6
    m.theta_heading = 1.6
    m.tail_length = 0.11
    plan = flagsim.plan_line(m, 1.0)
    assert plan.waypoints[-1].p == pytest.approx([1.0, 0.0], abs=1e-6)
    assert set(np.sign(plan.schedule.omegas)) == {-1.0, 1.0}
    with pytest.raises(flagsim.PlanError):
        flagsim.plan_circle(m, -1.0)
    parsed = flagsim.parse_primitive_map(m.to_text())
    assert parsed.omega_yr == m.omega_yr
