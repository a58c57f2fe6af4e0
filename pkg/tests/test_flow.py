"""Flow driver: velocities, stepping, monitoring, snapshots, the ODE oracle."""

import numpy as np
import pytest

from pinchflow.canonical import make_surface, sample_grid
from pinchflow.errors import Extinct
from pinchflow.flow import (CSV_HEADER, FlowConfig, FlowState, mcf_velocity,
                            monitor, read_snapshot, run,
                            sphere_extinction_time, sphere_ode_oracle, step,
                            write_monitor_csv, write_snapshot)
from pinchflow.pinching import ConeParams


def geodesic_grid(rho, nu, nv):
    return sample_grid(make_surface("geodesic-sphere", rho=rho), nu, nv)


def test_sphere_ode_oracle_values():
    assert abs(sphere_extinction_time(np.pi / 3, 2) - np.log(2.0) / 2.0) < 1e-12
    got = sphere_ode_oracle(np.pi / 3, 2, 0.1)
    assert abs(got - np.arccos(0.5 * np.exp(0.2))) < 1e-10
    # the equator is a minimal surface: stationary for all time
    assert abs(sphere_ode_oracle(np.pi / 2, 2, 5.0) - np.pi / 2) < 1e-9
    with pytest.raises(Extinct):
        sphere_ode_oracle(np.pi / 3, 2, 0.4)


def test_sphere_ode_oracle_n3():
    # n = 3: cos rho(t) = cos(rho0) e^{3t}
    t = 0.05
    got = sphere_ode_oracle(np.pi / 3, 3, t)
    assert abs(got - np.arccos(0.5 * np.exp(3 * t))) < 1e-10
    assert abs(sphere_extinction_time(np.pi / 3, 3) - np.log(2.0) / 3.0) < 1e-12


def test_velocity_vanishes_on_minimal_surfaces():
    for kind, kw in (("geodesic-sphere", {"rho": np.pi / 2}),
                     ("clifford", {})):
        surf = make_surface(kind, **kw)
        grid = sample_grid(surf, 32, 64 if kind != "clifford" else 32)
        v = mcf_velocity(grid)
        assert np.abs(v[grid.valid_rows]).max() <= 1e-8


def test_velocity_magnitude_geodesic_sphere():
    grid = geodesic_grid(np.pi / 3, 64, 128)
    mag = np.linalg.norm(mcf_velocity(grid), axis=-1)[grid.valid_rows]
    # |H| = 2 cot(pi/3) = 2/sqrt(3), pointing down the radius of the cap
    assert abs(mag.max() - 2.0 / np.sqrt(3.0)) < 1e-5
    assert abs(mag.min() - 2.0 / np.sqrt(3.0)) < 1e-5


def test_step_equator_is_fixed_point():
    grid = geodesic_grid(np.pi / 2, 32, 64)
    state = FlowState(0.0, 0, grid.copy_with(grid.samples.copy()), 0.0)
    out = step(state, "euler", 0.2, 1e6, 0.75)
    assert np.abs(out.surface.samples - grid.samples).max() <= 1e-8
    assert out.step_index == 1
    # a2_max = 0 on the equator, so the max(1, .) floor kicks in
    assert out.dt_last == 0.2 * min(grid.du, grid.dv) ** 2


def test_step_dt_formula():
    grid = geodesic_grid(np.pi / 3, 64, 128)
    state = FlowState(0.0, 0, grid.copy_with(grid.samples.copy()), 0.0)
    out = step(state, "euler", 0.2, 1e6, 0.75)
    # a2_max = 2/3 < 1 for this cap, floor again active
    assert out.dt_last == 0.2 * min(grid.du, grid.dv) ** 2
    assert out.t == out.dt_last
    # points stay on the unit sphere after the renormalization
    radii = np.linalg.norm(out.surface.samples, axis=-1)
    assert np.abs(radii - 1.0).max() <= 1e-12


def test_run_tracks_shrinking_sphere_radius():
    grid = geodesic_grid(np.pi / 3, 64, 128)
    res = run(grid, FlowConfig(t_max=0.1, stride=25))
    traj = np.asarray(res.radius_trajectory)
    assert traj.shape[1] == 2
    assert traj[0, 0] == 0.0
    assert abs(traj[0, 1] - np.pi / 3) < 1e-6
    t_last, r_last = traj[-1]
    assert abs(r_last - sphere_ode_oracle(np.pi / 3, 2, t_last)) < 1e-3


def test_run_cfl_too_large_blows_up():
    grid = geodesic_grid(np.pi / 3, 32, 64)
    res = run(grid, FlowConfig(t_max=1.0, cfl=10.0))
    assert res.outcome == "NumericalBlowup"
    assert any("ceiling" in note for note in res.notes)


def test_monitor_without_cone():
    grid = geodesic_grid(np.pi / 3, 64, 128)
    rec = monitor(grid, FlowConfig(), 0.0)
    assert np.isnan(rec.q_min) and np.isnan(rec.q_max)
    assert abs(rec.ratio_max - 0.5) < 1e-9  # |A|^2/|H|^2 on any round cap
    assert abs(rec.kperp_min) < 1e-9 and abs(rec.kperp_max) < 1e-9
    assert rec.harnack_violations == 0
    assert rec.area > 0.0


def test_monitor_with_cone_and_harnack():
    grid = geodesic_grid(np.pi / 3, 64, 128)
    cfg = FlowConfig(cone=ConeParams("thm1", n=2),
                     harnack_csharp=1.0, harnack_delta0=0.1)
    rec = monitor(grid, cfg, 0.0)
    assert abs(rec.q_max - (-11.0 / 9.0)) < 1e-5
    assert abs(rec.q_min - (-11.0 / 9.0)) < 1e-5
    assert rec.harnack_violations == 0
    for key in ("h_max", "a2_max", "q_max"):
        assert key in rec.indices


def test_monitor_csv_deterministic(tmp_path):
    grid = geodesic_grid(np.pi / 3, 32, 64)
    cfg = FlowConfig()
    recs = [monitor(grid, cfg, 0.0), monitor(grid, cfg, 0.1)]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_monitor_csv(recs, p1)
    write_monitor_csv(recs, p2)
    b1, b2 = p1.read_bytes(), p2.read_bytes()
    assert b1 == b2
    assert b1.decode().splitlines()[0] == CSV_HEADER


def test_snapshot_roundtrip_bytes(tmp_path):
    grid = geodesic_grid(np.pi / 3, 16, 32)
    p1, p2 = tmp_path / "s1.txt", tmp_path / "s2.txt"
    write_snapshot(grid, p1, 0.125)
    back = read_snapshot(p1)
    assert back.topology == grid.topology
    assert (back.nu, back.nv) == (grid.nu, grid.nv)
    assert np.array_equal(back.samples, grid.samples)
    write_snapshot(back, p2, 0.125)
    assert p1.read_bytes() == p2.read_bytes()
