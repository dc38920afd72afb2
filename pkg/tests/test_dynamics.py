"""Tests for the direct integration oracle: rigid rings, invariants, frames."""

import csv

import numpy as np
import pytest

from vortexsphere import (
    APPROACH_THRESHOLD,
    CollisionApproach,
    CollisionError,
    SimState,
    chart_hamiltonian,
    hamiltonian_H,
    integrate,
    moment_G,
    rhs_rotating_chart,
    rhs_sphere,
    ring_params,
    ring_positions,
    ring_state,
    rotation,
    sphere_hamiltonian,
    sphere_moment,
    stereo_lift,
    stereo_project,
)


def rotate_z(v, angle):
    """Rotate (n, 3) sphere points about the z-axis."""
    out = np.array(v, dtype=float)
    out[:, :2] = out[:, :2] @ rotation(angle).T
    return out


def random_sphere_state(rng, n, min_sep=0.5):
    while True:
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        diff = v[:, None, :] - v[None, :, :]
        d = np.sqrt(np.sum(diff**2, axis=-1))
        if np.min(d[np.triu_indices(n, k=1)]) > min_sep:
            return v


def test_ring_rotates_rigidly():
    p = ring_params(4, r=0.8)
    state = ring_state(p, mode="sphere")
    v0 = state.state
    traj = integrate(state, 2.0, tol=1e-12, n_out=41)
    for ti, vi in zip(traj.t, traj.states):
        # uniform rotation about the z-axis at the ring frequency
        assert np.max(np.abs(vi - rotate_z(v0, p.omega * ti))) < 1e-10
    print("rigid rotation err %.3e" % np.max(np.abs(traj.states[-1] - rotate_z(v0, p.omega * 2.0))))


def test_ring_is_chart_fixed_point():
    p = ring_params(5, r=1.3)
    x0 = ring_positions(p)
    assert np.max(np.abs(rhs_rotating_chart(x0, 0.7, p))) < 1e-12
    traj = integrate(ring_state(p, mode="chart"), 3.0, tol=1e-12, n_out=11, nu=0.7)
    assert np.max(np.abs(traj.states - x0[None])) < 1e-9


def test_invariants_on_random_state():
    rng = np.random.default_rng(1)
    v0 = random_sphere_state(rng, 5)
    traj = integrate(SimState(mode="sphere", state=v0), 20.0, tol=1e-12, n_out=81)
    h_drift = np.max(np.abs(traj.energy - traj.energy[0]))
    m_drift = np.max(np.abs(traj.moment - traj.moment[0]))
    norms = np.linalg.norm(traj.states, axis=-1)
    print("H drift %.2e, Mz drift %.2e" % (h_drift, m_drift))
    assert h_drift < 1e-9
    assert m_drift < 1e-9
    # dense output interpolates between renormalized steps, so tol-level only
    assert np.max(np.abs(norms - 1.0)) < 1e-10


def test_chart_matches_sphere():
    # same motion computed two ways: rotating chart run mapped back with the
    # frame rotation, against the plain sphere run projected to the chart
    rng = np.random.default_rng(3)
    p = ring_params(3, r=0.9)
    x0 = ring_positions(p) + 0.05 * rng.standard_normal((3, 2))
    nu = 0.8
    t_phys = 1.0

    chart = integrate(SimState(mode="chart", state=x0, params=p), nu * t_phys, tol=1e-12, n_out=2, nu=nu)
    q_pred = chart.states[-1] @ rotation(p.omega * t_phys).T

    sphere = integrate(SimState(mode="sphere", state=stereo_lift(x0)), t_phys, tol=1e-12, n_out=2)
    q_direct = stereo_project(sphere.states[-1])

    err = np.max(np.abs(q_pred - q_direct))
    print("chart vs sphere at t=1: %.3e" % err)
    assert err < 1e-10
    assert np.max(np.abs(chart.energy - chart.energy[0])) < 1e-10
    assert np.max(np.abs(sphere.energy - sphere.energy[0])) < 1e-10


def test_rotation_equivariance():
    rng = np.random.default_rng(4)
    v0 = random_sphere_state(rng, 4)
    alpha = 0.7
    a = integrate(SimState(mode="sphere", state=v0), 3.0, tol=1e-12, n_out=7)
    b = integrate(SimState(mode="sphere", state=rotate_z(v0, alpha)), 3.0, tol=1e-12, n_out=7)
    for va, vb in zip(a.states, b.states):
        assert np.max(np.abs(rotate_z(va, alpha) - vb)) < 1e-9


def test_reflection_reverses_time():
    # the reflection y -> -y sends the velocity field to its negative, so
    # reflecting, integrating, and reflecting back undoes a forward run
    refl = np.diag([1.0, -1.0, 1.0])
    rng = np.random.default_rng(5)
    v0 = random_sphere_state(rng, 4)
    assert np.max(np.abs(rhs_sphere(v0 @ refl) + rhs_sphere(v0) @ refl)) < 1e-13

    fwd = integrate(SimState(mode="sphere", state=v0), 2.0, tol=1e-12, n_out=2)
    back = integrate(SimState(mode="sphere", state=fwd.states[-1] @ refl), 2.0, tol=1e-12, n_out=2)
    assert np.max(np.abs(back.states[-1] @ refl - v0)) < 1e-9


def test_energy_and_moment_identities():
    rng = np.random.default_rng(2)
    for n in (3, 5):
        x = rng.standard_normal((n, 2))
        v = stereo_lift(x)
        assert abs(chart_hamiltonian(x) - sphere_hamiltonian(v)) < 1e-12
        assert abs(chart_hamiltonian(x) - hamiltonian_H(x)) < 1e-12
        assert abs(moment_G(x) - (n + sphere_moment(v))) < 1e-12


def test_collision_guards():
    v = np.array([[0.0, 0.0, 1.0], [0.0, 5e-7, 1.0], [1.0, 0.0, 0.0]])
    v /= np.linalg.norm(v, axis=1)[:, None]
    with pytest.raises(CollisionApproach):
        integrate(SimState(mode="sphere", state=v), 1.0)
    v2 = np.array([[0.0, 0.0, 1.0], [0.0, 5e-9, 1.0], [1.0, 0.0, 0.0]])
    v2 /= np.linalg.norm(v2, axis=1)[:, None]
    with pytest.raises(CollisionError):
        rhs_sphere(v2)
    assert APPROACH_THRESHOLD > 0


def test_input_validation():
    p = ring_params(3, r=1.0)
    x0 = ring_positions(p)
    with pytest.raises(ValueError):
        integrate(SimState(mode="chart", state=x0), 1.0)  # params missing
    with pytest.raises(ValueError):
        integrate(SimState(mode="chart", state=x0, params=p), 1.0, nu=0.0)
    with pytest.raises(ValueError):
        integrate(SimState(mode="tube", state=x0), 1.0)
    flat = integrate(SimState(mode="chart", state=x0, params=p), 0.0)
    assert flat.states.shape == (1, 3, 2)


def test_ring_state_modes():
    p = ring_params(6, r=0.7)
    chart = ring_state(p, mode="chart")
    sphere = ring_state(p, mode="sphere")
    assert np.allclose(chart.state, ring_positions(p))
    assert np.allclose(sphere.state, stereo_lift(ring_positions(p)))
    assert chart.params is p and sphere.params is p


def test_csv_round_trip(tmp_path):
    p = ring_params(3, r=1.0)
    traj = integrate(ring_state(p, mode="sphere"), 0.5, tol=1e-10, n_out=5)
    path = tmp_path / "orbit.csv"
    traj.write_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t"] + [f"v{j}_{c}" for j in (1, 2, 3) for c in ("x", "y", "z")] + ["H", "Mz"]
    assert len(rows) == 6
    first = np.array([float(u) for u in rows[1]])
    assert first[0] == 0.0
    assert np.allclose(first[1:10].reshape(3, 3), traj.states[0])
    assert np.allclose(first[10], traj.energy[0])

    ctraj = integrate(ring_state(p, mode="chart"), 0.5, tol=1e-10, n_out=5, nu=1.0)
    cpath = tmp_path / "orbit_chart.csv"
    ctraj.write_csv(cpath)
    with open(cpath, newline="") as fh:
        head = next(csv.reader(fh))
    assert head == ["t"] + [f"x{j}_{c}" for j in (1, 2, 3) for c in ("re", "im")] + ["H", "G"]
