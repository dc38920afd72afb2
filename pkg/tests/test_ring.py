"""Ring data, the amended potential, and its analytic derivatives.

Finite-difference oracles here are deliberately independent of the library:
plain central differences on the scalar potential.
"""

import numpy as np
import pytest

from vortexsphere import (
    CollisionError,
    amended_potential,
    gradient_V,
    hamiltonian_H,
    hessian_V,
    min_pair_distance,
    moment_G,
    pair_distances,
    polar_from_radius,
    radius_from_polar,
    ring_omega,
    ring_params,
    ring_positions,
    s_sum,
)


def trig_s_sum(k, n):
    # brute-force route: (1/2) sum_j sin^2(j k zeta/2) / sin^2(j zeta/2)
    zeta = 2.0 * np.pi / n
    j = np.arange(1, n)
    return 0.5 * np.sum(np.sin(0.5 * j * k * zeta) ** 2 / np.sin(0.5 * j * zeta) ** 2)


def fd_gradient(x, omega, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for j in range(x.shape[0]):
        for c in range(2):
            xp = x.copy()
            xm = x.copy()
            xp[j, c] += h
            xm[j, c] -= h
            g[j, c] = (amended_potential(xp, omega) - amended_potential(xm, omega)) / (2 * h)
    return g


def fd_hessian(x, params, h=1e-5):
    x = np.asarray(x, dtype=float)
    n2 = 2 * x.shape[0]
    H = np.zeros((n2, n2))
    flat = x.reshape(-1)
    for a in range(n2):
        xp = flat.copy()
        xm = flat.copy()
        xp[a] += h
        xm[a] -= h
        gp = gradient_V(xp.reshape(-1, 2), params).reshape(-1)
        gm = gradient_V(xm.reshape(-1, 2), params).reshape(-1)
        H[:, a] = (gp - gm) / (2 * h)
    return H


def test_s_sum_closed_form():
    worst = 0.0
    for n in range(3, 31):
        for k in range(1, n):
            worst = max(worst, abs(s_sum(k, n) - trig_s_sum(k, n)))
    print("s_sum worst error:", worst)
    assert worst < 1e-12
    assert s_sum(3, 3) == 0.0


def test_omega_values():
    # two hand-checked frequencies and the polar-angle form
    assert abs(ring_omega(3, 0.5) - 15.0 / 16.0) < 1e-15
    assert abs(ring_omega(5, 2.0) - (-15.0 / 8.0)) < 1e-15
    assert abs(ring_omega(3, 1.0)) == 0.0
    rng = np.random.default_rng(4)
    for theta in rng.uniform(0.3, np.pi - 0.3, size=8):
        for n in (3, 5, 8):
            r = radius_from_polar(theta)
            polar = -(n - 1) * np.cos(theta) / (2.0 * np.sin(theta) ** 2)
            assert abs(ring_omega(n, r) - polar) < 1e-12 * max(1.0, abs(polar))


def test_polar_radius_round_trip():
    rng = np.random.default_rng(5)
    for theta in rng.uniform(0.1, np.pi - 0.1, size=10):
        assert abs(polar_from_radius(radius_from_polar(theta)) - theta) < 1e-13
    with pytest.raises(ValueError):
        radius_from_polar(0.0)
    with pytest.raises(ValueError):
        radius_from_polar(np.pi)
    with pytest.raises(ValueError):
        polar_from_radius(-1.0)
    with pytest.raises(ValueError):
        ring_params(2, r=0.5)
    with pytest.raises(ValueError):
        ring_params(4, r=0.5, theta=1.0)
    with pytest.raises(ValueError):
        ring_params(4)


def test_ring_is_equilibrium():
    for n in range(3, 10):
        for r in (0.4, 0.8, 1.0, 1.5):
            params = ring_params(n, r=r)
            a = ring_positions(params)
            g = gradient_V(a, params)
            assert np.max(np.abs(g)) < 1e-10, (n, r)


def test_gradient_matches_fd():
    rng = np.random.default_rng(6)
    params = ring_params(5, r=0.9)
    x = ring_positions(params) + 0.05 * rng.normal(size=(5, 2))
    g = gradient_V(x, params)
    g_fd = fd_gradient(x, params.omega)
    err = np.max(np.abs(g - g_fd))
    print("gradient FD error:", err)
    assert err < 1e-7


def test_hessian_matches_fd():
    rng = np.random.default_rng(7)
    params = ring_params(4, r=1.2)
    x = ring_positions(params) + 0.05 * rng.normal(size=(4, 2))
    H = hessian_V(x, params)
    assert np.allclose(H, H.T, atol=1e-12)
    err = np.max(np.abs(H - fd_hessian(x, params)))
    print("hessian FD error:", err)
    assert err < 1e-6


def test_energy_values():
    # equatorial 3-ring: three pairs at squared chord 3/4 in chart terms
    params3 = ring_params(3, r=1.0)
    H3 = hamiltonian_H(ring_positions(params3))
    assert abs(H3 - (-1.5 * np.log(0.75))) < 1e-13
    # equatorial 4-ring: 4 edges at log(1/2), diagonals at log 1
    params4 = ring_params(4, r=1.0)
    H4 = hamiltonian_H(ring_positions(params4))
    assert abs(H4 - 2.0 * np.log(2.0)) < 1e-13


def test_moment_values():
    rng = np.random.default_rng(8)
    for n in (3, 6):
        for r in (0.5, 1.0, 2.0):
            params = ring_params(n, r=r)
            G = moment_G(ring_positions(params))
            assert abs(G - 2.0 * n * r**2 / (1.0 + r**2)) < 1e-13
    # amended potential is the stated combination
    params = ring_params(4, r=0.7)
    x = ring_positions(params) + 0.02 * rng.normal(size=(4, 2))
    V = amended_potential(x, params.omega)
    assert abs(V - (params.omega * moment_G(x) + hamiltonian_H(x))) < 1e-14


def test_pair_distances():
    params = ring_params(4, r=1.0)
    d = pair_distances(ring_positions(params))
    assert d.shape == (6,)
    assert abs(min_pair_distance(ring_positions(params)) - np.sqrt(2.0)) < 1e-14


def test_collision_guard():
    x = np.array([[0.1, 0.0], [0.1 + 1e-9, 0.0], [-0.5, 0.2]])
    params = ring_params(3, r=0.5)
    with pytest.raises(CollisionError):
        hamiltonian_H(x)
    with pytest.raises(CollisionError):
        gradient_V(x, params)
    with pytest.raises(CollisionError):
        hessian_V(x, params)
