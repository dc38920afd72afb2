"""Fourier loops, symmetry extension, reduced residual, and its Jacobian."""

import numpy as np
import pytest

from vortexsphere import (
    ChartEscape,
    CollisionError,
    FourierLoop,
    LoopConfig,
    block_m,
    collision_margin,
    complexify,
    constant_loop,
    critical_frequency,
    equilibrium_config,
    isotypic_basis,
    linearized_block_matrix,
    loop_eval,
    loop_from_grid,
    loop_grid,
    loop_inner,
    nu_derivative,
    orthogonality_defect,
    realify,
    reduced_jacobian,
    reduced_residual,
    residual_f,
    ring_params,
    ring_positions,
    symmetry_defect,
    symmetry_extend,
    time_derivative,
)
from vortexsphere.geometry import rotation
from vortexsphere.loops import default_grid, extended_grid, grid_times, kappa_image


def random_loop(rng, p, base=None, scale=0.05):
    # smooth random loop: decaying mode amplitudes around an optional center
    c = np.zeros((p + 1, 2), dtype=complex)
    if base is not None:
        c[0] = base
    amps = scale / (1.0 + np.arange(1, p + 1)) ** 2
    c[1:] = amps[:, None] * (
        rng.normal(size=(p, 2)) + 1j * rng.normal(size=(p, 2))
    )
    return FourierLoop(p, c)


def test_grid_round_trip():
    rng = np.random.default_rng(10)
    loop = random_loop(rng, 6, base=[0.4, -0.2], scale=0.3)
    for N in (default_grid(6), 64):
        back = loop_from_grid(loop_grid(loop, N), 6)
        assert np.max(np.abs(back.coeffs - loop.coeffs)) < 1e-14
    with pytest.raises(ValueError):
        loop_from_grid(loop_grid(loop, 64)[: 4 * 6], 6)


def test_eval_matches_grid():
    rng = np.random.default_rng(11)
    loop = random_loop(rng, 5, base=[0.1, 0.9])
    N = 31
    assert np.max(np.abs(loop_eval(loop, grid_times(N)) - loop_grid(loop, N))) < 1e-13
    # scalar call agrees with the array call
    assert np.allclose(loop_eval(loop, 0.7), loop_eval(loop, np.array([0.7]))[0])


def test_realify_round_trip():
    rng = np.random.default_rng(12)
    loop = random_loop(rng, 4, base=[1.0, 2.0])
    vec = realify(loop.coeffs)
    assert vec.shape == (4 * 4 + 2,)
    assert np.allclose(vec[:2], [1.0, 2.0])
    assert np.max(np.abs(complexify(vec, 4) - loop.coeffs)) < 1e-16


def test_parseval():
    rng = np.random.default_rng(13)
    loop = random_loop(rng, 5, base=[0.3, 0.0], scale=0.5)
    inner = loop_inner(loop.coeffs, loop.coeffs)
    assert abs(inner - loop.l2_norm() ** 2) < 1e-12
    N = 64
    x = loop_grid(loop, N)
    quad = 2.0 * np.pi / N * np.sum(x * x)
    assert abs(inner - quad) < 1e-12


def test_time_derivative_matches_fd():
    rng = np.random.default_rng(14)
    loop = random_loop(rng, 6, base=[0.2, -0.5], scale=0.4)
    dloop = FourierLoop(6, time_derivative(loop.coeffs))
    h = 1e-6
    for t in rng.uniform(0, 2 * np.pi, size=5):
        fd = (loop_eval(loop, t + h) - loop_eval(loop, t - h)) / (2 * h)
        assert np.max(np.abs(loop_eval(dloop, t) - fd)) < 1e-8


def test_symmetry_extension():
    params = ring_params(4, r=0.8)
    cfg = equilibrium_config(params, 3, 0.3, p=8)
    assert symmetry_defect(cfg) < 1e-13
    # constant reduced loop extends to the ring at every time
    x = extended_grid(cfg)
    a = ring_positions(params)
    assert np.max(np.abs(x - a[:, None, :])) < 1e-13
    # direct formula x_j(t) = R(j zeta) x_n(t + j k zeta)
    rng = np.random.default_rng(15)
    cfg.loop = random_loop(rng, 8, base=a[-1], scale=0.05)
    assert symmetry_defect(cfg) < 1e-12
    t = 0.37
    ext = symmetry_extend(cfg, np.array([t]))[0]
    for j in range(1, 5):
        direct = rotation(j * params.zeta) @ loop_eval(cfg.loop, t + j * 3 * params.zeta)
        assert np.max(np.abs(ext[j - 1] - direct)) < 1e-13


def test_equilibrium_residual_zero():
    for n, r, k in ((3, 0.6, 1), (5, 1.1, 2)):
        params = ring_params(n, r=r)
        cfg = equilibrium_config(params, k, 0.4, p=6)
        res = reduced_residual(cfg)
        assert np.max(np.abs(res)) < 1e-12


def test_residual_row_consistency():
    # specialized row-n residual equals row n of the full field, projected
    rng = np.random.default_rng(16)
    params = ring_params(4, r=0.8)
    cfg = equilibrium_config(params, 3, 0.35, p=8)
    cfg.loop = random_loop(rng, 8, base=ring_positions(params)[-1], scale=0.04)
    N = default_grid(8)
    f_n = residual_f(cfg, N)[-1]
    spec = np.fft.rfft(f_n, axis=0)[:9] / N
    spec[0] = spec[0].real
    assert np.max(np.abs(spec - reduced_residual(cfg, N))) < 1e-12


def test_orthogonality_defects():
    rng = np.random.default_rng(17)
    params = ring_params(4, r=0.8)
    cfg = equilibrium_config(params, 3, 0.3, p=10)
    cfg.loop = random_loop(rng, 10, base=ring_positions(params)[-1], scale=0.03)
    d_time, d_rot = orthogonality_defect(cfg)
    print("defects:", d_time, d_rot)
    assert d_time < 1e-10
    assert d_rot < 1e-10


def test_collision_margin_values():
    cfg3 = equilibrium_config(ring_params(3, r=1.0), 1, 0.2, p=4)
    m3 = collision_margin(cfg3)
    assert abs(m3.margin - np.sqrt(3.0)) < 1e-13
    assert abs(m3.chart_radius - 1.0) < 1e-13
    cfg4 = equilibrium_config(ring_params(4, r=1.0), 1, 0.2, p=4)
    assert abs(collision_margin(cfg4).margin - np.sqrt(2.0)) < 1e-13


def test_linearized_block_diagonalizes():
    params = ring_params(5, r=0.7)
    basis = isotypic_basis(5)
    for l, nu in ((1, 0.4), (3, 0.11)):
        M = basis.P.conj().T @ linearized_block_matrix(l, nu, params) @ basis.P
        for j in range(1, 6):
            sl = slice(2 * (j - 1), 2 * j)
            assert np.max(np.abs(M[sl, sl] - block_m(j, l * nu, params))) < 1e-10
    # at the critical frequency the matrix is singular with a 2D kernel
    nu1 = critical_frequency(1, params)
    M = linearized_block_matrix(1, nu1, params)
    sv = np.linalg.svd(M, compute_uv=False)
    assert np.sum(sv < 1e-8 * sv[0]) == 2


def test_jacobian_matches_fd():
    rng = np.random.default_rng(18)
    params = ring_params(4, r=0.8)
    p = 4
    cfg = equilibrium_config(params, 3, 0.3, p=p)
    cfg.loop = random_loop(rng, p, base=ring_positions(params)[-1], scale=0.03)
    N = default_grid(p)
    Jc, dnu = reduced_jacobian(cfg, N)
    m = 4 * p + 2
    h = 1e-6
    vec0 = realify(cfg.loop.coeffs)
    Jfd = np.zeros((m, m))
    for col in range(m):
        vp, vm = vec0.copy(), vec0.copy()
        vp[col] += h
        vm[col] -= h
        cp = cfg.copy()
        cp.loop = FourierLoop(p, complexify(vp, p))
        cm = cfg.copy()
        cm.loop = FourierLoop(p, complexify(vm, p))
        Jfd[:, col] = (
            realify(reduced_residual(cp, N)) - realify(reduced_residual(cm, N))
        ) / (2 * h)
    err = np.max(np.abs(Jc - Jfd))
    print("jacobian FD error:", err)
    assert err < 1e-6
    cp = cfg.copy()
    cp.nu += h
    cm = cfg.copy()
    cm.nu -= h
    dnu_fd = (realify(reduced_residual(cp, N)) - realify(reduced_residual(cm, N))) / (2 * h)
    assert np.max(np.abs(dnu - dnu_fd)) < 1e-7


def test_jacobian_kernel_at_seed():
    params = ring_params(4, r=0.8)
    k = 3
    nu_k = critical_frequency(k, params)
    cfg = equilibrium_config(params, k, nu_k, p=6)
    Jc, dnu = reduced_jacobian(cfg)
    sv = np.linalg.svd(Jc, compute_uv=False)
    dim = int(np.sum(sv < 1e-8 * sv[0]))
    print("square kernel dim:", dim)
    assert dim == 3
    # the frequency column vanishes on a constant loop, widening the
    # rectangular kernel by one
    assert np.max(np.abs(dnu)) < 1e-13
    rect = np.column_stack([Jc, dnu])
    rank = np.linalg.matrix_rank(rect, tol=1e-8 * sv[0])
    assert rect.shape[1] - rank == 4


def test_kappa_reversor():
    rng = np.random.default_rng(19)
    params = ring_params(5, r=0.7)
    cfg = equilibrium_config(params, 2, 0.3, p=6)
    cfg.loop = random_loop(rng, 6, base=ring_positions(params)[-1], scale=0.02)
    image = kappa_image(cfg)
    assert image.k == cfg.k and image.nu == cfg.nu
    back = kappa_image(image)
    assert np.max(np.abs(back.loop.coeffs - cfg.loop.coeffs)) < 1e-16
    # the image family is the reflected, time-reversed original with vortex
    # j running on the old track of vortex n-j
    R = np.diag([1.0, -1.0])
    t = np.linspace(0.0, 2.0 * np.pi, 17)
    X = symmetry_extend(cfg, -t)
    Y = symmetry_extend(image, t)
    for j in range(1, 6):
        i = (5 - j) or 5
        assert np.max(np.abs(Y[:, j - 1] - X[:, i - 1] @ R.T)) < 1e-14
    # consequence: identical residual magnitude profiles
    res_a = np.sort(np.abs(realify(reduced_residual(cfg))))
    res_b = np.sort(np.abs(realify(reduced_residual(image))))
    assert np.max(np.abs(res_a - res_b)) < 1e-13


def test_guard_rails():
    params = ring_params(3, r=0.5)
    cfg = equilibrium_config(params, 1, 0.4, p=4)
    big = cfg.copy()
    big.loop = constant_loop([1e7, 0.0], 4)
    with pytest.raises(ChartEscape):
        reduced_residual(big)
    # a loop at the origin stacks all vortices and trips the collision guard
    clash = cfg.copy()
    clash.loop = constant_loop([0.0, 0.0], 4)
    with pytest.raises(CollisionError):
        residual_f(clash)
