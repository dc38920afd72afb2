"""Fourier representation of symmetry-reduced vortex loops.

A relative periodic orbit with the discrete symmetry
x_j(t) = e^{i j zeta} x_n(t + j k zeta) is determined by the single path
x_n. Loops store the truncated Fourier coefficients of that path; the other
vortices are reconstructed by per-mode phase shifts and rigid rotations, so
the symmetry holds by construction and the collocation residual only needs
the n-th component of the vector field.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ChartEscape, CollisionError
from .geometry import J, conformal_weight, rotation
from .ring import COLLISION_THRESHOLD, ring_positions
from .spectral import R_REFLECT, hessian_full

#: Iterates and loops must stay inside |x| <= CHART_LIMIT.
CHART_LIMIT = 1e3


def default_grid(p):
    """Collocation size for truncation order p (4x oversampling, odd)."""
    return 4 * p + 1


def grid_times(N):
    return 2.0 * np.pi * np.arange(N) / N


@dataclass
class FourierLoop:
    """Real planar loop x(t) = sum_{|l| <= p} c_l e^{ilt}, c_{-l} = conj(c_l).

    coeffs holds c_l for l = 0..p as complex 2-vectors; mode 0 is real.
    """

    p: int
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.p + 1, 2):
            raise ValueError("coefficient array must have shape (p+1, 2)")
        self.coeffs[0] = self.coeffs[0].real

    def copy(self):
        return FourierLoop(self.p, self.coeffs.copy())

    def l2_norm(self):
        c = self.coeffs
        total = np.sum(np.abs(c[0]) ** 2) + 2.0 * np.sum(np.abs(c[1:]) ** 2)
        return float(np.sqrt(2.0 * np.pi * total))

    def h1_norm(self):
        c = self.coeffs
        l = np.arange(self.p + 1)
        w = 1.0 + l**2
        total = np.sum(np.abs(c[0]) ** 2) + 2.0 * np.sum(
            w[1:, None] * np.abs(c[1:]) ** 2
        )
        return float(np.sqrt(2.0 * np.pi * total))


@dataclass
class LoopConfig:
    """A reduced loop together with its symmetry class and frequency."""

    loop: FourierLoop
    k: int
    params: object  # RingParams
    nu: float
    resonances: list = field(default_factory=list)

    def copy(self):
        return LoopConfig(
            loop=self.loop.copy(),
            k=self.k,
            params=self.params,
            nu=self.nu,
            resonances=list(self.resonances),
        )


def constant_loop(point, p):
    """Loop frozen at a single chart point."""
    c = np.zeros((p + 1, 2), dtype=complex)
    c[0] = np.asarray(point, dtype=float)
    return FourierLoop(p, c)


def equilibrium_config(params, k, nu, p):
    """The ring as a reduced loop (constant path of vortex n)."""
    return LoopConfig(
        loop=constant_loop(ring_positions(params)[-1], p),
        k=k,
        params=params,
        nu=nu,
    )


def loop_grid(loop, N=None):
    """Sample the loop at N equispaced times, shape (N, 2)."""
    if N is None:
        N = default_grid(loop.p)
    spec = np.zeros((N // 2 + 1, 2), dtype=complex)
    spec[: loop.p + 1] = N * loop.coeffs
    return np.fft.irfft(spec, n=N, axis=0)


def loop_from_grid(samples, p):
    """Project N >= 4p+1 samples onto the first p+1 Fourier modes."""
    samples = np.asarray(samples, dtype=float)
    N = samples.shape[0]
    if N < default_grid(p):
        raise ValueError("need at least 4p+1 samples")
    spec = np.fft.rfft(samples, axis=0)[: p + 1] / N
    spec[0] = spec[0].real
    return FourierLoop(p, spec)


def loop_eval(loop, t):
    """Evaluate the loop at arbitrary times; t scalar -> (2,), array -> (T, 2)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    tt = np.atleast_1d(t)
    l = np.arange(loop.p + 1)
    E = np.exp(1j * np.outer(tt, l))
    w = np.ones(loop.p + 1)
    w[1:] = 2.0
    vals = np.real(E @ (w[:, None] * loop.coeffs))
    return vals[0] if scalar else vals


def _extension_data(cfg):
    """Per-vortex phases and rotations realizing the symmetry."""
    n, zeta = cfg.params.n, cfg.params.zeta
    j = np.arange(1, n + 1)
    l = np.arange(cfg.loop.p + 1)
    phases = np.exp(1j * cfg.k * zeta * np.outer(j, l))  # (n, p+1)
    rots = np.stack([rotation(jj * zeta) for jj in j])  # (n, 2, 2)
    return phases, rots


def extended_coeffs(cfg):
    """Fourier coefficients of every vortex path, shape (n, p+1, 2)."""
    phases, rots = _extension_data(cfg)
    rotated = np.einsum("jab,lb->jla", rots, cfg.loop.coeffs)
    return phases[:, :, None] * rotated


def _coeffs_to_grid(coeffs, N):
    """irfft along the mode axis for stacked coefficient arrays (..., p+1, 2)."""
    p = coeffs.shape[-2] - 1
    spec = np.zeros(coeffs.shape[:-2] + (N // 2 + 1, 2), dtype=complex)
    spec[..., : p + 1, :] = N * coeffs
    return np.fft.irfft(spec, n=N, axis=-2)


def extended_grid(cfg, N=None):
    """Samples of all vortex paths on the collocation grid, shape (n, N, 2)."""
    if N is None:
        N = default_grid(cfg.loop.p)
    return _coeffs_to_grid(extended_coeffs(cfg), N)


def symmetry_extend(cfg, t):
    """Full configuration at time t; scalar t -> (n, 2), array -> (T, n, 2)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    tt = np.atleast_1d(t)
    n, zeta, k = cfg.params.n, cfg.params.zeta, cfg.k
    out = np.empty((tt.size, n, 2))
    for j in range(1, n + 1):
        path = loop_eval(cfg.loop, tt + j * k * zeta)
        out[:, j - 1] = path @ rotation(j * zeta).T
    return out[0] if scalar else out


def symmetry_defect(cfg, N=None):
    """Sup-norm mismatch between the two extension routes.

    Compares the spectral extension (per-mode phases + inverse FFT) against
    direct evaluation of x_j(t) = R(j zeta) x_n(t + j k zeta) on the grid.
    Zero up to rounding whenever both routes realize the same symmetry.
    """
    if N is None:
        N = default_grid(cfg.loop.p)
    spectral = extended_grid(cfg, N)  # (n, N, 2)
    direct = symmetry_extend(cfg, grid_times(N))  # (N, n, 2)
    return float(np.max(np.abs(spectral - direct.transpose(1, 0, 2))))


def time_derivative(coeffs):
    """Coefficients of d/dt: c_l -> i l c_l; broadcasts over leading axis."""
    l = np.arange(coeffs.shape[0])
    return 1j * l.reshape((-1,) + (1,) * (coeffs.ndim - 1)) * coeffs


def rotation_generator(coeffs):
    """Coefficients of the rigid rotation generator: c_l -> J c_l."""
    return coeffs @ J.T


def realify(coeffs):
    """Flatten to reals: [c_0, Re c_1, Im c_1, ..., Re c_p, Im c_p]."""
    p = coeffs.shape[0] - 1
    out = np.empty(4 * p + 2)
    out[:2] = coeffs[0].real
    body = out[2:].reshape(p, 2, 2)
    body[:, 0, :] = coeffs[1:].real
    body[:, 1, :] = coeffs[1:].imag
    return out


def complexify(vec, p):
    """Inverse of realify."""
    out = np.zeros((p + 1, 2), dtype=complex)
    out[0] = vec[:2]
    body = np.asarray(vec[2:], dtype=float).reshape(p, 2, 2)
    out[1:] = body[:, 0, :] + 1j * body[:, 1, :]
    return out


def gram_weights(p):
    """L^2 weights of the realified coordinates (Parseval)."""
    w = np.full(4 * p + 2, 2.0)
    w[:2] = 1.0
    return 2.0 * np.pi * w


def loop_inner(ca, cb):
    """L^2 inner product of two real loops given by their coefficients."""
    p = ca.shape[0] - 1
    return float(np.dot(gram_weights(p) * realify(ca), realify(cb)))


class CollisionMargin(NamedTuple):
    margin: float  # min over the grid of the min pairwise distance
    chart_radius: float  # max over the grid and vortices of |x_j|


def collision_margin(cfg, N=None):
    x = extended_grid(cfg, N)  # (n, N, 2)
    diff = x[:, None, :, :] - x[None, :, :, :]
    d = np.sqrt(np.sum(diff**2, axis=-1))  # (n, n, N)
    iu = np.triu_indices(x.shape[0], k=1)
    margin = float(np.min(d[iu]))
    radius = float(np.max(np.sqrt(np.sum(x**2, axis=-1))))
    return CollisionMargin(margin, radius)


def _batch_gradient_row_n(x, params):
    """grad_{x_n} V at each grid time for stacked configs x of shape (N, n, 2)."""
    n = params.n
    xn = x[:, -1, :]
    s = np.sum(xn * xn, axis=-1)
    grad = params.omega * 4.0 * xn / (1.0 + s)[:, None] ** 2
    grad += (n - 1) * xn / (1.0 + s)[:, None]
    diff = xn[:, None, :] - x[:, :-1, :]  # (N, n-1, 2)
    d2 = np.sum(diff * diff, axis=-1)
    if np.min(d2) < COLLISION_THRESHOLD**2:
        raise CollisionError("loop evaluation hit a near-collision")
    grad -= np.sum(diff / d2[:, :, None], axis=1)
    return grad


def _samples_for_residual(cfg, N):
    coeffs = cfg.loop.coeffs
    x_all = _coeffs_to_grid(extended_coeffs(cfg), N)  # (n, N, 2)
    if np.max(np.abs(x_all)) > CHART_LIMIT:
        raise ChartEscape("loop left the chart region |x| <= %g" % CHART_LIMIT)
    xdot_n = _coeffs_to_grid(time_derivative(coeffs), N)
    return x_all, xdot_n


def reduced_residual(cfg, N=None):
    """Galerkin residual coefficients of the reduced loop, shape (p+1, 2).

    The underlying field is f = -nu * 4(1+|x|^2)^{-2} J x' + grad V(x),
    evaluated in its n-th component on the collocation grid and projected
    back onto modes 0..p.
    """
    p = cfg.loop.p
    if N is None:
        N = default_grid(p)
    x_all, xdot_n = _samples_for_residual(cfg, N)
    xn = x_all[-1]
    f = -cfg.nu * conformal_weight(xn)[:, None] * (xdot_n @ J.T)
    f += _batch_gradient_row_n(x_all.transpose(1, 0, 2), cfg.params)
    spec = np.fft.rfft(f, axis=0)[: p + 1] / N
    spec[0] = spec[0].real
    return spec


def residual_f(cfg, N=None):
    """Samples of the full residual field f_j(t_m), shape (n, N, 2)."""
    p = cfg.loop.p
    if N is None:
        N = default_grid(p)
    ext = extended_coeffs(cfg)
    x_all = _coeffs_to_grid(ext, N)
    if np.max(np.abs(x_all)) > CHART_LIMIT:
        raise ChartEscape("loop left the chart region |x| <= %g" % CHART_LIMIT)
    xdot_all = _coeffs_to_grid(time_derivative(ext.transpose(1, 0, 2)).transpose(1, 0, 2), N)
    configs = x_all.transpose(1, 0, 2)  # (N, n, 2)
    grads = _batch_gradient_all(configs, cfg.params)  # (N, n, 2)
    w = conformal_weight(x_all)  # (n, N)
    f = -cfg.nu * w[:, :, None] * (xdot_all @ J.T) + grads.transpose(1, 0, 2)
    return f


def _batch_gradient_all(x, params):
    """Gradient of V at stacked configurations x of shape (N, n, 2)."""
    n = params.n
    s = np.sum(x * x, axis=-1)
    grad = params.omega * 4.0 * x / (1.0 + s)[:, :, None] ** 2
    grad += (n - 1) * x / (1.0 + s)[:, :, None]
    diff = x[:, :, None, :] - x[:, None, :, :]  # (N, n, n, 2)
    d2 = np.sum(diff * diff, axis=-1)
    idx = np.arange(n)
    offdiag = d2 + np.where(idx[None, :, None] == idx[None, None, :], 1.0, 0.0)
    mask = np.min(d2 + np.where(idx[:, None] == idx[None, :], np.inf, 0.0), axis=(1, 2))
    if np.min(mask) < COLLISION_THRESHOLD**2:
        raise CollisionError("loop evaluation hit a near-collision")
    kern = diff / offdiag[..., None]
    kern[:, idx, idx, :] = 0.0
    grad -= np.sum(kern, axis=2)
    return grad


def orthogonality_defect(cfg, N=None):
    """Trapezoid values of <f, x'> and <f, Jx> over the full configuration.

    Both vanish structurally for any loop: the first because J is skew and
    grad V integrates a total derivative, the second pointwise by rotation
    invariance of V.
    """
    p = cfg.loop.p
    if N is None:
        N = default_grid(p)
    f = residual_f(cfg, N)
    ext = extended_coeffs(cfg)
    xdot = _coeffs_to_grid(time_derivative(ext.transpose(1, 0, 2)).transpose(1, 0, 2), N)
    x = _coeffs_to_grid(ext, N)
    dt = 2.0 * np.pi / N
    d_time = dt * np.sum(f * xdot)
    d_rot = dt * np.sum(f * (x @ J.T))
    return float(abs(d_time)), float(abs(d_rot))


def linearized_block_matrix(l, nu, params):
    """Mode-l linearization at the ring: M(l nu) = -4(1+r^2)^{-2} l nu iJ + D^2 V."""
    n = params.n
    weight = 4.0 / (1.0 + params.r**2) ** 2
    iJ_full = np.kron(np.eye(n), 1j * J)
    return -weight * l * nu * iJ_full + hessian_full(params).astype(complex)


class _LinearizationData(NamedTuple):
    x_all: np.ndarray  # (n, N, 2)
    xdot_n: np.ndarray  # (N, 2)
    w_n: np.ndarray  # (N,)
    gradw_n: np.ndarray  # (N, 2)
    hrow: np.ndarray  # (N, n, 2, 2) blocks d(grad_n V)/d(x_i)


def _linearization_data(cfg, N):
    x_all, xdot_n = _samples_for_residual(cfg, N)
    xn = x_all[-1]
    s = np.sum(xn * xn, axis=-1)
    w_n = conformal_weight(xn)
    gradw_n = -16.0 * xn / (1.0 + s)[:, None] ** 3
    n = cfg.params.n
    eye = np.eye(2)
    hrow = np.zeros((N, n, 2, 2))
    dg = (
        4.0 * eye / (1.0 + s)[:, None, None] ** 2
        - 16.0 * xn[:, :, None] * xn[:, None, :] / (1.0 + s)[:, None, None] ** 3
    )
    dh = (
        eye / (1.0 + s)[:, None, None]
        - 2.0 * xn[:, :, None] * xn[:, None, :] / (1.0 + s)[:, None, None] ** 2
    )
    hnn = cfg.params.omega * dg + (n - 1) * dh
    for i in range(n - 1):
        d = xn - x_all[i]
        d2 = np.sum(d * d, axis=-1)
        de = (
            eye / d2[:, None, None]
            - 2.0 * d[:, :, None] * d[:, None, :] / d2[:, None, None] ** 2
        )
        hrow[:, i] = de
        hnn -= de
    hrow[:, n - 1] = hnn
    return _LinearizationData(x_all, xdot_n, w_n, gradw_n, hrow)


def _apply_linearized(cfg, data, delta_coeffs, N):
    """Directional derivative of the reduced residual along delta_coeffs."""
    p = cfg.loop.p
    delta_cfg = LoopConfig(FourierLoop(p, delta_coeffs), cfg.k, cfg.params, cfg.nu)
    dx_all = _coeffs_to_grid(extended_coeffs(delta_cfg), N)  # (n, N, 2)
    dxdot_n = _coeffs_to_grid(time_derivative(delta_coeffs), N)
    dxn = dx_all[-1]
    term = -cfg.nu * (
        np.sum(data.gradw_n * dxn, axis=-1)[:, None] * (data.xdot_n @ J.T)
        + data.w_n[:, None] * (dxdot_n @ J.T)
    )
    term += np.einsum("mjab,jmb->ma", data.hrow, dx_all)
    spec = np.fft.rfft(term, axis=0)[: p + 1] / N
    spec[0] = spec[0].real
    return spec


def nu_derivative(cfg, N=None):
    """d/d nu of the reduced residual: coefficients of -w(x_n) J x_n'."""
    p = cfg.loop.p
    if N is None:
        N = default_grid(p)
    x_all, xdot_n = _samples_for_residual(cfg, N)
    w = conformal_weight(x_all[-1])
    f = -w[:, None] * (xdot_n @ J.T)
    spec = np.fft.rfft(f, axis=0)[: p + 1] / N
    spec[0] = spec[0].real
    return spec


def reduced_jacobian(cfg, N=None):
    """Dense Jacobian of the realified reduced residual, plus the nu column.

    Returns (J_c, dF_dnu) with J_c of shape (4p+2, 4p+2). Columns are built
    by applying the analytic linearization to coordinate directions; the
    delta-complexification makes each column exact, not a finite difference.
    """
    p = cfg.loop.p
    if N is None:
        N = default_grid(p)
    data = _linearization_data(cfg, N)
    m = 4 * p + 2
    Jc = np.empty((m, m))
    basis = np.zeros(m)
    for col in range(m):
        basis[col] = 1.0
        delta = complexify(basis, p)
        Jc[:, col] = realify(_apply_linearized(cfg, data, delta, N))
        basis[col] = 0.0
    dnu = realify(nu_derivative(cfg, N))
    return Jc, dnu


def kappa_image(cfg):
    """Reversor image of a reduced loop: x_n(t) -> diag(1,-1) x_n(-t).

    The full family maps to the reflected, time-reversed curves with vortex
    j taking over the track of vortex n-j; that family satisfies the same
    class-k closure at the same frequency, so residual magnitudes are
    preserved exactly. Comparing a loop with its image tests whether the
    orbit itself is reversor-symmetric, without ever assuming it is.
    """
    c = cfg.loop.coeffs
    reflected = np.conj(c) @ R_REFLECT.T
    return LoopConfig(
        loop=FourierLoop(cfg.loop.p, reflected),
        k=cfg.k,
        params=cfg.params,
        nu=cfg.nu,
        resonances=list(cfg.resonances),
    )
