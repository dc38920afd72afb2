"""Polygonal ring data and the rotating-frame vortex potential.

Configurations are real arrays of shape (n, 2): one chart point per vortex.
The amended potential V = omega*G + H drives everything downstream; its
gradient and Hessian are analytic, with finite differences kept to the tests.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CollisionError

#: Pairwise chart distance below which evaluation refuses to proceed.
COLLISION_THRESHOLD = 1e-8


def s_sum(k, n):
    """Mode interaction sum s_k = k(n-k)/2.

    Closed form of (1/2) * sum_{j=1}^{n-1} sin^2(j k zeta/2)/sin^2(j zeta/2)
    with zeta = 2 pi / n; the trigonometric route is exercised in the tests.
    """
    return 0.5 * k * (n - k)


def ring_omega(n, r):
    """Rotation frequency of the n-ring at chart radius r.

    Evaluates two equivalent closed forms and insists they agree; a
    disagreement would mean a scaling bug rather than a math question.
    """
    if n < 3:
        raise ValueError("need at least three vortices")
    if r <= 0.0:
        raise ValueError("radius must be positive")
    s1 = s_sum(1, n)
    omega_a = s1 * (1.0 - r**4) / (4.0 * r**2)
    omega_b = (n - 1) * (1.0 - r**4) / (8.0 * r**2)
    scale = max(1.0, abs(omega_a))
    if abs(omega_a - omega_b) > 8 * np.finfo(float).eps * scale:
        raise AssertionError("omega closed forms disagree")
    return omega_a


def radius_from_polar(theta):
    """Chart radius of the latitude circle at polar angle theta in (0, pi)."""
    if not 0.0 < theta < np.pi:
        raise ValueError("polar angle must lie strictly between 0 and pi")
    c = np.cos(theta)
    return float(np.sqrt((1.0 + c) / (1.0 - c)))


def polar_from_radius(r):
    """Inverse of radius_from_polar: cos(theta) = (r^2 - 1)/(r^2 + 1)."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return float(np.arccos((r**2 - 1.0) / (r**2 + 1.0)))


@dataclass(frozen=True)
class RingParams:
    """Fixed data of an n-ring: size, chart radius, frequency, mode sums."""

    n: int
    r: float
    zeta: float
    omega: float
    s: np.ndarray  # s[k-1] = s_k for k = 1..n (s_n = 0)

    def __post_init__(self):
        self.s.setflags(write=False)


def ring_params(n, r=None, theta=None):
    """Build RingParams from either the chart radius or the polar angle."""
    if (r is None) == (theta is None):
        raise ValueError("give exactly one of r and theta")
    if theta is not None:
        r = radius_from_polar(theta)
    n = int(n)
    if n < 3:
        raise ValueError("need at least three vortices")
    r = float(r)
    s = np.array([s_sum(k, n) for k in range(1, n + 1)])
    return RingParams(n=n, r=r, zeta=2.0 * np.pi / n, omega=ring_omega(n, r), s=s)


def ring_positions(params):
    """Equilibrium chart positions a_j = r e^{i j zeta}, j = 1..n; shape (n, 2)."""
    angles = params.zeta * np.arange(1, params.n + 1)
    return params.r * np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def pair_distances(x):
    """Condensed vector of pairwise chart distances |x_i - x_j|, i < j."""
    x = np.asarray(x, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt(np.sum(diff * diff, axis=-1))
    iu = np.triu_indices(len(x), k=1)
    return d[iu]


def min_pair_distance(x):
    return float(np.min(pair_distances(x)))


def _check_collision(x):
    if min_pair_distance(x) < COLLISION_THRESHOLD:
        raise CollisionError("pairwise distance below %g" % COLLISION_THRESHOLD)


def hamiltonian_H(x):
    """Interaction energy -1/2 sum_{i<j} log(|xj-xi|^2 / ((1+|xj|^2)(1+|xi|^2)))."""
    x = np.asarray(x, dtype=float)
    _check_collision(x)
    n = len(x)
    one_plus = 1.0 + np.sum(x * x, axis=-1)
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d2 = np.sum((x[j] - x[i]) ** 2)
            total += np.log(d2 / (one_plus[i] * one_plus[j]))
    return -0.5 * total


def moment_G(x):
    """Chart moment map G = 2 sum_j |x_j|^2 / (1 + |x_j|^2)."""
    s = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
    return float(2.0 * np.sum(s / (1.0 + s)))


def amended_potential(x, omega):
    """Rotating-frame potential V = omega*G + H."""
    return omega * moment_G(x) + hamiltonian_H(x)


def gradient_V(x, params):
    """Gradient of the amended potential, one 2-vector row per vortex.

    grad_j V = omega * 4 x_j/(1+|x_j|^2)^2
               - sum_{i != j} [ (x_j - x_i)/|x_j - x_i|^2 - x_j/(1+|x_j|^2) ].

    Vanishes at the ring positions by construction of omega.
    """
    x = np.asarray(x, dtype=float)
    _check_collision(x)
    n = len(x)
    s = np.sum(x * x, axis=-1)
    grad = params.omega * 4.0 * x / (1.0 + s)[:, None] ** 2
    grad += (n - 1) * x / (1.0 + s)[:, None]
    diff = x[:, None, :] - x[None, :, :]  # diff[j, i] = x_j - x_i
    d2 = np.sum(diff * diff, axis=-1)
    np.fill_diagonal(d2, 1.0)
    kern = diff / d2[:, :, None]
    idx = np.arange(n)
    kern[idx, idx] = 0.0
    grad -= np.sum(kern, axis=1)
    return grad


def _d_inverse_kernel(d):
    """Jacobian of d |-> d/|d|^2 for rows of 2-vectors d."""
    d2 = np.sum(d * d, axis=-1)
    eye = np.eye(2)
    return (
        eye / d2[..., None, None]
        - 2.0 * d[..., :, None] * d[..., None, :] / d2[..., None, None] ** 2
    )


def hessian_V(x, params):
    """Analytic Hessian of V at an arbitrary configuration, shape (2n, 2n).

    Assembled directly from the gradient terms; the ring-specific closed
    forms live in the spectral module and are compared against this.
    """
    x = np.asarray(x, dtype=float)
    _check_collision(x)
    n = len(x)
    s = np.sum(x * x, axis=-1)
    eye = np.eye(2)
    H = np.zeros((n, n, 2, 2))
    for j in range(n):
        xj = x[j]
        sj = s[j]
        dg = 4.0 * eye / (1.0 + sj) ** 2 - 16.0 * np.outer(xj, xj) / (1.0 + sj) ** 3
        dh = eye / (1.0 + sj) - 2.0 * np.outer(xj, xj) / (1.0 + sj) ** 2
        H[j, j] = params.omega * dg + (n - 1) * dh
    diff = x[:, None, :] - x[None, :, :]
    for j in range(n):
        for i in range(n):
            if i == j:
                continue
            de = _d_inverse_kernel(diff[j, i])
            H[j, j] -= de
            H[j, i] = de
    return H.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
