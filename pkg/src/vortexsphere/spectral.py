"""Mode-wise spectral data of the ring equilibrium.

The Hessian of the amended potential is block circulant up to conjugation by
per-vortex rotations; an isotypic basis turns it into n independent 2x2
Hermitian blocks B_k. Pairing each block with the rotation term gives the
frequency pencils m_k(nu) whose determinant roots are the candidate
bifurcation frequencies nu_k.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateAt, NoBifurcation
from .geometry import J, rotation

#: Reflection diag(1, -1), the chart version of complex conjugation.
R_REFLECT = np.diag([1.0, -1.0])


def hessian_minor(j, params):
    """Off-diagonal Hessian block d(grad_n V)/d(x_j) at the ring, j = 1..n-1.

    Closed form (2 r sin(j zeta/2))^{-2} e^{j zeta J} R.
    """
    n, r, zeta = params.n, params.r, params.zeta
    if not 1 <= j <= n - 1:
        raise ValueError("minor index must lie in 1..n-1")
    scale = 1.0 / (2.0 * r * np.sin(0.5 * j * zeta)) ** 2
    return scale * rotation(j * zeta) @ R_REFLECT


def hessian_A(params):
    """The isolated-vortex block A = s_1 r^{-2} I - 4 s_1 (1+r^2)^{-2} diag(1,0)."""
    s1, r = params.s[0], params.r
    return s1 / r**2 * np.eye(2) - 4.0 * s1 / (1.0 + r**2) ** 2 * np.diag([1.0, 0.0])


def hessian_full(params):
    """Assemble the full (2n, 2n) Hessian at the ring from row n.

    Row n is A_nj for j = 1..n-1 plus A_nn = A - sum_j A_nj; the other rows
    follow from equivariance, M_{i,j} = e^{-(n-i) zeta J} M_{n, (j-i) mod n}
    e^{(n-i) zeta J}.
    """
    n, zeta = params.n, params.zeta
    row = [hessian_minor(j, params) for j in range(1, n)]
    a_nn = hessian_A(params) - sum(row)
    row.append(a_nn)  # row[j-1] = A_nj with A_nn last
    M = np.zeros((n, n, 2, 2))
    for i in range(1, n + 1):
        rot = rotation((n - i) * zeta)
        for j in range(1, n + 1):
            M[i - 1, j - 1] = rot.T @ row[(j - i) % n - 1] @ rot
    return M.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


@dataclass(frozen=True)
class IsotypicBasis:
    """Unitary change of basis splitting the ring Hessian into 2x2 blocks."""

    n: int
    P: np.ndarray  # complex, shape (2n, 2n); columns grouped by mode k = 1..n

    def column_block(self, k):
        """The two columns spanning the mode-k isotypic component."""
        return self.P[:, 2 * (k - 1) : 2 * k]

    def apply(self, k, w):
        """Embed a C^2 vector into the full space along mode k."""
        return self.column_block(k) @ np.asarray(w, dtype=complex)


def isotypic_basis(n):
    """Build the mode basis T_k(w)_j = n^{-1/2} e^{i j k zeta} e^{j zeta J} w."""
    zeta = 2.0 * np.pi / n
    P = np.zeros((2 * n, 2 * n), dtype=complex)
    for k in range(1, n + 1):
        for j in range(1, n + 1):
            block = np.exp(1j * j * k * zeta) * rotation(j * zeta) / np.sqrt(n)
            P[2 * (j - 1) : 2 * j, 2 * (k - 1) : 2 * k] = block
    return IsotypicBasis(n=n, P=P)


def block_B(k, params):
    """Mode-k Hessian block, 2x2 Hermitian (here real diagonal).

    B_k = s_1 r^{-2} I + (s_1 - s_k) r^{-2} R - 4 s_1 (1+r^2)^{-2} diag(1,0),
    with B_{n-k} = B_k and e_2^T B_n e_2 = 0 (rotation kernel).
    """
    n, r = params.n, params.r
    if not 1 <= k <= n:
        raise ValueError("mode index must lie in 1..n")
    s1, sk = params.s[0], params.s[k - 1]
    B = (
        s1 / r**2 * np.eye(2)
        + (s1 - sk) / r**2 * R_REFLECT
        - 4.0 * s1 / (1.0 + r**2) ** 2 * np.diag([1.0, 0.0])
    )
    return B.astype(complex)


def block_m(k, nu, params):
    """Frequency pencil m_k(nu) = -nu * (iJ) * 4(1+r^2)^{-2} + B_k."""
    weight = 4.0 / (1.0 + params.r**2) ** 2
    return -nu * weight * (1j * J) + block_B(k, params)


def det_d(k, nu, params):
    """Determinant of the pencil in closed form.

    d_k(nu) = -16 nu^2 (1+r^2)^{-4}
              + r^{-4} s_k (2 s_1 - s_k - 4 s_1 r^2 (1+r^2)^{-2}).
    """
    r = params.r
    s1, sk = params.s[0], params.s[k - 1]
    return (
        -16.0 * nu**2 / (1.0 + r**2) ** 4
        + sk * (2.0 * s1 - sk - 4.0 * s1 * r**2 / (1.0 + r**2) ** 2) / r**4
    )


def mode_margin(k, params):
    """Slack of the bifurcation inequality 4r^2(1+r^2)^{-2} < 2 - s_k/s_1."""
    r = params.r
    s1, sk = params.s[0], params.s[k - 1]
    return (2.0 - sk / s1) - 4.0 * r**2 / (1.0 + r**2) ** 2


def critical_frequency(k, params):
    """Positive root nu_k of the pencil determinant, or None.

    Exists exactly when the mode inequality holds strictly; then
    nu_k = (1+r^2)^2/(4r^2) * sqrt(s_k (2 s_1 - s_k - 4 s_1 r^2 (1+r^2)^{-2})).
    """
    r = params.r
    s1, sk = params.s[0], params.s[k - 1]
    if mode_margin(k, params) <= 0.0:
        return None
    radicand = sk * (2.0 * s1 - sk - 4.0 * s1 * r**2 / (1.0 + r**2) ** 2)
    nu = (1.0 + r**2) ** 2 / (4.0 * r**2) * np.sqrt(radicand)
    if nu <= 0.0:
        return None
    return float(nu)


def morse_index(k, nu, params):
    """Number of negative eigenvalues of m_k(nu); raises if the block is singular."""
    block = block_m(k, nu, params)
    det = np.real(np.linalg.det(block))
    tr = np.real(np.trace(block))
    scale = max(1.0, tr * tr)
    if abs(det) < 1e-12 * scale:
        raise DegenerateAt("mode %d pencil is singular at nu = %.17g" % (k, nu))
    if det > 0.0:
        return 0 if tr > 0.0 else 2
    return 1


def morse_jump(k, params, rel_step=1e-4):
    """Index jump n_k(nu_k - h) - n_k(nu_k + h) across the critical frequency.

    The index rises from 0 to 1 as nu crosses nu_k upward, so the jump is
    -1 at every simple crossing; a nonzero jump forces bifurcation.
    """
    nu = critical_frequency(k, params)
    if nu is None:
        raise NoBifurcation("mode %d has no critical frequency" % k)
    h = rel_step * nu
    return morse_index(k, nu - h, params) - morse_index(k, nu + h, params)


def resonance_check(k, params, l_max, tol=1e-9):
    """List (l, j) with l*nu_k = nu_j for 2 <= l <= l_max, j != k.

    Only modes j with an existing critical frequency participate.
    """
    nu_k = critical_frequency(k, params)
    if nu_k is None:
        return []
    hits = []
    others = {
        j: critical_frequency(j, params)
        for j in range(1, params.n)
        if j != k
    }
    for l in range(2, l_max + 1):
        for j, nu_j in others.items():
            if nu_j is None:
                continue
            if abs(l * nu_k - nu_j) < tol * max(1.0, abs(nu_j)):
                hits.append((l, j))
    return hits


@dataclass
class StabilityReport:
    """Outcome of the polar-angle linear stability inequality."""

    n: int
    theta: float
    stable: bool
    boundary: bool
    margins: list = field(default_factory=list)  # (k, lhs, margin) rows
    failing: list = field(default_factory=list)


def stability_verdict(n, theta):
    """Check k(n-k)/(n-1) - 1 < cos^2(theta) for every mode k = 1..n-1."""
    if n < 3:
        raise ValueError("need at least three vortices")
    if not 0.0 < theta < np.pi:
        raise ValueError("polar angle must lie strictly between 0 and pi")
    c2 = np.cos(theta) ** 2
    margins = []
    failing = []
    for k in range(1, n):
        lhs = k * (n - k) / (n - 1) - 1.0
        margin = c2 - lhs
        margins.append((k, lhs, margin))
        if margin <= 0.0:
            failing.append(k)
    min_margin = min(m for _, _, m in margins)
    boundary = abs(min_margin) < 1e-12
    return StabilityReport(
        n=n,
        theta=theta,
        stable=min_margin > 0.0,
        boundary=boundary,
        margins=margins,
        failing=failing,
    )


@dataclass
class SpectralBlock:
    """Everything one mode carries: block, pencil, frequency, index data."""

    k: int
    s_k: float
    B: np.ndarray
    pencil: object  # nu -> m_k(nu)
    det_at: object  # nu -> d_k(nu)
    trace: float
    nu_crit: float | None
    margin: float
    resonances: list
    morse_jump: int | None


def spectral_block(k, params, l_max=None):
    """Assemble the mode-k report (block, pencil, frequency, resonances)."""
    if l_max is None:
        l_max = 2 * 32
    nu = critical_frequency(k, params)
    jump = None
    if nu is not None:
        try:
            jump = morse_jump(k, params)
        except DegenerateAt:
            jump = None
    return SpectralBlock(
        k=k,
        s_k=float(params.s[k - 1]),
        B=block_B(k, params),
        pencil=lambda nu_val, _k=k, _p=params: block_m(_k, nu_val, _p),
        det_at=lambda nu_val, _k=k, _p=params: det_d(_k, nu_val, _p),
        trace=float(np.real(np.trace(block_B(k, params)))),
        nu_crit=nu,
        margin=float(mode_margin(k, params)),
        resonances=resonance_check(k, params, l_max) if nu is not None else [],
        morse_jump=jump,
    )
