"""Detection and certification of choreographies along a branch.

A branch point whose frequency hits a rational multiple nu = omega*m/ell of
the ring frequency lifts to the inertial frame as a single closed curve
traversed by all vortices with fixed delays. The combinatorics (which
rationals are admissible, and the delay shift k_tilde) depend only on the
symmetry class; the numerics re-converge the point at the exact rational
frequency and then measure the alignment on a fine grid.

The inertial curve is Q_j(t) = e^{i t omega/nu} x_j(t). The physical ratio
omega/nu is used for the phase, so the single-curve identities close only
when nu actually equals omega*m/ell; perturbing nu visibly breaks them.
"""

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .continuation import BranchPoint, newton_correct
from .errors import (
    ChartEscape,
    CollisionError,
    Degenerate,
    FrequencyMismatch,
    NoConvergence,
    NotCoprime,
)
from .geometry import rotation, stereo_lift
from .loops import default_grid, loop_eval, symmetry_extend

#: Alignment and rotation residuals must both fall below this to accept.
CERT_TOLERANCE = 1e-8


def modular_inverse(ell, m):
    """Inverse of ell modulo m, with the convention 0 when m = 1."""
    if m < 1 or ell < 1:
        raise ValueError("need positive integers")
    if m == 1:
        return 0
    if math.gcd(ell, m) != 1:
        raise NotCoprime("%d has no inverse modulo %d" % (ell, m))
    return pow(ell, -1, m)


def admissible_ratios(k, n, denom_max):
    """Coprime pairs (ell, m) with k*ell - m divisible by n, entries <= denom_max.

    Sorted by the frequency ratio m/ell.
    """
    pairs = []
    for ell in range(1, denom_max + 1):
        for m in range(1, denom_max + 1):
            if math.gcd(ell, m) != 1:
                continue
            if (k * ell - m) % n == 0:
                pairs.append((ell, m))
    pairs.sort(key=lambda pair: pair[1] / pair[0])
    return pairs


def k_tilde(k, ell, m, n):
    """Delay shift of the inertial curve: k - (k*ell - m) * ell_star.

    Requires k*ell = m (mod n); ell_star is the m-modular inverse of ell.
    """
    if (k * ell - m) % n != 0:
        raise ValueError("pair (%d, %d) is not admissible for class %d" % (ell, m, k))
    ell_star = modular_inverse(ell, m)
    return k - (k * ell - m) * ell_star


@dataclass
class ChoreographyCert:
    """Rational data of one crossing plus its measured residuals."""

    ell: int
    m: int
    ell_star: int
    k_tilde: int
    k_tilde_mod_n: int
    nu_target: float
    alignment_residual: float | None = None
    rotation_residual: float | None = None
    periodicity_residual: float | None = None
    config: object | None = None  # re-converged LoopConfig, not serialized

    @property
    def nu(self):
        return self.nu_target

    @property
    def accepted(self):
        return (
            self.alignment_residual is not None
            and self.alignment_residual < CERT_TOLERANCE
            and self.rotation_residual < CERT_TOLERANCE
        )


def choreography_cert(k, n, omega, ell, m):
    """Build the integer part of a certificate for the pair (ell, m)."""
    kt = k_tilde(k, ell, m, n)
    return ChoreographyCert(
        ell=ell,
        m=m,
        ell_star=modular_inverse(ell, m),
        k_tilde=kt,
        k_tilde_mod_n=kt % n,
        nu_target=omega * m / ell,
    )


def _rotate_paths(x, angles):
    """Apply per-time rotations to paths; x (..., T, 2), angles (T,)."""
    c, s = np.cos(angles), np.sin(angles)
    out = np.empty_like(x)
    out[..., 0] = c * x[..., 0] - s * x[..., 1]
    out[..., 1] = s * x[..., 0] + c * x[..., 1]
    return out


def sample_inertial(cfg, m, points_per_period=None):
    """Sample Q_n(t) = e^{i t omega/nu} x_n(t) over one inertial period.

    Returns (t, Q) with t covering [0, 2*pi*m) uniformly.
    """
    base = points_per_period or default_grid(cfg.loop.p)
    N = base * m
    t = 2.0 * np.pi * m * np.arange(N) / N
    Q = _rotate_paths(loop_eval(cfg.loop, t), t * (cfg.params.omega / cfg.nu))
    return t, Q


def inertial_orbit(point, ell, m, match_tol=0.1, tol=1e-10):
    """Re-converge a branch point at nu = omega*m/ell and sample Q_n.

    Returns (t, Q, cfg) with t covering [0, 2*pi*m) at (4p+1)*m points.
    The frequency is frozen at the target during the Newton solve, so the
    sampled curve carries the exact rational phase.

    Raises FrequencyMismatch if the point is too far from the target for
    the frozen-frequency Newton to be trusted.
    """
    cfg = point.cfg if isinstance(point, BranchPoint) else point
    omega = cfg.params.omega
    target = omega * m / ell
    if abs(cfg.nu - target) >= match_tol * max(1.0, abs(target)):
        raise FrequencyMismatch(
            "point frequency %.6g too far from target %.6g" % (cfg.nu, target)
        )
    guess = cfg.copy()
    guess.nu = target
    solved, _ = newton_correct(guess, x_ref=cfg, frozen_nu=target, tol=tol)
    t, Q = sample_inertial(solved, m)
    return t, Q, solved


def certify_choreography(point, cert, grid_factor=8):
    """Fill the residual fields of a certificate and return it.

    alignment: max_j,t |Q_j(t) - Q_n(t + j*k_tilde*zeta)|
    rotation:  max_t |Q_n(t - 2 pi) - e^{-2 pi i ell/m} Q_n(t)|
    periodicity: max_t |Q_n(t + 2 pi m) - Q_n(t)|

    evaluated on a grid of 8*p*m points (grid_factor*p*m in general). The
    reference rotation uses the exact rational ell/m; the inertial phase
    uses the physical omega/nu of the configuration.
    """
    cfg = point.cfg if isinstance(point, BranchPoint) else point
    params = cfg.params
    n, zeta = params.n, params.zeta
    ell, m = cert.ell, cert.m
    ratio = params.omega / cfg.nu
    T = grid_factor * cfg.loop.p * m
    t = 2.0 * np.pi * m * np.arange(T) / T
    x = symmetry_extend(cfg, t)  # (T, n, 2)
    Q = _rotate_paths(x.transpose(1, 0, 2), t * ratio)  # (n, T, 2)

    def q_n(times):
        return _rotate_paths(loop_eval(cfg.loop, times), times * ratio)

    align = 0.0
    for j in range(1, n + 1):
        shifted = q_n(t + j * cert.k_tilde * zeta)
        align = max(align, float(np.max(np.abs(Q[j - 1] - shifted))))
    cert.alignment_residual = align

    back = q_n(t - 2.0 * np.pi)
    rot = back - q_n(t) @ rotation(-2.0 * np.pi * ell / m).T
    cert.rotation_residual = float(np.max(np.abs(rot)))

    cert.periodicity_residual = float(np.max(np.abs(q_n(t + 2.0 * np.pi * m) - q_n(t))))
    return cert


def _bracket_guess(point_a, point_b, target):
    """Config interpolated in nu between two bracketing branch points."""
    ca, cb = point_a.cfg, point_b.cfg
    if abs(cb.nu - ca.nu) < 1e-15:
        pick = ca if abs(ca.nu - target) <= abs(cb.nu - target) else cb
        return pick.copy()
    w = (target - ca.nu) / (cb.nu - ca.nu)
    w = min(max(w, 0.0), 1.0)
    guess = ca.copy()
    guess.loop.coeffs = (1.0 - w) * ca.loop.coeffs + w * cb.loop.coeffs
    guess.nu = (1.0 - w) * ca.nu + w * cb.nu
    return guess


def scan_branch_for_choreographies(branch, denom_max=12, tol=1e-10, match_tol=0.1):
    """Certify every rational crossing nu = omega*m/ell along a branch.

    Brackets sign changes of nu - target between consecutive points,
    re-converges an interpolated guess at the exact rational frequency with
    the frozen-frequency Newton, and certifies. Candidates whose
    re-convergence fails are skipped with a warning.
    """
    if abs(branch.omega) < 1e-14:
        raise Degenerate("omega = 0 branch cannot produce choreographies")
    certs = []
    nus = np.array([pt.nu for pt in branch.points])
    for ell, m in admissible_ratios(branch.k, branch.n, denom_max):
        target = branch.omega * m / ell
        gaps = nus - target
        for i in range(len(nus) - 1):
            if gaps[i] * gaps[i + 1] > 0.0:
                continue
            guess = _bracket_guess(branch.points[i], branch.points[i + 1], target)
            try:
                _, _, solved = inertial_orbit(
                    guess, ell, m, match_tol=match_tol, tol=tol
                )
                cert = choreography_cert(branch.k, branch.n, branch.omega, ell, m)
                cert = certify_choreography(solved, cert)
                cert.config = solved
                certs.append(cert)
            except (NoConvergence, FrequencyMismatch, ChartEscape, CollisionError) as exc:
                warnings.warn(
                    "crossing (%d, %d) near point %d not certified: %s"
                    % (ell, m, i, exc)
                )
    return certs


def report_to_dict(branch_file, certs):
    return {
        "branch_file": str(branch_file),
        "certs": [
            {
                "ell": c.ell,
                "m": c.m,
                "ell_star": c.ell_star,
                "k_tilde": c.k_tilde,
                "k_tilde_mod_n": c.k_tilde_mod_n,
                "nu": c.nu_target,
                "alignment_residual": c.alignment_residual,
                "rotation_residual": c.rotation_residual,
                "periodicity_residual": c.periodicity_residual,
            }
            for c in certs
        ],
    }


def save_report(path, branch_file, certs):
    with open(path, "w") as fh:
        json.dump(report_to_dict(branch_file, certs), fh, indent=1)


def write_inertial_csv(path, t, Q):
    """Inertial curve samples with their sphere lift, one row per time."""
    lifted = stereo_lift(Q)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "Q_re", "Q_im", "x", "y", "z"])
        for i in range(len(t)):
            writer.writerow(
                [repr(float(t[i])), repr(float(Q[i, 0])), repr(float(Q[i, 1]))]
                + [repr(float(u)) for u in lifted[i]]
            )
