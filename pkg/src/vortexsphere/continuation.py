"""Pseudo-arclength continuation of symmetry-reduced loop branches.

The square system couples the Galerkin residual with two unfolding
multipliers (time shift and rigid rotation) and two matching phase
conditions against a reference loop; a final row carries either the
arclength constraint or a frozen frequency. Multipliers vanish at genuine
solutions because the residual is L2-orthogonal to both group generators.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ChartEscape,
    CollisionError,
    Degenerate,
    NoBifurcation,
    NoConvergence,
    ResonanceWarning,
)
from .geometry import J
from .loops import (
    FourierLoop,
    LoopConfig,
    collision_margin,
    complexify,
    default_grid,
    equilibrium_config,
    gram_weights,
    realify,
    reduced_jacobian,
    reduced_residual,
    rotation_generator,
    symmetry_extend,
    time_derivative,
)
from .ring import ring_params, ring_positions
from .spectral import block_m, critical_frequency, mode_margin, resonance_check

#: Initial Galerkin residual above this is outside the Newton basin.
BASIN_LIMIT = 1e-2

MULTIPLIER_LIMIT = 1e-8


@dataclass
class ArclengthConstraint:
    """Row <z - base, tangent> = ds in the combined (coeffs, nu) space."""

    base: np.ndarray
    tangent: np.ndarray
    ds: float


@dataclass
class NewtonInfo:
    iterations: int
    residual: float
    multipliers: tuple


@dataclass
class BranchPoint:
    cfg: LoopConfig
    amplitude: float
    residual: float
    arclength: float
    multipliers: tuple | None = None

    @property
    def nu(self):
        return self.cfg.nu


@dataclass
class Branch:
    n: int
    r: float
    k: int
    p: int
    omega: float
    nu_seed: float
    points: list = field(default_factory=list)
    termination: str = "MaxSteps"
    termination_detail: str | None = None
    resonances: list = field(default_factory=list)


def amplitude(cfg):
    """L2 distance of the reduced loop from the rotation orbit of the ring."""
    c = cfg.loop.coeffs
    r = cfg.params.r
    radial = (np.sqrt(np.sum(np.abs(c[0]) ** 2)) - r) ** 2
    tail = 2.0 * np.sum(np.abs(c[1:]) ** 2)
    return float(np.sqrt(2.0 * np.pi * (radial + tail)))


def _kernel_vector(k, nu, params):
    """Unit null vector of the singular pencil m_k(nu)."""
    _, sing, vh = np.linalg.svd(block_m(k, nu, params))
    if sing[-1] > 1e-8 * max(1.0, sing[0]):
        raise Degenerate("pencil is not singular at the requested frequency")
    return np.conj(vh[-1])


def branch_seed(k, params, eps, p=32):
    """Perturb the ring along the critical kernel mode in Fourier mode 1.

    Returns a LoopConfig at nu = nu_k; resonant frequencies are flagged on
    the config (and warned about) but still seeded.
    """
    if not 1 <= k <= params.n - 1:
        raise ValueError("symmetry class k must lie in 1..n-1")
    if abs(params.omega) < 1e-14:
        raise Degenerate("equatorial ring has omega = 0 and nu_k = 0")
    margin = mode_margin(k, params)
    if margin <= 0.0:
        if margin > -1e-12:
            raise Degenerate("mode inequality holds with equality; nu_k = 0")
        raise NoBifurcation(
            "mode %d violates the bifurcation inequality (margin %.3g)" % (k, margin)
        )
    nu = critical_frequency(k, params)
    if nu is None or nu < 1e-12:
        raise Degenerate("critical frequency degenerates to zero")
    resonances = resonance_check(k, params, l_max=2 * p)
    if resonances:
        warnings.warn(
            "seed frequency for mode %d is resonant: %s" % (k, resonances),
            ResonanceWarning,
        )
    w = _kernel_vector(k, nu, params)
    coeffs = np.zeros((p + 1, 2), dtype=complex)
    coeffs[0] = ring_positions(params)[-1]
    coeffs[1] = eps * w
    return LoopConfig(
        loop=FourierLoop(p, coeffs),
        k=k,
        params=params,
        nu=nu,
        resonances=resonances,
    )


def _generator_matrices(p):
    """Realified matrices of d/dt and of the rotation generator."""
    m = 4 * p + 2
    T = np.zeros((m, m))
    Rm = np.zeros((m, m))
    Rm[:2, :2] = J
    for l in range(1, p + 1):
        base = 2 + 4 * (l - 1)
        re = slice(base, base + 2)
        im = slice(base + 2, base + 4)
        T[re, im] = -l * np.eye(2)
        T[im, re] = l * np.eye(2)
        Rm[re, re] = J
        Rm[im, im] = J
    return T, Rm


def _phase_row(coeffs_ref, generator, weights):
    """Weighted unit row for a phase condition against the reference loop."""
    g = realify(generator(coeffs_ref))
    norm = np.sqrt(np.dot(weights * g, g))
    if norm < 1e-13:
        return np.zeros_like(g)
    return weights * g / norm


def newton_correct(
    cfg,
    x_ref=None,
    constraint=None,
    frozen_nu=None,
    tol=1e-10,
    max_iter=25,
    N=None,
):
    """Correct a loop guess to a solution of the bordered system.

    Exactly one of three closing modes applies: an arclength constraint, a
    frozen frequency, or (neither) a minimum-norm step with free nu.

    Returns (corrected LoopConfig, NewtonInfo); raises NoConvergence when
    the iteration stalls, the basin precondition fails, or the unfolding
    multipliers refuse to vanish.
    """
    if constraint is not None and frozen_nu is not None:
        raise ValueError("constraint and frozen_nu are mutually exclusive")
    p = cfg.loop.p
    if N is None:
        N = default_grid(p)
    m = 4 * p + 2
    if x_ref is None:
        x_ref = cfg
    weights = gram_weights(p)
    row_t = _phase_row(x_ref.loop.coeffs, time_derivative, weights)
    row_r = _phase_row(x_ref.loop.coeffs, rotation_generator, weights)
    y_ref = realify(x_ref.loop.coeffs)
    T_time, T_rot = _generator_matrices(p)

    y = realify(cfg.loop.coeffs)
    nu = cfg.nu
    lam = np.zeros(2)

    def config_at(yy, nn):
        return LoopConfig(FourierLoop(p, complexify(yy, p)), cfg.k, cfg.params, nn,
                          resonances=list(cfg.resonances))

    first_galerkin = np.max(np.abs(realify(reduced_residual(config_at(y, nu), N))))
    if first_galerkin >= BASIN_LIMIT:
        raise NoConvergence(
            "initial residual %.3g outside Newton basin" % first_galerkin
        )

    galerkin_norm = first_galerkin
    for it in range(max_iter + 1):
        current = config_at(y, nu)
        F = realify(reduced_residual(current, N))
        galerkin_norm = float(np.max(np.abs(F)))
        C = current.loop.coeffs
        gen_t = realify(time_derivative(C))
        gen_r = realify(rotation_generator(C))
        E1 = F + lam[0] * gen_t + lam[1] * gen_r
        res = [E1, [np.dot(row_t, y - y_ref)], [np.dot(row_r, y - y_ref)]]
        if constraint is not None:
            z = np.concatenate([y, [nu]])
            res.append(
                [np.dot(constraint.tangent, z - constraint.base) - constraint.ds]
            )
        elif frozen_nu is not None:
            res.append([nu - frozen_nu])
        res = np.concatenate([np.atleast_1d(np.asarray(rr)) for rr in res])
        if np.max(np.abs(res)) < tol:
            if np.max(np.abs(lam)) > MULTIPLIER_LIMIT:
                raise NoConvergence("unfolding multipliers failed to vanish")
            return current, NewtonInfo(
                iterations=it, residual=galerkin_norm, multipliers=tuple(lam)
            )
        if it == max_iter:
            break
        Jc, dnu = reduced_jacobian(current, N)
        Jc = Jc + lam[0] * T_time + lam[1] * T_rot
        n_rows = m + 2 + (1 if (constraint is not None or frozen_nu is not None) else 0)
        A = np.zeros((n_rows, m + 3))
        A[:m, :m] = Jc
        A[:m, m] = dnu
        A[:m, m + 1] = gen_t
        A[:m, m + 2] = gen_r
        A[m, :m] = row_t
        A[m + 1, :m] = row_r
        if constraint is not None:
            A[m + 2, :m] = constraint.tangent[:m]
            A[m + 2, m] = constraint.tangent[m]
        elif frozen_nu is not None:
            A[m + 2, m] = 1.0
        step, *_ = np.linalg.lstsq(A, -res, rcond=None)
        y = y + step[:m]
        nu = nu + step[m]
        lam = lam + step[m + 1 :]
    raise NoConvergence("no convergence after %d iterations" % max_iter)


def continue_branch(
    seed,
    steps,
    ds=0.01,
    ds_min=1e-5,
    ds_max=0.1,
    tol=1e-10,
    collision_stop=1e-6,
    norm_limit=1e6,
):
    """Trace a branch of reduced loops from a seed configuration.

    The first point is corrected with the kernel-direction constraint from
    the equilibrium; later points use secant predictors. The step length is
    halved on failure and grown by 1.3 after three consecutive successes.
    """
    params = seed.params
    p = seed.loop.p
    branch = Branch(
        n=params.n,
        r=params.r,
        k=seed.k,
        p=p,
        omega=params.omega,
        nu_seed=seed.nu,
        resonances=list(seed.resonances),
    )
    eq = equilibrium_config(params, seed.k, seed.nu, p)
    z_eq = np.concatenate([realify(eq.loop.coeffs), [seed.nu]])
    z_seed = np.concatenate([realify(seed.loop.coeffs), [seed.nu]])
    direction = z_seed - z_eq
    ds_first = float(np.linalg.norm(direction))
    if ds_first <= 0.0:
        raise ValueError("seed coincides with the equilibrium")
    tangent = direction / ds_first
    first_constraint = ArclengthConstraint(base=z_eq, tangent=tangent, ds=ds_first)
    cfg, info = newton_correct(
        seed, x_ref=seed, constraint=first_constraint, tol=tol
    )
    s_accum = ds_first
    branch.points.append(
        BranchPoint(
            cfg=cfg,
            amplitude=amplitude(cfg),
            residual=info.residual,
            arclength=s_accum,
            multipliers=info.multipliers,
        )
    )
    z_prev = z_eq
    z_cur = np.concatenate([realify(cfg.loop.coeffs), [cfg.nu]])
    cfg_cur = cfg
    amp_first = branch.points[0].amplitude
    amp_max = amp_first
    streak = 0
    last_failure = None
    while len(branch.points) < steps:
        tangent = z_cur - z_prev
        tangent = tangent / np.linalg.norm(tangent)
        z_pred = z_cur + ds * tangent
        pred = LoopConfig(
            FourierLoop(p, complexify(z_pred[:-1], p)),
            seed.k,
            params,
            float(z_pred[-1]),
            resonances=list(seed.resonances),
        )
        try:
            cfg, info = newton_correct(
                pred,
                x_ref=cfg_cur,
                constraint=ArclengthConstraint(base=z_cur, tangent=tangent, ds=ds),
                tol=tol,
            )
        except (NoConvergence, CollisionError, ChartEscape) as exc:
            last_failure = exc
            streak = 0
            ds *= 0.5
            if ds < ds_min:
                if isinstance(exc, CollisionError):
                    branch.termination = "CollisionApproach"
                elif isinstance(exc, ChartEscape):
                    branch.termination = "ChartEscape"
                else:
                    raise NoConvergence(
                        "step size underflow without a geometric cause"
                    ) from exc
                branch.termination_detail = str(exc)
                return branch
            continue
        streak += 1
        if streak >= 3:
            ds = min(ds * 1.3, ds_max)
            streak = 0
        z_prev = z_cur
        z_cur = np.concatenate([realify(cfg.loop.coeffs), [cfg.nu]])
        s_accum += float(np.linalg.norm(z_cur - z_prev))
        cfg_cur = cfg
        amp = amplitude(cfg)
        branch.points.append(
            BranchPoint(
                cfg=cfg,
                amplitude=amp,
                residual=info.residual,
                arclength=s_accum,
                multipliers=info.multipliers,
            )
        )
        amp_max = max(amp_max, amp)
        cm = collision_margin(cfg)
        if cm.margin < collision_stop:
            branch.termination = "CollisionApproach"
            return branch
        if cm.chart_radius > 1e3:
            branch.termination = "ChartEscape"
            return branch
        if cfg.loop.h1_norm() > norm_limit:
            branch.termination = "NormBlowup"
            return branch
        if amp_max > 10.0 * amp_first and amp < amp_first:
            branch.termination = "ReturnedToEquilibrium"
            return branch
    branch.termination = "MaxSteps"
    return branch


def period_map_check(point, tol=1e-10):
    """Return defect of the loop under independent time integration.

    Integrates the full configuration in the rotating chart over one period
    of the rescaled time and reports the infinity-norm return error.
    """
    from .dynamics import SimState, integrate

    cfg = point.cfg if isinstance(point, BranchPoint) else point
    x0 = symmetry_extend(cfg, 0.0)
    state = SimState(mode="chart", state=x0, t=0.0, params=cfg.params)
    traj = integrate(state, 2.0 * np.pi, tol=tol, n_out=2, nu=cfg.nu)
    return float(np.max(np.abs(traj.states[-1] - x0)))


def extrapolate_seed_frequency(branch, n_points=5):
    """Extrapolate nu to zero amplitude from the smallest-amplitude points.

    Fits nu = b0 + b1 A^2 + b2 A^4 by least squares; the branch is even in
    its amplitude so odd powers are absent.
    """
    pts = sorted(branch.points, key=lambda q: q.amplitude)[:n_points]
    if len(pts) < 3:
        raise ValueError("need at least three points to extrapolate")
    A2 = np.array([q.amplitude**2 for q in pts])
    nus = np.array([q.nu for q in pts])
    design = np.vander(A2, 3, increasing=True)
    coef, *_ = np.linalg.lstsq(design, nus, rcond=None)
    return float(coef[0])


def branch_to_dict(branch):
    points = []
    for q in branch.points:
        c = q.cfg.loop.coeffs
        points.append(
            {
                "nu": q.nu,
                "amplitude": q.amplitude,
                "residual": q.residual,
                "arclength": q.arclength,
                "coeffs_re": c.real.tolist(),
                "coeffs_im": c.imag.tolist(),
            }
        )
    return {
        "n": branch.n,
        "r": branch.r,
        "k": branch.k,
        "omega": branch.omega,
        "nu_seed": branch.nu_seed,
        "p": branch.p,
        "termination": branch.termination,
        "termination_detail": branch.termination_detail,
        "resonances": [list(pair) for pair in branch.resonances],
        "points": points,
    }


def branch_from_dict(data):
    params = ring_params(data["n"], r=data["r"])
    branch = Branch(
        n=data["n"],
        r=data["r"],
        k=data["k"],
        p=data["p"],
        omega=data["omega"],
        nu_seed=data["nu_seed"],
        termination=data["termination"],
        termination_detail=data.get("termination_detail"),
        resonances=[tuple(pair) for pair in data.get("resonances", [])],
    )
    for rec in data["points"]:
        coeffs = np.asarray(rec["coeffs_re"], dtype=float) + 1j * np.asarray(
            rec["coeffs_im"], dtype=float
        )
        cfg = LoopConfig(
            loop=FourierLoop(data["p"], coeffs),
            k=data["k"],
            params=params,
            nu=rec["nu"],
            resonances=branch.resonances,
        )
        branch.points.append(
            BranchPoint(
                cfg=cfg,
                amplitude=rec["amplitude"],
                residual=rec["residual"],
                arclength=rec["arclength"],
            )
        )
    return branch


def save_branch(branch, path):
    with open(path, "w") as fh:
        json.dump(branch_to_dict(branch), fh, indent=1)


def load_branch(path):
    with open(path) as fh:
        return branch_from_dict(json.load(fh))
