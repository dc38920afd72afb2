"""Independent time integration of the vortex flow, on the sphere or in the chart.

This module is the oracle side of the dual check against the Galerkin
solver: an embedded adaptive Runge-Kutta pair (DOP853) driven step by step,
with per-step renormalization onto the sphere and collision monitoring.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853

from .errors import CollisionApproach, CollisionError, StepUnderflow
from .geometry import J, stereo_lift
from .ring import gradient_V, moment_G, ring_positions

#: Integration aborts when a pair gets closer than this.
APPROACH_THRESHOLD = 1e-6

#: Right-hand sides refuse configurations tighter than this.
RHS_THRESHOLD = 1e-8


def rhs_sphere(v):
    """Velocity field of unit-circulation point vortices on the unit sphere.

    v'_j = sum_{i != j} (v_j x v_i) / |v_j - v_i|^2, oriented so that a
    polygonal ring rotates about the z-axis at the rate of its chart
    frequency omega.
    """
    v = np.asarray(v, dtype=float)
    n = len(v)
    cross = np.cross(v[:, None, :], v[None, :, :])  # cross[j, i] = v_j x v_i
    diff = v[:, None, :] - v[None, :, :]
    d2 = np.sum(diff * diff, axis=-1)
    idx = np.arange(n)
    off = d2 + np.where(idx[:, None] == idx[None, :], np.inf, 0.0)
    if np.min(off) < RHS_THRESHOLD**2:
        raise CollisionError("vortex pair below the collision threshold")
    d2 = np.where(idx[:, None] == idx[None, :], 1.0, d2)
    kern = cross / d2[:, :, None]
    kern[idx, idx] = 0.0
    return np.sum(kern, axis=1)


def rhs_rotating_chart(x, nu, params):
    """Rotating-frame chart field with rescaled time.

    x'_j = -(1/nu) * (1+|x_j|^2)^2/4 * J grad_j V; fixed points are exactly
    the critical points of the amended potential, the ring among them.
    """
    if nu == 0.0:
        raise ValueError("time rescale nu must be nonzero")
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1)
    grad = gradient_V(x, params)
    return -(1.0 / nu) * ((1.0 + s) ** 2 / 4.0)[:, None] * (grad @ J.T)


def sphere_hamiltonian(v):
    """Interaction energy on the sphere, equal to the chart Hamiltonian."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d2 = np.sum((v[i] - v[j]) ** 2)
            total += np.log(d2 / 4.0)
    return -0.5 * total


def sphere_moment(v):
    """z-component of the total vortex moment sum_j v_j."""
    return float(np.sum(np.asarray(v)[:, 2]))


def chart_hamiltonian(x):
    x = np.asarray(x, dtype=float)
    n = len(x)
    one_plus = 1.0 + np.sum(x * x, axis=-1)
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d2 = np.sum((x[i] - x[j]) ** 2)
            total += np.log(d2 / (one_plus[i] * one_plus[j]))
    return -0.5 * total


@dataclass
class SimState:
    """Snapshot of a simulation: mode, positions, time, optional ring data."""

    mode: str  # "sphere" or "chart"
    state: np.ndarray  # (n, 3) or (n, 2)
    t: float = 0.0
    params: object = None


@dataclass
class Trajectory:
    mode: str
    t: np.ndarray
    states: np.ndarray  # (m, n, dim)
    energy: np.ndarray
    moment: np.ndarray  # chart: G, sphere: z-moment

    def write_csv(self, path):
        n = self.states.shape[1]
        if self.mode == "chart":
            cols = ["t"] + [f"x{j}_{c}" for j in range(1, n + 1) for c in ("re", "im")]
            cols += ["H", "G"]
        else:
            cols = ["t"] + [f"v{j}_{c}" for j in range(1, n + 1) for c in ("x", "y", "z")]
            cols += ["H", "Mz"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for i, ti in enumerate(self.t):
                row = [repr(float(ti))]
                row += [repr(float(u)) for u in self.states[i].ravel()]
                row += [repr(float(self.energy[i])), repr(float(self.moment[i]))]
                writer.writerow(row)


def ring_state(params, mode="chart"):
    """The polygonal equilibrium as an initial condition."""
    x = ring_positions(params)
    if mode == "chart":
        return SimState(mode="chart", state=x, t=0.0, params=params)
    return SimState(mode="sphere", state=stereo_lift(x), t=0.0, params=params)


def _min_pair(y):
    diff = y[:, None, :] - y[None, :, :]
    d2 = np.sum(diff * diff, axis=-1)
    iu = np.triu_indices(len(y), k=1)
    return float(np.sqrt(np.min(d2[iu])))


def integrate(state, t_end, tol=1e-10, n_out=201, nu=1.0):
    """Adaptive integration from state.t to t_end with monitors.

    Sphere mode renormalizes every accepted step back onto the unit sphere;
    both modes abort with CollisionApproach when a pair distance drops
    below 1e-6. Energy and moment are recorded at n_out output times.
    """
    mode = state.mode
    y0 = np.asarray(state.state, dtype=float)
    n, dim = y0.shape
    if mode == "sphere":
        rhs = lambda t, y: rhs_sphere(y.reshape(n, 3)).ravel()
    elif mode == "chart":
        params = state.params
        if params is None:
            raise ValueError("chart mode needs ring parameters for the potential")
        rhs = lambda t, y: rhs_rotating_chart(y.reshape(n, 2), nu, params).ravel()
    else:
        raise ValueError("unknown mode %r" % mode)

    if _min_pair(y0) < APPROACH_THRESHOLD:
        raise CollisionApproach(
            "initial configuration below approach threshold", t=state.t, state=y0
        )

    t_eval = np.linspace(state.t, t_end, n_out)
    out = np.empty((n_out, n, dim))
    out[0] = y0
    filled = 1

    if t_end == state.t:
        energy, moment = _monitors(mode, out[:1])
        return Trajectory(mode, t_eval[:1], out[:1], energy, moment)

    solver = DOP853(rhs, state.t, y0.ravel(), t_bound=t_end, rtol=tol, atol=tol)
    forward = t_end > state.t
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise StepUnderflow(msg or "integrator step failed")
        dense = solver.dense_output()
        while filled < n_out and (
            (forward and t_eval[filled] <= solver.t)
            or (not forward and t_eval[filled] >= solver.t)
        ):
            out[filled] = dense(t_eval[filled]).reshape(n, dim)
            filled += 1
        y = solver.y.reshape(n, dim)
        if mode == "sphere":
            norms = np.sqrt(np.sum(y * y, axis=-1))
            y = y / norms[:, None]
            solver.y = y.ravel()
            solver.f = solver.fun(solver.t, solver.y)
        if _min_pair(y) < APPROACH_THRESHOLD:
            raise CollisionApproach(
                "pair distance below %g" % APPROACH_THRESHOLD, t=solver.t, state=y
            )
    if filled < n_out:
        out[filled:] = solver.y.reshape(n, dim)
        filled = n_out
    energy, moment = _monitors(mode, out)
    return Trajectory(mode, t_eval, out, energy, moment)


def _monitors(mode, states):
    m = states.shape[0]
    energy = np.empty(m)
    moment = np.empty(m)
    for i in range(m):
        if mode == "sphere":
            energy[i] = sphere_hamiltonian(states[i])
            moment[i] = sphere_moment(states[i])
        else:
            energy[i] = chart_hamiltonian(states[i])
            moment[i] = moment_G(states[i])
    return energy, moment
