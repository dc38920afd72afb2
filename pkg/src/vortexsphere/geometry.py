"""Stereographic chart between the unit sphere and the plane.

Plane points are real pairs encoding complex numbers; the matrix ``J``
realizes multiplication by i, so no complex dtype is needed for positions.
"""

import numpy as np

from .errors import ChartSingular

#: 2x2 rotation generator, the real realization of multiplication by i.
J = np.array([[0.0, -1.0], [1.0, 0.0]])

#: Points with z >= 1 - POLE_GAP are considered unchartable.
POLE_GAP = 1e-12


def rotation(angle):
    """Real 2x2 rotation matrix exp(angle * J)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def stereo_project(v):
    """Chart a unit vector (or array of them) through the north pole.

    Parameters
    ----------
    v : array_like, shape (..., 3)
        Points on (or near) the unit sphere.

    Returns
    -------
    ndarray, shape (..., 2)
        q = (x + iy)/(1 - z) as a real pair.

    Raises
    ------
    ChartSingular
        If any point lies within POLE_GAP of the north pole.
    """
    v = np.asarray(v, dtype=float)
    z = v[..., 2]
    if np.any(z >= 1.0 - POLE_GAP):
        raise ChartSingular("point within %g of the north pole" % POLE_GAP)
    return v[..., :2] / (1.0 - z)[..., None]


def stereo_lift(q):
    """Inverse chart: plane points back to unit vectors of shape (..., 3)."""
    q = np.asarray(q, dtype=float)
    s = np.sum(q * q, axis=-1)
    out = np.empty(q.shape[:-1] + (3,))
    out[..., :2] = 2.0 * q / (1.0 + s)[..., None]
    out[..., 2] = (s - 1.0) / (s + 1.0)
    return out


def conformal_weight(q):
    """Symplectic weight 4/(1 + |q|^2)^2 of the chart at each point."""
    s = np.sum(np.asarray(q, dtype=float) ** 2, axis=-1)
    return 4.0 / (1.0 + s) ** 2


def chordal_sq(qi, qj):
    """Squared 3D chord between the lifts of two plane points.

    Equals 4|qj - qi|^2 / ((1 + |qj|^2)(1 + |qi|^2)); broadcasting applies.
    """
    qi = np.asarray(qi, dtype=float)
    qj = np.asarray(qj, dtype=float)
    d2 = np.sum((qj - qi) ** 2, axis=-1)
    si = np.sum(qi * qi, axis=-1)
    sj = np.sum(qj * qj, axis=-1)
    return 4.0 * d2 / ((1.0 + sj) * (1.0 + si))
