"""Brute-force verification: adaptive integration of the transport ODE
from a dense Christoffel function, finite-difference residuals, and
Gram-matrix drift.

These paths are the independent ground truth for the closed forms; they
share nothing with the fast formulas beyond basic matrix products.  The
curve and its velocity come from closed-form differentiation of the
geodesic factors so the oracle's own error budget stays clean.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.integrate

from .errors import NumericalError, ValidationError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class OdeProblem:
    """A flattened linear ODE with adaptive tolerances."""
    state_dim: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    t_span: tuple
    abs_tol: float = DEFAULT_TOL
    rel_tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValidationError("tolerances must be positive")


def integrate_transport(christoffel, geodesic, eta0, t_grid,
                        rel_tol=DEFAULT_TOL, abs_tol=DEFAULT_TOL):
    """Integrate dDelta/dt = -Gamma(gamma(t); dgamma, Delta) on a grid.

    christoffel(point, direction, vector) evaluates the Christoffel
    function; geodesic(t) returns the pair (gamma(t), dgamma/dt).
    Returns the transported matrices at each grid time (the grid must be
    nondecreasing, starting at 0 where Delta = eta0).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) < 0):
        raise ValidationError("t_grid must be a nondecreasing 1-d grid")
    eta0 = np.asarray(eta0, dtype=float)
    shape = eta0.shape

    def rhs(t, flat):
        gam, dgam = geodesic(t)
        delta = flat.reshape(shape)
        return -christoffel(gam, dgam, delta).reshape(-1)

    t0 = min(0.0, t_grid[0])
    sol = scipy.integrate.solve_ivp(
        rhs, (t0, float(t_grid[-1]) if t_grid[-1] > t0 else t0 + 1e-30),
        eta0.reshape(-1), method="RK45", rtol=rel_tol, atol=abs_tol,
        t_eval=t_grid)
    if not sol.success:
        last = sol.t[-1] if sol.t.size else t0
        raise NumericalError(
            f"transport integration failed at t={last}: {sol.message}")
    return [sol.y[:, i].reshape(shape) for i in range(sol.y.shape[1])]


def transport_residual(delta_samples, gamma_samples, christoffel, dt):
    """Max norm of (centered-difference dDelta/dt + Gamma(gamma; dgamma,
    Delta)) over interior grid points of a uniform grid."""
    if len(delta_samples) < 3:
        raise ValidationError("need at least 3 samples for a residual")
    if len(delta_samples) != len(gamma_samples):
        raise ValidationError("sample count mismatch")
    worst = 0.0
    for i in range(1, len(delta_samples) - 1):
        ddelta = (delta_samples[i + 1] - delta_samples[i - 1]) / (2.0 * dt)
        dgamma = (gamma_samples[i + 1] - gamma_samples[i - 1]) / (2.0 * dt)
        res = ddelta + christoffel(gamma_samples[i], dgamma, delta_samples[i])
        worst = max(worst, float(np.linalg.norm(res)))
    return worst


def gram_drift(vectors, transported, metric, points=None, initial_point=None):
    """Per-time max absolute drift of the Gram matrix of a vector set.

    transported is a list (one entry per time) of lists of matrices;
    metric(xi, eta) is used as is, or metric(point, xi, eta) when a list
    of per-time base points accompanies the times.  The reference Gram
    matrix of `vectors` is evaluated at initial_point (default: the first
    base point).
    """
    m = len(vectors)
    if any(len(vs) != m for vs in transported):
        raise ValidationError("vector count mismatch across times")

    def gram(vs, point):
        g = np.empty((m, m))
        for i in range(m):
            for j in range(i, m):
                g[i, j] = g[j, i] = (
                    metric(vs[i], vs[j]) if point is None
                    else metric(point, vs[i], vs[j]))
        return g

    if points is None:
        g0 = gram(vectors, None)
    else:
        g0 = gram(vectors, initial_point if initial_point is not None else points[0])
    drifts = []
    for idx, vs in enumerate(transported):
        gt = gram(vs, None if points is None else points[idx])
        drifts.append(float(np.max(np.abs(gt - g0))))
    return drifts
