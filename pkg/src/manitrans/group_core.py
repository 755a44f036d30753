"""Metric, Christoffel function, geodesics and parallel transport for a
matrix group with a transposable algebra split.

All formulas are phrased in the group-relative velocity a = X^{-1} xi.  The
transport factor in the middle is an exponential action of the operator

    P_a : b -> ((b a - a b) + (1+beta)([a_a, b] - [b_a, a])) / 2

which is antisymmetric for the deformed metric form, so transported vectors
keep their metric norms.
"""
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import expaction
from .errors import ValidationError
from .forms import AlgebraSplit, MetricParams, beta_form, classify_metric_signature
from .utils import lie

TANGENCY_RTOL = 1e-9
CONDITION_WARN = 1e12
EXHAUSTIVE_NORM_CAP = 400


@dataclass(frozen=True)
class GroupGeometry:
    """A group metric: an algebra split plus deformation parameters.

    The metric signature classification is exact but scans a dense basis of
    the ambient space, so it is computed lazily; small test instances access
    it through the `signature` property.
    """
    split: AlgebraSplit
    params: MetricParams

    @cached_property
    def signature(self):
        return classify_metric_signature(self.split, self.params)

    @property
    def beta(self):
        return self.params.beta


@dataclass(frozen=True)
class GroupTangent:
    """A tangent vector at an invertible base point, with its algebra
    representative a = X^{-1} xi."""
    base: np.ndarray
    ambient: np.ndarray
    algebra: np.ndarray = field(repr=False)


def to_algebra(geom, x, xi, validate=True):
    """Group-relative velocity a = X^{-1} xi, by linear solve.

    Raises if the result is not in the Lie algebra; warns on an
    ill-conditioned base point.  validate=False skips the membership check
    (the ODE oracle probes slightly off-manifold states).
    """
    cond = np.linalg.cond(x)
    if cond > CONDITION_WARN:
        warnings.warn(
            f"base point condition number {cond:.2e} exceeds {CONDITION_WARN:.0e}",
            RuntimeWarning)
    a = np.linalg.solve(x, xi)
    if validate:
        res = np.linalg.norm(a - geom.split.proj_g(a))
        if res > TANGENCY_RTOL * max(1.0, np.linalg.norm(a)):
            raise ValidationError(
                f"vector is not tangent: algebra residual {res:.3e}")
    return a


def group_tangent(geom, x, xi):
    return GroupTangent(base=x, ambient=xi, algebra=to_algebra(geom, x, xi))


def metric(geom, x, xi, eta):
    """Left-invariant metric value <xi, eta> at x."""
    return beta_form(to_algebra(geom, x, xi), to_algebra(geom, x, eta),
                     geom.split, geom.params)


def christoffel(geom, x, xi, eta, validate=True):
    """Christoffel function of the Levi-Civita connection at x."""
    a = to_algebra(geom, x, xi, validate=validate)
    b = to_algebra(geom, x, eta, validate=validate)
    bet = geom.beta
    aa = geom.split.proj_a(a)
    ba = geom.split.proj_a(b)
    inner = -0.5 * (a @ b + b @ a) \
        + 0.5 * (1.0 + bet) * (lie(aa, b) + lie(ba, a))
    return x @ inner


def geodesic(geom, x, xi, t):
    """Geodesic through x with initial velocity xi, evaluated at time t."""
    a = to_algebra(geom, x, xi)
    aa = geom.split.proj_a(a)
    bet = geom.beta
    left = expaction.matrix_exponential(t * (a - (1.0 + bet) * aa))
    right = expaction.matrix_exponential(t * (1.0 + bet) * aa)
    return x @ left @ right


def geodesic_velocity(geom, x, xi, t):
    """The pair (gamma(t), dgamma/dt), by closed-form differentiation."""
    a = to_algebra(geom, x, xi)
    aa = geom.split.proj_a(a)
    bet = geom.beta
    left = expaction.matrix_exponential(t * (a - (1.0 + bet) * aa))
    right = expaction.matrix_exponential(t * (1.0 + bet) * aa)
    gamma = x @ left @ right
    # gamma^{-1} dgamma = right^{-1} a right, so dgamma = X left a right
    dgamma = x @ left @ a @ right
    return gamma, dgamma


def transport_operator(geom, a):
    """The operator P_a with its Frobenius adjoint and a 1-norm bound.

    The 1-norm bound is exhaustive for small sizes.  Beyond the exhaustive
    cap it is the conservative triangle-inequality bound
    2*(2 + |1+beta|)*sum|a_ij|: each of the three brackets has vectorized
    1-norm at most 2*sum|a_ij| and the subalgebra projections are
    norm-nonincreasing.
    """
    a = np.asarray(a, dtype=float)
    split = geom.split
    if not np.allclose(a, split.proj_g(a),
                       atol=TANGENCY_RTOL * max(1.0, np.linalg.norm(a))):
        raise ValidationError("operator coefficient is not in the Lie algebra")
    bet = geom.beta
    aa = split.proj_a(a)
    aat = aa.T

    def apply(b):
        return 0.5 * (lie(b, a) + (1.0 + bet) * (lie(aa, b) - lie(split.proj_a(b), a)))

    def apply_adjoint(b):
        bat = lie(b, a.T)
        return 0.5 * (bat + (1.0 + bet) * (lie(aat, b) - split.proj_a(bat)))

    n = a.shape[0]
    probe = expaction.LinearOperatorHandle(
        apply=apply, apply_adjoint=apply_adjoint,
        one_norm_upper_bound=0.0, domain_shape=(n, n))
    if n * n <= EXHAUSTIVE_NORM_CAP:
        bound = expaction.one_norm_estimate_exhaustive(probe)
    else:
        bound = 2.0 * (2.0 + abs(1.0 + bet)) * float(np.sum(np.abs(a)))
    return expaction.LinearOperatorHandle(
        apply=apply, apply_adjoint=apply_adjoint,
        one_norm_upper_bound=bound, domain_shape=(n, n))


def transport(geom, x, xi, eta, t):
    """Parallel transport of eta along the geodesic driven by xi."""
    a = to_algebra(geom, x, xi)
    w0 = to_algebra(geom, x, eta)
    aa = geom.split.proj_a(a)
    bet = geom.beta
    left = expaction.matrix_exponential(t * (a - (1.0 + bet) * aa))
    right = expaction.matrix_exponential(t * (1.0 + bet) * aa)
    w = expaction.expa(transport_operator(geom, a), w0, t)
    return x @ left @ w @ right
