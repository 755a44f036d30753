"""Small matrix helpers used throughout the package."""
import numpy as np

from .errors import DimensionError, ValidationError


def sym(m):
    """Symmetric part (m + m^T)/2."""
    return 0.5 * (m + m.T)


def asym(m):
    """Antisymmetric part (m - m^T)/2."""
    return 0.5 * (m - m.T)


def lie(a, b):
    """Matrix commutator [a, b] = ab - ba."""
    return a @ b - b @ a


def vcat(a, b):
    """Stack two blocks vertically."""
    return np.concatenate([a, b], axis=0)


def hcat(a, b):
    """Stack two blocks horizontally."""
    return np.concatenate([a, b], axis=1)


def fnorm(m):
    """Frobenius norm."""
    return float(np.sqrt(np.sum(m * m)))


def check_square(m, name="matrix"):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def check_finite(m, name="matrix"):
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def check_same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise DimensionError(
            f"{names[0]} and {names[1]} must have equal shapes, "
            f"got {a.shape} and {b.shape}")
