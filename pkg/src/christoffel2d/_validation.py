"""Input validation helpers shared across the package.

Small, composable checks in the style of sklearn's validation utilities:
each returns the validated (possibly converted) value or raises a subclass
of InputError with a message naming the offending argument.
"""

import numbers

import numpy as np

from .errors import DegreeTooLarge, InputError, InvalidPolygon

MAX_DEGREE = 64


def check_vertices(vertices, name="vertices"):
    """Coerce to a float (m, 2) array, m >= 3, finite entries."""
    arr = np.asarray(vertices, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidPolygon(f"{name} must have shape (m, 2), got {arr.shape}")
    if arr.shape[0] < 3:
        raise InvalidPolygon(f"{name} needs at least 3 vertices, got {arr.shape[0]}")
    if not np.isfinite(arr).all():
        raise InvalidPolygon(f"{name} contains non-finite entries")
    return arr


def check_points(points, name="points"):
    """Coerce to a float (k, 2) array. Accepts a single (2,) point."""
    arr = np.asarray(points, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError(f"{name} must have shape (k, 2) or (2,), got {np.shape(points)}")
    if not np.isfinite(arr).all():
        raise InputError(f"{name} contains non-finite entries")
    return arr, single


def check_degree(degree, name="degree", minimum=0):
    """Integer degree in [minimum, MAX_DEGREE]."""
    if isinstance(degree, bool) or not isinstance(degree, numbers.Integral):
        raise InputError(f"{name} must be an integer, got {degree!r}")
    degree = int(degree)
    if degree < minimum:
        raise InputError(f"{name} must be >= {minimum}, got {degree}")
    if degree > MAX_DEGREE:
        raise DegreeTooLarge(f"{name} = {degree} exceeds the supported maximum {MAX_DEGREE}")
    return degree


def check_positive_int(value, name, minimum=1, maximum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InputError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise InputError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise InputError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_positive_float(value, name):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise InputError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise InputError(f"{name} must be positive and finite, got {value}")
    return value


def check_rng(seed):
    """Accept None, an int seed, or a Generator; return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, numbers.Integral):
        return np.random.default_rng(seed)
    raise InputError(f"seed must be None, an int, or a numpy Generator, got {seed!r}")
