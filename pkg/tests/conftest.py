"""Shared fixtures: canonical domains plus a small normalized corpus."""

import numpy as np
import pytest

from christoffel2d.geometry import (
    ConvexPolygon,
    ellipse_polygon,
    john_normalize,
    random_convex_polygon,
)


@pytest.fixture(scope="session")
def square():
    return ConvexPolygon([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture(scope="session")
def john_square():
    # side 2.4: contains the unit disk, vertices at radius 1.2*sqrt(2) < 2
    s = 1.2
    return ConvexPolygon([[-s, -s], [s, -s], [s, s], [-s, s]])


@pytest.fixture(scope="session")
def triangle():
    return ConvexPolygon([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture(scope="session")
def disk256():
    return ellipse_polygon(1.0, 1.0, 256)


@pytest.fixture(scope="session")
def small_corpus():
    """Eight normalized random polygons spanning the vertex-count range."""
    polys = []
    for i, k in enumerate((5, 7, 9, 12, 16, 23, 31, 40)):
        raw = random_convex_polygon(k, seed=100 + i)
        polys.append(john_normalize(raw).body)
    return polys


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
