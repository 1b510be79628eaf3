"""Estimator-style wrappers over the functional core.

ChristoffelFunction and OptimalMesh follow the scikit-learn protocol: plain
attribute __init__, fit(X) with X the polygon vertex array, trailing
underscore attributes for fitted state, predict on point arrays. They exist
so the evaluator and mesh builder drop into sklearn pipelines and grid
search; all computation is delegated.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .geometry import ConvexPolygon
from .christoffel import christoffel_two_sided, evaluator
from .quadmesh import build_mesh, verify_mesh


def _vertices(X):
    arr = check_array(X, dtype=float, ensure_min_samples=3)
    if arr.shape[1] != 2:
        raise ValueError("polygon vertices must be an (k, 2) array")
    return arr


class ChristoffelFunction(BaseEstimator):
    """Degree-n Christoffel function of a convex polygon.

    fit(X) takes the polygon vertices; predict(X) evaluates lambda_n at
    query points. two_sided(x) returns the certified bracket
    (value, lower, upper) at a single point.

    Parameters
    ----------
    degree : int, default 4
        Polynomial degree n, 0 <= n <= 30.
    """

    def __init__(self, degree=4):
        self.degree = degree

    def fit(self, X, y=None):
        self.polygon_ = ConvexPolygon(_vertices(X))
        self.evaluator_ = evaluator(self.polygon_, int(self.degree))
        self.n_vertices_ = len(self.polygon_.vertices)
        return self

    def predict(self, X):
        check_is_fitted(self, "evaluator_")
        pts = check_array(X, dtype=float)
        if pts.shape[1] != 2:
            raise ValueError("query points must be an (m, 2) array")
        return np.atleast_1d(self.evaluator_.values(pts))

    def two_sided(self, x):
        """Certified bracket at one point: TwoSidedBounds for lambda_n(x)."""
        check_is_fitted(self, "evaluator_")
        return christoffel_two_sided(self.polygon_, int(self.degree), x)


class OptimalMesh(BaseEstimator):
    """Polynomial mesh of a convex polygon with a sampled norming constant.

    fit(X) takes the polygon vertices and builds the compressed rule;
    predict(X) evaluates fitted degree-n polynomials' worst-case norming
    factor sqrt(lambda_n / lambda_{mn}) at query points.

    Parameters
    ----------
    degree : int, default 2
        Mesh degree n, with multiplier * degree <= 15.
    multiplier : int, default 2
        Gap multiplier m >= 2; the rule is exact for degree 2*m*n.
    sample_density : int, default 64
        Lattice side used to sample the norming constant, >= 32.
    """

    def __init__(self, degree=2, multiplier=2, sample_density=64):
        self.degree = degree
        self.multiplier = multiplier
        self.sample_density = sample_density

    def fit(self, X, y=None):
        self.polygon_ = ConvexPolygon(_vertices(X))
        self.mesh_ = build_mesh(
            self.polygon_, int(self.degree), int(self.multiplier),
            int(self.sample_density),
        )
        self.points_ = self.mesh_.points
        self.weights_ = self.mesh_.weights
        self.nu_bound_ = self.mesh_.nu_bound
        return self

    def predict(self, X):
        check_is_fitted(self, "mesh_")
        pts = check_array(X, dtype=float)
        if pts.shape[1] != 2:
            raise ValueError("query points must be an (m, 2) array")
        n = int(self.degree)
        if n == 0:
            return np.ones(len(pts))
        lam_n = np.atleast_1d(evaluator(self.polygon_, n).values(pts))
        lam_mn = np.atleast_1d(
            evaluator(self.polygon_, int(self.multiplier) * n).values(pts)
        )
        return np.maximum(1.0, np.sqrt(lam_n / lam_mn))

    def verify(self, trials=100, seed=0):
        """Measured norming constant over seeded random polynomials."""
        check_is_fitted(self, "mesh_")
        return verify_mesh(self.polygon_, self.mesh_, trials=trials,
                           seed=seed)
