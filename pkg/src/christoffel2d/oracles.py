"""Grid-search oracles for the two geometric extremal quantities.

These deliberately dumb searches bracket the certificate constructions from
the bounds module: the inscribed-ellipse search only ever returns less than
the true supremum, the enclosing-parallelogram search only ever more than
the true infimum, and doubling the resolution refines both monotonically
because the parameter grids nest. Test support only; nothing here is part
of the library's stable API.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .geometry import ConvexPolygon, NormalizedBody

_MIN_RESOLUTION = 8


def _as_polygon(body):
    if isinstance(body, NormalizedBody):
        return body.body
    if isinstance(body, ConvexPolygon):
        return body
    return ConvexPolygon(body)


def _check_resolution(resolution):
    resolution = int(resolution)
    if resolution < _MIN_RESOLUTION:
        raise InputError(f"resolution must be >= {_MIN_RESOLUTION}")
    return resolution


def brute_force_L(body, x, resolution):
    """Best inscribed-ellipse value at x found on a nested parameter grid.

    Family searched: E = c + t * R(theta) diag(rho, 1/rho) B with t maximal
    for containment in the polygon (computed exactly per edge) and x inside
    E. Score sqrt(1 - q/t) * t^2 with q the elliptic distance of x from c.
    Grids: centers on a square of half-width 0.75 * dist(x, boundary) about
    x, theta over [0, pi), log-uniform aspect in [1/4, 4]; all three nest
    under resolution doubling, so results never decrease along doublings and
    never exceed the true supremum.
    """
    poly = _as_polygon(body)
    resolution = _check_resolution(resolution)
    x = np.asarray(x, dtype=float).reshape(2)

    nu = poly.edge_normals
    off = poly.edge_offsets
    h = 0.75 * float(poly.edge_distances(x).min())
    if h < 0:
        raise InputError("x lies outside the body")
    side = np.linspace(x[0] - h, x[0] + h, resolution + 1)
    rise = np.linspace(x[1] - h, x[1] + h, resolution + 1)
    gx, gy = np.meshgrid(side, rise)
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    slack = off[:, None] - nu @ centers.T  # (edges, ncenters)
    dx = x[None, :] - centers  # (ncenters, 2)

    thetas = np.linspace(0.0, np.pi, resolution, endpoint=False)
    aspects = 2.0 ** np.linspace(-2.0, 2.0, resolution + 1)
    best = 0.0
    for th in thetas:
        ct, st = np.cos(th), np.sin(th)
        rot = np.array([[ct, -st], [st, ct]])
        for rho in aspects:
            a = rot @ np.diag([rho, 1.0 / rho])
            norms = np.linalg.norm(nu @ a, axis=1)  # |A^T nu_e|
            tstar = np.min(slack / norms[:, None], axis=0)
            q = np.linalg.norm(dx @ np.linalg.inv(a).T, axis=1)
            ok = (tstar > 0.0) & (q <= tstar)
            if not ok.any():
                continue
            score = np.sqrt(1.0 - q[ok] / tstar[ok]) * tstar[ok] ** 2
            best = max(best, float(score.max()))
    return best


def brute_force_U(body, x, resolution):
    """Best enclosing-parallelogram value at x on a nested direction grid.

    For each pair of slab directions from the theta grid, the tightest
    enclosing parallelogram comes from vertex support values; the score is
    sqrt(u1' u2') * w1 w2 / |sin angle| with u' the relative position of x
    in each slab folded to [0, 1/2]. Always >= the true infimum and
    nonincreasing under resolution doubling.
    """
    poly = _as_polygon(body)
    resolution = _check_resolution(resolution)
    x = np.asarray(x, dtype=float).reshape(2)

    thetas = np.linspace(0.0, np.pi, resolution, endpoint=False)
    dirs = np.column_stack([np.cos(thetas), np.sin(thetas)])  # slab normals
    supports = poly.vertices @ dirs.T  # (nverts, ndirs)
    lows, highs = supports.min(axis=0), supports.max(axis=0)
    widths = highs - lows
    pos = dirs @ x  # (ndirs,)
    rel = (pos - lows) / widths
    folded = np.minimum(rel, 1.0 - rel)
    # x on or outside a supporting line folds to <= 0; clamp, the score is 0
    folded = np.maximum(folded, 0.0)

    cross = np.abs(np.outer(np.sin(thetas), np.cos(thetas))
                   - np.outer(np.cos(thetas), np.sin(thetas)))
    i, j = np.triu_indices(len(thetas), k=1)
    sin_ij = cross[i, j]
    keep = sin_ij >= 1e-9
    i, j, sin_ij = i[keep], j[keep], sin_ij[keep]
    scores = (
        np.sqrt(folded[i] * folded[j]) * widths[i] * widths[j] / sin_ij
    )
    return float(scores.min())
