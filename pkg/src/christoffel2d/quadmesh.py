"""Positive quadrature, rule compression, and norming meshes on polygons.

The chain: a fine positive rule exact to the requested degree (centroid fan
with collapsed Gauss product rules), compressed to at most dim-many nodes by
nonnegative least squares on the moment system in the polygon-orthonormal
basis, then turned into a polynomial mesh whose norming constant is the
square-root Christoffel ratio sampled over an interior lattice. verify_mesh
closes the loop by measuring sup-norm ratios of random polynomials.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    CompressionFailed,
    DegreeTooLarge,
    InputError,
    NumericalFailure,
    Outside,
)
from ._validation import check_positive_int
from .geometry import ConvexPolygon
from .christoffel import (
    MAX_EVAL_DEGREE,
    MAX_MOMENT_DEGREE,
    _edge_gauss,
    evaluator,
    polygon_moments,
)

MAX_MESH_DEGREE = 15  # cap on m*n for build_mesh (needs lambda at 2*m*n)
_RESIDUAL_TARGET = 1e-10
_RESIDUAL_ACCEPT = 1e-8


def space_dimension(degree):
    """dim of bivariate polynomials of total degree <= degree."""
    return (degree + 1) * (degree + 2) // 2


def _readonly(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# quadrature container


@dataclass(frozen=True)
class Quadrature:
    """Positive interpolatory rule: nodes, weights > 0, claimed exactness."""

    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2 or len(nodes) != len(weights):
            raise InputError("nodes must be (N, 2) with matching weights")
        if not (np.isfinite(nodes).all() and np.isfinite(weights).all()):
            raise InputError("quadrature data contains non-finite entries")
        if len(weights) == 0 or weights.min() <= 0.0:
            raise InputError("all quadrature weights must be strictly positive")
        object.__setattr__(self, "nodes", _readonly(nodes))
        object.__setattr__(self, "weights", _readonly(weights))
        object.__setattr__(self, "exact_degree", int(self.exact_degree))

    def __len__(self):
        return len(self.weights)

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def moment_defect(self, polygon):
        """Worst moment residual |sum w x^p y^q - m[p][q]| / max(1, |m|).

        Scans every p + q <= exact_degree against the exact moment table.
        """
        if not isinstance(polygon, ConvexPolygon):
            polygon = ConvexPolygon(polygon)
        deg = self.exact_degree
        table = polygon_moments(polygon, (deg + 1) // 2).moments
        xs, ys = self.nodes[:, 0], self.nodes[:, 1]
        powx = xs[None, :] ** np.arange(deg + 1)[:, None]  # (deg+1, N)
        powy = ys[None, :] ** np.arange(deg + 1)[:, None]
        sums = (powx * self.weights) @ powy.T               # (deg+1, deg+1)
        p, q = np.meshgrid(np.arange(deg + 1), np.arange(deg + 1), indexing="ij")
        sel = p + q <= deg
        exact = table[: deg + 1, : deg + 1]
        defect = np.abs(sums - exact) / np.maximum(1.0, np.abs(exact))
        return float(defect[sel].max())

    def validate(self, polygon, tol=1e-10):
        """Raise NumericalFailure unless the moment invariant holds at tol."""
        defect = self.moment_defect(polygon)
        if defect > tol:
            raise NumericalFailure(
                f"quadrature moment defect {defect:.3e} exceeds {tol:.1e}"
            )
        return defect


# ---------------------------------------------------------------------------
# fine rule: centroid fan + collapsed Gauss


def fine_quadrature(polygon, exact_degree):
    """Positive rule exact for total degree <= exact_degree.

    The polygon is fanned into triangles about its centroid; each triangle
    carries a product Gauss rule collapsed onto it by (s, t) -> barycentric
    (s, t(1-s)), whose Jacobian factor (1-s) raises the s-degree by one,
    hence ceil((d+2)/2) points per axis. Nodes are strictly interior.
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    exact_degree = int(exact_degree)
    if exact_degree < 0:
        raise DegreeTooLarge("exact_degree must be >= 0")
    if exact_degree > MAX_MOMENT_DEGREE:
        raise DegreeTooLarge(
            f"exact_degree {exact_degree} exceeds cap {MAX_MOMENT_DEGREE}"
        )
    k = (exact_degree + 3) // 2  # ceil((d+2)/2)
    s, ws = _edge_gauss(k)
    t, wt = _edge_gauss(k)
    u = np.repeat(s, k)                      # (k*k,)
    v = (np.tile(t, k) * (1.0 - u))
    w_ref = (np.repeat(ws, k) * np.tile(wt, k) * (1.0 - u))

    centroid = polygon.centroid
    verts = polygon.vertices
    nodes = []
    weights = []
    for i in range(len(verts)):
        a, b = verts[i], verts[(i + 1) % len(verts)]
        e1, e2 = a - centroid, b - centroid
        jac = e1[0] * e2[1] - e1[1] * e2[0]  # 2 * signed area
        pts = centroid + np.outer(u, e1) + np.outer(v, e2)
        nodes.append(pts)
        weights.append(w_ref * jac)
    return Quadrature(
        nodes=np.vstack(nodes), weights=np.concatenate(weights),
        exact_degree=exact_degree,
    )


# ---------------------------------------------------------------------------
# Tchakaloff compression via nonnegative least squares


def _nnls(a, b, target):
    """Lawson-Hanson NNLS with incremental Cholesky and a residual early exit.

    Returns (x, residual_norm). The passive set never exceeds the row count,
    which is what caps the compressed node count at the space dimension.
    """
    rows, cols = a.shape
    atb = a.T @ b
    x = np.zeros(cols)
    passive = []
    r_factor = np.zeros((0, 0))
    resid = b.copy()
    resid_norm = float(np.linalg.norm(resid))
    banned = np.zeros(cols, dtype=bool)

    def solve_passive():
        rhs = atb[passive]
        y = solve_triangular(r_factor, rhs, lower=False, trans="T")
        return solve_triangular(r_factor, y, lower=False)

    def refactor():
        return np.linalg.qr(a[:, passive], mode="r")

    budget = 5 * rows + 50
    for _ in range(budget):
        if resid_norm <= target:
            break
        grad = a.T @ resid
        grad[passive] = -np.inf
        grad[banned] = -np.inf
        j = int(np.argmax(grad))
        if grad[j] <= 1e-13 * max(1.0, resid_norm):
            break  # KKT-optimal at this precision
        col = a[:, j]
        if passive:
            v = a[:, passive].T @ col
            srow = solve_triangular(r_factor, v, lower=False, trans="T")
            rho2 = float(col @ col - srow @ srow)
            if rho2 <= 1e-14 * float(col @ col):
                banned[j] = True  # linearly dependent on the passive set
                continue
            size = len(passive)
            grown = np.zeros((size + 1, size + 1))
            grown[:size, :size] = r_factor
            grown[:size, size] = srow
            grown[size, size] = np.sqrt(rho2)
            r_factor = grown
        else:
            r_factor = np.array([[np.linalg.norm(col)]])
        passive.append(j)
        banned[:] = False

        for _ in range(100):
            z = solve_passive()
            if z.min() > 0.0:
                x[passive] = z
                break
            xp = x[passive]
            mask = z <= 0.0
            alpha = float(np.min(xp[mask] / (xp[mask] - z[mask])))
            xp = xp + alpha * (z - xp)
            keep = xp > 1e-15 * xp.max()
            x[passive] = 0.0
            passive = [p for p, k in zip(passive, keep) if k]
            x[passive] = xp[keep]
            if not passive:
                r_factor = np.zeros((0, 0))
                break
            r_factor = refactor()
        resid = b - a[:, passive] @ x[passive] if passive else b.copy()
        resid_norm = float(np.linalg.norm(resid))
    return x, resid_norm


def tchakaloff_compress(quad, polygon, exact_degree):
    """Compress a positive rule to at most dim-many of its own nodes.

    The moment system is written in the polygon-orthonormal basis (rows
    near-orthogonal, so the nonnegative solve is well scaled); the NNLS
    vertex solution has support bounded by the basis dimension, which is the
    classical node-count bound. An input that is already small enough and
    already matches the moments is returned unchanged.
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    exact_degree = int(exact_degree)
    if exact_degree < 0:
        raise DegreeTooLarge("exact_degree must be >= 0")
    if exact_degree > MAX_EVAL_DEGREE:
        raise DegreeTooLarge(
            f"exact_degree {exact_degree} exceeds cap {MAX_EVAL_DEGREE}"
        )
    if quad.exact_degree < exact_degree:
        raise InputError(
            f"input rule exact to {quad.exact_degree} cannot be compressed "
            f"to exactness {exact_degree}"
        )
    ev = evaluator(polygon, exact_degree)
    a = ev.orthonormal_values(quad.nodes)       # (dim, nnodes)
    b = ev.orthonormal_integrals()
    scale = float(np.linalg.norm(b))
    dim = space_dimension(exact_degree)

    if len(quad) <= dim:
        resid = float(np.linalg.norm(b - a @ quad.weights))
        if resid <= _RESIDUAL_TARGET * scale:
            return quad

    x, resid_norm = _nnls(a, b, target=_RESIDUAL_TARGET * scale)
    if resid_norm > _RESIDUAL_ACCEPT * scale:
        raise CompressionFailed(
            f"moment residual {resid_norm:.3e} above "
            f"{_RESIDUAL_ACCEPT:.0e} * {scale:.3e}; retry with a finer "
            f"input quadrature"
        )
    support = x > 0.0
    if support.sum() > dim:
        raise CompressionFailed(
            f"support {int(support.sum())} exceeds space dimension {dim}"
        )
    return Quadrature(
        nodes=quad.nodes[support], weights=x[support],
        exact_degree=exact_degree,
    )


# ---------------------------------------------------------------------------
# norming ratio and meshes


def norming_ratio(polygon, n, m, xi):
    """sqrt(lambda_n(xi) / lambda_{m n}(xi)), the pointwise norming factor.

    Degree monotonicity makes it >= 1; it is exactly 1 when the two spaces
    coincide (n = 0).
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    n = check_positive_int(n, "n", minimum=0)
    m = check_positive_int(m, "m", minimum=2)
    if m * n > MAX_EVAL_DEGREE:
        raise DegreeTooLarge(f"m*n = {m * n} exceeds cap {MAX_EVAL_DEGREE}")
    xi = np.asarray(xi, dtype=float).reshape(2)
    scale = float(np.abs(polygon.vertices).max())
    if not polygon.contains(xi, tol=1e-12 * scale):
        raise Outside("xi is outside the polygon")
    lam_n = evaluator(polygon, n).values(xi)
    lam_mn = evaluator(polygon, m * n).values(xi)
    return max(1.0, float(np.sqrt(lam_n / lam_mn)))


@dataclass(frozen=True)
class PolynomialMesh:
    """Norming set with its sampled norming constant and generating rule.

    Plain container: build_mesh guarantees cardinality <= dim of the
    degree-2mn space ( = (2mn+1)(mn+1) ); hand-built instances (e.g. a
    dense lattice used as a trivial mesh) may ignore that bound.
    """

    degree: int
    multiplier: int
    points: np.ndarray
    weights: np.ndarray
    nu_bound: float
    sample_density: int
    exact_degree: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) != len(w):
            raise InputError("points must be (N, 2) with matching weights")
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "weights", _readonly(w))

    def __len__(self):
        return len(self.points)

    @property
    def cardinality_cap(self):
        mn = self.multiplier * self.degree
        return (2 * mn + 1) * (mn + 1)

    def to_dict(self):
        return {
            "n": self.degree,
            "m": self.multiplier,
            "nu_bound": self.nu_bound,
            "sample_density": self.sample_density,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "exact_degree": self.exact_degree,
        }


def mesh_from_dict(data):
    missing = {"n", "m", "points", "weights", "nu_bound", "sample_density",
               "exact_degree"} - set(data)
    if missing:
        raise InputError(f"mesh record is missing {sorted(missing)}")
    return PolynomialMesh(
        degree=int(data["n"]),
        multiplier=int(data["m"]),
        points=np.asarray(data["points"], dtype=float),
        weights=np.asarray(data["weights"], dtype=float),
        nu_bound=float(data["nu_bound"]),
        sample_density=int(data["sample_density"]),
        exact_degree=int(data["exact_degree"]),
    )


def save_mesh(mesh, path):
    with open(path, "w") as fh:
        json.dump(mesh.to_dict(), fh, indent=1)


def load_mesh(path):
    with open(path) as fh:
        return mesh_from_dict(json.load(fh))


def save_quadrature_csv(quad, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "w"])
        for (x, y), w in zip(quad.nodes, quad.weights):
            writer.writerow([repr(float(x)), repr(float(y)),
                             repr(float(w))])


def load_quadrature_csv(path, exact_degree):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["x", "y", "w"]:
            raise InputError("quadrature CSV must start with header x,y,w")
        rows = [[float(c) for c in row] for row in reader if row]
    arr = np.asarray(rows, dtype=float)
    return Quadrature(nodes=arr[:, :2], weights=arr[:, 2],
                      exact_degree=int(exact_degree))


def _interior_lattice(polygon, density):
    (ax, bx), (ay, by) = polygon.bounding_box
    xs = np.linspace(ax, bx, density)
    ys = np.linspace(ay, by, density)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    scale = float(np.abs(polygon.vertices).max())
    return pts[polygon.contains(pts, tol=-1e-12 * max(1.0, scale))]


def _boundary_samples(polygon, per_edge):
    verts = polygon.vertices
    t = (np.arange(per_edge) + 0.5) / per_edge
    chunks = []
    for i in range(len(verts)):
        a, b = verts[i], verts[(i + 1) % len(verts)]
        chunks.append(a + t[:, None] * (b - a))
    return np.vstack(chunks)


def dense_sample_set(polygon, density, per_edge=256):
    """Interior lattice plus midpoint boundary samples; the sup-norm proxy."""
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    return np.vstack([
        _interior_lattice(polygon, density),
        _boundary_samples(polygon, per_edge),
    ])


def build_mesh(polygon, n, m=2, sample_density=64):
    """Compressed positive rule exact to 2mn plus a sampled norming constant.

    The mesh points are the compressed rule's nodes (count <= dim of the
    degree-2mn space); nu_bound is the maximum norming ratio over a
    sample_density^2 interior lattice. A failed compression is retried once
    from a finer fine-rule before propagating.
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    n = check_positive_int(n, "n", minimum=0)
    m = check_positive_int(m, "m", minimum=2)
    sample_density = check_positive_int(sample_density, "sample_density",
                                        minimum=32)
    if m * n > MAX_MESH_DEGREE:
        raise DegreeTooLarge(
            f"m*n = {m * n} exceeds mesh cap {MAX_MESH_DEGREE}"
        )
    target = 2 * m * n
    try:
        rule = tchakaloff_compress(fine_quadrature(polygon, target),
                                   polygon, target)
    except CompressionFailed:
        rule = tchakaloff_compress(
            fine_quadrature(polygon, min(target + 4, MAX_MOMENT_DEGREE)),
            polygon, target)

    lattice = _interior_lattice(polygon, sample_density)
    if n == 0 or len(lattice) == 0:
        nu = 1.0
    else:
        lam_n = np.atleast_1d(evaluator(polygon, n).values(lattice))
        lam_mn = np.atleast_1d(evaluator(polygon, m * n).values(lattice))
        nu = max(1.0, float(np.sqrt(np.max(lam_n / lam_mn))))
    return PolynomialMesh(
        degree=n, multiplier=m, points=rule.nodes, weights=rule.weights,
        nu_bound=nu, sample_density=sample_density, exact_degree=target,
    )


def verify_mesh(polygon, mesh, trials=100, seed=0):
    """Measured norming constant over seeded random degree-n polynomials.

    Draws standard-normal coefficients in the polygon-orthonormal basis
    (one spawned generator per trial, so the result is a pure max-reduction
    independent of trial ordering), takes sup |p| over an interior lattice
    refined by 256 boundary samples per edge, divides by sup |p| over the
    mesh points, and returns the worst observed ratio.
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    trials = check_positive_int(trials, "trials", minimum=100)
    ev = evaluator(polygon, mesh.degree)
    dense = dense_sample_set(polygon, mesh.sample_density)
    basis_dense = ev.orthonormal_values(dense)          # (dim, ndense)
    basis_mesh = ev.orthonormal_values(mesh.points)     # (dim, nmesh)
    streams = np.random.SeedSequence(seed).spawn(trials)
    coeff = np.stack([
        np.random.default_rng(s).standard_normal(ev.basis_size)
        for s in streams
    ])
    sup_dense = np.abs(coeff @ basis_dense).max(axis=1)
    sup_mesh = np.abs(coeff @ basis_mesh).max(axis=1)
    return float(np.max(sup_dense / sup_mesh))
