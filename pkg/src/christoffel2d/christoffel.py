"""Christoffel function evaluation on convex polygons.

lambda_n(x, D) is the minimal squared L2(D) norm over polynomials of total
degree <= n pinned to 1 at x; equivalently 1 / sum_j p_j(x)^2 for any
orthonormal basis {p_j} of the degree-n space. The evaluator maps the
polygon into John position (exact affine covariance makes this invisible
in the result), orthonormalizes a product-Legendre basis of the mapped
body's bounding box against the exact Gram matrix, and reads lambda off a
triangular solve.

The Gram matrix is assembled without discretization error: bivariate
Legendre moments come from Green's theorem edge integrals with Gauss rules
of sufficient exactness, and basis products are expanded through the
classical positive linearization of Legendre products. Assembly and
factorization run in extended precision because the Gram condition number
grows exponentially with degree; evaluation drops to float64 BLAS when the
measured pivots say that is accurate enough. Degrees past what the
geometry supports fail loudly (IllConditioned) instead of returning noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_triangular

from .errors import DegreeTooLarge, GridTooLarge, IllConditioned, Outside, OutOfRegime
from ._validation import check_points
from .bounds import CASE1_MARGIN, lower_certificate, upper_certificate
from .geometry import ConvexPolygon, john_normalize, local_chart, tau_retract

MAX_MOMENT_DEGREE = 64
MAX_EVAL_DEGREE = 30

_CHOL_PIVOT_RTOL = 1e-13
_CHOL_RESIDUAL_RTOL = 1e-10
# pivot ratio above which plain float64 triangular solves already deliver
# ~1e-9 relative accuracy, making the extended-precision solve unnecessary
_FAST_SOLVE_PIVOT_RATIO = 1e-8


# ---------------------------------------------------------------------------
# exact monomial moments


@dataclass(frozen=True)
class MomentTable:
    """Monomial moments m[p, q] = integral of x^p y^q over the polygon."""

    degree_max: int
    moments: np.ndarray  # (2*degree_max+1, 2*degree_max+1), zero beyond p+q cap

    @property
    def area(self):
        return float(self.moments[0, 0])

    def moment(self, p, q):
        if p < 0 or q < 0 or p + q > 2 * self.degree_max:
            raise DegreeTooLarge(
                f"moment ({p},{q}) outside table (p+q <= {2 * self.degree_max})"
            )
        return float(self.moments[p, q])


def _edge_gauss(count):
    # nodes/weights on [0, 1]
    t, w = leggauss(count)
    return 0.5 * (t + 1.0), 0.5 * w


@lru_cache(maxsize=64)
def _edge_gauss_ld(count):
    """Gauss-Legendre rule on [0, 1] accurate to longdouble.

    float64 nodes are one Newton step away from longdouble accuracy; the
    weights are then recomputed from the standard derivative identity.
    """
    t64, _ = leggauss(count)
    t = t64.astype(np.longdouble)
    for _ in range(2):
        p = _legendre_recurrence(t, count)
        dp = count * (t * p[count] - p[count - 1]) / (t * t - 1.0)
        t = t - p[count] / dp
    p = _legendre_recurrence(t, count)
    dp = count * (t * p[count] - p[count - 1]) / (t * t - 1.0)
    w = 2.0 / ((1.0 - t * t) * dp * dp)
    s, ws = (t + 1.0) / 2.0, w / 2.0
    s.setflags(write=False)
    ws.setflags(write=False)
    return s, ws


def _legendre_recurrence(t, degree):
    # three-term recurrence in the dtype of t
    out = np.empty((degree + 1,) + t.shape, dtype=t.dtype)
    out[0] = 1.0
    if degree >= 1:
        out[1] = t
    for k in range(1, degree):
        out[k + 1] = ((2 * k + 1) * t * out[k] - k * out[k - 1]) / (k + 1)
    return out


def polygon_moments(polygon, degree_max):
    """Exact monomial moment table for p + q <= 2*degree_max.

    Green's theorem turns each area moment into a line integral of
    -x^p y^(q+1)/(q+1) dx over the counterclockwise boundary; per edge the
    integrand is a polynomial of degree p+q+1, integrated exactly by a
    Gauss rule with degree_max+1 points.
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    degree_max = int(degree_max)
    if degree_max < 0:
        raise DegreeTooLarge("degree_max must be >= 0")
    if degree_max > MAX_MOMENT_DEGREE:
        raise DegreeTooLarge(
            f"degree_max {degree_max} exceeds cap {MAX_MOMENT_DEGREE}"
        )
    side = 2 * degree_max + 1
    s, w = _edge_gauss(degree_max + 1)
    px = np.arange(side)
    qy = np.arange(side + 1)
    inv_q1 = 1.0 / np.arange(1, side + 1)

    verts = polygon.vertices
    table = np.zeros((side, side))
    for i in range(len(verts)):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % len(verts)]
        dx, dy = x1 - x0, y1 - y0
        xs = x0 + s * dx
        ys = y0 + s * dy
        vx = xs[:, None] ** px[None, :]          # (K, side)
        vy = ys[:, None] ** qy[None, :]          # (K, side+1)
        acc = (vx * w[:, None]).T @ vy           # (side, side+1)
        table += (-dx) * acc[:, 1:] * inv_q1[None, :]

    # entries beyond the exactness cap were not integrated exactly; zero them
    p_plus_q = px[:, None] + px[None, :]
    table[p_plus_q > 2 * degree_max] = 0.0
    table.setflags(write=False)
    return MomentTable(degree_max=degree_max, moments=table)


# ---------------------------------------------------------------------------
# Legendre helpers


def legendre_values(t, degree):
    """P_0..P_degree at t; shape (degree+1,) + t.shape.

    Computation stays in t's floating dtype (float64 input and longdouble
    input both round-trip).
    """
    t = np.asarray(t)
    if t.dtype != np.longdouble:
        t = t.astype(float)
    return _legendre_recurrence(t, degree)


def legendre_antiderivatives(t, degree):
    """J_k(t) with J_k' = P_k and J_k(-1) = 0; shape (degree+1,) + t.shape.

    J_0 = t + 1 and J_k = (P_{k+1} - P_{k-1}) / (2k+1) for k >= 1.
    """
    p = legendre_values(t, degree + 1)
    out = np.empty_like(p[:-1])
    out[0] = t + 1.0
    for k in range(1, degree + 1):
        out[k] = (p[k + 1] - p[k - 1]) / (2 * k + 1)
    return out


@lru_cache(maxsize=64)
def _product_expansion(degree):
    """C[i*(degree+1)+j, d] = coefficient of P_d in P_i * P_j, d <= 2*degree.

    Positive linearization: P_i P_j = sum over m of
    A_m A_{i-m} A_{j-m} / A_{i+j-m} * (2(i+j-2m)+1)/(2(i+j-m)+1) * P_{i+j-2m}
    with A_0 = 1, A_r = A_{r-1} (2r-1)/(2r). Kept in extended precision for
    the Gram assembly.
    """
    size = degree + 1
    a = np.empty(2 * degree + 1, dtype=np.longdouble)
    a[0] = 1.0
    for r in range(1, 2 * degree + 1):
        a[r] = a[r - 1] * (2 * r - 1) / (2 * r)
    c = np.zeros((size * size, 2 * degree + 1), dtype=np.longdouble)
    for i in range(size):
        for j in range(size):
            m = np.arange(min(i, j) + 1)
            coeff = (
                a[m] * a[i - m] * a[j - m] / a[i + j - m]
                * (2 * (i + j - 2 * m) + 1.0) / (2 * (i + j - m) + 1.0)
            )
            c[i * size + j, i + j - 2 * m] = coeff
    c.setflags(write=False)
    return c


def legendre_moment_table(polygon, degree, dtype=float):
    """H[k, l] = integral over the polygon of P_k(u(x)) P_l(v(y)), k,l <= degree.

    u, v affinely map the bounding box onto [-1,1]^2. Green's theorem with
    the x-antiderivative: H[k, l] = boundary integral of
    rx * J_k(u(x)) * P_l(v(y)) dy, exact per edge with 2-point-per-degree
    Gauss (integrand degree <= 2*degree + 1). dtype selects the working
    precision (float64 or longdouble).
    """
    dtype = np.dtype(dtype)
    count = degree + 1  # exactness 2*degree+1
    if dtype == np.longdouble:
        s, w = _edge_gauss_ld(count)
    else:
        s, w = _edge_gauss(count)
    (ax, bx), (ay, by) = polygon.bounding_box
    cx, cy = dtype.type(0.5) * (ax + bx), dtype.type(0.5) * (ay + by)
    rx, ry = dtype.type(0.5) * (bx - ax), dtype.type(0.5) * (by - ay)

    verts = polygon.vertices.astype(dtype)
    table = np.zeros((degree + 1, degree + 1), dtype=dtype)
    for i in range(len(verts)):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % len(verts)]
        dy = y1 - y0
        if dy == 0.0:
            continue
        u = (x0 + s * (x1 - x0) - cx) / rx
        v = (y0 + s * dy - cy) / ry
        ju = legendre_antiderivatives(u, degree)  # (degree+1, K)
        pv = legendre_values(v, degree)           # (degree+1, K)
        table += (rx * dy) * ((ju * w) @ pv.T)
    return table


# ---------------------------------------------------------------------------
# evaluator


def _graded_indices(degree):
    pairs = [(a, d - a) for d in range(degree + 1) for a in range(d + 1)]
    ia = np.array([p[0] for p in pairs], dtype=int)
    ib = np.array([p[1] for p in pairs], dtype=int)
    return ia, ib


def _cholesky_extended(gram, pivot_floor, degree):
    """Lower Cholesky factor of a longdouble Gram with a pivot gate."""
    a = gram.copy()
    size = a.shape[0]
    min_pivot = np.inf
    for j in range(size):
        pivot = a[j, j] - a[j, :j] @ a[j, :j]
        if not pivot > pivot_floor:
            raise IllConditioned(
                f"Cholesky pivot underflow at degree {degree}: "
                f"pivot {float(pivot):.3e} at index {j} under floor "
                f"{float(pivot_floor):.3e}; the degree cap was optimistic "
                f"for this geometry"
            )
        min_pivot = min(min_pivot, float(pivot))
        a[j, j] = np.sqrt(pivot)
        if j + 1 < size:
            a[j + 1:, j] = (a[j + 1:, j] - a[j + 1:, :j] @ a[j, :j]) / a[j, j]
            a[j, j + 1:] = 0.0
    return a, min_pivot


class ChristoffelEvaluator:
    """Orthonormalized degree-n polynomial kernel on one polygon.

    The polygon is mapped into John position first; lambda transforms
    exactly under affine maps, so only conditioning changes. Basis:
    product-Legendre of the mapped body's bounding box, graded
    lexicographic, scaled to unit L2 norm on the box. The Gram matrix over
    the body is exact and factored in extended precision; point evaluation
    uses float64 BLAS whenever the pivot ratio says the cheap path is
    already accurate, extended-precision substitution otherwise.

    basis/gram/chol all refer to the normalized frame; basis() and
    orthonormal_values() accept source-frame points and map them.
    """

    def __init__(self, polygon, degree):
        if not isinstance(polygon, ConvexPolygon):
            polygon = ConvexPolygon(polygon)
        degree = int(degree)
        if degree < 0:
            raise DegreeTooLarge("degree must be >= 0")
        if degree > MAX_EVAL_DEGREE:
            raise DegreeTooLarge(
                f"degree {degree} exceeds conditioning cap {MAX_EVAL_DEGREE}"
            )
        self.polygon = polygon
        self.degree = degree
        self.normalized = john_normalize(polygon)
        self.det_normalizer = abs(self.normalized.to_normalized.det)
        body = self.normalized.body
        (ax, bx), (ay, by) = body.bounding_box
        self._cx, self._cy = 0.5 * (ax + bx), 0.5 * (ay + by)
        self._rx, self._ry = 0.5 * (bx - ax), 0.5 * (by - ay)
        self._ia, self._ib = _graded_indices(degree)
        sx = np.sqrt((2 * np.arange(degree + 1, dtype=np.longdouble) + 1) / (2 * self._rx))
        sy = np.sqrt((2 * np.arange(degree + 1, dtype=np.longdouble) + 1) / (2 * self._ry))
        scale_ld = sx[self._ia] * sy[self._ib]
        self._scale = scale_ld.astype(float)

        h = legendre_moment_table(body, 2 * degree, dtype=np.longdouble)
        c = _product_expansion(degree)
        d = c @ h @ c.T  # pair-product integrals, (n+1)^2 square
        size = degree + 1
        rows = self._ia[:, None] * size + self._ia[None, :]
        cols = self._ib[:, None] * size + self._ib[None, :]
        gram = d[rows.ravel(), cols.ravel()].reshape(rows.shape)
        gram = gram * scale_ld[:, None] * scale_ld[None, :]
        gram = 0.5 * (gram + gram.T)
        self.gram = gram.astype(float)

        max_diag = np.max(np.diag(gram))
        chol_ld, min_pivot = _cholesky_extended(
            gram, _CHOL_PIVOT_RTOL * max_diag, degree
        )
        self._chol_ld = chol_ld
        self.chol = chol_ld.astype(float)
        self._fast = min_pivot >= _FAST_SOLVE_PIVOT_RATIO * float(max_diag)

        residual = np.linalg.norm(self.chol @ self.chol.T - self.gram)
        if residual > _CHOL_RESIDUAL_RTOL * np.linalg.norm(self.gram):
            raise IllConditioned(
                f"Cholesky residual {residual:.3e} exceeds tolerance"
            )

    @property
    def basis_size(self):
        return len(self._scale)

    def _box_coords(self, pts, dtype=float):
        normed = self.normalized.map(pts).astype(dtype)
        u = (normed[:, 0] - self._cx) / self._rx
        v = (normed[:, 1] - self._cy) / self._ry
        return u, v

    def basis(self, points):
        """Normalized-frame basis at source-frame points, (basis_size, npoints)."""
        pts, _ = check_points(points)
        u, v = self._box_coords(pts)
        pu = legendre_values(u, self.degree)
        pv = legendre_values(v, self.degree)
        return self._scale[:, None] * pu[self._ia] * pv[self._ib]

    def _solve(self, points):
        """z with chol @ z = basis(points), in the precision the pivots demand."""
        pts, _ = check_points(points)
        if self._fast:
            return solve_triangular(self.chol, self.basis(pts), lower=True)
        u, v = self._box_coords(pts, dtype=np.longdouble)
        pu = legendre_values(u, self.degree)
        pv = legendre_values(v, self.degree)
        b = (self._scale.astype(np.longdouble))[:, None] * pu[self._ia] * pv[self._ib]
        chol = self._chol_ld
        z = np.empty_like(b)
        for j in range(b.shape[0]):
            z[j] = (b[j] - chol[j, :j] @ z[:j]) / chol[j, j]
        return z

    def orthonormal_values(self, points):
        """Values of the polygon-orthonormal basis at source-frame points.

        Rows span exactly the degree-n polynomials; their Gram over the
        source polygon is identity divided by the normalization determinant.
        """
        return np.asarray(self._solve(points), dtype=float)

    def orthonormal_integrals(self):
        """Integral over the source polygon of each orthonormal_values row.

        Only the constant row integrates to something nonzero, which pins
        the whole moment vector: the rest vanish by orthogonality.
        """
        out = np.zeros(self.basis_size)
        out[0] = np.sqrt(self.normalized.body.area) / self.det_normalizer
        return out

    def values(self, points):
        """lambda_n at each point (points may lie outside the polygon)."""
        pts, single = check_points(points)
        z = self._solve(pts)
        lam = np.asarray(
            1.0 / (np.einsum("ij,ij->j", z, z) * self.det_normalizer), dtype=float
        )
        return float(lam[0]) if single else lam


@lru_cache(maxsize=64)
def evaluator(polygon, degree):
    """Cached ChristoffelEvaluator factory (polygons hash by vertex bytes)."""
    return ChristoffelEvaluator(polygon, degree)


def christoffel_eval(polygon, n, x):
    """lambda_n(x, polygon) at a single point."""
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    return evaluator(polygon, int(n)).values(np.asarray(x, dtype=float).reshape(2))


def christoffel_values(polygon, n, points):
    """Vectorized lambda_n over an array of points."""
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    return evaluator(polygon, int(n)).values(points)


# ---------------------------------------------------------------------------
# two-sided geometric estimate


@dataclass(frozen=True)
class TwoSidedBounds:
    """lambda_n with its geometric lower/upper comparators.

    Iterates as the 4-tuple (value, lower, upper, retracted); the
    certificates and normalization determinant ride along for reporting.
    """

    value: float
    lower: float
    upper: float
    retracted: np.ndarray
    cert_lower: object
    cert_upper: object
    det_normalizer: float

    def __iter__(self):
        return iter((self.value, self.lower, self.upper, self.retracted))

    @property
    def case_lower(self):
        return self.cert_lower.case

    @property
    def case_upper(self):
        return self.cert_upper.case


def _certified_pair(body, n, xn):
    """Both certificates at the retraction of the normalized point xn."""
    retracted_n = tau_retract(body.body, xn, n)
    chart = None
    if float(body.body.edge_distances(retracted_n).min()) < CASE1_MARGIN - 1e-12:
        chart = local_chart(body.body, retracted_n)
    cert_l = lower_certificate(body.body, retracted_n, chart)
    cert_u = upper_certificate(body.body, retracted_n, chart)
    return retracted_n, cert_l, cert_u


def christoffel_two_sided(polygon, n, x):
    """Evaluate lambda_n(x) alongside the n^-2-scaled certificate values.

    The certificates are produced at the retraction of x into the slightly
    shrunk body (computed in John-normalized coordinates) and mapped back
    to the original frame by determinant covariance.
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    n = int(n)
    if n < 1:
        raise DegreeTooLarge("two-sided estimate needs n >= 1")
    if n > MAX_EVAL_DEGREE:
        raise DegreeTooLarge(f"degree {n} exceeds cap {MAX_EVAL_DEGREE}")
    x = np.asarray(x, dtype=float).reshape(2)
    scale = float(np.abs(polygon.vertices).max())
    if not polygon.contains(x, tol=1e-12 * scale):
        raise Outside("point is outside the polygon")

    body = john_normalize(polygon)
    retracted_n, cert_l, cert_u = _certified_pair(body, n, body.map(x))
    det_t = abs(body.to_normalized.det)
    denom = n * n * det_t
    lam = evaluator(polygon, n).values(x)
    return TwoSidedBounds(
        value=float(lam),
        lower=cert_l.value / denom,
        upper=cert_u.value / denom,
        retracted=body.unmap(retracted_n),
        cert_lower=cert_l,
        cert_upper=cert_u,
        det_normalizer=det_t,
    )


# ---------------------------------------------------------------------------
# reference comparators


def reference_disk(z, n):
    """Interior comparator n^-2 sqrt(1 - |z|) for the unit disk."""
    z = np.asarray(z, dtype=float).reshape(2)
    n = int(n)
    if n < 1:
        raise DegreeTooLarge("comparator needs n >= 1")
    r = float(np.linalg.norm(z))
    limit = 1.0 - 2.0 ** -6 / (n * n)
    if r > limit + 1e-12:
        raise OutOfRegime(f"|z| = {r:.6f} beyond the regime bound {limit:.6f}")
    return (1.0 - r) ** 0.5 / (n * n)


def reference_square_upper(z, n):
    """Upper comparator n^-2 sqrt(z1 z2) on the unit square's regime box."""
    z = np.asarray(z, dtype=float).reshape(2)
    n = int(n)
    if n < 1:
        raise DegreeTooLarge("comparator needs n >= 1")
    lo = 2.0 ** -7 / (n * n)
    if np.any(z < lo - 1e-12) or np.any(z > 0.5 + 1e-12):
        raise OutOfRegime(
            f"z = ({z[0]:.6f}, {z[1]:.6f}) outside [{lo:.6f}, 0.5]^2"
        )
    return float(np.sqrt(z[0] * z[1])) / (n * n)


# ---------------------------------------------------------------------------
# field export


@dataclass(frozen=True)
class FieldTable:
    """Row-major interior lattice evaluation of the two-sided pipeline."""

    x: np.ndarray
    y: np.ndarray
    value: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    case_lower: np.ndarray
    case_upper: np.ndarray

    def __len__(self):
        return len(self.x)


def christoffel_field(polygon, n, grid):
    """Evaluate lambda_n and both comparators on a bounding-box lattice.

    grid is (nx, ny); the lattice spans the bounding box inclusively and
    rows are emitted in row-major order (y outer, x inner) for lattice
    points inside the polygon only.
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    n = int(n)
    nx, ny = int(grid[0]), int(grid[1])
    if nx < 1 or ny < 1:
        raise GridTooLarge("grid must be at least 1x1")
    if nx * ny > 10 ** 6:
        raise GridTooLarge(f"grid {nx}x{ny} exceeds 1e6 cells")
    (ax, bx), (ay, by) = polygon.bounding_box
    xs = np.linspace(ax, bx, nx) if nx > 1 else np.array([0.5 * (ax + bx)])
    ys = np.linspace(ay, by, ny) if ny > 1 else np.array([0.5 * (ay + by)])
    gx, gy = np.meshgrid(xs, ys)  # row-major: y outer
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    pts = pts[polygon.contains(pts)]

    count = len(pts)
    ev = evaluator(polygon, n)
    lam = np.atleast_1d(ev.values(pts)) if count else np.empty(0)
    lower = np.full(count, np.nan)
    upper = np.full(count, np.nan)
    case_l = np.zeros(count, dtype=int)
    case_u = np.zeros(count, dtype=int)
    if n >= 1 and count:
        body = john_normalize(polygon)
        det_t = abs(body.to_normalized.det)
        denom = n * n * det_t
        normed = body.map(pts)
        for i in range(count):
            _, cert_l, cert_u = _certified_pair(body, n, normed[i])
            lower[i] = cert_l.value / denom
            upper[i] = cert_u.value / denom
            case_l[i] = cert_l.case
            case_u[i] = cert_u.case
    return FieldTable(
        x=pts[:, 0], y=pts[:, 1], value=lam, lower=lower, upper=upper,
        case_lower=case_l, case_upper=case_u,
    )
