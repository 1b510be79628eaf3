"""Planar convex geometry.

Polygons and affine maps, minimum-volume enclosing ellipses, normalization
into John position (unit disk inside, twice the unit disk outside), boundary
charts straightening the body near a boundary point, and the radial
retraction used to pull mesh points off the boundary.

Conventions: polygons are strictly convex with vertices in counterclockwise
order; edge i runs from vertex i to vertex i+1 and has unit outward normal
nu_i with nu_i . p = b_i on the edge and nu_i . p < b_i inside.
"""

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from ._validation import check_points, check_positive_int, check_rng, check_vertices
from .errors import (
    AtOrigin,
    ChartFailure,
    DegenerateInput,
    InputError,
    InvalidPolygon,
    NumericalFailure,
    Outside,
    TooCloseToBoundary,
)

# strictness threshold for convexity cross products, relative to coord scale
_CONVEXITY_RTOL = 1e-12


def _readonly(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class AffineMap2:
    """Affine map p -> linear @ p + shift on the plane."""

    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float)
        sh = np.asarray(self.shift, dtype=float)
        if lin.shape != (2, 2) or sh.shape != (2,):
            raise InputError("AffineMap2 needs a (2, 2) linear part and a (2,) shift")
        if not (np.isfinite(lin).all() and np.isfinite(sh).all()):
            raise InputError("AffineMap2 entries must be finite")
        object.__setattr__(self, "linear", _readonly(lin))
        object.__setattr__(self, "shift", _readonly(sh))

    @classmethod
    def identity(cls):
        return cls(np.eye(2), np.zeros(2))

    @property
    def det(self):
        a = self.linear
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        return pts @ self.linear.T + self.shift

    def inverse(self):
        inv = np.linalg.inv(self.linear)
        return AffineMap2(inv, -inv @ self.shift)

    def after(self, other):
        """Composition self(other(p))."""
        return AffineMap2(
            self.linear @ other.linear, self.linear @ other.shift + self.shift
        )


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon with CCW vertices, immutable and hashable.

    Hashability is on exact vertex bytes so polygons can key caches of
    derived objects (normalization maps, Gram factorizations).
    """

    vertices: np.ndarray

    def __post_init__(self):
        arr = check_vertices(self.vertices)
        scale = max(1.0, float(np.abs(arr).max()))
        edges = np.roll(arr, -1, axis=0) - arr
        nxt = np.roll(edges, -1, axis=0)
        cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
        tol = _CONVEXITY_RTOL * scale * scale
        if np.all(cross < -tol):
            raise InvalidPolygon("vertices are clockwise; reverse them")
        if not np.all(cross > tol):
            raise InvalidPolygon(
                "vertices must describe a strictly convex CCW polygon "
                "(no repeated or collinear points)"
            )
        object.__setattr__(self, "vertices", _readonly(arr))

    def __eq__(self, other):
        if not isinstance(other, ConvexPolygon):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and bool(
            np.array_equal(self.vertices, other.vertices)
        )

    def __hash__(self):
        return hash(self.vertices.tobytes())

    def __len__(self):
        return self.vertices.shape[0]

    @cached_property
    def edge_normals(self):
        """Unit outward normals, one per edge."""
        d = np.roll(self.vertices, -1, axis=0) - self.vertices
        n = np.column_stack([d[:, 1], -d[:, 0]])
        return _readonly(n / np.linalg.norm(n, axis=1, keepdims=True))

    @cached_property
    def edge_offsets(self):
        """Offsets b_i with nu_i . p = b_i on edge i."""
        return _readonly(np.einsum("ij,ij->i", self.edge_normals, self.vertices))

    @cached_property
    def area(self):
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))

    @cached_property
    def centroid(self):
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        return _readonly((v + w).T @ c / (6.0 * self.area))

    @cached_property
    def bounding_box(self):
        """((xmin, xmax), (ymin, ymax))."""
        v = self.vertices
        return (
            (float(v[:, 0].min()), float(v[:, 0].max())),
            (float(v[:, 1].min()), float(v[:, 1].max())),
        )

    def edge_distances(self, points):
        """Signed distances b_i - nu_i . p to every edge line, >= 0 inside.

        Returns shape (k, m) for (k, 2) input, (m,) for a single point.
        """
        pts, single = check_points(points)
        d = self.edge_offsets[None, :] - pts @ self.edge_normals.T
        return d[0] if single else d

    def contains(self, points, tol=0.0):
        d = self.edge_distances(points)
        return np.min(d, axis=-1) >= -tol

    def transformed(self, amap):
        """Image under an affine map, vertex order fixed up for CCW."""
        verts = amap(self.vertices)
        if amap.det < 0:
            verts = verts[::-1]
        return ConvexPolygon(verts)

    def to_dict(self):
        return {"vertices": self.vertices.tolist()}


def polygon_from_dict(data):
    try:
        verts = data["vertices"]
    except (TypeError, KeyError):
        raise InvalidPolygon('polygon JSON must be an object with a "vertices" key')
    return ConvexPolygon(verts)


def load_polygon(path):
    with open(path) as fh:
        return polygon_from_dict(json.load(fh))


def save_polygon(path, polygon):
    with open(path, "w") as fh:
        json.dump(polygon.to_dict(), fh)
        fh.write("\n")


@dataclass(frozen=True)
class Ellipse:
    """Solid ellipse {p : (p - center)^T shape (p - center) <= 1}."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        s = np.asarray(self.shape, dtype=float)
        if c.shape != (2,) or s.shape != (2, 2):
            raise InputError("Ellipse needs a (2,) center and a (2, 2) shape matrix")
        s = 0.5 * (s + s.T)
        if np.linalg.eigvalsh(s)[0] <= 0:
            raise InputError("Ellipse shape matrix must be positive definite")
        object.__setattr__(self, "center", _readonly(c))
        object.__setattr__(self, "shape", _readonly(s))

    @cached_property
    def axes_matrix(self):
        """Symmetric M with ellipse = {center + M v : |v| <= 1}."""
        w, v = np.linalg.eigh(self.shape)
        return _readonly((v / np.sqrt(w)) @ v.T)

    @property
    def area(self):
        return np.pi / np.sqrt(np.linalg.det(self.shape))

    def quadratic(self, points):
        pts, single = check_points(points)
        d = pts - self.center
        q = np.einsum("ij,jk,ik->i", d, self.shape, d)
        return q[0] if single else q

    def contains(self, points, tol=0.0):
        return self.quadratic(points) <= 1.0 + tol

    def scaled(self, factor):
        """Scale semi-axes by factor about the center."""
        return Ellipse(self.center, self.shape / factor**2)


def minimum_enclosing_ellipse(points, tol=1e-9, max_iter=50000):
    """Minimum-volume ellipse enclosing the points.

    First-order ascent with away steps on the lifted weight vector,
    interleaved with Newton polishing of the optimality system on the
    current contact set, then an exact rescale so containment holds to the
    last bit. Interleaving matters: plain first-order iterates stall around
    the square root of the duality gap, well short of the 1e-7 sandwich
    check run downstream, while Newton is quadratic once the contact set
    settles.

    Raises DegenerateInput for affinely dependent input and NumericalFailure
    if the iteration budget runs out.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise DegenerateInput("need at least 3 planar points")
    if not np.isfinite(pts).all():
        raise InputError("points contain non-finite entries")
    spread = pts - pts.mean(axis=0)
    sv = np.linalg.svd(spread, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise DegenerateInput("points are (nearly) collinear")

    m = pts.shape[0]
    q = np.column_stack([pts, np.ones(m)])
    d = 3.0
    u = np.full(m, 1.0 / m)

    def lifted_values(u):
        X = q.T @ (q * u[:, None])
        try:
            return np.einsum("ij,ij->i", q @ np.linalg.inv(X), q)
        except np.linalg.LinAlgError:
            raise NumericalFailure("singular moment matrix in MVEE iteration")

    def within(g, u, target):
        support = u > 1e-12
        return (
            g.max() <= d * (1 + target)
            and g[support].min() >= d * (1 - target)
        )

    def ascend(u, target, budget):
        for it in range(budget):
            g = lifted_values(u)
            jmax = int(np.argmax(g))
            gmax = g[jmax]
            support = u > 1e-12
            jmin = int(np.flatnonzero(support)[np.argmin(g[support])])
            gmin = g[jmin]
            if gmax <= d * (1 + target) and gmin >= d * (1 - target):
                return u, it
            if gmax - d >= d - gmin:
                lam = (gmax - d) / (d * (gmax - 1.0))
                u = u * (1.0 - lam)
                u[jmax] += lam
            else:
                # away step, capped so the weight stays nonnegative
                if gmin > 1.0:
                    lam = min(
                        (d - gmin) / (d * (gmin - 1.0)), u[jmin] / (1.0 - u[jmin])
                    )
                else:
                    lam = u[jmin] / (1.0 - u[jmin])
                u = u * (1.0 + lam)
                u[jmin] = max(u[jmin] - lam, 0.0)
        return u, budget

    def polish(u):
        # newton on the contact set; support may shrink along the way
        sup = np.flatnonzero(u > max(1e-10, float(u.max()) * 1e-8))
        if sup.size < 3:
            return u
        us = u[sup].copy()
        qs = q[sup]
        for _ in range(40):
            V = qs.T @ (qs * us[:, None])
            try:
                G = qs @ np.linalg.solve(V, qs.T)
            except np.linalg.LinAlgError:
                break
            F = np.diag(G).copy() - d
            if np.abs(F).max() < 1e-13:
                break
            J = -(G * G)
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                break
            trial = us + step
            if trial.min() <= 0:
                keep = trial > 0
                if keep.sum() < 3:
                    break
                sup = sup[keep]
                us = us[keep] / us[keep].sum()
                qs = q[sup]
                continue
            us = trial / trial.sum()
        out = np.zeros(m)
        out[sup] = us
        return out

    budget = max_iter
    loose = max(tol, 1e-5)
    converged = False
    for _ in range(8):
        u, used = ascend(u, loose, budget)
        budget -= used
        candidate = polish(u)
        g = lifted_values(candidate)
        if within(g, candidate, tol):
            u = candidate
            converged = True
            break
        # keep the polish only if it did not wander off
        if g.max() <= d * (1 + loose):
            u = candidate
        if budget <= 0:
            break
        loose = max(tol, loose * 1e-2)
    if not converged:
        raise NumericalFailure("MVEE iteration budget exhausted")

    center = u @ pts
    diff = pts - center
    sigma = diff.T @ (diff * u[:, None])
    try:
        shape = 0.5 * np.linalg.inv(sigma)
    except np.linalg.LinAlgError:
        raise NumericalFailure("degenerate second-moment matrix in MVEE")
    vals = np.einsum("ij,jk,ik->i", diff, shape, diff)
    s = float(vals.max())
    if s <= 0:
        raise NumericalFailure("MVEE collapsed")
    return Ellipse(center, shape / s)


@dataclass(frozen=True)
class NormalizedBody:
    """A polygon mapped into John position: unit disk inside, 2x outside."""

    source: ConvexPolygon
    body: ConvexPolygon
    to_normalized: AffineMap2

    @cached_property
    def from_normalized(self):
        return self.to_normalized.inverse()

    def map(self, points):
        return self.to_normalized(points)

    def unmap(self, points):
        return self.from_normalized(points)


_SANDWICH_TOL = 1e-7


@lru_cache(maxsize=128)
def john_normalize(polygon):
    """Map a polygon into John position.

    The enclosing ellipse shrunk by half about its center is inscribed, so
    sending the half-ellipse to the unit disk yields B <= T(D) <= 2B. The
    sandwich is verified numerically; a single corrective rescale is applied
    if the inner inclusion is off at roundoff level, and NumericalFailure is
    raised if verification still fails after that.
    """
    if not isinstance(polygon, ConvexPolygon):
        polygon = ConvexPolygon(polygon)
    mvee = minimum_enclosing_ellipse(polygon.vertices)
    lin = 2.0 * np.linalg.inv(mvee.axes_matrix)
    lin = 0.5 * (lin + lin.T)
    tmap = AffineMap2(lin, -lin @ mvee.center)
    body = polygon.transformed(tmap)
    inr = float(body.edge_offsets.min())
    if inr < 1.0 - _SANDWICH_TOL:
        # inner inclusion missed at roundoff level; rescale once
        tmap = AffineMap2(tmap.linear / inr, tmap.shift / inr)
        body = polygon.transformed(tmap)
        inr = float(body.edge_offsets.min())
    outr = float(np.linalg.norm(body.vertices, axis=1).max())
    if inr < 1.0 - _SANDWICH_TOL or outr > 2.0 + _SANDWICH_TOL:
        raise NumericalFailure(
            f"John sandwich verification failed: inradius {inr}, circumradius {outr}"
        )
    return NormalizedBody(source=polygon, body=body, to_normalized=tmap)


@dataclass(frozen=True)
class RayExit:
    """Exit data for the ray from the origin through an interior point."""

    point: np.ndarray
    gap: float
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "point", _readonly(self.point))


def ray_boundary_gap(polygon, x):
    """Where the ray from the origin through x leaves the polygon.

    Returns RayExit(point, gap, scale) with point = scale * x on the
    boundary and gap = |point - x|. The origin must be strictly interior
    and x must lie inside the polygon.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    if polygon.edge_offsets.min() <= 0:
        raise InputError("ray_boundary_gap needs the origin strictly inside")
    scale_ref = max(1.0, float(np.abs(polygon.vertices).max()))
    nx = float(np.linalg.norm(x))
    if nx <= 1e-14 * scale_ref:
        raise AtOrigin("query point coincides with the ray origin")
    if not polygon.contains(x, tol=1e-12 * scale_ref):
        raise Outside("query point lies outside the polygon")
    dots = polygon.edge_normals @ x
    pos = dots > 0
    s = float(np.min(polygon.edge_offsets[pos] / dots[pos]))
    s = max(s, 1.0)
    return RayExit(point=s * x, gap=(s - 1.0) * nx, scale=s)


@dataclass(frozen=True)
class LocalChart:
    """Boundary chart at an interior point of a John-position polygon.

    The affine map sends the polygon to a set contained in the closed upper
    half plane and in the disk of radius 16, with determinant 3, and sends
    the query point to (0, delta). Inside the window [-1, 1] x [0, 1/3] the
    image is bounded below by the graph of the stored piecewise-linear
    profile: breakpoints (xs, ys) with xs increasing, ys >= 0, profile 0 at
    xs[index0] = 0, and the first slope right of 0 equal to 0. The profile
    is clipped to the window, with exact crossing breakpoints inserted where
    it leaves through the top.
    """

    map: AffineMap2
    delta: float
    xs: np.ndarray
    ys: np.ndarray
    index0: int

    def __post_init__(self):
        object.__setattr__(self, "xs", _readonly(self.xs))
        object.__setattr__(self, "ys", _readonly(self.ys))

    @cached_property
    def slopes(self):
        return _readonly(np.diff(self.ys) / np.diff(self.xs))

    def profile(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.xs[0] - 1e-12) or np.any(t > self.xs[-1] + 1e-12):
            raise InputError("profile queried outside the chart window")
        return np.interp(t, self.xs, self.ys)

    def slope_left(self, t):
        """Left derivative of the profile at t."""
        i = int(np.searchsorted(self.xs, t, side="left"))
        i = min(max(i, 1), len(self.xs) - 1)
        return float(self.slopes[i - 1])

    def slope_right(self, t):
        i = int(np.searchsorted(self.xs, t, side="right"))
        i = min(max(i, 1), len(self.xs) - 1)
        return float(self.slopes[i - 1])

    def mirrored(self):
        """The chart reflected through the vertical axis."""
        flip = AffineMap2(np.array([[-1.0, 0.0], [0.0, 1.0]]), np.zeros(2))
        n = len(self.xs)
        return LocalChart(
            map=flip.after(self.map),
            delta=self.delta,
            xs=-self.xs[::-1],
            ys=self.ys[::-1].copy(),
            index0=n - 1 - self.index0,
        )


def _lower_chain(verts):
    """Indices of the lower boundary chain, left to right, CCW traversal.

    Ties break toward the bottom so vertical edges at either end belong to
    the side chains, never to the lower chain.
    """
    m = len(verts)
    start = int(np.lexsort((verts[:, 1], verts[:, 0]))[0])
    end = int(np.lexsort((verts[:, 1], -verts[:, 0]))[0])
    idx = [start]
    i = start
    while i != end:
        i = (i + 1) % m
        idx.append(i)
        if len(idx) > m:
            raise ChartFailure("lower chain extraction did not terminate")
    return idx


def local_chart(polygon, x, gap_floor=1e-13):
    """Build the boundary chart for a John-position polygon at x.

    Rotates the ray exit point to the origin with the inward direction up,
    shears so the profile's right slope at 0 vanishes and the x axis is
    stretched 3x, then clips the profile to [-1, 1] x [0, 1/3].
    """
    if not isinstance(polygon, ConvexPolygon):
        raise InputError("local_chart needs a ConvexPolygon")
    if (
        polygon.edge_offsets.min() < 1.0 - 1e-6
        or np.linalg.norm(polygon.vertices, axis=1).max() > 2.0 + 1e-6
    ):
        raise InputError("polygon is not in John position; use john_normalize first")
    x = np.asarray(x, dtype=float).reshape(2)
    exit_ = ray_boundary_gap(polygon, x)
    delta = exit_.gap
    if delta < gap_floor:
        raise TooCloseToBoundary(f"ray gap {delta:.3e} below floor {gap_floor:.0e}")
    z = exit_.point
    u = -x / np.linalg.norm(x)
    rot = np.array([[u[1], -u[0]], [u[0], u[1]]])
    rv = (polygon.vertices - z) @ rot.T

    chain = _lower_chain(rv)
    cx = rv[chain, 0].copy()
    cy = rv[chain, 1].copy()
    if not np.all(np.diff(cx) > 0):
        raise ChartFailure("lower chain is not strictly increasing in x")

    # locate the exit point on the chain and snap it to (0, 0) exactly
    j = int(np.argmin(np.hypot(cx, cy)))
    if np.hypot(cx[j], cy[j]) <= 1e-12:
        cx[j] = 0.0
        cy[j] = 0.0
        i0 = j
    else:
        k = int(np.searchsorted(cx, 0.0))
        if k <= 0 or k >= len(cx):
            raise ChartFailure("exit point fell outside the lower chain")
        cx = np.insert(cx, k, 0.0)
        cy = np.insert(cy, k, 0.0)
        i0 = k
    if i0 == 0 or i0 == len(cx) - 1:
        raise ChartFailure("exit point landed on the end of the lower chain")

    if cx[i0 + 1] <= 0:
        raise ChartFailure("degenerate chain to the right of the exit point")
    slope0 = (cy[i0 + 1] - cy[i0]) / (cx[i0 + 1] - cx[i0])

    xs = 3.0 * cx
    ys = cy - slope0 * cx
    ys[i0] = 0.0
    ys[i0 + 1] = 0.0  # first edge right of 0 is flat by construction

    # clip in x to [-1, 1] with interpolated crossings
    def _cut(xs, ys, lo, hi):
        keep = (xs > lo) & (xs < hi)
        outx, outy = [], []
        if xs[0] <= lo:
            i = int(np.searchsorted(xs, lo, side="right"))
            t = (lo - xs[i - 1]) / (xs[i] - xs[i - 1])
            outx.append(lo)
            outy.append(ys[i - 1] + t * (ys[i] - ys[i - 1]))
        outx.extend(xs[keep])
        outy.extend(ys[keep])
        if xs[-1] >= hi:
            i = int(np.searchsorted(xs, hi, side="left"))
            t = (hi - xs[i - 1]) / (xs[i] - xs[i - 1])
            outx.append(hi)
            outy.append(ys[i - 1] + t * (ys[i] - ys[i - 1]))
        return np.asarray(outx), np.asarray(outy)

    if xs[0] > -1.0 or xs[-1] < 1.0:
        raise ChartFailure("profile does not span the chart window")
    i0 -= int(np.searchsorted(xs, -1.0, side="right")) - 1
    xs, ys = _cut(xs, ys, -1.0, 1.0)

    ys[np.abs(ys) < 1e-15] = 0.0
    if ys.min() < -1e-9:
        raise ChartFailure("profile dipped below zero")
    ys = np.maximum(ys, 0.0)

    # clip through the top: keep the contiguous piece around 0 with y <= 1/3
    top = 1.0 / 3.0
    if ys[i0] != 0.0:
        raise ChartFailure("profile lost its origin breakpoint")
    right = i0
    while right + 1 < len(xs) and ys[right + 1] <= top:
        right += 1
    left = i0
    while left - 1 >= 0 and ys[left - 1] <= top:
        left -= 1
    newx = [xs[left:right + 1]]
    newy = [ys[left:right + 1]]
    if right + 1 < len(xs):
        t = (top - ys[right]) / (ys[right + 1] - ys[right])
        newx.append([xs[right] + t * (xs[right + 1] - xs[right])])
        newy.append([top])
    if left - 1 >= 0:
        t = (top - ys[left]) / (ys[left - 1] - ys[left])
        newx.insert(0, [xs[left] + t * (xs[left - 1] - xs[left])])
        newy.insert(0, [top])
        i0_shift = 1
    else:
        i0_shift = 0
    xs = np.concatenate(newx)
    ys = np.concatenate(newy)
    i0 = i0 - left + i0_shift

    shear = np.array([[3.0, 0.0], [-slope0, 1.0]])
    lin = shear @ rot
    chart_map = AffineMap2(lin, -lin @ z)

    chart = LocalChart(map=chart_map, delta=delta, xs=xs, ys=ys, index0=i0)
    _check_chart(chart, polygon, x)
    return chart


def _check_chart(chart, polygon, x):
    qx = chart.map(x)
    if abs(qx[0]) > 1e-9 or abs(qx[1] - chart.delta) > 1e-9:
        raise ChartFailure(f"chart sends x to {qx}, expected (0, {chart.delta})")
    if abs(abs(chart.map.det) - 3.0) > 1e-9:
        raise ChartFailure("chart determinant is not 3")
    img = chart.map(polygon.vertices)
    if np.linalg.norm(img, axis=1).max() > 16.0 + 1e-9:
        raise ChartFailure("chart image escapes the radius-16 disk")
    if img[:, 1].min() < -1e-9:
        raise ChartFailure("chart image dips below the x axis")
    xs, ys = chart.xs, chart.ys
    if not np.all(np.diff(xs) > 0):
        raise ChartFailure("profile breakpoints not strictly increasing")
    if ys.min() < 0 or ys.max() > 1.0 / 3.0 + 1e-12:
        raise ChartFailure("profile leaves the window after clipping")
    slopes = chart.slopes
    if np.any(np.diff(slopes) < -1e-7):
        raise ChartFailure("profile is not convex")
    if chart.index0 + 1 < len(xs) and abs(slopes[chart.index0]) > 1e-12:
        raise ChartFailure("right slope at the origin breakpoint is not zero")


def tau_retract(polygon, points, n):
    """Pull points radially toward the origin by the degree-n safety factor.

    Each point x goes to min(1, rho * s(x)) * x where s(x) is the ray exit
    scale and rho = 1 - 1/(16 n^2). Points already deeper than the retracted
    boundary stay put; the origin is fixed.
    """
    n = check_positive_int(n, "n")
    pts, single = check_points(points)
    if polygon.edge_offsets.min() <= 0:
        raise InputError("tau_retract needs the origin strictly inside")
    rho = 1.0 - 1.0 / (16.0 * n * n)
    dots = pts @ polygon.edge_normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(dots > 0, polygon.edge_offsets[None, :] / dots, np.inf)
    s = ratios.min(axis=1)
    t = np.minimum(1.0, rho * s)
    out = t[:, None] * pts
    return out[0] if single else out


def _prune_collinear(verts, rtol=1e-9):
    """Drop vertices whose turn angle is numerically zero."""
    verts = np.asarray(verts, dtype=float)
    scale = max(1.0, float(np.abs(verts).max()))
    keep = np.ones(len(verts), dtype=bool)
    changed = True
    while changed and keep.sum() >= 3:
        changed = False
        idx = np.flatnonzero(keep)
        v = verts[idx]
        e = np.roll(v, -1, axis=0) - v
        p = np.roll(e, 1, axis=0)
        cross = p[:, 0] * e[:, 1] - p[:, 1] * e[:, 0]
        bad = cross <= rtol * scale * scale
        if bad.any():
            keep[idx[np.argmin(cross)]] = False
            changed = True
    return verts[keep]


def regular_polygon(k, radius=1.0, center=(0.0, 0.0), phase=0.0):
    """Regular k-gon, CCW, first vertex at angle phase."""
    k = check_positive_int(k, "k", minimum=3)
    ang = phase + 2.0 * np.pi * np.arange(k) / k
    c = np.asarray(center, dtype=float)
    return ConvexPolygon(c + radius * np.column_stack([np.cos(ang), np.sin(ang)]))


def ellipse_polygon(a, b, k, phase=0.0):
    """k-gon inscribed in the axis-aligned ellipse with semi-axes a, b."""
    k = check_positive_int(k, "k", minimum=3)
    ang = phase + 2.0 * np.pi * np.arange(k) / k
    return ConvexPolygon(np.column_stack([a * np.cos(ang), b * np.sin(ang)]))


def superellipse_polygon(exponent, k, a=1.0, b=1.0):
    """k-gon sampled from |x/a|^p + |y/b|^p = 1, p >= 1.

    For p = 1 the curve is a diamond and most samples are collinear; those
    are pruned, so the vertex count can come out below k.
    """
    if exponent < 1.0:
        raise InputError("superellipse exponent must be >= 1 for convexity")
    k = check_positive_int(k, "k", minimum=3)
    ang = 2.0 * np.pi * (np.arange(k) + 0.5) / k
    c, s = np.cos(ang), np.sin(ang)
    p = 2.0 / exponent
    verts = np.column_stack(
        [a * np.sign(c) * np.abs(c) ** p, b * np.sign(s) * np.abs(s) ** p]
    )
    return ConvexPolygon(_prune_collinear(verts))


def random_convex_polygon(k, seed=None, scale=1.0):
    """Random strictly convex k-gon (Valtr construction), CCW, centered.

    Draws two sorted coordinate pools, splits each into an up chain and a
    down chain, pairs the resulting step vectors, sorts them by angle and
    walks them. Retries on the measure-zero angle collisions.
    """
    k = check_positive_int(k, "k", minimum=3)
    rng = check_rng(seed)
    for _ in range(64):
        dx = _valtr_steps(np.sort(rng.random(k)), rng)
        dy = _valtr_steps(np.sort(rng.random(k)), rng)
        rng.shuffle(dy)
        order = np.argsort(np.arctan2(dy, dx))
        verts = np.column_stack([np.cumsum(dx[order]), np.cumsum(dy[order])])
        verts -= verts.mean(axis=0)
        m = np.abs(verts).max()
        if m <= 0:
            continue
        verts *= scale / m
        try:
            return ConvexPolygon(verts)
        except InvalidPolygon:
            continue
    raise NumericalFailure("failed to draw a strictly convex polygon")


def _valtr_steps(vals, rng):
    inner = vals[1:-1]
    mask = rng.random(len(inner)) < 0.5
    up = np.concatenate([[vals[0]], inner[mask], [vals[-1]]])
    down = np.concatenate([[vals[0]], inner[~mask], [vals[-1]]])
    return np.concatenate([np.diff(up), -np.diff(down)])
