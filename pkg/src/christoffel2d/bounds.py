"""Constructive two-sided geometric bounds on a John-position polygon.

The lower functional is realized by an inscribed ellipse, the upper one by
a circumscribed parallelogram. For an ellipse {c + M v : |v| <= 1} inside
the body with the query point x inside the ellipse,

    L-value = sqrt(1 - |M^-1 (x - c)|) * |det M|,

and for a parallelogram given as the image of the unit square under an
affine map W containing the body, with u = W^-1(x) and u' = min(u, 1 - u)
componentwise,

    U-value = sqrt(u'_1 * u'_2) * |det W|.

Certificates carry the witness map in the body frame and re-derive their
value and containment in validate(), so a certificate that passes is a
machine-checkable bound regardless of how it was constructed.

Construction has three cases. Case 1 (all edge distances >= 1/8): a fixed
disk and square at x. Otherwise a boundary chart is built; case 2 fires
when the ray gap dominates the profile endpoints and uses fixed chart-frame
witnesses, case 3 fits the tightest parabola above the profile and adapts
the witnesses to its curvature.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTangency, NotCase3, NumericalFailure
from .geometry import AffineMap2, ConvexPolygon, LocalChart, local_chart

CASE1_MARGIN = 0.125
_DISPATCH_SLACK = 1e-12
_BETA_FLOOR = 1e-14


@dataclass(frozen=True)
class ParabolaFit:
    """Tightest parabola k t^2 + delta/2 above a chart profile.

    k is the supremum of (f(t) - delta/2) / t^2 over the clipped profile,
    xi the smallest positive abscissa attaining it (after mirroring the
    profile when only negative abscissae do; `reflected` records that),
    alpha the left slope of the working profile at xi, and
    beta = xi * alpha - f(xi), the intercept of the support line at xi.
    """

    k: float
    xi: float
    alpha: float
    beta: float
    reflected: bool


def _profile_sup_candidates(xs, ys, slopes, half):
    """All local maximizer candidates of (f(t) - half) / t^2.

    Per edge the quotient is monotone or has one interior critical point;
    together with the breakpoints this is exhaustive, so the max over the
    returned list is the exact supremum.
    """
    cands = []
    nz = xs != 0.0
    for t, y in zip(xs[nz], ys[nz]):
        cands.append(((y - half) / (t * t), t))
    for i in range(len(slopes)):
        m = slopes[i]
        if m == 0.0:
            continue
        cline = ys[i] - m * xs[i]
        if cline >= half:
            continue
        t = 2.0 * (half - cline) / m
        if xs[i] < t < xs[i + 1]:
            cands.append((m * m / (4.0 * (half - cline)), t))
    return cands


def fit_parabola(chart):
    """Fit the case-3 parabola to a boundary chart.

    Raises NotCase3 if the chart dispatches to case 2 and DegenerateTangency
    if the profile never rises above delta/2 (no positive curvature fits).
    """
    if not isinstance(chart, LocalChart):
        raise NotCase3("fit_parabola needs a LocalChart")
    half = 0.5 * chart.delta
    if half >= chart.ys[0] + chart.ys[-1]:
        raise NotCase3("chart dispatches to case 2; gap dominates the profile")
    cands = _profile_sup_candidates(chart.xs, chart.ys, chart.slopes, half)
    k = max(c[0] for c in cands)
    if k <= 0.0:
        raise DegenerateTangency("profile stays at or below delta/2")
    thr = k - 1e-10 * max(k, 1.0)
    arg = [t for kk, t in cands if kk >= thr]
    pos = [t for t in arg if t > 0]
    if pos:
        work = chart
        reflected = False
    else:
        work = chart.mirrored()
        reflected = True
        cands = _profile_sup_candidates(work.xs, work.ys, work.slopes, half)
        k = max(c[0] for c in cands)
        thr = k - 1e-10 * max(k, 1.0)
        pos = [t for kk, t in cands if kk >= thr and t > 0]
        if not pos:
            raise NumericalFailure("parabola fit lost its maximizer under mirroring")
    xi = float(min(pos))
    alpha = work.slope_left(xi)
    fxi = float(work.profile(xi))
    beta = max(xi * alpha - fxi, _BETA_FLOOR)
    fit = ParabolaFit(k=float(k), xi=xi, alpha=float(alpha), beta=float(beta),
                      reflected=reflected)
    _check_fit(fit, chart.delta)
    return fit


def _check_fit(fit, delta):
    if not (0.0 < fit.xi <= 1.0 + 1e-12):
        raise NumericalFailure(f"parabola abscissa {fit.xi} outside (0, 1]")
    if not (0.0 < fit.alpha <= 2.0 + 1e-9):
        raise NumericalFailure(f"support slope {fit.alpha} outside (0, 2]")
    if not (0.0 < fit.beta <= 2.0 + 1e-9):
        raise NumericalFailure(f"support intercept {fit.beta} outside (0, 2]")
    lhs = np.sqrt(delta + fit.beta) / fit.alpha
    if fit.k > 0 and lhs > (1.0 + 1e-9) / np.sqrt(fit.k) + 1e-12:
        raise NumericalFailure("support line inconsistent with fitted curvature")


@dataclass(frozen=True)
class BoundCertificate:
    """A validated one-sided bound with its geometric witness.

    kind is "lower" or "upper", case in {1, 2, 3} names the construction,
    tag is 2 when an upper certificate fell back to the window-generic
    parallelogram (case 3 with flat or sub-unit curvature), 1 for the
    curvature-adapted parallelogram, else 0. The witness is an affine map
    in the body frame: unit disk -> inscribed ellipse for lower bounds,
    unit square -> circumscribed parallelogram for upper ones.
    """

    kind: str
    case: int
    tag: int
    value: float
    witness: AffineMap2
    point: np.ndarray
    body: ConvexPolygon

    def __post_init__(self):
        pt = np.asarray(self.point, dtype=float).reshape(2).copy()
        pt.flags.writeable = False
        object.__setattr__(self, "point", pt)

    def validate(self, tol=1e-12, value_rtol=1e-10):
        """Re-derive containment and value; raise NumericalFailure on any gap."""
        w = self.witness
        if self.kind == "lower":
            c = w.shift
            lin = w.linear
            margins = (
                self.body.edge_offsets
                - self.body.edge_normals @ c
                - np.linalg.norm(self.body.edge_normals @ lin, axis=1)
            )
            if margins.min() < -tol:
                raise NumericalFailure(
                    f"witness ellipse leaves the body by {-margins.min():.3e}"
                )
            r = float(np.linalg.norm(np.linalg.solve(lin, self.point - c)))
            if r > 1.0 + 1e-9:
                raise NumericalFailure("query point outside the witness ellipse")
            ref = np.sqrt(max(1.0 - r, 0.0)) * abs(w.det)
        elif self.kind == "upper":
            inv = w.inverse()
            uv = inv(self.body.vertices)
            if uv.min() < -tol or uv.max() > 1.0 + tol:
                raise NumericalFailure("body escapes the witness parallelogram")
            u = inv(self.point)
            up = np.minimum(u, 1.0 - u)
            if up.min() < -1e-12:
                raise NumericalFailure("query point outside the witness parallelogram")
            ref = np.sqrt(max(up[0], 0.0) * max(up[1], 0.0)) * abs(w.det)
        else:
            raise NumericalFailure(f"unknown certificate kind {self.kind!r}")
        if not np.isclose(self.value, ref, rtol=value_rtol, atol=1e-300):
            raise NumericalFailure(
                f"certificate value {self.value} != recomputed {ref}"
            )
        return self

    def to_dict(self):
        return {
            "kind": self.kind,
            "case": self.case,
            "tag": self.tag,
            "value": self.value,
            "witness": {
                "linear": self.witness.linear.tolist(),
                "shift": self.witness.shift.tolist(),
            },
        }


def _ellipse_value(witness, x):
    r = float(np.linalg.norm(np.linalg.solve(witness.linear, x - witness.shift)))
    return float(np.sqrt(max(1.0 - r, 0.0)) * abs(witness.det))


def _parallelogram_value(witness, x):
    u = witness.inverse()(x)
    up = np.minimum(u, 1.0 - u)
    return float(np.sqrt(max(up[0], 0.0) * max(up[1], 0.0)) * abs(witness.det))


def _needs_chart(body, x):
    return float(body.edge_distances(x).min()) < CASE1_MARGIN - _DISPATCH_SLACK


def _is_case2(chart):
    return 0.5 * chart.delta >= chart.ys[0] + chart.ys[-1]


_GENERAL_UPPER = AffineMap2(np.array([[32.0, 0.0], [0.0, 16.0]]), np.array([-16.0, 0.0]))


def lower_certificate(body, x, chart=None):
    """Inscribed-ellipse certificate at an interior point of a John body."""
    x = np.asarray(x, dtype=float).reshape(2)
    if not _needs_chart(body, x):
        witness = AffineMap2(np.eye(2) / 8.0, x)
        cert = BoundCertificate(
            kind="lower", case=1, tag=0, value=_ellipse_value(witness, x),
            witness=witness, point=x, body=body,
        )
        return cert.validate()
    if chart is None:
        chart = local_chart(body, x)
    delta = chart.delta
    if _is_case2(chart):
        case = 2
        ell = AffineMap2(
            np.diag([1.0, 1.0 / 24.0]),
            np.array([0.0, 5.0 * delta / 6.0 + 1.0 / 24.0]),
        )
    else:
        case = 3
        try:
            kprime = max(fit_parabola(chart).k, 1.0)
        except DegenerateTangency:
            # profile hugs the half-gap line; the unit-curvature ellipse
            # still clears it
            kprime = 1.0
        ell = AffineMap2(
            np.diag([1.0 / np.sqrt(24.0 * kprime), 1.0 / 12.0]),
            np.array([0.0, 1.0 / 12.0 + 2.0 * delta / 3.0]),
        )
    witness = chart.map.inverse().after(ell)
    cert = BoundCertificate(
        kind="lower", case=case, tag=0, value=_ellipse_value(witness, x),
        witness=witness, point=x, body=body,
    )
    return cert.validate()


def upper_certificate(body, x, chart=None):
    """Circumscribed-parallelogram certificate at an interior point."""
    x = np.asarray(x, dtype=float).reshape(2)
    if not _needs_chart(body, x):
        witness = AffineMap2(8.0 * np.eye(2), x - 4.0)
        cert = BoundCertificate(
            kind="upper", case=1, tag=0, value=_parallelogram_value(witness, x),
            witness=witness, point=x, body=body,
        )
        return cert.validate()
    if chart is None:
        chart = local_chart(body, x)
    if _is_case2(chart):
        case, tag = 2, 0
        work = chart
        para = _GENERAL_UPPER
    else:
        case = 3
        try:
            fit = fit_parabola(chart)
        except DegenerateTangency:
            fit = None
        if fit is None or fit.k < 1.0:
            tag = 2
            work = chart
            para = _GENERAL_UPPER
        else:
            tag = 1
            work = chart.mirrored() if fit.reflected else chart
            a, b = fit.alpha, fit.beta
            para = AffineMap2(
                np.array([[-(b + 16.0 * a + 16.0) / a, 16.0 / a], [0.0, 16.0]]),
                np.array([b / a, 0.0]),
            )
    witness = work.map.inverse().after(para)
    cert = BoundCertificate(
        kind="upper", case=case, tag=tag, value=_parallelogram_value(witness, x),
        witness=witness, point=x, body=body,
    )
    return cert.validate()
